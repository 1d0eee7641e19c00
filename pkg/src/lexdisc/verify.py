"""Mechanical checkers for the structural invariants of merge collections.

Each checker takes collections or traces as plain data (so externally
supplied serialized traces can be audited) and returns a report carrying
pass/fail/vacuous status plus a counterexample witness on failure.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

from .baskets import (
    Basket,
    BasketCollection,
    CycleKind,
    basket_length,
    classify,
    compare_lengths,
    full_multiset,
    modulus_for,
    singleton_slots,
)
from .lexmerge import Trace, run, to_strategy
from .qnum import Ordering, mul_q_power, q_power
from .strategy import Strategy, StrategyError

__all__ = [
    "CheckStatus",
    "CheckReport",
    "check_p1",
    "check_p2",
    "check_p3",
    "check_wrapped_structure",
    "check_lex_length",
    "check_conservation",
    "check_monotonicity",
    "check_ratio_lemma",
    "verify_trace",
    "verify_all",
]


class CheckStatus(Enum):
    PASS = "pass"
    VACUOUS = "vacuous"
    FAIL = "fail"


@dataclass(frozen=True)
class CheckReport:
    check_name: str
    n: int
    stage: int | str | None
    status: CheckStatus
    witness: str = ""
    data: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status is CheckStatus.FAIL and not self.witness:
            raise ValueError("failed reports must carry a witness")

    @property
    def passed(self) -> bool:
        return self.status is not CheckStatus.FAIL


def _report(name, c_or_n, stage, status, witness="", data=None):
    n = c_or_n if isinstance(c_or_n, int) else c_or_n.n
    return CheckReport(
        check_name=name,
        n=n,
        stage=stage,
        status=status,
        witness=witness,
        data=data or {},
    )


# -- slot geometry -----------------------------------------------------------
#
# The n singletons of stage 0 occupy n "slots" on a circle: residue x owns
# slots 2x and 2x+1, except that for odd n the top residue owns only the
# final slot.  Every cyclically ordered basket is a contiguous arc of
# slots, which reduces chain checking to arc adjacency.


def _slot_residue(n: int, slot: int) -> int:
    return min(slot // 2, modulus_for(n) - 1)


def _counts(baskets) -> Counter:
    counts = Counter()
    for b in baskets:
        counts.update(b.elements)
    return counts


def _capacity(n: int, x: int) -> int:
    if x == modulus_for(n) - 1 and n % 2 == 1:
        return 1
    return 2


def _arc_candidates(n: int, counts: Counter) -> list[tuple[int, int]]:
    """All (start_slot, length) slot arcs whose residue profile matches the
    multiset.  Full-circle profiles yield the canonical start 0."""
    total = sum(counts.values())
    if total == 0:
        return []
    if total == n:
        if all(counts[x] == _capacity(n, x) for x in range(modulus_for(n))):
            return [(0, n)]
        return []
    m = modulus_for(n)
    starts = set()
    for a in counts:
        if counts[(a - 1) % m] < _capacity(n, (a - 1) % m):
            base = 2 * a if not (a == m - 1 and n % 2 == 1) else n - 1
            starts.add(base)
            if _capacity(n, a) == 2:
                starts.add(base + 1)
    out = []
    for p in starts:
        arc = Counter(_slot_residue(n, (p + k) % n) for k in range(total))
        if arc == counts:
            out.append((p, total))
    return out


@lru_cache(maxsize=1 << 16)
def _basket_is_arc(n: int, b: Basket) -> bool:
    return bool(_arc_candidates(n, Counter(b.elements)))


def _is_chain(n: int, baskets: list[Basket]) -> tuple[bool, str]:
    """A subcollection forms a chain iff each basket is a contiguous arc and
    their union is a single contiguous arc without multiplicity overflow."""
    for b in baskets:
        if not _basket_is_arc(n, b):
            return False, f"basket {b} is not a contiguous arc"
    if len(baskets) <= 1:
        return True, ""
    counts = _counts(baskets)
    for x, cnt in counts.items():
        if cnt > _capacity(n, x):
            return False, f"element {x} exceeds multiplicity {_capacity(n, x)}"
    if not _arc_candidates(n, counts):
        return False, "union of the subcollection is not contiguous"
    return True, ""


def _chains_adjacent(
    n: int, first: list[Basket], second: list[Basket]
) -> tuple[bool, str]:
    """The concatenation (first chain, then second chain) is itself a chain."""
    if not first or not second:
        return True, ""
    c1, c2 = _counts(first), _counts(second)
    combined = c1 + c2
    for x, cnt in combined.items():
        if cnt > _capacity(n, x):
            return False, f"element {x} exceeds multiplicity in combined chain"
    if sum(combined.values()) == n:
        ok = bool(_arc_candidates(n, c1)) and bool(_arc_candidates(n, c2))
        return (ok, "" if ok else "combined full circle but a part is broken")
    arcs1 = _arc_candidates(n, c1)
    arcs2 = _arc_candidates(n, c2)
    for p1, len1 in arcs1:
        for p2, _ in arcs2:
            if p2 == (p1 + len1) % n:
                return True, ""
    return False, "second chain does not start where the first ends"


# -- structural checkers -----------------------------------------------------


def check_p1(c: BasketCollection) -> CheckReport:
    """Every basket is a singleton or a cyclic interval."""
    for b in c.baskets:
        cl = classify(c.n, b)
        if cl.kind is CycleKind.NOT_CYCLIC:
            return _report(
                "p1", c, c.stage, CheckStatus.FAIL, f"basket {b} is not cyclically ordered"
            )
    return _report("p1", c, c.stage, CheckStatus.PASS)


def _size_symmetry(c: BasketCollection):
    """Infer (r, w) for the size structure, or an error message."""
    sizes = [len(b) for b in c.baskets]
    powers = sorted({s for s in sizes if s & (s - 1) == 0})
    odd = [b for b in c.baskets if len(b) & (len(b) - 1) != 0]
    if len(odd) > 1:
        return None, None, None, f"{len(odd)} baskets of non-power-of-two size"
    if odd:
        w = len(odd[0])
        r = w.bit_length() - 1
        if not odd[0].is_wrapped():
            return None, None, None, f"exceptional basket {odd[0]} is not wrapped"
        if any(p not in (2**r, 2 ** (r + 1)) for p in powers):
            return (
                None,
                None,
                None,
                f"sizes {sorted(set(sizes))} do not fit {{2^{r}, 2^{r + 1}}} with w={w}",
            )
        return r, w, odd[0], None
    if len(powers) == 1:
        return powers[0].bit_length() - 1, None, None, None
    if len(powers) == 2 and powers[1] == 2 * powers[0]:
        return powers[0].bit_length() - 1, None, None, None
    return None, None, None, f"power sizes {powers} are not two consecutive powers"


def check_p2(c: BasketCollection) -> CheckReport:
    """Sizes fit {2^r, 2^(r+1)} with at most one wrapped exception between."""
    r, w, _, err = _size_symmetry(c)
    if err is not None:
        return _report("p2", c, c.stage, CheckStatus.FAIL, err)
    return _report("p2", c, c.stage, CheckStatus.PASS, data={"r": r, "w": w})


def check_p3(c: BasketCollection) -> CheckReport:
    """The two power-of-two size classes form chains, and so does their
    concatenation (larger class first)."""
    r, _, _, err = _size_symmetry(c)
    if err is not None:
        return _report("p3", c, c.stage, CheckStatus.FAIL, f"size structure broken: {err}")
    small = [b for b in c.baskets if len(b) == 2**r]
    large = [b for b in c.baskets if len(b) == 2 ** (r + 1)]
    for name, cls in (("size-2^r", small), ("size-2^(r+1)", large)):
        ok, why = _is_chain(c.n, cls)
        if not ok:
            return _report(
                "p3", c, c.stage, CheckStatus.FAIL, f"{name} class is not a chain: {why}"
            )
    ok, why = _chains_adjacent(c.n, large, small)
    if not ok:
        return _report("p3", c, c.stage, CheckStatus.FAIL, f"combined chain broken: {why}")
    if not small and not large:
        return _report("p3", c, c.stage, CheckStatus.VACUOUS)
    return _report("p3", c, c.stage, CheckStatus.PASS)


def check_wrapped_structure(c: BasketCollection) -> CheckReport:
    """The exceptional wrapped basket is the union of the final 2^r - s and
    first 2s stage-0 singletons, where n = a*2^r + s; in particular its
    size is 2^r + s."""
    exceptional = [b for b in c.baskets if len(b) & (len(b) - 1) != 0]
    if not exceptional:
        return _report("wrapped_structure", c, c.stage, CheckStatus.VACUOUS)
    if len(exceptional) > 1:
        return _report(
            "wrapped_structure",
            c,
            c.stage,
            CheckStatus.FAIL,
            "more than one exceptional basket",
        )
    wb = exceptional[0]
    if not wb.is_wrapped():
        return _report(
            "wrapped_structure", c, c.stage, CheckStatus.FAIL, f"{wb} is not wrapped"
        )
    w = len(wb)
    r = w.bit_length() - 1
    s = c.n % (2**r)
    if s == 0:
        return _report(
            "wrapped_structure",
            c,
            c.stage,
            CheckStatus.FAIL,
            f"n={c.n} has no representation a*2^{r}+s with 1<=s<2^{r}",
        )
    if w != 2**r + s:
        return _report(
            "wrapped_structure",
            c,
            c.stage,
            CheckStatus.FAIL,
            f"size {w} != 2^{r} + {s}",
        )
    slots = singleton_slots(c.n)
    expected = Counter()
    for b in slots[c.n - (2**r - s):] + slots[: 2 * s]:
        expected.update(b.elements)
    if expected != Counter(wb.elements):
        return _report(
            "wrapped_structure",
            c,
            c.stage,
            CheckStatus.FAIL,
            f"{wb} is not the union of the final {2**r - s} and first {2 * s} singletons",
        )
    return _report(
        "wrapped_structure", c, c.stage, CheckStatus.PASS, data={"r": r, "s": s}
    )


def check_lex_length(c: BasketCollection) -> CheckReport:
    """Listing order agrees with exact length order."""
    if len(c.baskets) <= 1:
        return _report("lex_length", c, c.stage, CheckStatus.VACUOUS)
    for b1, b2 in zip(c.baskets, c.baskets[1:]):
        if compare_lengths(b1, b2) == Ordering.GREATER:
            return _report(
                "lex_length",
                c,
                c.stage,
                CheckStatus.FAIL,
                f"l({b1}) > l({b2}) but {b1} precedes {b2}",
            )
    return _report("lex_length", c, c.stage, CheckStatus.PASS)


def check_conservation(c: BasketCollection) -> CheckReport:
    """The multiset union of the baskets equals the stage-0 multiset and the
    basket count matches the stage."""
    if len(c.baskets) != c.n - c.stage:
        return _report(
            "conservation",
            c,
            c.stage,
            CheckStatus.FAIL,
            f"{len(c.baskets)} baskets at stage {c.stage} of order {c.n}",
        )
    if not c.sorted_ok():
        return _report(
            "conservation", c, c.stage, CheckStatus.FAIL, "baskets out of order"
        )
    got = Counter()
    for b in c.baskets:
        got.update(b.elements)
    want = Counter(full_multiset(c.n))
    if got != want:
        missing = want - got
        extra = got - want
        return _report(
            "conservation",
            c,
            c.stage,
            CheckStatus.FAIL,
            f"multiset drift: missing {dict(missing)}, extra {dict(extra)}",
        )
    return _report("conservation", c, c.stage, CheckStatus.PASS)


def check_monotonicity(t: Trace) -> CheckReport:
    """Stage discrepancies are weakly decreasing, checked by exact
    cross-multiplication (no tolerances)."""
    if t.n < 2:
        return _report("monotonicity", t.n, "all", CheckStatus.VACUOUS)
    for i in range(t.n - 1):
        cur, nxt = t.disc_witnesses[i], t.disc_witnesses[i + 1]
        lhs = basket_length(nxt.max_basket) * basket_length(cur.min_basket)
        rhs = basket_length(cur.max_basket) * basket_length(nxt.min_basket)
        if lhs.compare(rhs) == Ordering.GREATER:
            return _report(
                "monotonicity",
                t.n,
                i,
                CheckStatus.FAIL,
                f"disc increased from stage {i} to {i + 1}",
            )
    return _report("monotonicity", t.n, "all", CheckStatus.PASS)


def check_ratio_lemma(s: Strategy, epsilon: float) -> CheckReport:
    """Adjacent sorted lengths at stage k satisfy x_i / x_(i+1) >= 2^epsilon
    whenever k + 2i - 1 <= n, given disc(s) <= 2^(1-epsilon).

    Exact when the strategy carries ring lengths and epsilon is 1/m; the
    float path uses a 1e-12 tolerance.
    """
    n = s.length
    exact = s.exact is not None and abs(epsilon - 1.0 / s.exact.modulus) < 1e-15
    if exact:
        return _ratio_lemma_exact(s, n)
    return _ratio_lemma_float(s, epsilon, n)


_RATIO_TOL = 1e-12


def _valid_i_max(n: int, k: int) -> int:
    # i < k and k + 2i - 1 <= n
    return min(k - 1, (n + 1 - k) // 2)


def _ratio_lemma_float(s: Strategy, epsilon: float, n: int) -> CheckReport:
    target = 2.0**epsilon
    disc_limit = 2.0 ** (1.0 - epsilon)
    any_checked = False
    for k, stage in enumerate(s.stages(), start=1):
        if stage[0] > 0 and stage[-1] / stage[0] > disc_limit + _RATIO_TOL:
            return _report(
                "ratio_lemma",
                n,
                k,
                CheckStatus.FAIL,
                f"precondition broken: disc(I_{k}) = {stage[-1] / stage[0]:.12g} "
                f"> 2^(1-eps) = {disc_limit:.12g}",
            )
        if k >= n:
            continue
        desc = stage[::-1]
        for i in range(1, _valid_i_max(n, k) + 1):
            any_checked = True
            if desc[i - 1] / desc[i] < target - _RATIO_TOL:
                return _report(
                    "ratio_lemma",
                    n,
                    k,
                    CheckStatus.FAIL,
                    f"x_{i}/x_{i + 1} = {desc[i - 1] / desc[i]:.12g} < 2^eps "
                    f"at (k={k}, i={i})",
                )
    status = CheckStatus.PASS if any_checked else CheckStatus.VACUOUS
    return _report("ratio_lemma", n, "all", status)


def _ratio_lemma_exact(s: Strategy, n: int) -> CheckReport:
    m = s.exact.modulus
    any_checked = False
    for k, stage in enumerate(s.exact.stages(), start=1):
        # fast approximate sort key; all order-sensitive decisions below are
        # re-certified by exact adjacent-pair comparisons
        desc = sorted(stage, key=lambda v: -sum(v._float_enclosure()))
        if desc[0].compare(mul_q_power(desc[-1], m - 1)) == Ordering.GREATER:
            return _report(
                "ratio_lemma",
                n,
                k,
                CheckStatus.FAIL,
                f"precondition broken: disc(I_{k}) exceeds 2^(1-1/{m}) exactly",
            )
        if k >= n:
            continue
        for i in range(1, _valid_i_max(n, k) + 1):
            any_checked = True
            if desc[i - 1].compare(mul_q_power(desc[i], 1)) == Ordering.LESS:
                return _report(
                    "ratio_lemma",
                    n,
                    k,
                    CheckStatus.FAIL,
                    f"x_{i}/x_{i + 1} < 2^(1/{m}) exactly at (k={k}, i={i})",
                )
    status = CheckStatus.PASS if any_checked else CheckStatus.VACUOUS
    return _report("ratio_lemma", n, "all", status)


# -- aggregation -------------------------------------------------------------

_STAGE_CHECKS = {
    "p1": check_p1,
    "p2": check_p2,
    "p3": check_p3,
    "wrapped_structure": check_wrapped_structure,
    "lex_length": check_lex_length,
    "conservation": check_conservation,
}

ALL_CHECKS = tuple(sorted(_STAGE_CHECKS)) + ("monotonicity", "ratio_lemma")


def verify_trace(t: Trace, checks=None) -> list[CheckReport]:
    """Run the selected checkers over every stage of a trace; stage-level
    results are folded into one summary report per check."""
    selected = set(checks) if checks is not None else set(ALL_CHECKS)
    unknown = selected - set(ALL_CHECKS)
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}")
    reports = []
    for name in sorted(selected & set(_STAGE_CHECKS)):
        fn = _STAGE_CHECKS[name]
        summary = None
        statuses = set()
        for col in t.collections:
            rep = fn(col)
            statuses.add(rep.status)
            if rep.status is CheckStatus.FAIL:
                summary = rep
                break
        if summary is None:
            status = (
                CheckStatus.VACUOUS
                if statuses == {CheckStatus.VACUOUS}
                else CheckStatus.PASS
            )
            summary = _report(name, t.n, "all", status)
        reports.append(summary)
    if "monotonicity" in selected:
        reports.append(check_monotonicity(t))
    if "ratio_lemma" in selected:
        try:
            reports.append(check_ratio_lemma(to_strategy(t), 1.0 / t.m))
        except StrategyError as exc:
            # an inconsistent trace cannot even be replayed as a strategy
            reports.append(
                _report("ratio_lemma", t.n, "all", CheckStatus.FAIL, str(exc))
            )
    reports.sort(key=lambda r: (r.check_name, str(r.stage)))
    return reports


def verify_all(n: int, checks=None) -> list[CheckReport]:
    """Run every checker over a fresh order-n run."""
    return verify_trace(run(n), checks=checks)
