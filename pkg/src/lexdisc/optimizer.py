"""Brute-force minimax search for the best achievable discrepancy.

A strategy splits into a discrete part (which live interval splits at each
step) and a continuous part (where the cuts land).  All discrete split
schedules are enumerated up to sibling symmetry; for each schedule the
minimal achievable discrepancy is found by bisection on the target d,
where feasibility of a fixed d is a linear program over the leaf lengths.

Bisection verdicts come from a fast float LP that maximizes the worst
constraint margin; the winning schedule's bracket is then re-certified by
an exact rational feasibility solve, so the reported value is backed by
exact arithmetic on both sides.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from multiprocessing import Pool
from typing import Iterator

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "SplitSchedule",
    "Witness",
    "OptimizeResult",
    "ConjectureReport",
    "DEFAULT_CAP",
    "enumerate_schedules",
    "feasible",
    "min_disc_for_schedule",
    "optimize",
    "conjecture_report",
    "replay_witness",
    "schedule_from_trace",
    "tree_key",
]

DEFAULT_CAP = 8
_LEAF_FLOOR = Fraction(1, 10**9)  # y_i >= this fraction of the unit total
_MARGIN_GUARD = 1e-9  # float margins inside this band defer to the exact solver


@dataclass(frozen=True)
class SplitSchedule:
    """choices[t-1] selects which of the t live intervals (creation order)
    is split at step t."""

    n: int
    choices: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1 or len(self.choices) != self.n - 1:
            raise ValueError("schedule must carry exactly n - 1 choices")
        for t, c in enumerate(self.choices, start=1):
            if not 0 <= c < t:
                raise ValueError(f"choice {c} out of range at step {t}")


@dataclass(frozen=True)
class Witness:
    leaf_lengths: tuple[Fraction, ...]
    achieved_disc: float


def enumerate_schedules(n: int, dedup: bool = True) -> Iterator[SplitSchedule]:
    """All split schedules, deduplicated (by default) under the left/right
    symmetry of each split: never split a node whose sibling is still an
    unsplit leaf with a smaller id."""
    if n < 1:
        raise ValueError("n must be >= 1")

    def rec(step: int, live: list[int], sibling: dict[int, int], prefix: list[int]):
        if step == n:
            yield SplitSchedule(n=n, choices=tuple(prefix))
            return
        live_set = set(live)
        for j, node in enumerate(live):
            sib = sibling.get(node)
            if dedup and sib is not None and sib in live_set and sib < node:
                continue
            a, b = 2 * step - 1, 2 * step
            sibling[a], sibling[b] = b, a
            prefix.append(j)
            yield from rec(step + 1, live[:j] + live[j + 1:] + [a, b], sibling, prefix)
            prefix.pop()
            del sibling[a], sibling[b]

    yield from rec(1, [0], {}, [])


@lru_cache(maxsize=4096)
def _schedule_system(sched: SplitSchedule):
    """Leaf incidence vectors of all nodes plus the deduplicated co-live
    ordered pairs appearing at any stage."""
    n = sched.n
    live = [0]
    children: dict[int, tuple[int, int]] = {}
    pairs = set()
    split_events = []  # (step, node ids live at that stage, split node)
    for t, c in enumerate(sched.choices, start=1):
        for u in live:
            for v in live:
                if u != v:
                    pairs.add((u, v))
        split_events.append((t, tuple(live), live[c]))
        node = live[c]
        a, b = 2 * t - 1, 2 * t
        children[node] = (a, b)
        live = live[:c] + live[c + 1:] + [a, b]
    for u in live:
        for v in live:
            if u != v:
                pairs.add((u, v))
    leaves = sorted(live)
    leaf_index = {node: i for i, node in enumerate(leaves)}

    def leaf_vec(node: int) -> tuple[int, ...]:
        vec = [0] * n
        stack = [node]
        while stack:
            u = stack.pop()
            if u in children:
                stack.extend(children[u])
            else:
                vec[leaf_index[u]] = 1
        return tuple(vec)

    vecs = {u: leaf_vec(u) for u in range(2 * n - 1)}
    ordered_pairs = sorted(pairs)
    largest_rows = []
    for _, stage_live, split_node in split_events:
        for v in stage_live:
            if v != split_node:
                largest_rows.append((v, split_node))
    return vecs, ordered_pairs, tuple(largest_rows), tuple(leaves)


def _float_margin(sched: SplitSchedule, d: float, largest_first: bool) -> tuple[float, np.ndarray | None]:
    """Maximize the worst slack eps of len(u) + eps <= d*len(v); the system
    is feasible iff the optimum is >= 0."""
    n = sched.n
    vecs, pairs, largest_rows, _ = _schedule_system(sched)
    rows = list(pairs)
    if largest_first:
        rows += list(largest_rows)
    if not rows:
        return (d - 1.0 if n == 1 else 0.0), np.ones(n) / n
    A = np.zeros((len(rows), n + 1))
    for i, (u, v) in enumerate(rows):
        A[i, :n] = np.asarray(vecs[u], dtype=float) - d * np.asarray(vecs[v], dtype=float)
        A[i, n] = 1.0
    b = np.zeros(len(rows))
    c = np.zeros(n + 1)
    c[n] = -1.0
    bounds = [(float(_LEAF_FLOOR), None)] * n + [(None, None)]
    res = linprog(
        c,
        A_ub=A,
        b_ub=b,
        A_eq=np.concatenate([np.ones((1, n)), np.zeros((1, 1))], axis=1),
        b_eq=[1.0],
        bounds=bounds,
        method="highs",
    )
    if not res.success:
        return -np.inf, None
    return res.x[n], res.x[:n]


def _exact_feasible(
    sched: SplitSchedule, d: Fraction, largest_first: bool
) -> tuple[bool, tuple[Fraction, ...] | None]:
    """Exact rational feasibility via a phase-1 simplex over z = y - floor."""
    n = sched.n
    vecs, pairs, largest_rows, _ = _schedule_system(sched)
    rows = list(pairs)
    if largest_first:
        rows += list(largest_rows)
    delta = _LEAF_FLOOR
    constraints = []  # (coeff vector over z, rhs)
    for u, v in rows:
        coeff = [Fraction(a) - d * Fraction(b) for a, b in zip(vecs[u], vecs[v])]
        rhs = -delta * sum(coeff)
        constraints.append((coeff, rhs))
    ones = [Fraction(1)] * n
    constraints.append((ones, Fraction(1) - n * delta))
    constraints.append(([-x for x in ones], -(Fraction(1) - n * delta)))
    z = _phase1_simplex(n, constraints)
    if z is None:
        return False, None
    return True, tuple(zi + delta for zi in z)


def _phase1_simplex(p, constraints):
    """Feasibility of {A z <= b, z >= 0} by minimizing one artificial
    variable; returns a feasible z or None.  Bland's rule, exact rationals."""
    ART = p  # variable ids: structurals 0..p-1, artificial p, slacks p+1+row
    nonbasic = list(range(p + 1))
    rows = {}
    for j, (coeff, rhs) in enumerate(constraints):
        expr = {i: -coeff[i] for i in range(p) if coeff[i] != 0}
        expr[ART] = Fraction(1)
        rows[p + 1 + j] = [Fraction(rhs), expr]
    worst = min(rows, key=lambda r: rows[r][0])
    if rows[worst][0] >= 0:
        return [Fraction(0)] * p

    def pivot(leave: int, enter: int):
        const, expr = rows.pop(leave)
        a = expr.pop(enter)
        new_const = -const / a
        new_expr = {leave: Fraction(1) / a}
        for v, cv in expr.items():
            new_expr[v] = -cv / a
        nonbasic.remove(enter)
        nonbasic.append(leave)
        for basic, (c2, e2) in rows.items():
            if enter in e2:
                k = e2.pop(enter)
                rows[basic][0] = c2 + k * new_const
                for v, cv in new_expr.items():
                    e2[v] = e2.get(v, Fraction(0)) + k * cv
                    if e2[v] == 0:
                        del e2[v]
        rows[enter] = [new_const, new_expr]

    pivot(worst, ART)
    while True:
        art_const, art_expr = rows[ART]
        if art_const == 0:
            break
        enter = None
        for v in sorted(art_expr):
            if art_expr[v] < 0:
                enter = v
                break
        if enter is None:
            return None  # optimum with positive artificial: infeasible
        leave = None
        best = None
        for basic in sorted(rows):
            cv = rows[basic][1].get(enter)
            if cv is not None and cv < 0:
                limit = -rows[basic][0] / cv
                if best is None or limit < best:
                    best, leave = limit, basic
        if leave is None:
            raise RuntimeError("phase-1 objective unbounded; malformed system")
        # Prefer driving the artificial variable out on ties: once it is
        # nonbasic it sits at zero and the original system is feasible.
        cv_art = art_expr.get(enter)
        if leave != ART and cv_art is not None and cv_art < 0 and -art_const / cv_art == best:
            leave = ART
        pivot(leave, enter)
        if ART in nonbasic:
            break
    z = [Fraction(0)] * p
    for basic, (const, _) in rows.items():
        if basic < p:
            z[basic] = const
    return z


def feasible(
    sched: SplitSchedule,
    d,
    exact: bool = True,
    largest_first: bool = False,
) -> tuple[bool, Witness | None]:
    """Decide whether positive leaf lengths exist keeping every co-live
    pair within ratio d at every stage."""
    if d < 1:
        return False, None
    if exact:
        ok, y = _exact_feasible(sched, Fraction(d), largest_first)
        if not ok:
            return False, None
        return True, Witness(leaf_lengths=y, achieved_disc=replay_witness(sched, y))
    eps, y = _float_margin(sched, float(d), largest_first)
    if y is None or eps < 0:
        return False, None
    yfrac = tuple(Fraction(v).limit_denominator(10**12) for v in y)
    return True, Witness(leaf_lengths=yfrac, achieved_disc=replay_witness(sched, yfrac))


def replay_witness(sched: SplitSchedule, leaf_lengths) -> float:
    """Feed leaf lengths through the schedule; the worst stage max/min ratio."""
    vecs, _, _, leaves = _schedule_system(sched)
    y = [Fraction(v) for v in leaf_lengths]

    def length(node):
        return sum(yi for yi, ind in zip(y, vecs[node]) if ind)

    live = [0]
    worst = Fraction(1)
    for t, c in enumerate(sched.choices, start=1):
        vals = [length(u) for u in live]
        worst = max(worst, max(vals) / min(vals))
        live = live[:c] + live[c + 1:] + [2 * t - 1, 2 * t]
    vals = [length(u) for u in live]
    worst = max(worst, max(vals) / min(vals))
    return float(worst)


def min_disc_for_schedule(
    sched: SplitSchedule,
    tol: float,
    largest_first: bool = False,
    certify: bool = False,
) -> float:
    """Bisection on d over [1, 2]; feasibility is monotone in d and d = 2 is
    always feasible (repeated halving)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if sched.n <= 2:
        return 1.0
    eps0, _ = _float_margin(sched, 1.0, largest_first)
    if eps0 >= 0:
        lo, hi = None, 1.0
    else:
        lo, hi = 1.0, 2.0
        while hi - lo > tol:
            mid = (lo + hi) / 2
            eps, _ = _float_margin(sched, mid, largest_first)
            if eps >= 0:
                hi = mid
            else:
                lo = mid
    if certify:
        hi = _certify(sched, lo, hi, tol, largest_first)
    return hi


def _certify(sched, lo, hi, tol, largest_first) -> float:
    """Exact-rational confirmation of the float bracket: hi feasible, lo
    infeasible; nudged by tol steps in the unlikely event of disagreement."""
    for _ in range(16):
        ok, _ = _exact_feasible(sched, Fraction(hi), largest_first)
        if ok:
            break
        hi += tol
    else:
        raise RuntimeError("could not certify feasible endpoint")
    if lo is not None:
        for _ in range(16):
            ok, _ = _exact_feasible(sched, Fraction(lo), largest_first)
            if not ok:
                break
            lo -= tol
        else:
            raise RuntimeError("could not certify infeasible endpoint")
    return hi


@dataclass(frozen=True)
class OptimizeResult:
    n: int
    disc: float
    schedule: SplitSchedule
    witness: Witness


def _eval_schedule(args) -> tuple[float, tuple[int, ...]]:
    n, choices, tol, largest_first = args
    sched = SplitSchedule(n=n, choices=choices)
    return min_disc_for_schedule(sched, tol, largest_first), choices


def optimize(
    n: int,
    tol: float = 1e-7,
    jobs: int = 1,
    cap: int = DEFAULT_CAP,
    largest_first: bool = False,
) -> OptimizeResult:
    """Minimum of min_disc_for_schedule over all schedules; the winner's
    bracket is certified with the exact rational solver."""
    if n > cap:
        raise ValueError(
            f"n={n} above the configured cap {cap}; raise cap= explicitly to "
            f"search (n-1)! = {_factorial(n - 1)} raw schedules"
        )
    if tol <= 0:
        raise ValueError("tol must be positive")
    tasks = [
        (n, s.choices, tol, largest_first) for s in enumerate_schedules(n)
    ]
    if jobs > 1 and len(tasks) > 1:
        with Pool(processes=min(jobs, os.cpu_count() or 1)) as pool:
            results = pool.map(_eval_schedule, tasks, chunksize=8)
    else:
        results = [_eval_schedule(t) for t in tasks]
    best_disc, best_choices = min(results)
    best = SplitSchedule(n=n, choices=best_choices)
    certified = min_disc_for_schedule(
        best, tol, largest_first, certify=True
    )
    _, witness = feasible(best, certified, exact=True, largest_first=largest_first)
    return OptimizeResult(n=n, disc=certified, schedule=best, witness=witness)


def _factorial(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


@dataclass(frozen=True)
class ConjectureReport:
    n: int
    optimal: float
    lower_bound: float
    lexmerge_value: float
    verdict: str  # consistent | violates_lower_bound | below_conjecture
    matches_conjecture: bool
    witness: Witness

    @property
    def consistent(self) -> bool:
        return self.verdict == "consistent"


def conjecture_report(
    n: int, tol: float = 1e-7, jobs: int = 1, cap: int = DEFAULT_CAP
) -> ConjectureReport:
    """Compare the searched optimum against the closed-form sandwich."""
    from .strategies import lb, ub_lexmerge

    result = optimize(n, tol, jobs=jobs, cap=cap)
    lower = lb(n)
    upper = ub_lexmerge(n)
    if result.disc < lower - tol:
        verdict = "violates_lower_bound"
    elif result.disc < upper - tol:
        verdict = "below_conjecture"
    else:
        verdict = "consistent"
    return ConjectureReport(
        n=n,
        optimal=result.disc,
        lower_bound=lower,
        lexmerge_value=upper,
        verdict=verdict,
        matches_conjecture=abs(result.disc - upper) <= tol,
        witness=result.witness,
    )


def tree_key(sched: SplitSchedule):
    """Canonical key of the timed split tree, invariant under sibling swaps."""
    children = {}
    live = [0]
    times = {}
    for t, c in enumerate(sched.choices, start=1):
        node = live[c]
        times[node] = t
        children[node] = (2 * t - 1, 2 * t)
        live = live[:c] + live[c + 1:] + [2 * t - 1, 2 * t]

    def key(node):
        if node not in children:
            return (0,)  # split times start at 1, so this marks a leaf
        k1, k2 = sorted(key(ch) for ch in children[node])
        return (times[node], k1, k2)

    return key(0)


def schedule_from_trace(trace) -> SplitSchedule:
    """The discrete split order induced by reversing a merge-engine run."""
    n = trace.n
    live = [trace.collections[-1].baskets[0]]
    choices = []
    for t in range(1, n):
        rec = trace.merges[n - 1 - t]
        idx = next(
            i for i, b in enumerate(live) if b.elements == rec.result.elements
        )
        choices.append(idx)
        live = live[:idx] + live[idx + 1:] + [rec.left, rec.right]
    return SplitSchedule(n=n, choices=tuple(choices))
