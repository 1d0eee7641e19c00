"""The merge engine: repeatedly merge the two smallest baskets.

Runs the order-n merge process from the doubled-singleton collection down
to a single basket, recording every intermediate collection, the merged
pairs, and exact per-stage discrepancy witnesses.  Reversing the run and
normalizing by the conserved total length yields a splitting strategy on
[0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

from .baskets import (
    Basket,
    BasketCollection,
    basket_length,
    compare_lengths,
    initial_collection,
    total_length,
)
from .qnum import Ordering, QNumber
from .strategy import ExactStrategy, Strategy

__all__ = [
    "MergeRecord",
    "DiscWitness",
    "Trace",
    "merge_step",
    "run",
    "disc_exact",
    "to_strategy",
    "trace_to_json",
    "trace_from_json",
]


@dataclass(frozen=True)
class MergeRecord:
    stage: int
    left: Basket
    right: Basket
    result: Basket


@dataclass(frozen=True)
class DiscWitness:
    """Exact max- and min-length baskets of one collection."""

    max_basket: Basket
    min_basket: Basket

    def ratio_vs(self, target: QNumber) -> Ordering:
        """Compare disc = l(max)/l(min) against target by cross-multiplication."""
        lhs = basket_length(self.max_basket)
        rhs = target * basket_length(self.min_basket)
        return lhs.compare(rhs)


@dataclass(frozen=True)
class Trace:
    n: int
    m: int
    collections: tuple[BasketCollection, ...]
    merges: tuple[MergeRecord, ...]
    disc_witnesses: tuple[DiscWitness, ...]


def merge_step(c: BasketCollection) -> tuple[BasketCollection, MergeRecord]:
    """Remove the two smallest baskets, insert their multiset union."""
    if len(c.baskets) < 2:
        raise ValueError("cannot merge a singleton collection")
    left, right = c.baskets[0], c.baskets[1]
    merged = left.union(right)
    rest = list(c.baskets[2:])
    keys = [b.sort_key for b in rest]
    pos = _insort_index(keys, merged.sort_key)
    rest.insert(pos, merged)
    record = MergeRecord(stage=c.stage, left=left, right=right, result=merged)
    return (
        BasketCollection(n=c.n, stage=c.stage + 1, baskets=tuple(rest)),
        record,
    )


def _insort_index(keys: list, key) -> int:
    lo, hi = 0, len(keys)
    while lo < hi:
        mid = (lo + hi) // 2
        if keys[mid] <= key:
            lo = mid + 1
        else:
            hi = mid
    return lo


def disc_exact(c: BasketCollection) -> DiscWitness:
    """Identify the exact max- and min-length baskets via certified
    comparisons (not via the lexicographic order)."""
    if not c.baskets:
        raise ValueError("empty collection")
    max_b = min_b = c.baskets[0]
    for b in c.baskets[1:]:
        if compare_lengths(b, max_b) == Ordering.GREATER:
            max_b = b
        if compare_lengths(b, min_b) == Ordering.LESS:
            min_b = b
    return DiscWitness(max_basket=max_b, min_basket=min_b)


def disc_value(t: Trace) -> float:
    """Float value of the worst stage max/min length ratio."""
    worst = 1.0
    for w in t.disc_witnesses:
        ratio = (
            basket_length(w.max_basket).to_float()
            / basket_length(w.min_basket).to_float()
        )
        worst = max(worst, ratio)
    return worst


def run(n: int) -> Trace:
    """Full order-n run: collections B_0..B_{n-1}, merges, disc witnesses."""
    c = initial_collection(n)
    collections = [c]
    merges = []
    while len(c.baskets) > 1:
        c, record = merge_step(c)
        collections.append(c)
        merges.append(record)
    witnesses = [disc_exact(col) for col in collections]
    return Trace(
        n=n,
        m=c.m,
        collections=tuple(collections),
        merges=tuple(merges),
        disc_witnesses=tuple(witnesses),
    )


def to_strategy(t: Trace) -> Strategy:
    """Reverse the run into a splitting strategy.

    Stage t of the strategy is the multiset of basket lengths of
    collection n - t, normalized by the conserved total L; each refinement
    splits a merged basket back into the pair it came from.
    """
    total = total_length(t.collections[0])
    total_f = total.to_float(1e-15)
    exact_splits = []
    float_splits = []
    for record in reversed(t.merges):
        parent = basket_length(record.result)
        left = basket_length(record.left)
        right = basket_length(record.right)
        exact_splits.append((parent, left, right))
        float_splits.append(
            (
                parent.to_float(1e-15) / total_f,
                left.to_float(1e-15) / total_f,
                right.to_float(1e-15) / total_f,
            )
        )
    exact = ExactStrategy(total=total, splits=tuple(exact_splits))
    return Strategy(splits=tuple(float_splits), exact=exact)


def trace_to_json(t: Trace) -> dict:
    """Serializable trace; ring elements appear only as coefficient vectors."""
    return {
        "n": t.n,
        "m": t.m,
        "collections": [
            [list(b.elements) for b in col.baskets] for col in t.collections
        ],
        "merges": [
            {"step": r.stage, "left_index": 0, "right_index": 1}
            for r in t.merges
        ],
        "disc_coeffs": [
            {
                "max": list(basket_length(w.max_basket).coeffs),
                "min": list(basket_length(w.min_basket).coeffs),
            }
            for w in t.disc_witnesses
        ],
    }


class TraceFormatError(ValueError):
    """Malformed serialized trace."""


def trace_from_json(payload: dict) -> Trace:
    """Parse and structurally validate a serialized trace."""
    try:
        n = int(payload["n"])
        m = int(payload["m"])
        raw_collections = payload["collections"]
        raw_merges = payload["merges"]
        raw_disc = payload["disc_coeffs"]
    except (KeyError, TypeError, ValueError) as exc:
        raise TraceFormatError(f"missing or malformed field: {exc}") from exc
    if n < 1 or m != (n + 1) // 2:
        raise TraceFormatError("inconsistent n and m")
    if len(raw_collections) != n or len(raw_merges) != n - 1:
        raise TraceFormatError("wrong number of collections or merges")
    try:
        collections = tuple(
            BasketCollection(
                n=n,
                stage=i,
                baskets=tuple(
                    Basket(m, tuple(int(x) for x in elems)) for elems in col
                ),
            )
            for i, col in enumerate(raw_collections)
        )
    except (TypeError, ValueError) as exc:
        raise TraceFormatError(f"bad basket data: {exc}") from exc
    merges = []
    for i, rec in enumerate(raw_merges):
        if int(rec.get("step", -1)) != i:
            raise TraceFormatError("merge steps out of order")
        col = collections[i]
        if len(col.baskets) < 2:
            raise TraceFormatError("merge recorded on a singleton collection")
        left, right = col.baskets[0], col.baskets[1]
        merges.append(
            MergeRecord(stage=i, left=left, right=right, result=left.union(right))
        )
    if len(raw_disc) != n:
        raise TraceFormatError("wrong number of disc records")
    witnesses = []
    for col, rec in zip(collections, raw_disc):
        max_b = _basket_with_coeffs(col, rec.get("max"))
        min_b = _basket_with_coeffs(col, rec.get("min"))
        if max_b is None or min_b is None:
            raise TraceFormatError("disc coefficients match no basket")
        witnesses.append(DiscWitness(max_basket=max_b, min_basket=min_b))
    return Trace(
        n=n,
        m=m,
        collections=collections,
        merges=tuple(merges),
        disc_witnesses=tuple(witnesses),
    )


def _basket_with_coeffs(col: BasketCollection, coeffs) -> Basket | None:
    if not isinstance(coeffs, list):
        return None
    target = tuple(int(x) for x in coeffs)
    for b in col.baskets:
        if basket_length(b).coeffs == target:
            return b
    return None
