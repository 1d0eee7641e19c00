"""Closed-form discrepancy bounds and reference strategies.

Evaluates the three bound formulas (lower bound, merge-strategy value, and
the classical base-2 logarithmic construction), generates the logarithmic
point sequence on the circle, unwraps point sets into strategies, and
provides the trivial always-halve baseline.
"""

from __future__ import annotations

import math
from bisect import bisect_left, insort
from dataclasses import dataclass

import mpmath

from .strategy import Strategy, StrategyError

__all__ = [
    "BoundsRow",
    "CirclePointSet",
    "lb",
    "ub_lexmerge",
    "ub_dbe",
    "dbe_points",
    "strategy_from_points",
    "greedy_half",
    "bounds_table",
    "disc_of",
    "disc_prefix",
]

_MIN_GAP = 1e-15


def lb(n: int) -> float:
    """Lower bound 2**(1 - 1/ceil(n/3))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 2.0 ** (1.0 - 1.0 / math.ceil(n / 3))


def ub_lexmerge(n: int) -> float:
    """Merge-strategy value 2**(1 - 1/ceil(n/2))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 2.0 ** (1.0 - 1.0 / math.ceil(n / 2))


def ub_dbe(n: int) -> float:
    """log(1 + 1/n) / log((1 - 1/(2n))**-1), the logarithmic-sequence bound."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.log1p(1.0 / n) / -math.log1p(-1.0 / (2 * n))


@dataclass(frozen=True)
class CirclePointSet:
    """Points on the unit circle [0, 1), in insertion order."""

    points: tuple[float, ...]

    def __post_init__(self):
        if len(set(self.points)) != len(self.points):
            raise ValueError("points must be distinct")


def dbe_points(n: int) -> CirclePointSet:
    """First n points of x_k = log2(2k - 1) mod 1, in extended precision."""
    if n < 1:
        raise ValueError("n must be >= 1")
    with mpmath.workprec(80):
        pts = tuple(
            float(mpmath.frac(mpmath.log(2 * k - 1, 2))) for k in range(1, n + 1)
        )
    return CirclePointSet(points=pts)


def strategy_from_points(p: CirclePointSet) -> Strategy:
    """Cut the circle at the first point and unwrap into [0, 1].

    Stage t's partition is the set of gaps between the first t points;
    each later point must land strictly inside an existing gap.
    """
    if not p.points:
        raise ValueError("need at least one point")
    first = p.points[0]
    positions = [0.0]  # sorted positions relative to the cut
    splits = []
    for raw in p.points[1:]:
        x = (raw - first) % 1.0
        i = bisect_left(positions, x)
        if (i < len(positions) and positions[i] == x) or x == 0.0:
            raise StrategyError(f"duplicate point at {raw}")
        left_end = positions[i - 1]
        right_end = positions[i] if i < len(positions) else 1.0
        parent = right_end - left_end
        left, right = x - left_end, right_end - x
        if left < _MIN_GAP or right < _MIN_GAP:
            raise StrategyError("gap below float precision; cannot certify split")
        splits.append((parent, left, right))
        positions.insert(i, x)
    return Strategy(splits=tuple(splits))


def greedy_half(n: int) -> Strategy:
    """Baseline: always split a largest interval exactly in half."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cur = [1.0]  # ascending
    splits = []
    for _ in range(n - 1):
        largest = cur.pop()
        half = largest / 2.0
        splits.append((largest, half, half))
        insort(cur, half)
        insort(cur, half)
    return Strategy(splits=tuple(splits))


@dataclass(frozen=True)
class BoundsRow:
    n: int
    lower_bound: float
    lexmerge_value: float
    dbe_bound: float
    optimal: float | None = None


def bounds_table(
    n_from: int, n_to: int, include_optimal: bool = False, tol: float = 1e-7
) -> list[BoundsRow]:
    if not 1 <= n_from <= n_to:
        raise ValueError("need 1 <= n_from <= n_to")
    rows = []
    for n in range(n_from, n_to + 1):
        optimal = None
        if include_optimal:
            from .optimizer import optimize

            optimal = optimize(n, tol).disc
        rows.append(
            BoundsRow(
                n=n,
                lower_bound=lb(n),
                lexmerge_value=ub_lexmerge(n),
                dbe_bound=ub_dbe(n),
                optimal=optimal,
            )
        )
    return rows
