"""Splitting strategies on the unit interval.

A strategy of length n is the sequence of partitions I_1..I_n where each
partition refines the previous one by splitting a single length into two
positive parts.  Only the split events are stored; partitions are
reconstructed by replay.  Strategies coming from the exact merge engine
additionally carry their lengths as ring elements scaled by the stage
total L, so ratio checks on them can be done without rounding.
"""

from __future__ import annotations

from bisect import bisect_left, insort
from dataclasses import dataclass, field
from typing import Iterator

from .qnum import QNumber

__all__ = ["Strategy", "ExactStrategy", "StrategyError", "disc_of", "disc_prefix"]

_REL_TOL = 1e-9


class StrategyError(ValueError):
    """The split sequence does not describe a valid refinement."""


@dataclass(frozen=True)
class ExactStrategy:
    """Unnormalized exact lengths: each stage's values divided by total give
    the actual partition."""

    total: QNumber
    splits: tuple[tuple[QNumber, QNumber, QNumber], ...]

    @property
    def modulus(self) -> int:
        return self.total.modulus

    def stages(self) -> Iterator[list[QNumber]]:
        cur = [self.total]
        yield list(cur)
        for parent, left, right in self.splits:
            for i, v in enumerate(cur):
                if v.coeffs == parent.coeffs:
                    break
            else:
                raise StrategyError(f"split parent {parent} not present")
            if (left + right).coeffs != parent.coeffs:
                raise StrategyError("children do not sum to parent")
            cur.pop(i)
            cur.append(left)
            cur.append(right)
            yield list(cur)


@dataclass(frozen=True)
class Strategy:
    """Split events (parent, left, right) as unit-interval lengths."""

    splits: tuple[tuple[float, float, float], ...]
    exact: ExactStrategy | None = field(default=None, compare=False)

    @property
    def length(self) -> int:
        return len(self.splits) + 1

    def stages(self) -> Iterator[list[float]]:
        """Yield each partition's lengths, sorted ascending; validates the
        refinement invariant as it goes."""
        cur = [1.0]
        yield list(cur)
        for parent, left, right in self.splits:
            _replay_split(cur, parent, left, right)
            yield list(cur)

    def partition(self, t: int) -> list[float]:
        if not 1 <= t <= self.length:
            raise ValueError("stage out of range")
        for i, stage in enumerate(self.stages(), start=1):
            if i == t:
                return stage
        raise AssertionError

    def validate(self) -> None:
        for _ in self.stages():
            pass


def _replay_split(cur: list[float], parent: float, left: float, right: float):
    if left <= 0.0 or right <= 0.0:
        raise StrategyError("split parts must be positive")
    tol = abs(parent) * _REL_TOL
    if abs((left + right) - parent) > tol:
        raise StrategyError("split parts do not sum to the parent length")
    i = bisect_left(cur, parent - tol)
    if i >= len(cur) or abs(cur[i] - parent) > tol:
        raise StrategyError(f"no interval of length {parent} to split")
    cur.pop(i)
    insort(cur, left)
    insort(cur, right)


def disc_of(s: Strategy) -> float:
    """Worst stage discrepancy max length / min length over all stages."""
    return disc_prefix(s, s.length)


def disc_prefix(s: Strategy, t: int) -> float:
    """Worst stage discrepancy over the first t stages."""
    if not 1 <= t <= s.length:
        raise ValueError("prefix length out of range")
    worst = 1.0
    for i, stage in enumerate(s.stages(), start=1):
        if i > t:
            break
        if stage[0] > 0:
            worst = max(worst, stage[-1] / stage[0])
    return worst
