"""Exact arithmetic in the ring Z[q] with q = 2**(1/m).

Every basket length produced by the merge engine is an integer combination
of 1, q, ..., q**(m-1), so elements are stored as integer coefficient
vectors in that basis.  Since x**m - 2 is irreducible over Q, two reduced
vectors represent the same real number iff they are identical, which makes
equality a tuple comparison.  Ordering of distinct elements is decided by
certified interval evaluation at escalating precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache

import mpmath

__all__ = ["Ordering", "QNumber", "q_power", "zero", "one", "from_int"]

# int64 convolution would be faster, but coefficient products can exceed
# 64 bits for large inputs; pure-int convolution with a numpy fast path is
# selected per call in _mul_coeffs.
_INT64_SAFE = 2**62


class Ordering(IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@lru_cache(maxsize=None)
def _float_powers(m: int) -> tuple[float, ...]:
    return tuple(2.0 ** (x / m) for x in range(m))


@lru_cache(maxsize=None)
def _interval_powers(m: int, prec: int):
    """Interval enclosures of q**x for x in [0, m) at the given precision."""
    iv = mpmath.iv
    old = iv.prec
    try:
        iv.prec = prec
        ln2 = iv.log(iv.mpf(2))
        return tuple(iv.exp(ln2 * x / m) for x in range(m))
    finally:
        iv.prec = old


@dataclass(frozen=True)
class QNumber:
    """An element of Z[2**(1/m)], kept in reduced basis form."""

    modulus: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be >= 1")
        if len(self.coeffs) != self.modulus:
            raise ValueError("coefficient vector must have exactly m entries")

    def _check_same_modulus(self, other: "QNumber") -> None:
        if self.modulus != other.modulus:
            raise ValueError(
                f"modulus mismatch: {self.modulus} != {other.modulus}"
            )

    def __add__(self, other: "QNumber") -> "QNumber":
        self._check_same_modulus(other)
        return QNumber(
            self.modulus,
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __sub__(self, other: "QNumber") -> "QNumber":
        self._check_same_modulus(other)
        return QNumber(
            self.modulus,
            tuple(a - b for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __neg__(self) -> "QNumber":
        return QNumber(self.modulus, tuple(-a for a in self.coeffs))

    def __mul__(self, other: "QNumber") -> "QNumber":
        self._check_same_modulus(other)
        return QNumber(
            self.modulus, _mul_coeffs(self.modulus, self.coeffs, other.coeffs)
        )

    def scale(self, k: int) -> "QNumber":
        return QNumber(self.modulus, tuple(k * a for a in self.coeffs))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coeffs)

    def compare(self, other: "QNumber") -> Ordering:
        return compare(self, other)

    def sign(self) -> int:
        """Certified sign: -1, 0 or +1."""
        if self.is_zero():
            return 0
        lo, hi = self._float_enclosure()
        if lo > 0.0:
            return 1
        if hi < 0.0:
            return -1
        prec = 106
        while True:
            val = self._interval_value(prec)
            if val.a > 0:
                return 1
            if val.b < 0:
                return -1
            prec *= 2

    def _float_enclosure(self) -> tuple[float, float]:
        """Cheap hardware-float enclosure; (nan, nan)-free but may be wide."""
        return _float_enclosure_cached(self.modulus, self.coeffs)

    def _interval_value(self, prec: int):
        iv = mpmath.iv
        old = iv.prec
        try:
            iv.prec = prec
            powers = _interval_powers(self.modulus, prec)
            val = iv.mpf(0)
            for c, p in zip(self.coeffs, powers):
                if c:
                    val += p * c
            return val
        finally:
            iv.prec = old

    def to_float(self, rel_error_bound: float = 1e-12) -> float:
        return to_float(self, rel_error_bound)

    def __repr__(self):
        return f"QNumber(m={self.modulus}, coeffs={list(self.coeffs)})"


@lru_cache(maxsize=1 << 17)
def _float_enclosure_cached(m: int, coeffs: tuple[int, ...]) -> tuple[float, float]:
    powers = _float_powers(m)
    try:
        val = 0.0
        mag = 0.0
        for c, p in zip(coeffs, powers):
            val += c * p
            mag += abs(c) * p
    except OverflowError:
        return (-math.inf, math.inf)
    if not math.isfinite(val) or not math.isfinite(mag):
        return (-math.inf, math.inf)
    err = (m + 3) * 2.0**-52 * mag
    return (val - err, val + err)


def mul_q_power(a: QNumber, k: int) -> QNumber:
    """Multiply by q^k by rotating coefficients; wrapped entries pick up the
    factor 2 from q^m = 2.  O(m), no convolution."""
    m = a.modulus
    k %= m
    if k == 0:
        return a
    c = a.coeffs
    out = [2 * c[j - k + m] for j in range(k)]
    out.extend(c[j - k] for j in range(k, m))
    return QNumber(m, tuple(out))


def _mul_coeffs(
    m: int, a: tuple[int, ...], b: tuple[int, ...]
) -> tuple[int, ...]:
    """Convolve coefficient vectors, then reduce eagerly via q**m = 2."""
    amax = max((abs(x) for x in a), default=0)
    bmax = max((abs(x) for x in b), default=0)
    if amax and bmax and amax * bmax * m < _INT64_SAFE:
        import numpy as np

        raw = np.convolve(
            np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        )
        out = raw[:m].copy()
        if raw.shape[0] > m:
            out[: raw.shape[0] - m] += 2 * raw[m:]
        return tuple(int(x) for x in out)
    raw = [0] * (2 * m - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    raw[i + j] += ai * bj
    out = raw[:m]
    for x in range(m, 2 * m - 1):
        out[x - m] += 2 * raw[x]
    return tuple(out)


def zero(m: int) -> QNumber:
    return QNumber(m, (0,) * m)


def one(m: int) -> QNumber:
    return from_int(m, 1)


def from_int(m: int, k: int) -> QNumber:
    return QNumber(m, (k,) + (0,) * (m - 1))


def q_power(m: int, k: int) -> QNumber:
    """The basis element q**k, reduced so the exponent lies in [0, m)."""
    if m < 1:
        raise ValueError("modulus must be >= 1")
    if k < 0:
        raise ValueError("exponent must be >= 0")
    coeffs = [0] * m
    coeffs[k % m] = 2 ** (k // m)
    return QNumber(m, tuple(coeffs))


def add(a: QNumber, b: QNumber) -> QNumber:
    return a + b


def sub(a: QNumber, b: QNumber) -> QNumber:
    return a - b


def mul(a: QNumber, b: QNumber) -> QNumber:
    return a * b


def compare(a: QNumber, b: QNumber) -> Ordering:
    """Exact three-way comparison of the represented real values.

    Equality is a coefficient-vector identity; otherwise the sign of a - b
    is certified by interval evaluation, starting at hardware precision and
    doubling the working precision until the enclosure excludes zero.
    """
    a._check_same_modulus(b)
    if a.coeffs == b.coeffs:
        return Ordering.EQUAL
    diff = a - b
    return Ordering(diff.sign())


def to_float(a: QNumber, rel_error_bound: float = 1e-12) -> float:
    """Approximate real value, accurate to the stated relative error.

    Reporting only; ordering decisions always go through compare().
    """
    if rel_error_bound <= 0:
        raise ValueError("rel_error_bound must be positive")
    if a.is_zero():
        return 0.0
    prec = max(60, int(-math.log2(rel_error_bound)) + 16)
    while True:
        val = a._interval_value(prec)
        lo, hi = mpmath.mpf(val.a), mpmath.mpf(val.b)
        mid = (lo + hi) / 2
        if abs(mid) > 0 and (hi - lo) / abs(mid) <= rel_error_bound:
            return float(mid)
        prec *= 2
