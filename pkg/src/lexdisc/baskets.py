"""Baskets and basket collections for the merge strategy.

A basket is a multiset on {0, ..., m-1} with multiplicity at most 2, stored
as a weakly increasing tuple.  A collection is one stage of the merge run:
n - stage baskets sorted by size-then-lexicographic order, whose multiset
union is conserved across stages.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from .qnum import Ordering, QNumber, q_power, zero

__all__ = [
    "Basket",
    "BasketCollection",
    "Classification",
    "CycleKind",
    "initial_collection",
    "lex_compare",
    "cyclic_interval",
    "classify",
    "basket_length",
    "total_length",
    "modulus_for",
    "full_multiset",
]


def modulus_for(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return (n + 1) // 2


@dataclass(frozen=True)
class Basket:
    modulus: int
    elements: tuple[int, ...]

    def __post_init__(self):
        elems = self.elements
        if any(not (0 <= x < self.modulus) for x in elems):
            raise ValueError("elements must lie in [0, m)")
        if any(a > b for a, b in zip(elems, elems[1:])):
            raise ValueError("elements must be weakly increasing")
        for x in set(elems):
            if elems.count(x) > 2:
                raise ValueError("multiplicity of every element is at most 2")

    def __len__(self):
        return len(self.elements)

    @property
    def sort_key(self) -> tuple[int, tuple[int, ...]]:
        return (len(self.elements), self.elements)

    def is_wrapped(self) -> bool:
        return 0 in self.elements and (self.modulus - 1) in self.elements

    def union(self, other: "Basket") -> "Basket":
        if self.modulus != other.modulus:
            raise ValueError("modulus mismatch")
        return Basket(
            self.modulus, tuple(sorted(self.elements + other.elements))
        )

    def __repr__(self):
        return f"[{','.join(map(str, self.elements))}]"


@dataclass(frozen=True)
class BasketCollection:
    n: int
    stage: int
    baskets: tuple[Basket, ...]

    @property
    def m(self) -> int:
        return modulus_for(self.n)

    def __len__(self):
        return len(self.baskets)

    def sorted_ok(self) -> bool:
        keys = [b.sort_key for b in self.baskets]
        return all(a <= b for a, b in zip(keys, keys[1:]))


def lex_compare(b1: Basket, b2: Basket) -> Ordering:
    """Size first, then lexicographic on the weakly increasing listings."""
    if b1.modulus != b2.modulus:
        raise ValueError("modulus mismatch")
    k1, k2 = b1.sort_key, b2.sort_key
    if k1 < k2:
        return Ordering.LESS
    if k1 > k2:
        return Ordering.GREATER
    return Ordering.EQUAL


def full_multiset(n: int) -> tuple[int, ...]:
    """Elements of the initial collection as one sorted tuple."""
    m = modulus_for(n)
    out = []
    for x in range(m):
        out.append(x)
        if x < m - 1 or n % 2 == 0:
            out.append(x)
    return tuple(out)


def initial_collection(n: int) -> BasketCollection:
    """Stage-0 collection: doubled singletons, with m-1 single when n is odd."""
    m = modulus_for(n)
    baskets = tuple(Basket(m, (x,)) for x in full_multiset(n))
    return BasketCollection(n=n, stage=0, baskets=baskets)


def singleton_slots(n: int) -> tuple[Basket, ...]:
    """The singletons X_1, ..., X_n of stage 0 in listing order."""
    m = modulus_for(n)
    return tuple(Basket(m, ((j - 1) // 2,)) for j in range(1, n + 1))


def _slot_capacity(n: int, x: int) -> int:
    m = modulus_for(n)
    if x == m - 1 and n % 2 == 1:
        return 1
    return 2


def cyclic_interval(n: int, a: int, h: int) -> Basket:
    """I_h(a): doubled residues a..a+h-1 mod m, with m-1 single when n is odd."""
    m = modulus_for(n)
    if h < 1:
        raise ValueError("h must be >= 1")
    if h > m:
        raise ValueError("h must be <= m")
    elems = []
    for k in range(h):
        x = (a + k) % m
        elems.extend([x] * _slot_capacity(n, x))
    return Basket(m, tuple(sorted(elems)))


class CycleKind(Enum):
    CYCLIC = "cyclic"
    SINGLETON = "singleton"
    NOT_CYCLIC = "not_cyclic"


@dataclass(frozen=True)
class Classification:
    kind: CycleKind
    a: int | None
    h: int | None
    wrapped: bool


@lru_cache(maxsize=1 << 16)
def classify(n: int, basket: Basket) -> Classification:
    """Recover (a, h) with basket == I_h(a) when one exists.

    Canonical a is the element whose predecessor mod m is absent; the
    full-circle basket gets a = 0.
    """
    m = modulus_for(n)
    if basket.modulus != m:
        raise ValueError("basket modulus does not match n")
    wrapped = basket.is_wrapped()
    present = set(basket.elements)
    starts = [x for x in present if (x - 1) % m not in present]
    if not starts:
        candidates = [0]  # full circle
    else:
        candidates = starts
    h = len(present)
    for a in candidates:
        try:
            if cyclic_interval(n, a, h) == basket:
                return Classification(CycleKind.CYCLIC, a, h, wrapped)
        except ValueError:
            pass
    if len(basket) == 1:
        return Classification(CycleKind.SINGLETON, None, None, wrapped)
    return Classification(CycleKind.NOT_CYCLIC, None, None, wrapped)


@lru_cache(maxsize=1 << 16)
def basket_length(basket: Basket) -> QNumber:
    """Exact length sum(q**x for x in basket) as an element of Z[q]."""
    m = basket.modulus
    coeffs = [0] * m
    for x in basket.elements:
        coeffs[x] += 1
    return QNumber(m, tuple(coeffs))


@lru_cache(maxsize=1 << 16)
def _length_float(basket: Basket) -> tuple[float, float]:
    """Cached hardware-float enclosure of the basket length."""
    return basket_length(basket)._float_enclosure()


def compare_lengths(b1: Basket, b2: Basket) -> Ordering:
    """Exact comparison of basket lengths with a cached float fast path."""
    if b1.elements == b2.elements:
        return Ordering.EQUAL
    lo1, hi1 = _length_float(b1)
    lo2, hi2 = _length_float(b2)
    if hi1 < lo2:
        return Ordering.LESS
    if lo1 > hi2:
        return Ordering.GREATER
    return basket_length(b1).compare(basket_length(b2))


def total_length(c: BasketCollection) -> QNumber:
    m = c.m
    total = zero(m)
    for b in c.baskets:
        total = total + basket_length(b)
    return total


def geometric_total(n: int) -> QNumber:
    """Closed-form stage total: 2*(1 + q + ... + q**(m-1)), minus q**(m-1)
    when n is odd."""
    m = modulus_for(n)
    total = zero(m)
    for x in range(m):
        total = total + q_power(m, x).scale(2)
    if n % 2 == 1:
        total = total - q_power(m, m - 1)
    return total
