import math

import pytest

from lexdisc.strategies import (
    BoundsRow,
    CirclePointSet,
    bounds_table,
    dbe_points,
    greedy_half,
    lb,
    strategy_from_points,
    ub_dbe,
    ub_lexmerge,
)
from lexdisc.strategy import disc_of, disc_prefix


class TestClosedForms:
    def test_pinned_values(self):
        assert ub_lexmerge(3) == pytest.approx(math.sqrt(2), rel=1e-12)
        assert ub_lexmerge(7) == pytest.approx(2 ** 0.75, rel=1e-12)
        assert lb(4) == pytest.approx(math.sqrt(2), rel=1e-12)
        # ln(1+1/n)/ln((1-1/(2n))^-1) at n = 3 and 4
        assert ub_dbe(3) == pytest.approx(1.577882931, rel=1e-8)
        assert ub_dbe(4) == pytest.approx(1.671094317, rel=1e-8)

    def test_trivial_cases(self):
        assert lb(1) == ub_lexmerge(1) == ub_dbe(1) == 1.0
        assert ub_lexmerge(2) == 1.0

    def test_ordering(self):
        for n in range(1, 500):
            assert lb(n) <= ub_lexmerge(n) + 1e-12
            assert ub_lexmerge(n) <= 2 and ub_dbe(n) <= 2 and lb(n) <= 2

    def test_asymptotic_coefficients(self):
        n = 10 ** 5
        assert n * (2 - ub_lexmerge(n)) == pytest.approx(4 * math.log(2), rel=0.01)
        assert n * (2 - ub_dbe(n)) == pytest.approx(1.5, rel=0.01)
        assert n * (2 - lb(n)) == pytest.approx(6 * math.log(2), rel=0.01)


class TestDbeSequence:
    def test_first_points(self):
        pts = dbe_points(3).points
        assert pts[0] == 0.0
        assert pts[1] == pytest.approx(math.log2(3) - 1, abs=1e-12)
        assert pts[2] == pytest.approx(math.log2(5) - 2, abs=1e-12)

    def test_distinctness_enforced(self):
        with pytest.raises(ValueError):
            CirclePointSet(points=(0.25, 0.25))

    def test_strategy_valid_and_below_two(self):
        for n in (1, 2, 3, 10, 100, 1000):
            s = strategy_from_points(dbe_points(n))
            s.validate()
            assert disc_of(s) < 2.0

    def test_n3_matches_bound(self):
        s = strategy_from_points(dbe_points(3))
        assert disc_of(s) == pytest.approx(ub_dbe(3), rel=1e-9)

    def test_prefix_disc_below_two(self):
        s = strategy_from_points(dbe_points(1000))
        for t in range(1, 1001, 97):
            assert disc_prefix(s, t) < 2.0


class TestGreedyHalf:
    def test_disc_two(self):
        s = greedy_half(6)
        s.validate()
        assert disc_of(s) == pytest.approx(2.0)

    def test_trivial(self):
        assert disc_of(greedy_half(1)) == 1.0


class TestBoundsTable:
    def test_rows_and_types(self):
        rows = bounds_table(1, 10)
        assert [r.n for r in rows] == list(range(1, 11))
        assert all(isinstance(r, BoundsRow) for r in rows)
        assert all(r.optimal is None for r in rows)

    def test_bad_range(self):
        with pytest.raises(ValueError):
            bounds_table(5, 3)
        with pytest.raises(ValueError):
            bounds_table(0, 3)

    def test_with_optimal_small(self):
        rows = bounds_table(3, 4, include_optimal=True, tol=1e-6)
        for r in rows:
            assert r.optimal == pytest.approx(math.sqrt(2), abs=1e-5)
