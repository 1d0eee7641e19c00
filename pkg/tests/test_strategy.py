import pytest

from lexdisc.lexmerge import run, to_strategy
from lexdisc.strategy import Strategy, StrategyError, disc_of, disc_prefix


def halving(n):
    cur = [1.0]
    splits = []
    for _ in range(n - 1):
        x = max(cur)
        cur.remove(x)
        splits.append((x, x / 2, x / 2))
        cur += [x / 2, x / 2]
    return Strategy(splits=tuple(splits))


class TestReplay:
    def test_length(self):
        assert halving(5).length == 5

    def test_partition_sizes(self):
        s = halving(6)
        for t in range(1, 7):
            assert len(s.partition(t)) == t

    def test_partition_out_of_range(self):
        s = halving(3)
        with pytest.raises(ValueError):
            s.partition(0)
        with pytest.raises(ValueError):
            s.partition(4)

    def test_split_must_reference_live_interval(self):
        bad = Strategy(splits=((0.7, 0.35, 0.35),))
        with pytest.raises(StrategyError):
            bad.validate()

    def test_split_halves_must_sum(self):
        bad = Strategy(splits=((1.0, 0.6, 0.5),))
        with pytest.raises(StrategyError):
            bad.validate()


class TestDisc:
    def test_halving_disc(self):
        # worst ratio of repeated halving is exactly 2 from n=3 on
        assert disc_of(halving(2)) == 1.0
        assert disc_of(halving(5)) == pytest.approx(2.0)

    def test_prefix_monotone(self):
        s = to_strategy(run(30))
        vals = [disc_prefix(s, t) for t in range(1, 31)]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
        assert disc_of(s) == pytest.approx(vals[-1])

    def test_prefix_1_is_unit(self):
        assert disc_prefix(halving(4), 1) == 1.0


class TestExactCompanion:
    def test_exact_strategy_matches_floats(self):
        trace = run(11)
        s = to_strategy(trace)
        assert s.exact is not None
        exact_stages = list(s.exact.stages())
        float_stages = list(s.stages())
        scale = s.exact.total.to_float()
        for ex, fl in zip(exact_stages, float_stages):
            got = sorted(v.to_float() / scale for v in ex)
            assert got == pytest.approx(sorted(fl), rel=1e-9)
