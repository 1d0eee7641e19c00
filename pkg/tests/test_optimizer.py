import math
from fractions import Fraction

import pytest

from lexdisc.lexmerge import run
from lexdisc.optimizer import (
    SplitSchedule,
    conjecture_report,
    enumerate_schedules,
    feasible,
    min_disc_for_schedule,
    optimize,
    replay_witness,
    schedule_from_trace,
    tree_key,
)
from lexdisc.strategies import lb, ub_lexmerge


class TestEnumeration:
    def test_counts(self):
        raw = {n: sum(1 for _ in enumerate_schedules(n, dedup=False)) for n in (2, 3, 4, 5)}
        assert raw == {2: 1, 3: 2, 4: 6, 5: 24}
        canonical = {n: sum(1 for _ in enumerate_schedules(n)) for n in (2, 3, 4, 5)}
        assert canonical == {2: 1, 3: 1, 4: 2, 5: 5}

    def test_dedup_keeps_one_per_tree_shape(self):
        for n in (4, 5, 6):
            raw_keys = {tree_key(s) for s in enumerate_schedules(n, dedup=False)}
            canon = [tree_key(s) for s in enumerate_schedules(n)]
            assert len(canon) == len(set(canon))
            assert set(canon) == raw_keys

    def test_bad_choice_rejected(self):
        with pytest.raises(ValueError):
            SplitSchedule(n=3, choices=(0, 5))


class TestFeasibility:
    def test_monotone_in_d(self):
        s = next(enumerate_schedules(3))
        assert not feasible(s, 1.41)[0]
        assert feasible(s, 1.42)[0]
        assert feasible(s, 1.9)[0]

    def test_exact_witness_satisfies_all_ratios(self):
        s = next(enumerate_schedules(4))
        ok, w = feasible(s, Fraction(3, 2))
        assert ok
        assert sum(w.leaf_lengths) == 1
        assert all(y > 0 for y in w.leaf_lengths)
        assert w.achieved_disc <= 1.5 + 1e-12

    def test_below_one_infeasible(self):
        s = next(enumerate_schedules(3))
        assert not feasible(s, 0.9)[0]

    def test_float_and_exact_agree(self):
        s = next(enumerate_schedules(5))
        for d in (1.3, 1.5, 1.6, 1.8):
            assert feasible(s, d, exact=False)[0] == feasible(s, d, exact=True)[0]


class TestOptimize:
    def test_n3_sqrt2(self):
        result = optimize(3, 1e-7)
        assert result.disc == pytest.approx(math.sqrt(2), abs=1e-6)

    def test_n4_sqrt2(self):
        result = optimize(4, 1e-7)
        assert result.disc == pytest.approx(math.sqrt(2), abs=1e-6)

    def test_witness_replay_consistent(self):
        result = optimize(4, 1e-6)
        assert replay_witness(result.schedule, result.witness.leaf_lengths) \
            == pytest.approx(result.witness.achieved_disc)
        assert result.witness.achieved_disc <= result.disc + 1e-9

    def test_cap_enforced(self):
        with pytest.raises(ValueError):
            optimize(9)

    def test_jobs_deterministic(self):
        a = optimize(5, 1e-6, jobs=1)
        b = optimize(5, 1e-6, jobs=3)
        assert a.disc == b.disc
        assert a.schedule == b.schedule


class TestSandwich:
    @pytest.mark.parametrize("n", [5, 6, 7])
    def test_sandwich_and_verdict(self, n):
        report = conjecture_report(n, tol=1e-6)
        assert lb(n) - 1e-6 <= report.optimal <= ub_lexmerge(n) + 1e-6
        assert report.verdict == "consistent"
        assert report.matches_conjecture


class TestScheduleBridge:
    @pytest.mark.parametrize("n", [2, 3, 5, 6, 7])
    def test_merge_run_schedule_is_enumerated(self, n):
        key = tree_key(schedule_from_trace(run(n)))
        assert key in {tree_key(s) for s in enumerate_schedules(n)}

    def test_min_disc_of_merge_schedule_matches_formula(self):
        sched = schedule_from_trace(run(6))
        assert min_disc_for_schedule(sched, 1e-7) == pytest.approx(
            ub_lexmerge(6), abs=1e-6
        )


def test_trivial_sizes():
    assert optimize(1, 1e-6).disc == 1.0
    assert optimize(2, 1e-6).disc == 1.0


def test_largest_first_pruning_same_optimum():
    plain = optimize(5, 1e-6)
    pruned = optimize(5, 1e-6, largest_first=True)
    assert pruned.disc == pytest.approx(plain.disc, abs=2e-6)
