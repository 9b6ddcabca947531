from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robust_tardy import (
    InstanceError,
    edd_permutation,
    evaluate_schedule,
    is_feasible_early_set,
    make_instance,
    solution_from_early_set,
    top_gamma_deviation_sum,
    validate_instance,
)
from robust_tardy.model import InfeasibleEarlySet
from robust_tardy.oracle import check_by_scenario_enumeration

from conftest import instances


def raw(rows, gamma=0):
    return {
        "gamma": gamma,
        "jobs": [{"id": i, "p_bar": a, "p_hat": b, "d": c} for i, (a, b, c) in enumerate(rows, 1)],
    }


class TestValidate:
    def test_all_zero(self):
        inst = validate_instance(raw([(0, 0, 0)] * 3))
        assert inst.n == 3

    def test_negative(self):
        with pytest.raises(InstanceError, match="negative value"):
            validate_instance(raw([(-1, 0, 0)]))

    def test_overflow(self):
        with pytest.raises(InstanceError, match="overflow risk"):
            validate_instance(raw([(2**62, 0, 0), (2**62, 0, 0)]))

    def test_duplicate_and_missing_ids(self):
        data = raw([(1, 1, 1), (1, 1, 1)])
        data["jobs"][1]["id"] = 1
        with pytest.raises(InstanceError, match="duplicate"):
            validate_instance(data)
        data["jobs"][1]["id"] = 3
        with pytest.raises(InstanceError, match="exactly 1..2"):
            validate_instance(data)

    def test_unknown_fields(self):
        data = raw([(1, 1, 1)])
        data["jobs"][0]["w"] = 1
        with pytest.raises(InstanceError, match="unknown job fields"):
            validate_instance(data)
        data = raw([(1, 1, 1)])
        data["extra"] = 0
        with pytest.raises(InstanceError, match="unknown instance fields"):
            validate_instance(data)

    def test_non_integer(self):
        data = raw([(1, 1, 1)])
        data["jobs"][0]["d"] = 1.5
        with pytest.raises(InstanceError):
            validate_instance(data)
        data["jobs"][0]["d"] = True
        with pytest.raises(InstanceError):
            validate_instance(data)

    def test_gamma_above_n_kept_for_echo(self):
        inst = validate_instance(raw([(1, 1, 1)] * 2, gamma=7))
        assert inst.gamma == 7 and inst.budget == 2
        assert inst.to_dict()["gamma"] == 7

    def test_roundtrip(self, i1):
        assert validate_instance(i1.to_dict()) == i1
        assert validate_instance(i1) == i1


class TestEdd:
    def test_ties_by_id(self):
        assert edd_permutation(make_instance([(0, 0, 6), (0, 0, 5), (0, 0, 6)], 0)) == [2, 1, 3]

    def test_equal_and_increasing(self):
        assert edd_permutation(make_instance([(0, 0, 4)] * 4, 0)) == [1, 2, 3, 4]
        assert edd_permutation(make_instance([(0, 0, i) for i in range(5)], 0)) == [1, 2, 3, 4, 5]


@pytest.mark.parametrize("gamma,expected", [(0, 0), (2, 5), (5, 5)])
def test_top_gamma(gamma, expected):
    inst = make_instance([(0, 3, 0), (0, 0, 0), (0, 2, 0)], gamma)
    assert top_gamma_deviation_sum({1, 2, 3}, inst) == expected


class TestEvaluate:
    def test_gamma_zero_is_prefix_sums(self):
        inst = make_instance([(2, 9, 0), (3, 9, 0), (4, 9, 0)], 0)
        assert evaluate_schedule(inst, [3, 1, 2]).worst_completion == {3: 4, 1: 6, 2: 9}

    def test_single_job(self):
        ev = evaluate_schedule(make_instance([(2, 3, 5)], 1), [1])
        assert ev.worst_completion[1] == 5 and ev.tardy_flag[1] == 0

    def test_i1(self, i1):
        ev = evaluate_schedule(i1, [1, 3, 2])
        assert ev.objective == 1 and ev.tardy == {2}
        assert ev == check_by_scenario_enumeration(i1, [1, 3, 2])

    def test_rejects_non_permutation(self, i1):
        for bad in ([1, 2], [1, 1, 2], [1, 2, 4]):
            with pytest.raises(ValueError):
                evaluate_schedule(i1, bad)


class TestEarlySets:
    def test_examples(self, i1):
        assert is_feasible_early_set(i1, [])
        assert is_feasible_early_set(i1, {1, 3})
        check = is_feasible_early_set(i1, {1, 2})
        assert not check and check.violator == 2

    def test_solution(self, i1):
        assert solution_from_early_set(i1, []).objective == 3
        sol = solution_from_early_set(i1, {3, 1})
        assert sol.objective == 1 and sol.sigma == (1, 3, 2)
        assert sol.certificate == {1: 5, 3: 6}
        with pytest.raises(InfeasibleEarlySet) as err:
            solution_from_early_set(i1, {1, 2})
        assert err.value.violator == 2

    def test_everything_early_with_late_due_dates(self):
        inst = make_instance([(5, 5, 1000)] * 4, 2)
        assert solution_from_early_set(inst, inst.ids).objective == 0

    def test_canonical_sigma_ties(self):
        inst = make_instance([(1, 0, 9), (1, 0, 3), (1, 0, 9), (1, 0, 0)], 0)
        assert solution_from_early_set(inst, {1, 2, 3}).sigma == (2, 1, 3, 4)


@settings(max_examples=150, deadline=None)
@given(instances(max_n=7, max_gamma=3), st.randoms(use_true_random=False))
def test_evaluate_matches_scenarios(inst, rnd):
    sigma = list(inst.ids)
    rnd.shuffle(sigma)
    assert evaluate_schedule(inst, sigma) == check_by_scenario_enumeration(inst, sigma)


@settings(max_examples=100, deadline=None)
@given(instances(max_n=7), st.randoms(use_true_random=False))
def test_gamma_monotone_and_extremes(inst, rnd):
    sigma = list(inst.ids)
    rnd.shuffle(sigma)
    worst = [evaluate_schedule(inst.__class__(inst.jobs, g), sigma).worst_completion for g in range(inst.n + 2)]
    for lo, hi in zip(worst, worst[1:]):
        assert all(lo[j] <= hi[j] for j in sigma)
    t0 = t1 = 0
    for j in sigma:
        job = inst.job(j)
        t0 += job.p_bar
        t1 += job.p_bar + job.p_hat
        assert worst[0][j] == t0 and worst[-1][j] == t1


@settings(max_examples=100, deadline=None)
@given(instances(max_n=7), st.data())
def test_feasibility_three_ways(inst, data):
    early = data.draw(st.sets(st.sampled_from(list(inst.ids)) if inst.n else st.nothing()))
    ok = bool(is_feasible_early_set(inst, early))
    head = sorted(early, key=lambda i: (inst.job(i).d, i))
    sigma = head + [i for i in inst.ids if i not in early]
    ev = evaluate_schedule(inst, sigma)
    assert ok == all(ev.tardy_flag[j] == 0 for j in early)
    if ok:
        sol = solution_from_early_set(inst, early)
        assert all(sol.certificate[j] <= inst.job(j).d for j in early)


def test_adding_a_job_never_lowers_prefix_completion():
    inst = make_instance([(2, 1, 20), (1, 4, 20), (3, 0, 20), (0, 2, 20)], 2)
    for r in range(1, 4):
        for subset in itertools.combinations(inst.ids, r):
            for extra in set(inst.ids) - set(subset):
                small = set(subset)
                big = small | {extra}
                order_s = sorted(small, key=lambda i: (inst.job(i).d, i))
                order_b = sorted(big, key=lambda i: (inst.job(i).d, i))
                ws = evaluate_schedule(inst, order_s + [i for i in inst.ids if i not in small]).worst_completion
                wb = evaluate_schedule(inst, order_b + [i for i in inst.ids if i not in big]).worst_completion
                assert all(ws[j] <= wb[j] for j in small)
