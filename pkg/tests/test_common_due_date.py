from __future__ import annotations

import random

import pytest

from robust_tardy import (
    InstanceError,
    greedy_for_mu,
    is_feasible_early_set,
    make_instance,
    solve_bruteforce,
    solve_common_due_date,
)
from robust_tardy.common_due_date import _counts_by_mu, merged_order, mu_candidates, presorted_orders
from robust_tardy.fpt import solve_moore
from robust_tardy.generators import gen_random

from conftest import I2_ROWS, max_early_by_subsets


def common(seed: int, n: int | None = None, gamma: int | None = None, max_d: int = 40):
    r = random.Random(seed)
    n = r.randint(0, 12) if n is None else n
    gamma = r.randint(0, 4) if gamma is None else gamma
    return gen_random(n, gamma, due_date_style="common", seed=seed, max_d=max_d).instance


def test_i2(i2):
    assert solve_common_due_date(i2).num_early == 2
    assert max_early_by_subsets(i2) == 2


def test_greedy_i2():
    cand = greedy_for_mu(make_instance(I2_ROWS, 1), 2)
    assert cand.weights == (5, 4, 5)
    assert cand.capacity == 9
    assert cand.count == 2
    assert cand.selection == (2, 1)


def test_negative_capacity():
    inst = make_instance([(1, 3, 4), (1, 5, 4)], 2)
    cand = greedy_for_mu(inst, 5)
    assert cand.capacity < 0 and cand.count == 0


def test_zero_due_date():
    assert solve_common_due_date(make_instance([(1, 0, 0), (2, 3, 0)], 1)).num_early == 0


def test_gamma_zero_is_plain_greedy():
    for seed in range(30):
        inst = common(seed, gamma=0)
        # with no budget, mu = max p_hat strips every deviation at no capacity cost
        cand = greedy_for_mu(inst, max(mu_candidates(inst)))
        assert cand.capacity == (inst.jobs[0].d if inst.n else 0)
        nominal = make_instance([(j.p_bar, 0, j.d) for j in inst.jobs], 0)
        assert cand.count == solve_common_due_date(inst).num_early == solve_moore(nominal).num_early


def test_rejects_several_due_dates(i1):
    with pytest.raises(InstanceError):
        solve_common_due_date(i1)


def test_empty():
    assert solve_common_due_date(make_instance([], 1)).objective == 0


def test_smallest_mu_wins_ties():
    inst = make_instance([(1, 1, 10), (1, 2, 10)], 1)
    sol = solve_common_due_date(inst)
    assert sol.num_early == 2 and sol.info["mu"] == 0


@pytest.mark.parametrize("seed", range(150))
def test_oracle_equivalence(seed):
    inst = common(seed)
    sol = solve_common_due_date(inst)
    assert sol.objective == solve_bruteforce(inst).best.objective
    assert is_feasible_early_set(inst, sol.early)


@pytest.mark.parametrize("seed", range(60))
def test_merged_order_is_a_full_resort(seed):
    inst = common(seed, n=random.Random(seed).randint(0, 25))
    by_full, by_nominal = presorted_orders(inst)
    for mu in range(0, 12):
        expected = greedy_for_mu(inst, mu)
        order = merged_order(inst, mu, by_full, by_nominal)
        assert order == sorted(inst.ids, key=lambda i: (expected.weights[i - 1], i))


@pytest.mark.parametrize("seed", range(60))
def test_vectorized_counts_match_reference(seed):
    inst = common(seed, n=30, max_d=120)
    mus = mu_candidates(inst)
    assert _counts_by_mu(inst, mus, inst.jobs[0].d) == [greedy_for_mu(inst, mu).count for mu in mus]


@pytest.mark.parametrize("seed", range(60))
def test_integer_mu_sweep_never_beats_grid(seed):
    inst = common(seed)
    if not inst.n:
        return
    grid_best = max(greedy_for_mu(inst, mu).count for mu in mu_candidates(inst))
    top = max(j.p_hat for j in inst.jobs)
    assert max(greedy_for_mu(inst, mu).count for mu in range(top + 1)) <= grid_best


def test_every_candidate_selection_is_robust_feasible():
    # the dualization is exact: any selection fitting some mu is feasible
    for seed in range(60):
        inst = common(seed)
        for mu in range(12):
            cand = greedy_for_mu(inst, mu)
            assert is_feasible_early_set(inst, cand.selection)
