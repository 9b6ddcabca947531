"""Exhaustive reference solvers for small instances."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterator, Sequence

import numpy as np

from .model import (
    CapExceeded,
    EarlySetSolution,
    EvaluatedSchedule,
    Instance,
    _check_permutation,
    edd_permutation,
    solution_from_early_set,
)

DEFAULT_MAX_N = 22
DEFAULT_MAX_SCENARIOS = 10**6


@dataclass(frozen=True)
class OracleReport:
    best: EarlySetSolution
    optimum_cardinality: int
    explored: int


def iter_feasible_early_sets(inst: Instance) -> Iterator[tuple[int, ...]]:
    """Yield every feasible early set (as EDD-ordered id tuples), empty set first.

    Sets are grown by appending jobs later in EDD order.  Appending never
    changes the worst-case completion of jobs already in the set, so an
    infeasible set has no feasible extension and its subtree is skipped
    without losing any feasible set.
    """
    order = edd_permutation(inst)
    g = inst.budget
    jobs = inst.jobs
    n = len(order)

    def grow(start: int, chosen: list[int], nominal: int, devs: list[int]) -> Iterator[tuple[int, ...]]:
        yield tuple(chosen)
        for pos in range(start, n):
            j = order[pos]
            job = jobs[j - 1]
            new_devs = sorted(devs + [job.p_hat], reverse=True)[:g]
            if nominal + job.p_bar + sum(new_devs) > job.d:
                continue
            chosen.append(j)
            yield from grow(pos + 1, chosen, nominal + job.p_bar, new_devs)
            chosen.pop()

    yield from grow(0, [], 0, [])


def _search(p_bar, p_hat, due, bits, g):
    """Depth-first walk over all feasible early sets; same growth rule as above.

    Jobs are given in EDD order; ``bits[i]`` is the id bitmask of job ``i``.
    Returns ``(best id mask, size, explored)`` where best means most jobs,
    then least nominal time, then lexicographically smallest sorted ids.
    """
    n = p_bar.shape[0]
    width = max(g, 1)
    devs = np.zeros((n + 1, width), dtype=np.int64)  # top deviations, descending, per depth
    ndev = np.zeros(n + 1, dtype=np.int64)
    dev_sum = np.zeros(n + 1, dtype=np.int64)
    nominal = np.zeros(n + 1, dtype=np.int64)
    mask = np.zeros(n + 1, dtype=np.int64)
    next_pos = np.zeros(n + 1, dtype=np.int64)
    best_size, best_nominal, best_mask = 0, 0, 0
    explored = 1
    depth = 0
    while depth >= 0:
        pos = next_pos[depth]
        if pos >= n:
            depth -= 1
            continue
        next_pos[depth] = pos + 1
        # top-g deviations after adding job pos
        k = ndev[depth]
        x = p_hat[pos]
        new_sum = dev_sum[depth]
        if g > 0:
            if k < g:
                new_sum += x
            elif x > devs[depth, k - 1]:
                new_sum += x - devs[depth, k - 1]
        if nominal[depth] + p_bar[pos] + new_sum > due[pos]:
            continue
        child = depth + 1
        if g > 0:
            kk = k if k < g else g - 1
            # insert x into the descending list, dropping the smallest when full
            t = kk
            while t > 0 and devs[depth, t - 1] < x:
                devs[child, t] = devs[depth, t - 1]
                t -= 1
            if t < g and (k < g or x > devs[depth, k - 1]):
                devs[child, t] = x
                for u in range(t):
                    devs[child, u] = devs[depth, u]
                ndev[child] = min(k + 1, g)
            else:
                for u in range(k):
                    devs[child, u] = devs[depth, u]
                ndev[child] = k
        dev_sum[child] = new_sum
        nominal[child] = nominal[depth] + p_bar[pos]
        mask[child] = mask[depth] | bits[pos]
        next_pos[child] = pos + 1
        depth = child
        explored += 1
        if depth > best_size or (
            depth == best_size
            and (
                nominal[depth] < best_nominal
                or (nominal[depth] == best_nominal and _lex_smaller(mask[depth], best_mask))
            )
        ):
            best_size, best_nominal, best_mask = depth, nominal[depth], mask[depth]
    return best_mask, best_size, explored


def _lex_smaller(a, b):
    """Sorted ids of mask ``a`` precede those of ``b`` (equal sizes)."""
    diff = a ^ b
    return diff != 0 and (a & (diff & -diff)) != 0


try:
    import numba
except ImportError:  # pragma: no cover
    numba = None
if numba is not None:
    _lex_smaller = numba.njit(cache=True)(_lex_smaller)
    _search = numba.njit(cache=True)(_search)


def solve_bruteforce(inst: Instance, max_n: int = DEFAULT_MAX_N) -> OracleReport:
    """Best early set by exhaustive enumeration.

    Ties between sets of maximum size go to the smaller total nominal time,
    then to the lexicographically smallest sorted id tuple.
    """
    if inst.n > max_n:
        raise CapExceeded("oracle-n", inst.n, max_n)
    if inst.n > 62:
        raise CapExceeded("oracle-n", inst.n, 62)
    order = edd_permutation(inst)
    jobs = [inst.jobs[i - 1] for i in order]
    best_mask, size, explored = _search(
        np.array([j.p_bar for j in jobs], dtype=np.int64),
        np.array([j.p_hat for j in jobs], dtype=np.int64),
        np.array([j.d for j in jobs], dtype=np.int64),
        np.array([1 << (i - 1) for i in order], dtype=np.int64),
        inst.budget,
    )
    early = [i for i in inst.ids if int(best_mask) >> (i - 1) & 1]
    solution = solution_from_early_set(inst, early, algorithm="oracle")
    return OracleReport(solution, int(size), int(explored))


def solve_bruteforce_reference(inst: Instance, max_n: int = DEFAULT_MAX_N) -> OracleReport:
    """Same result as :func:`solve_bruteforce`, walking :func:`iter_feasible_early_sets` in Python."""
    if inst.n > max_n:
        raise CapExceeded("oracle-n", inst.n, max_n)
    best_key = None
    best: tuple[int, ...] = ()
    explored = 0
    for early in iter_feasible_early_sets(inst):
        explored += 1
        key = (-len(early), sum(inst.jobs[i - 1].p_bar for i in early), tuple(sorted(early)))
        if best_key is None or key < best_key:
            best_key, best = key, early
    solution = solution_from_early_set(inst, best, algorithm="oracle")
    return OracleReport(solution, len(best), explored)


def scenario_count(n: int, gamma: int) -> int:
    return sum(comb(n, t) for t in range(min(gamma, n) + 1))


def check_by_scenario_enumeration(
    inst: Instance, sigma: Sequence[int], max_scenarios: int = DEFAULT_MAX_SCENARIOS
) -> EvaluatedSchedule:
    """Evaluate ``sigma`` by maximizing each completion time over every scenario explicitly."""
    sigma = _check_permutation(inst, sigma)
    count = scenario_count(inst.n, inst.budget)
    if count > max_scenarios:
        raise CapExceeded("scenarios", count, max_scenarios)
    worst = {j: 0 for j in sigma}
    for size in range(inst.budget + 1):
        for deviating in itertools.combinations(inst.ids, size):
            dev = set(deviating)
            t = 0
            for j in sigma:
                job = inst.jobs[j - 1]
                t += job.p_bar + (job.p_hat if j in dev else 0)
                if t > worst[j]:
                    worst[j] = t
    flags = {j: int(worst[j] > inst.jobs[j - 1].d) for j in sigma}
    return EvaluatedSchedule(sigma, worst, flags)
