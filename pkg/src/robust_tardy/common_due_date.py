"""Common due date: robust equal-profit knapsack solved by searching the dual variable.

For a fixed dual value ``mu`` the worst-case constraint becomes a plain
knapsack with weights ``p_bar + max(p_hat - mu, 0)`` and capacity
``d - gamma * mu``.  With equal profits the best selection for that ``mu``
takes jobs by ascending weight while they fit.  Only ``mu = 0`` and
``mu = p_hat_j`` need to be tried.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import EarlySetSolution, Instance, InstanceError, solution_from_early_set


@dataclass(frozen=True)
class DualCandidate:
    mu: int
    weights: tuple[int, ...]  # indexed by job id - 1
    capacity: int
    selection: tuple[int, ...]  # job ids in the order they were taken

    @property
    def count(self) -> int:
        return len(self.selection)


def modified_weight(p_bar: int, p_hat: int, mu: int) -> int:
    return p_bar + max(p_hat - mu, 0)


def mu_candidates(inst: Instance) -> list[int]:
    return sorted({0} | {j.p_hat for j in inst.jobs})


def _common_due_date(inst: Instance) -> int:
    dates = {j.d for j in inst.jobs}
    if len(dates) > 1:
        raise InstanceError(f"common-due-date solver needs one due date, found {len(dates)}")
    return dates.pop() if dates else 0


def _take_prefix(order, weights, capacity: int) -> tuple[int, ...]:
    taken = []
    load = 0
    if capacity < 0:
        return ()
    for j in order:
        load += weights[j - 1]
        if load > capacity:
            break
        taken.append(j)
    return tuple(taken)


def greedy_for_mu(inst: Instance, mu: int) -> DualCandidate:
    """Reference selection for one ``mu``: full sort by (weight, id), stop at the first misfit."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    d = _common_due_date(inst)
    weights = tuple(modified_weight(j.p_bar, j.p_hat, mu) for j in inst.jobs)
    capacity = d - inst.budget * mu
    order = sorted(inst.ids, key=lambda i: (weights[i - 1], i))
    return DualCandidate(mu, weights, capacity, _take_prefix(order, weights, capacity))


def presorted_orders(inst: Instance) -> tuple[list[int], list[int]]:
    """Job ids by (p_bar + p_hat, id) and by (p_bar, id)."""
    by_full = sorted(inst.ids, key=lambda i: (inst.jobs[i - 1].p_bar + inst.jobs[i - 1].p_hat, i))
    by_nominal = sorted(inst.ids, key=lambda i: (inst.jobs[i - 1].p_bar, i))
    return by_full, by_nominal


def merged_order(inst: Instance, mu: int, by_full: list[int], by_nominal: list[int]) -> list[int]:
    """Linear merge of the two presorted orders into ascending (weight, id) for ``mu``.

    Jobs with ``p_hat > mu`` come from ``by_full`` (their weights are all
    shifted by the same ``-mu``); the rest come from ``by_nominal``.
    """
    jobs = inst.jobs
    a = [i for i in by_full if jobs[i - 1].p_hat > mu]
    b = [i for i in by_nominal if jobs[i - 1].p_hat <= mu]

    def key(i: int) -> tuple[int, int]:
        job = jobs[i - 1]
        return (modified_weight(job.p_bar, job.p_hat, mu), i)

    out = []
    ia = ib = 0
    while ia < len(a) and ib < len(b):
        if key(a[ia]) <= key(b[ib]):
            out.append(a[ia])
            ia += 1
        else:
            out.append(b[ib])
            ib += 1
    out.extend(a[ia:])
    out.extend(b[ib:])
    return out


def _count_kernel(full_sorted, hat_full, nom_sorted, hat_nom, mus, d, g):
    """Selection size for every ``mu``: merge the two sorted weight lists and stop at the first misfit.

    Ties between the lists do not change the count, since equal weights give equal prefix sums.
    """
    n = full_sorted.shape[0]
    counts = np.zeros(mus.shape[0], dtype=np.int64)
    for t in range(mus.shape[0]):
        mu = mus[t]
        cap = d - g * mu
        if cap < 0:
            continue
        ia = 0
        ib = 0
        load = 0
        taken = 0
        while True:
            while ia < n and hat_full[ia] <= mu:
                ia += 1
            while ib < n and hat_nom[ib] > mu:
                ib += 1
            if ia < n and (ib >= n or full_sorted[ia] - mu <= nom_sorted[ib]):
                w = full_sorted[ia] - mu
                ia += 1
            elif ib < n:
                w = nom_sorted[ib]
                ib += 1
            else:
                break
            load += w
            if load > cap:
                break
            taken += 1
        counts[t] = taken
    return counts


try:
    import numba
except ImportError:  # pragma: no cover - the loop then runs as plain Python
    numba = None
if numba is not None:
    _count_kernel = numba.njit(cache=True, nogil=True)(_count_kernel)


def _counts_by_mu(inst: Instance, mus: list[int], d: int) -> list[int]:
    """Selection size for every ``mu``, using the two presorted orders (one linear merge per ``mu``)."""
    p_bar = np.array([j.p_bar for j in inst.jobs], dtype=np.int64)
    p_hat = np.array([j.p_hat for j in inst.jobs], dtype=np.int64)
    full = p_bar + p_hat
    o_full = np.lexsort((np.arange(inst.n), full))
    o_nom = np.lexsort((np.arange(inst.n), p_bar))
    counts = _count_kernel(
        full[o_full], p_hat[o_full], p_bar[o_nom], p_hat[o_nom], np.array(mus, dtype=np.int64), d, inst.budget
    )
    return [int(c) for c in counts]


def solve_common_due_date(inst: Instance) -> EarlySetSolution:
    """Most early jobs over all dual candidates; ties go to the smallest ``mu``."""
    d = _common_due_date(inst)
    if inst.n == 0:
        return solution_from_early_set(inst, (), algorithm="common-dd", mu=0)
    mus = mu_candidates(inst)
    counts = _counts_by_mu(inst, mus, d)
    best = max(counts)
    mu = mus[counts.index(best)]
    by_full, by_nominal = presorted_orders(inst)
    order = merged_order(inst, mu, by_full, by_nominal)
    weights = [modified_weight(j.p_bar, j.p_hat, mu) for j in inst.jobs]
    chosen = _take_prefix(order, weights, d - inst.budget * mu)
    assert len(chosen) == best
    return solution_from_early_set(inst, chosen, algorithm="common-dd", mu=mu)
