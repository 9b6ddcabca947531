"""Pseudo-polynomial DP for a small number of distinct due dates.

Every distinct due date ``d(l)`` gives one worst-case constraint over the
early jobs with due date at most ``d(l)``.  Each constraint is dualized with
its own scalar ``mu_l`` taken from ``{0} | {p_hat_j}``.  For a fixed vector
``mu`` a job of class ``l`` weighs ``p_bar + max(p_hat - mu_i, 0)`` in every
constraint ``i >= l`` and constraint ``i`` has capacity
``d(i) - gamma * mu_i``.  A DP over the jobs in EDD order tracks the load
already consumed in the first ``k - 1`` constraints and minimizes the load
of the last one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import prod
from typing import Iterator

from .model import CapExceeded, EarlySetSolution, Instance, edd_permutation, solution_from_early_set

DEFAULT_MAX_CLASSES = 3
DEFAULT_MAX_STATES = 10**7


@dataclass(frozen=True)
class DueDateClassing:
    d_sorted: tuple[int, ...]
    class_of: dict[int, int]  # job id -> class index, 0-based
    order: tuple[int, ...]  # EDD order; class blocks are contiguous

    @property
    def k_d(self) -> int:
        return len(self.d_sorted)

    def members(self, l: int) -> list[int]:
        return [j for j in self.order if self.class_of[j] == l]


@dataclass(frozen=True)
class MuVector:
    mu: tuple[int, ...]
    reduced_due: tuple[int, ...]

    def weight(self, p_bar: int, p_hat: int, l: int) -> int:
        return p_bar + max(p_hat - self.mu[l], 0)


def due_date_classes(inst: Instance) -> DueDateClassing:
    d_sorted = tuple(inst.due_dates)
    index = {d: l for l, d in enumerate(d_sorted)}
    class_of = {j.id: index[j.d] for j in inst.jobs}
    return DueDateClassing(d_sorted, class_of, tuple(edd_permutation(inst)))


def mu_grid(inst: Instance, k_d: int) -> Iterator[MuVector]:
    values = sorted({0} | {j.p_hat for j in inst.jobs})
    d_sorted = inst.due_dates
    g = inst.budget
    for mu in itertools.product(values, repeat=k_d):
        reduced = tuple(d - g * m for d, m in zip(d_sorted, mu)) if len(d_sorted) == k_d else ()
        yield MuVector(mu, reduced)


def state_bound(inst: Instance, classing: DueDateClassing | None = None) -> int:
    """Total size of the load grids over every grid vector (the state cap check)."""
    classing = classing or due_date_classes(inst)
    total = 0
    for mv in mu_grid(inst, classing.k_d):
        if any(r < 0 for r in mv.reduced_due):
            continue
        total += prod(r + 1 for r in mv.reduced_due[:-1])
    return total


def _useful(mv: MuVector, classing: DueDateClassing, inst: Instance, max_hat_upto: list[int]) -> bool:
    if any(r < 0 for r in mv.reduced_due):
        return False
    # raising mu_l past every deviation in its constraint only shrinks the capacity
    return all(mv.mu[l] <= max_hat_upto[l] or mv.mu[l] == 0 for l in range(classing.k_d))


def _pareto(states: dict) -> dict:
    """Drop states whose loads are all no smaller than another state's with the same count."""
    by_q: dict[int, list] = {}
    for (q, v), val in states.items():
        by_q.setdefault(q, []).append((v, val))
    kept = {}
    for q, items in by_q.items():
        items.sort(key=lambda item: (item[0], item[1][0]))
        if len(items[0][0]) <= 1:
            # one load coordinate: sorted by v, a state survives only if it lowers f
            low = None
            for v, val in items:
                if low is None or val[0] < low:
                    low = val[0]
                    kept[(q, v)] = val
            continue
        front: list = []
        for v, val in items:
            f = val[0]
            if any(g <= f and all(a <= b for a, b in zip(w, v)) for w, g in front):
                continue
            front.append((v, f))
            kept[(q, v)] = val
    return kept


def _run(inst: Instance, classing: DueDateClassing, mv: MuVector, prune: bool):
    """DP for one grid vector; returns per-stage tables of ``(q, v) -> (f, parent)``."""
    K = classing.k_d
    cap = mv.reduced_due
    jobs = inst.jobs
    tables = [{(0, (0,) * (K - 1)): (0, None)}]
    for j in classing.order:
        job = jobs[j - 1]
        l = classing.class_of[j]
        add_v = [mv.weight(job.p_bar, job.p_hat, i) if i >= l else 0 for i in range(K - 1)]
        add_f = mv.weight(job.p_bar, job.p_hat, K - 1)
        nxt: dict = {}
        for key, (f, _) in tables[-1].items():
            q, v = key
            cur = nxt.get(key)
            if cur is None or f < cur[0]:
                nxt[key] = (f, (key, False))
            nv = tuple(a + b for a, b in zip(v, add_v))
            nf = f + add_f
            if nf > cap[-1] or any(a > c for a, c in zip(nv, cap)):
                continue
            nkey = (q + 1, nv)
            cur = nxt.get(nkey)
            if cur is None or nf < cur[0]:
                nxt[nkey] = (nf, (key, True))
        tables.append(_pareto(nxt) if prune else nxt)
    return tables


def _reconstruct(classing: DueDateClassing, tables, key) -> list[int]:
    early = []
    for stage in range(len(tables) - 1, 0, -1):
        _, (parent, took) = tables[stage][key]
        if took:
            early.append(classing.order[stage - 1])
        key = parent
    return early[::-1]


def solve_multi_due_date(
    inst: Instance,
    max_classes: int = DEFAULT_MAX_CLASSES,
    max_states: int = DEFAULT_MAX_STATES,
    prune: bool = True,
) -> EarlySetSolution:
    classing = due_date_classes(inst)
    K = classing.k_d
    if inst.n == 0:
        return solution_from_early_set(inst, (), algorithm="multi-dd", mu=[])
    if K > max_classes:
        raise CapExceeded("due-dates", K, max_classes)
    bound = state_bound(inst, classing)
    if bound > max_states:
        raise CapExceeded("states", bound, max_states)

    max_hat_upto = []
    running = 0
    for l in range(K):
        running = max([running] + [inst.jobs[j - 1].p_hat for j in classing.members(l)])
        max_hat_upto.append(running)

    best_q, best_mu, best_early = 0, (0,) * K, []
    for mv in mu_grid(inst, K):
        if not _useful(mv, classing, inst, max_hat_upto):
            continue
        tables = _run(inst, classing, mv, prune)
        final = tables[-1]
        q = max(q for q, _ in final)
        if q > best_q:
            key = min((k for k in final if k[0] == q), key=lambda k: (final[k][0], k[1]))
            best_q, best_mu, best_early = q, mv.mu, _reconstruct(classing, tables, key)
    return solution_from_early_set(inst, best_early, algorithm="multi-dd", mu=list(best_mu))
