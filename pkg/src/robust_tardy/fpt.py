"""Exact solver parameterized by the number k of jobs with nonzero deviation.

Jobs split into J1 (``p_hat > 0``) and J2 (``p_hat == 0``).  For every
subset E1 of J1 forced early (the rest of J1 is dropped as tardy) the best
set of J2 jobs is found by a Moore-Hodgson sweep that also protects the
slack of the E1 jobs.  That gives O(n log n + n 2^k) overall.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import (
    CapExceeded,
    EarlySetSolution,
    Instance,
    InstanceError,
    Job,
    _TopDeviations,
    edd_permutation,
    solution_from_early_set,
)

DEFAULT_MAX_K = 20
INF = float("inf")


class InfeasibleSubproblem(ValueError):
    pass


@dataclass(frozen=True)
class JobPartition:
    J1: tuple[int, ...]
    J2: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.J1)


def partition_jobs(inst: Instance) -> JobPartition:
    return JobPartition(
        tuple(j.id for j in inst.jobs if j.p_hat > 0),
        tuple(j.id for j in inst.jobs if j.p_hat == 0),
    )


@dataclass(frozen=True)
class SubproblemSlacks:
    """Worst-case data for the forced-early jobs E1, listed in EDD order.

    ``nominal[l]`` and ``Delta[l]`` describe the first ``l`` jobs of E1
    (index 0 is the empty prefix).  ``delta[l - 1]`` is the slack of the
    ``l``-th job and ``delta_bar[l - 1]`` the minimum slack from it onwards.
    """

    E1: tuple[int, ...]
    nominal: tuple[int, ...]
    Delta: tuple[int, ...]
    delta: tuple[int, ...]
    delta_bar: tuple[int, ...]

    @property
    def feasible(self) -> bool:
        return all(s >= 0 for s in self.delta)

    def remaining_cap(self, passed: int, strict: bool = False) -> float:
        """Most J2 time allowed so far after ``passed`` E1 jobs are behind us.

        By default only E1 jobs still ahead constrain it.  ``strict`` also
        charges the last E1 job already passed.
        """
        start = max(passed - 1, 0) if strict else passed
        return self.delta_bar[start] if start < len(self.delta_bar) else INF


def feasibility_and_slacks(inst: Instance, E1: Iterable[int]) -> SubproblemSlacks:
    order = sorted(set(E1), key=lambda i: (inst.jobs[i - 1].d, i))
    top = _TopDeviations(inst.budget)
    nominal, Delta, delta = [0], [0], []
    for j in order:
        job = inst.jobs[j - 1]
        top.push(job.p_hat)
        nominal.append(nominal[-1] + job.p_bar)
        Delta.append(top.total)
        delta.append(job.d - nominal[-1] - top.total)
    delta_bar = delta[:]
    for i in range(len(delta_bar) - 2, -1, -1):
        delta_bar[i] = min(delta_bar[i], delta_bar[i + 1])
    return SubproblemSlacks(tuple(order), tuple(nominal), tuple(Delta), tuple(delta), tuple(delta_bar))


try:
    import numba
except ImportError:  # pragma: no cover - the pure-Python sweep is used instead
    numba = None

I64_MAX = (1 << 63) - 1


def _sweep_arrays(p, d, ids, cuts, offsets, caps, kept):
    """Moore sweep over J2 in EDD order.

    Writes kept job ids to ``kept`` and returns ``(count, total p)``.

    Segment ``s`` holds J2 jobs ``cuts[s-1]..cuts[s]-1`` (those before the
    ``s``-th forced-early job) and uses ``offsets[s]`` and ``caps[s]``.
    The heap holds J2 indices, largest ``p`` on top, ties by smallest id.
    """
    heap = np.empty(p.shape[0], dtype=np.int64)
    size = 0
    P = 0
    start = 0
    for s in range(cuts.shape[0]):
        offset = offsets[s]
        cap = caps[s]
        for i in range(start, cuts[s]):
            P += p[i]
            # sift up
            c = size
            size += 1
            while c > 0:
                par = (c - 1) >> 1
                h = heap[par]
                if p[h] > p[i] or (p[h] == p[i] and ids[h] < ids[i]):
                    break
                heap[c] = h
                c = par
            heap[c] = i
            if P + offset > d[i] or P > cap:
                top = heap[0]
                P -= p[top]
                size -= 1
                last = heap[size]
                c = 0
                while True:
                    child = 2 * c + 1
                    if child >= size:
                        break
                    r = child + 1
                    if r < size and (p[heap[r]] > p[heap[child]] or (p[heap[r]] == p[heap[child]] and ids[heap[r]] < ids[heap[child]])):
                        child = r
                    h = heap[child]
                    if p[last] > p[h] or (p[last] == p[h] and ids[last] < ids[h]):
                        break
                    heap[c] = h
                    c = child
                heap[c] = last
        start = cuts[s]
    for t in range(size):
        kept[t] = ids[heap[t]]
    return size, P


if numba is not None:
    _sweep_compiled = numba.njit(cache=True, nogil=True)(_sweep_arrays)
else:  # pragma: no cover
    _sweep_compiled = None


class _Sweep:
    """J2 jobs in EDD order, prepared once per instance."""

    def __init__(self, inst: Instance, compiled: bool = True):
        self.inst = inst
        self.order = edd_permutation(inst)
        self.pos = {j: p for p, j in enumerate(self.order)}
        j2 = [j for j in self.order if inst.jobs[j - 1].p_hat == 0]
        self.j2_pos = [self.pos[j] for j in j2]
        self.big = inst.n + 1
        # heap key: the smallest key is the largest p_bar, ties by smallest id
        self.j2 = [
            (inst.jobs[j - 1].p_bar, inst.jobs[j - 1].d, -inst.jobs[j - 1].p_bar * self.big + j) for j in j2
        ]
        self.compiled = compiled and _sweep_compiled is not None
        if self.compiled:
            self.p = np.array([t[0] for t in self.j2], dtype=np.int64)
            self.d = np.array([t[1] for t in self.j2], dtype=np.int64)
            self.ids = np.array(j2, dtype=np.int64)
            self.kept = np.empty(len(j2), dtype=np.int64)

    def _cuts(self, slacks: SubproblemSlacks) -> list[int]:
        return [bisect_left(self.j2_pos, self.pos[e]) for e in slacks.E1] + [len(self.j2)]

    def run(self, slacks: SubproblemSlacks, strict: bool = False) -> list[int]:
        if self.compiled:
            return self.run_compiled(slacks, strict)
        return self.run_python(slacks, strict)

    def run_compiled(self, slacks: SubproblemSlacks, strict: bool = False) -> list[int]:
        size, _ = self.summary(slacks, strict)
        return sorted(self.kept[:size].tolist())

    def summary(self, slacks: SubproblemSlacks, strict: bool = False) -> tuple[int, int]:
        """Count and total nominal time of the kept J2 jobs.

        With the compiled kernel the ids stay in ``self.kept`` until the next call.
        """
        if not self.compiled:
            kept = self.run_python(slacks, strict)
            return len(kept), sum(self.inst.jobs[j - 1].p_bar for j in kept)
        parts = len(slacks.E1) + 1
        offsets = np.array([slacks.nominal[s] + slacks.Delta[s] for s in range(parts)], dtype=np.int64)
        caps = np.array(
            [min(slacks.remaining_cap(s, strict), I64_MAX) for s in range(parts)], dtype=np.int64
        )
        cuts = np.array(self._cuts(slacks), dtype=np.int64)
        size, total = _sweep_compiled(self.p, self.d, self.ids, cuts, offsets, caps, self.kept)
        return int(size), int(total)

    def run_python(self, slacks: SubproblemSlacks, strict: bool = False) -> list[int]:
        big = self.big
        j2 = self.j2
        heap: list[int] = []
        push, pop = heapq.heappush, heapq.heappop
        P = 0
        start = 0
        for passed, stop in enumerate(self._cuts(slacks)):
            offset = slacks.nominal[passed] + slacks.Delta[passed]
            cap = slacks.remaining_cap(passed, strict)
            for p, d, key in j2[start:stop]:
                P += p
                push(heap, key)
                if P + offset > d or P > cap:
                    P += pop(heap) // big  # == -p_bar of the removed job
            start = stop
        return sorted(key % big for key in heap)


def extended_moore(inst: Instance, slacks: SubproblemSlacks, strict: bool = False) -> tuple[int, ...]:
    """Compact set of J2 jobs to run early alongside the forced-early jobs of ``slacks``.

    Raises :class:`InfeasibleSubproblem` when the forced-early jobs alone
    cannot all be on time.
    """
    if not slacks.feasible:
        raise InfeasibleSubproblem(f"forced-early set {list(slacks.E1)} is infeasible")
    return tuple(_Sweep(inst).run(slacks, strict))


def solve_moore(inst: Instance) -> EarlySetSolution:
    """Moore-Hodgson: EDD sweep, dropping the longest kept job at each violation."""
    if any(j.p_hat for j in inst.jobs):
        raise InstanceError("Moore's algorithm needs every p_hat = 0")
    kept = _Sweep(inst).run(feasibility_and_slacks(inst, ()))
    return solution_from_early_set(inst, kept, algorithm="moore")


def collapse_nominal(inst: Instance) -> Instance:
    """Same jobs with a certain processing time: ``p_bar + p_hat``, or ``p_bar`` when gamma is 0."""
    keep = 1 if inst.budget else 0
    jobs = tuple(Job(j.id, j.p_bar + keep * j.p_hat, 0, j.d) for j in inst.jobs)
    return Instance(jobs, inst.gamma)


def solve_collapsed(inst: Instance) -> EarlySetSolution:
    """For ``gamma >= k`` every uncertain job deviates in the worst case; for ``gamma = 0`` none does."""
    if 0 < inst.budget < inst.num_uncertain:
        raise InstanceError("collapse needs gamma = 0 or gamma >= number of uncertain jobs")
    kept = solve_moore(collapse_nominal(inst)).early
    return solution_from_early_set(inst, kept, algorithm="moore")


def subset_masks(k: int) -> list[int]:
    """All masks over k bits, by popcount and then by value."""
    return sorted(range(1 << k), key=lambda m: (bin(m).count("1"), m))


def _best_of(inst: Instance, J1: Sequence[int], masks: Sequence[int], strict: bool, prune: bool):
    sweep = _Sweep(inst)
    p_bar = [0] + [j.p_bar for j in inst.jobs]
    infeasible: set[int] = set()
    best_key, best = None, None
    for mask in masks:
        if prune and mask and any(mask & ~(1 << b) in infeasible for b in range(len(J1)) if mask >> b & 1):
            infeasible.add(mask)
            continue
        E1 = [J1[b] for b in range(len(J1)) if mask >> b & 1]
        slacks = feasibility_and_slacks(inst, E1)
        if not slacks.feasible:
            infeasible.add(mask)
            continue
        count, total = sweep.summary(slacks, strict)
        key = (-len(E1) - count, sum(p_bar[i] for i in E1) + total)
        if best_key is not None and key > best_key:
            continue
        kept = sweep.kept[:count].tolist() if sweep.compiled else sweep.run_python(slacks, strict)
        early = sorted(E1 + kept)
        if best_key is None or key < best_key or early < best:
            best_key, best = key, early
    return best_key, best


def _chunk_worker(args):
    inst, J1, masks, strict, prune = args
    return _best_of(inst, J1, masks, strict, prune)


def solve_fpt(
    inst: Instance,
    max_k: int = DEFAULT_MAX_K,
    strict: bool = False,
    prune: bool = True,
    workers: int = 1,
) -> EarlySetSolution:
    """Best early set over all forced-early subsets of the uncertain jobs.

    Ties between subproblems go to the least total nominal time, then the
    lexicographically smallest sorted early set.  ``strict`` selects the
    literal slack bound in the sweep (see :meth:`SubproblemSlacks.remaining_cap`).
    """
    part = partition_jobs(inst)
    if part.k > max_k:
        raise CapExceeded("k", part.k, max_k)
    if inst.budget >= part.k:
        return solve_collapsed(inst)
    masks = subset_masks(part.k)
    if workers > 1:
        size = -(-len(masks) // workers)
        chunks = [masks[i : i + size] for i in range(0, len(masks), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_chunk_worker, [(inst, part.J1, c, strict, prune) for c in chunks]))
    else:
        results = [_best_of(inst, part.J1, masks, strict, prune)]
    best_key, best = None, None
    for key, early in results:
        if key is None:
            continue
        if best_key is None or key < best_key or (key == best_key and early < best):
            best_key, best = key, early
    return solution_from_early_set(inst, best, algorithm="fpt")
