"""Dynamic program over (early count, deviating set) states; O(n^(gamma+3)) time.

Jobs are processed in EDD order.  A state at stage ``j`` is a pair
``(ell, pi)``: ``ell`` early jobs among the first ``j``, and ``pi`` the
(at most ``gamma``) early jobs with the largest deviations.  Its value is
the least total nominal time of such an early set.  Two early sets with the
same state are interchangeable for every later job, so only the cheaper one
is kept.

Internally jobs are addressed by their EDD position ``1..n``.  Deviating
sets are stored as tuples of positions sorted by decreasing deviation (ties
by job id), so the last entry is the member with the smallest deviation.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterable, Mapping

from .model import CapExceeded, EarlySetSolution, Instance, edd_permutation, solution_from_early_set

DEFAULT_MAX_GAMMA = 4
INF = float("inf")

SKIP, KEEP, ENTER = 0, 1, 2
KIND_NAMES = {SKIP: "case3-skip", KEEP: "case2-keep-or-add", ENTER: "case1-replace"}

State = tuple[int, tuple[int, ...]]


@dataclass(frozen=True)
class XpTransition:
    kind: int
    parent: State
    replaced: int = 0  # EDD position dropped from the deviating set, 0 if none


class EddView:
    """Jobs of an instance re-indexed by EDD position (1-based)."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self.order = edd_permutation(inst)
        jobs = [inst.jobs[i - 1] for i in self.order]
        self.p_bar = [0] + [j.p_bar for j in jobs]
        self.p_hat = [0] + [j.p_hat for j in jobs]
        self.d = [0] + [j.d for j in jobs]
        # rank[pos] < rank[q]  <=>  pos has the larger deviation (ties: smaller id)
        self.rank = [(0, 0)] + [(-j.p_hat, j.id) for j in jobs]
        self.n = inst.n
        self.gamma = inst.budget

    def canonical(self, positions: Iterable[int]) -> tuple[int, ...]:
        return tuple(sorted(positions, key=self.rank.__getitem__))

    def dev_sum(self, pi: tuple[int, ...]) -> int:
        return sum(self.p_hat[i] for i in pi)


def max_states_per_stage(n: int, gamma: int) -> int:
    return (n + 1) * sum(comb(n, t) for t in range(min(gamma, n) + 1))


def xp_transition(view: EddView, j: int, ell: int, pi: tuple[int, ...], prev: Mapping[State, int]) -> float:
    """Value of state ``(ell, pi)`` at stage ``j`` from the full stage ``j - 1`` table.

    ``prev`` maps finite states to values; missing states are infinite.
    This is the pull form of the recursion and is used to cross-check the
    forward solver.
    """
    g = view.gamma
    rank = view.rank
    if ell > j or len(pi) > g or any(i > j for i in pi):
        return INF
    pi = view.canonical(pi)

    def below_all(i: int) -> bool:
        return not pi or rank[i] > rank[pi[-1]]

    if j in pi:
        if ell <= g:
            candidates = [tuple(i for i in pi if i != j)]
        else:
            rest = [i for i in pi if i != j]
            candidates = [
                view.canonical(rest + [i]) for i in range(1, j) if i not in pi and below_all(i)
            ]
        best = INF
        for cand in candidates:
            f = prev.get((ell - 1, cand))
            if f is None:
                continue
            if f + view.p_bar[j] + view.dev_sum(pi) <= view.d[j]:
                best = min(best, f + view.p_bar[j])
        return best
    skip = prev.get((ell, pi), INF)
    if len(pi) == g and below_all(j):
        f = prev.get((ell - 1, pi))
        if f is not None and f + view.p_bar[j] + view.dev_sum(pi) <= view.d[j]:
            return min(skip, f + view.p_bar[j])
    return skip


def xp_tables(inst: Instance, max_gamma: int = DEFAULT_MAX_GAMMA):
    """Run the forward DP; return ``(view, values, parents)``.

    ``values[j]`` maps every finite state of stage ``j`` to its value and
    ``parents[j]`` to the :class:`XpTransition` that produced it.  Among
    equal values the parent is chosen by (skip, keep, enter), then by the
    smallest replaced position.
    """
    if inst.budget > max_gamma:
        raise CapExceeded("gamma", inst.budget, max_gamma)
    view = EddView(inst)
    g = view.gamma
    rank, p_bar, p_hat, d = view.rank, view.p_bar, view.p_hat, view.d
    bound = max_states_per_stage(view.n, g)

    values: list[dict[State, int]] = [{(0, ()): 0}]
    parents: list[dict[State, XpTransition]] = [{}]
    for j in range(1, view.n + 1):
        best: dict[State, tuple[int, int, int, State]] = {}

        def offer(state: State, f: int, kind: int, replaced: int, parent: State) -> None:
            cand = (f, kind, replaced, parent)
            cur = best.get(state)
            if cur is None or cand[:3] < cur[:3]:
                best[state] = cand

        for state, f in values[-1].items():
            ell, pi = state
            offer(state, f, SKIP, 0, state)
            if len(pi) < g:
                new_pi = view.canonical(pi + (j,))
                kind, replaced = ENTER, 0
            elif g and rank[j] < rank[pi[-1]]:
                new_pi = view.canonical(pi[:-1] + (j,))
                kind, replaced = ENTER, pi[-1]
            else:
                new_pi = pi
                kind, replaced = KEEP, 0
            f_new = f + p_bar[j]
            if f_new + sum(p_hat[i] for i in new_pi) <= d[j]:
                offer((ell + 1, new_pi), f_new, kind, replaced, state)

        if len(best) > bound:
            raise AssertionError(f"stage {j} holds {len(best)} states, bound is {bound}")
        values.append({s: v[0] for s, v in best.items()})
        parents.append({s: XpTransition(v[1], v[3], v[2]) for s, v in best.items()})
    return view, values, parents


def reconstruct(view: EddView, parents, j: int, state: State) -> list[int]:
    """Job ids of the early set behind ``state`` at stage ``j``."""
    early = []
    while j > 0:
        tr = parents[j][state]
        if tr.kind != SKIP:
            early.append(view.order[j - 1])
        state = tr.parent
        j -= 1
    return early[::-1]


def solve_xp(inst: Instance, max_gamma: int = DEFAULT_MAX_GAMMA) -> EarlySetSolution:
    view, values, parents = xp_tables(inst, max_gamma)
    final = values[-1]
    top = max(ell for ell, _ in final)
    # most early jobs, then least nominal time, then smallest deviating set by job id
    state = min(
        (s for s in final if s[0] == top),
        key=lambda s: (final[s], sorted(view.order[i - 1] for i in s[1])),
    )
    early = reconstruct(view, parents, view.n, state)
    return solution_from_early_set(inst, early, algorithm="xp")
