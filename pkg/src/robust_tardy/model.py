"""Jobs, instances and worst-case evaluation under budgeted processing-time uncertainty.

A job has a nominal processing time ``p_bar``, a deviation ``p_hat`` and a due
date ``d``.  In any scenario at most ``gamma`` jobs run for ``p_bar + p_hat``
instead of ``p_bar``.  A job counts as early only if it meets its due date in
every scenario; the objective is the number of jobs that are not early.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

INT63_LIMIT = 1 << 63
JOB_FIELDS = ("id", "p_bar", "p_hat", "d")


class InstanceError(ValueError):
    """Raised for malformed or unsupported instance data."""


class InfeasibleEarlySet(ValueError):
    def __init__(self, violator: int):
        super().__init__(f"job {violator} misses its due date in the worst case")
        self.violator = violator


class CapExceeded(RuntimeError):
    """A solver refused an instance because a configured size cap was hit."""

    def __init__(self, cap: str, value: int, limit: int):
        super().__init__(f"{cap}={value} exceeds cap {limit}")
        self.cap = cap
        self.value = value
        self.limit = limit


@dataclass(frozen=True)
class Job:
    id: int
    p_bar: int
    p_hat: int
    d: int


@dataclass(frozen=True)
class Instance:
    """Validated instance.  ``jobs[i]`` is the job with id ``i + 1``.

    ``gamma`` keeps the value given on input; solvers use :attr:`budget`,
    which is clamped to ``n``.
    """

    jobs: tuple[Job, ...]
    gamma: int

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def budget(self) -> int:
        return min(self.gamma, len(self.jobs))

    def job(self, job_id: int) -> Job:
        return self.jobs[job_id - 1]

    @property
    def ids(self) -> range:
        return range(1, len(self.jobs) + 1)

    @property
    def num_uncertain(self) -> int:
        return sum(1 for j in self.jobs if j.p_hat > 0)

    @property
    def due_dates(self) -> list[int]:
        return sorted({j.d for j in self.jobs})

    def to_dict(self) -> dict[str, Any]:
        return {
            "gamma": self.gamma,
            "jobs": [{"id": j.id, "p_bar": j.p_bar, "p_hat": j.p_hat, "d": j.d} for j in self.jobs],
        }


def _as_int(value: Any, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceError(f"{what} must be an integer, got {value!r}")
    return value


def validate_instance(raw: Mapping[str, Any] | Instance) -> Instance:
    """Check a candidate instance and return it as an :class:`Instance`.

    ``raw`` is either an :class:`Instance` or a mapping in the JSON layout
    ``{"gamma": int, "jobs": [{"id", "p_bar", "p_hat", "d"}, ...]}``.  An
    optional ``"meta"`` block is tolerated and ignored; any other key is an
    error.
    """
    if isinstance(raw, Instance):
        raw = raw.to_dict()
    if not isinstance(raw, Mapping):
        raise InstanceError("instance must be a JSON object")
    unknown = set(raw) - {"gamma", "jobs", "meta"}
    if unknown:
        raise InstanceError(f"unknown instance fields: {sorted(unknown)}")
    if "gamma" not in raw or "jobs" not in raw:
        raise InstanceError("instance needs 'gamma' and 'jobs'")
    gamma = _as_int(raw["gamma"], "gamma")
    if gamma < 0:
        raise InstanceError("negative value: gamma")
    rows = raw["jobs"]
    if not isinstance(rows, Sequence) or isinstance(rows, (str, bytes)):
        raise InstanceError("'jobs' must be a list")

    jobs: dict[int, Job] = {}
    for row in rows:
        if not isinstance(row, Mapping):
            raise InstanceError("each job must be a JSON object")
        extra = set(row) - set(JOB_FIELDS)
        missing = set(JOB_FIELDS) - set(row)
        if extra:
            raise InstanceError(f"unknown job fields: {sorted(extra)}")
        if missing:
            raise InstanceError(f"job is missing fields: {sorted(missing)}")
        vals = {k: _as_int(row[k], f"job field {k}") for k in JOB_FIELDS}
        for k in ("p_bar", "p_hat", "d"):
            if vals[k] < 0:
                raise InstanceError(f"negative value: job {vals['id']} {k}={vals[k]}")
        if vals["id"] in jobs:
            raise InstanceError(f"duplicate job id {vals['id']}")
        jobs[vals["id"]] = Job(**vals)

    n = len(jobs)
    if set(jobs) != set(range(1, n + 1)):
        raise InstanceError(f"job ids must be exactly 1..{n}")
    ordered = tuple(jobs[i] for i in range(1, n + 1))
    if n:
        worst = n * (max(j.p_bar for j in ordered) + max(j.p_hat for j in ordered))
        if worst >= INT63_LIMIT or max(j.d for j in ordered) >= INT63_LIMIT:
            raise InstanceError("overflow risk: n*(max p_bar + max p_hat) does not fit in 63 bits")
    return Instance(ordered, gamma)


def make_instance(rows: Iterable[Sequence[int]], gamma: int) -> Instance:
    """Build an instance from ``(p_bar, p_hat, d)`` rows; ids are assigned 1..n."""
    jobs = [
        {"id": i, "p_bar": p_bar, "p_hat": p_hat, "d": d}
        for i, (p_bar, p_hat, d) in enumerate(rows, start=1)
    ]
    return validate_instance({"gamma": gamma, "jobs": jobs})


def edd_permutation(inst: Instance) -> list[int]:
    return sorted(inst.ids, key=lambda i: (inst.jobs[i - 1].d, i))


def deviation_key(job: Job) -> tuple[int, int]:
    """Sort key placing larger deviations first, ties by smaller id."""
    return (-job.p_hat, job.id)


def top_gamma_deviation_sum(prefix: Iterable[int], inst: Instance) -> int:
    g = inst.budget
    if g == 0:
        return 0
    return sum(heapq.nlargest(g, (inst.jobs[i - 1].p_hat for i in prefix)))


class _TopDeviations:
    """Running sum of the ``g`` largest deviations seen so far."""

    __slots__ = ("g", "heap", "total")

    def __init__(self, g: int):
        self.g = g
        self.heap: list[int] = []
        self.total = 0

    def push(self, p_hat: int) -> None:
        if self.g == 0:
            return
        if len(self.heap) < self.g:
            heapq.heappush(self.heap, p_hat)
            self.total += p_hat
        elif p_hat > self.heap[0]:
            self.total += p_hat - heapq.heapreplace(self.heap, p_hat)


@dataclass(frozen=True)
class EvaluatedSchedule:
    sigma: tuple[int, ...]
    worst_completion: dict[int, int]
    tardy_flag: dict[int, int]

    @property
    def objective(self) -> int:
        return sum(self.tardy_flag.values())

    @property
    def tardy(self) -> frozenset[int]:
        return frozenset(j for j, u in self.tardy_flag.items() if u)


def _check_permutation(inst: Instance, sigma: Sequence[int]) -> tuple[int, ...]:
    sigma = tuple(sigma)
    if sorted(sigma) != list(inst.ids):
        raise ValueError(f"sigma is not a permutation of 1..{inst.n}")
    return sigma


def evaluate_schedule(inst: Instance, sigma: Sequence[int]) -> EvaluatedSchedule:
    """Worst-case completion time and tardiness flag of every job in ``sigma``.

    Each job's worst case is maximized on its own: its completion is the
    nominal prefix sum plus the ``gamma`` largest deviations in the prefix.
    """
    sigma = _check_permutation(inst, sigma)
    top = _TopDeviations(inst.budget)
    nominal = 0
    completion: dict[int, int] = {}
    flags: dict[int, int] = {}
    for j in sigma:
        job = inst.jobs[j - 1]
        nominal += job.p_bar
        top.push(job.p_hat)
        completion[j] = nominal + top.total
        flags[j] = int(completion[j] > job.d)
    return EvaluatedSchedule(sigma, completion, flags)


@dataclass(frozen=True)
class Feasibility:
    ok: bool
    violator: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def _edd_sorted(inst: Instance, early: Iterable[int]) -> list[int]:
    return sorted(set(early), key=lambda i: (inst.jobs[i - 1].d, i))


def is_feasible_early_set(inst: Instance, early: Iterable[int]) -> Feasibility:
    """Whether every job of ``early`` is on time when the set runs first in EDD order."""
    order = _edd_sorted(inst, early)
    for j in order:
        if not 1 <= j <= inst.n:
            raise ValueError(f"unknown job id {j}")
    top = _TopDeviations(inst.budget)
    nominal = 0
    for j in order:
        job = inst.jobs[j - 1]
        nominal += job.p_bar
        top.push(job.p_hat)
        if nominal + top.total > job.d:
            return Feasibility(False, j)
    return Feasibility(True)


@dataclass(frozen=True)
class EarlySetSolution:
    early: frozenset[int]
    sigma: tuple[int, ...]
    objective: int
    certificate: dict[int, int]
    info: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def num_early(self) -> int:
        return len(self.early)


def solution_from_early_set(inst: Instance, early: Iterable[int], **info: Any) -> EarlySetSolution:
    """Canonical schedule for a feasible early set: early jobs in EDD order, then tardy ids ascending."""
    early = frozenset(early)
    check = is_feasible_early_set(inst, early)
    if not check:
        raise InfeasibleEarlySet(check.violator)
    head = _edd_sorted(inst, early)
    sigma = tuple(head) + tuple(i for i in inst.ids if i not in early)
    ev = evaluate_schedule(inst, sigma)
    return EarlySetSolution(
        early=early,
        sigma=sigma,
        objective=inst.n - len(early),
        certificate={j: ev.worst_completion[j] for j in head},
        info=info,
    )
