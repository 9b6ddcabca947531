"""Instance factories: hardness reductions, their source-problem checkers, and random instances."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .model import INT63_LIMIT, Instance, InstanceError, make_instance

MAX_SOURCE_H = 12
DUE_DATE_STYLES = ("uniform", "two-point", "common", "clustered-v")


@dataclass(frozen=True)
class KSumInstance:
    """Is there a k-element subset of ``a`` summing to exactly ``B``?"""

    a: tuple[int, ...]
    k: int
    B: int

    def __post_init__(self):
        h = len(self.a)
        if any(x < 1 for x in self.a):
            raise InstanceError("k-sum entries must be positive")
        if not 1 <= self.k < h:
            raise InstanceError(f"k-sum needs 1 <= k < h, got k={self.k}, h={h}")
        if self.B < 1:
            raise InstanceError("k-sum target B must be positive")

    @property
    def h(self) -> int:
        return len(self.a)

    @property
    def A(self) -> int:
        return sum(self.a)


@dataclass(frozen=True)
class PartitionInstance:
    """Can ``a`` be split into two halves of equal size and equal sum?"""

    a: tuple[int, ...]

    def __post_init__(self):
        if not self.a or len(self.a) % 2:
            raise InstanceError("partition needs a nonempty, even number of entries")
        if any(x < 1 for x in self.a):
            raise InstanceError("partition entries must be positive")
        if sum(self.a) % 2:
            raise InstanceError("partition entries must sum to an even total 2A")

    @property
    def h(self) -> int:
        return len(self.a) // 2

    @property
    def A(self) -> int:
        return sum(self.a) // 2


@dataclass(frozen=True)
class Generated:
    instance: Instance
    meta: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out = self.instance.to_dict()
        out["meta"] = dict(self.meta)
        return out


def _fits(*values: int) -> None:
    if max(values) >= INT63_LIMIT:
        raise InstanceError("overflow risk: reduction values do not fit in 63 bits")


def gen_ksum_reduction(src: KSumInstance, M: int | None = None) -> Generated:
    """Scheduling instance with at most ``h`` tardy jobs iff ``src`` is a yes-instance.

    Jobs ``2j-1, 2j`` form pair ``j`` for ``j = 1..h``; jobs ``2h+1..2h+k+1``
    have no nominal time and a deviation of ``M**3``; ``gamma = k + 1``.
    """
    h, k, A, B = src.h, src.k, src.A, src.B
    if B >= A:
        raise InstanceError("the reduction needs B < A")
    low = max(2 * A, h * h)
    M = low if M is None else M
    if M < low:
        raise InstanceError(f"M must be at least max(2A, h^2) = {low}")
    tri = lambda j: j * (j + 1) // 2 * M * M  # noqa: E731  sum_{j'<=j} j' M^2
    last_due = tri(h) + M * (h - k) + A - B + (k + 1) * M**3
    _fits(last_due, (2 * h + k + 1) * (h * M * M + M + max(src.a) + M**3))

    rows = []
    for j, a in enumerate(src.a, start=1):
        due = tri(j) + j * h * M + 2 * A if j < h else tri(h) + k * h * M + M * (h - k) + A + B
        rows.append((j * M * M, h * M + 2 * a, due))
        rows.append((j * M * M + M + a, 0, due))
    rows.extend((0, M**3, last_due) for _ in range(k + 1))
    inst = make_instance(rows, gamma=k + 1)
    return Generated(inst, {"source": "ksum", "threshold": h, "M": M})


def gen_partition_reduction(src: PartitionInstance, M: int | None = None) -> Generated:
    """Two-due-date instance with at most ``h`` tardy jobs iff ``src`` splits evenly."""
    h, A = src.h, src.A
    M = 2 * A + 1 if M is None else M
    if M <= 2 * A:
        raise InstanceError(f"M must exceed 2A = {2 * A}")
    d1 = h * M + A
    d2 = h * (M + M * M) - A
    _fits(d2, 3 * h * (M + M * M))
    rows = [(M - a, 2 * a, d1) for a in src.a] + [(0, M * M, d2)] * h
    return Generated(make_instance(rows, gamma=h), {"source": "partition", "threshold": h, "M": M})


def ksum_bruteforce(src: KSumInstance) -> bool:
    if src.h > MAX_SOURCE_H:
        raise InstanceError(f"h={src.h} over the brute-force cap {MAX_SOURCE_H}")
    return any(sum(c) == src.B for c in itertools.combinations(src.a, src.k))


def partition_bruteforce(src: PartitionInstance) -> bool:
    if src.h > MAX_SOURCE_H:
        raise InstanceError(f"h={src.h} over the brute-force cap {MAX_SOURCE_H}")
    # fixing a[0] in the first half halves the search
    rest = src.a[1:]
    return any(src.a[0] + sum(c) == src.A for c in itertools.combinations(rest, src.h - 1))


def gen_random(
    n: int,
    gamma: int,
    max_p: int = 10,
    max_dev: int = 10,
    due_date_style: str = "uniform",
    k_uncertain: int | None = None,
    seed: int = 0,
    max_d: int | None = None,
    num_due_dates: int = 3,
) -> Generated:
    """Seeded random instance (numpy PCG64).

    ``k_uncertain`` jobs, chosen at random, get a deviation in ``1..max_dev``;
    the rest get 0 (``None`` draws every deviation from ``0..max_dev``).
    Due dates are drawn from ``0..max_d`` according to ``due_date_style``:
    independent per job, two values, one value, or ``num_due_dates`` values.
    """
    if n < 0 or gamma < 0 or max_p < 0 or max_dev < 0:
        raise InstanceError("random instance parameters must be nonnegative")
    if due_date_style not in DUE_DATE_STYLES:
        raise InstanceError(f"unknown due date style {due_date_style!r}")
    if k_uncertain is not None and not 0 <= k_uncertain <= n:
        raise InstanceError("k_uncertain must lie in 0..n")
    if k_uncertain and max_dev < 1:
        raise InstanceError("k_uncertain > 0 needs max_dev >= 1")
    if max_d is None:
        max_d = max(1, n * (max_p + max_dev) // 2)

    rng = np.random.Generator(np.random.PCG64(seed))
    p_bar = rng.integers(0, max_p, size=n, endpoint=True)
    if k_uncertain is None:
        p_hat = rng.integers(0, max_dev, size=n, endpoint=True)
    else:
        p_hat = np.zeros(n, dtype=np.int64)
        chosen = rng.choice(n, size=k_uncertain, replace=False)
        p_hat[chosen] = rng.integers(1, max_dev, size=k_uncertain, endpoint=True)
    if due_date_style == "uniform":
        d = rng.integers(0, max_d, size=n, endpoint=True)
    else:
        classes = {"two-point": 2, "common": 1, "clustered-v": num_due_dates}[due_date_style]
        values = rng.choice(max_d + 1, size=min(classes, max_d + 1), replace=False)
        d = values[rng.integers(0, len(values), size=n)]
        if n >= len(values):
            # every due date value is used at least once
            d[rng.permutation(n)[: len(values)]] = values
    rows = [(int(a), int(b), int(c)) for a, b, c in zip(p_bar, p_hat, d)]
    inst = make_instance(rows, gamma)
    return Generated(inst, {"source": "random", "seed": seed})
