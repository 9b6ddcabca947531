from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import strategies as st

from robust_tardy import Instance, is_feasible_early_set, make_instance
from robust_tardy.generators import gen_random

# (p_bar, p_hat, d) rows
I1_ROWS = [(2, 3, 5), (3, 0, 6), (1, 2, 6)]
I2_ROWS = [(3, 4, 11), (4, 0, 11), (5, 2, 11)]


@pytest.fixture
def i1() -> Instance:
    return make_instance(I1_ROWS, gamma=1)


@pytest.fixture
def i2() -> Instance:
    return make_instance(I2_ROWS, gamma=1)


def max_early_by_subsets(inst: Instance) -> int:
    """Largest feasible early set, scanning subsets from the largest size down."""
    for size in range(inst.n, -1, -1):
        for early in itertools.combinations(inst.ids, size):
            if is_feasible_early_set(inst, early):
                return size
    return 0


def small_random(seed: int, max_n: int = 10, max_gamma: int = 3, max_d: int = 40) -> Instance:
    """Mixed-shape random instance: uniform, few, or one due date; all or few uncertain jobs."""
    r = random.Random(seed)
    n = r.randint(0, max_n)
    style = r.choice(["uniform", "two-point", "common", "clustered-v"])
    k = r.choice([None, r.randint(0, n)])
    return gen_random(
        n,
        r.randint(0, max_gamma),
        due_date_style=style,
        k_uncertain=k,
        seed=seed,
        max_d=max_d,
        num_due_dates=3,
    ).instance


@st.composite
def instances(draw, max_n: int = 8, max_val: int = 10, max_d: int = 40, max_gamma: int = 4):
    n = draw(st.integers(0, max_n))
    rows = [
        (draw(st.integers(0, max_val)), draw(st.integers(0, max_val)), draw(st.integers(0, max_d)))
        for _ in range(n)
    ]
    return make_instance(rows, draw(st.integers(0, max_gamma)))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
