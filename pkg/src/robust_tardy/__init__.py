"""Exact algorithms for 1|U^Gamma|min sum U_j: fewest jobs that can miss their due date
when up to ``gamma`` processing times run long."""

from .common_due_date import greedy_for_mu, solve_common_due_date
from .fpt import extended_moore, feasibility_and_slacks, solve_fpt, solve_moore
from .generators import (
    KSumInstance,
    PartitionInstance,
    gen_ksum_reduction,
    gen_partition_reduction,
    gen_random,
    ksum_bruteforce,
    partition_bruteforce,
)
from .model import (
    CapExceeded,
    EarlySetSolution,
    EvaluatedSchedule,
    Instance,
    InstanceError,
    Job,
    edd_permutation,
    evaluate_schedule,
    is_feasible_early_set,
    make_instance,
    solution_from_early_set,
    top_gamma_deviation_sum,
    validate_instance,
)
from .multi_due_date import solve_multi_due_date
from .oracle import check_by_scenario_enumeration, solve_bruteforce
from .xp import solve_xp

__version__ = "0.1.0"
