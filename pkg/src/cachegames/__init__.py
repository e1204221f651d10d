"""Cache-aided delivery games: throughput regions, equilibria, and schedules."""

from .errors import (
    BetaOutOfRange,
    CacheGamesError,
    CapacityOutOfRange,
    DecodingFailure,
    InvalidInstance,
    InvalidPlacement,
    MisalignedPlacement,
    NonIntegralChunkBudget,
    NumericalFailure,
    RowNotStochastic,
    SolverFailure,
    SupportTooLarge,
    TooLarge,
)
from .games import (
    Allocation,
    NashResult,
    allocate,
    allocation_from,
    best_response,
    cooperative_total,
    find_psne,
    verify_psne,
)
from .lp import LinearProgram, LpSolution, LpStatus, solve
from .model import (
    DemandDistribution,
    DemandOutcome,
    Instance,
    PreferenceMatrix,
    beta_mixture_matrix,
    build_instance,
    independent_single_demand,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    pure_caching_throughput,
    uniform_row,
    zipf_row,
)
from .multiuser import (
    DeliverySchedule,
    ThroughputEstimate,
    build_set_system,
    decode,
    deliver,
    expected_throughput_multiuser,
    popular_placement,
)
from .twouser import (
    ThroughputBoundary,
    ThroughputPoint,
    TwoUserPlacement,
    boundary_sweep,
    build_scalarized_lp,
    exclusive_fractions,
    expected_throughput,
    outcome_cost,
    sweep_table,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "BetaOutOfRange",
    "CacheGamesError",
    "CapacityOutOfRange",
    "DecodingFailure",
    "DeliverySchedule",
    "DemandDistribution",
    "DemandOutcome",
    "Instance",
    "InvalidInstance",
    "InvalidPlacement",
    "LinearProgram",
    "LpSolution",
    "LpStatus",
    "MisalignedPlacement",
    "NashResult",
    "NonIntegralChunkBudget",
    "NumericalFailure",
    "PreferenceMatrix",
    "RowNotStochastic",
    "SolverFailure",
    "SupportTooLarge",
    "ThroughputBoundary",
    "ThroughputEstimate",
    "ThroughputPoint",
    "TooLarge",
    "TwoUserPlacement",
    "allocate",
    "allocation_from",
    "best_response",
    "beta_mixture_matrix",
    "boundary_sweep",
    "build_instance",
    "build_scalarized_lp",
    "build_set_system",
    "cooperative_total",
    "decode",
    "deliver",
    "exclusive_fractions",
    "expected_throughput",
    "expected_throughput_multiuser",
    "find_psne",
    "independent_single_demand",
    "instance_from_dict",
    "instance_to_dict",
    "load_instance",
    "outcome_cost",
    "popular_placement",
    "pure_caching_throughput",
    "solve",
    "sweep_table",
    "uniform_row",
    "verify_psne",
    "zipf_row",
]
