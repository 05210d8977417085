"""Price-of-anarchy-optimal utility design for resource allocation games
with concave welfare: mechanism construction, exact verification by linear
programming and equilibrium enumeration, best-response dynamics, and the
vehicle-target simulation harness."""

from .dynamics import (
    Trajectory,
    best_response,
    equilibrium_efficiency,
    run_round_robin,
)
from .errors import (
    BudgetExceededError,
    CurvatureExceededError,
    DegenerateCurvatureError,
    DegenerateEnvelopeError,
    DegenerateGameError,
    DimensionMismatchError,
    EnvelopeConditionError,
    NotConvergedError,
    PoaDesignError,
    SolverError,
    UnsupportedModeError,
    ValidationError,
)
from .experiments import (
    MECHANISM_TAGS,
    UNIVERSAL_BOUND,
    BoxStats,
    MonteCarloResult,
    SweepPoint,
    VehicleTargetConfig,
    apply_mechanism,
    box_stats,
    figure2_sweep,
    generate_instance,
    run_monte_carlo,
    starting_allocation,
)
from .game import (
    DEFAULT_ENUMERATION_BUDGET,
    Allocation,
    ExactPoa,
    GameInstance,
    NashResult,
    exact_poa,
    exhaustive_optimum,
    is_nash,
    load_count,
    player_utility,
    potential,
    total_welfare,
)
from .lp import (
    ConstraintTriplet,
    FeasibilityReport,
    LpSolution,
    index_set,
    min_poa_over_welfares,
    solve_optimal_mechanism,
    solve_relaxed,
    verify_feasibility,
)
from .mechanism import (
    MechanismResult,
    UtilityTable,
    coverage_utility,
    equal_shares_utility,
    marginal_contribution_utility,
    rho_closed_form,
    universal_utility,
)
from .welfare import (
    CandidateEnvelope,
    CoverageParams,
    Decomposition,
    WelfareTable,
    build_candidates,
    coverage_table,
    coverage_value,
    curvature,
    decompose_concave,
    decompose_general,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "BoxStats",
    "BudgetExceededError",
    "CandidateEnvelope",
    "ConstraintTriplet",
    "CoverageParams",
    "CurvatureExceededError",
    "DEFAULT_ENUMERATION_BUDGET",
    "Decomposition",
    "DegenerateCurvatureError",
    "DegenerateEnvelopeError",
    "DegenerateGameError",
    "DimensionMismatchError",
    "EnvelopeConditionError",
    "ExactPoa",
    "FeasibilityReport",
    "GameInstance",
    "LpSolution",
    "MECHANISM_TAGS",
    "MechanismResult",
    "MonteCarloResult",
    "NashResult",
    "NotConvergedError",
    "PoaDesignError",
    "SolverError",
    "SweepPoint",
    "Trajectory",
    "UNIVERSAL_BOUND",
    "UnsupportedModeError",
    "UtilityTable",
    "ValidationError",
    "VehicleTargetConfig",
    "WelfareTable",
    "apply_mechanism",
    "best_response",
    "box_stats",
    "build_candidates",
    "coverage_table",
    "coverage_utility",
    "coverage_value",
    "curvature",
    "decompose_concave",
    "decompose_general",
    "equal_shares_utility",
    "equilibrium_efficiency",
    "exact_poa",
    "exhaustive_optimum",
    "figure2_sweep",
    "generate_instance",
    "index_set",
    "is_nash",
    "load_count",
    "marginal_contribution_utility",
    "min_poa_over_welfares",
    "player_utility",
    "potential",
    "rho_closed_form",
    "run_monte_carlo",
    "run_round_robin",
    "solve_optimal_mechanism",
    "solve_relaxed",
    "starting_allocation",
    "total_welfare",
    "universal_utility",
    "verify_feasibility",
]
