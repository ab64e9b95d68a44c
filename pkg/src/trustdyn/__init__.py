"""Trust-game economy with scoundrels: equilibria, perception dynamics and invasions."""

__version__ = "0.1.0"

from trustdyn.dynamics import (
    ClassifiedLimit,
    IntegratorConfig,
    LimitLabel,
    PopulationState,
    Trajectory,
    classify_limit,
    counter_invasion_state,
    flow_direction,
    integrate,
    invasion_state,
    perception_gap,
    realized_mixture,
)
from trustdyn.equilibria import (
    EquilibriumSet,
    Regime,
    basin_boundary,
    equilibrium_set,
    interior_roots,
    q_hat,
    total_cheating,
    unique_interior_root,
)
from trustdyn.errors import (
    AmbiguousLimitError,
    ConvergenceError,
    DomainError,
    RegimeError,
    TrustDynError,
)
from trustdyn.experiments import (
    LambdaStarResult,
    SweepRecord,
    counter_invasion_threshold,
    halfway_q,
    lambda_star,
    sweep_lambda_star,
    sweep_total_cheating,
)
from trustdyn.model import (
    CostProfile,
    ModelParams,
    cheat_cutoff,
    optimal_offer,
    proposer_payoff,
    realized_cheating,
    s_star,
    social_cost,
    total_cost,
)
