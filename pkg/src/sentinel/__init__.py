"""Dynamic Bayesian early-warning engine.

Maintains posterior beliefs over hidden crisis states and static
adversary fundamentals from noisy, source-correlated signals, projects
first-passage-time distributions to crisis trapping states, and
recommends the alert type and timing that minimizes expected disutility.
"""

from .alerting import AlertRecommendation, CostModel, certain_equivalent, present_value, recommend_alert
from .bayesnet import (
    ConditionalTable,
    CrisisNetwork,
    DiscreteVariable,
    Evidence,
    build_network,
    d_separated,
    posterior_query,
)
from .filtering import (
    BeliefState,
    Observation,
    SignalModel,
    SourceModel,
    advance_belief,
    belief_marginals,
    init_belief,
)
from .projection import (
    AttackDistribution,
    FirstPassageDistribution,
    StateDistribution,
    first_passage,
    marginal_attack_distribution,
)
from .scenario import ScenarioSpec, load_scenario, load_scenario_file
from .session import Session, SessionStore
from .statespace import LatticeSpec, RasterGraph, generate_lattice, load_raster_graph, shortest_hops
from .transitions import DRealization, TransitionModel, build_transition_matrix

__version__ = "0.1.0"

__all__ = [
    "AlertRecommendation",
    "AttackDistribution",
    "BeliefState",
    "ConditionalTable",
    "CostModel",
    "CrisisNetwork",
    "DRealization",
    "DiscreteVariable",
    "Evidence",
    "FirstPassageDistribution",
    "LatticeSpec",
    "Observation",
    "RasterGraph",
    "ScenarioSpec",
    "Session",
    "SessionStore",
    "SignalModel",
    "SourceModel",
    "StateDistribution",
    "TransitionModel",
    "advance_belief",
    "belief_marginals",
    "build_network",
    "build_transition_matrix",
    "certain_equivalent",
    "d_separated",
    "first_passage",
    "generate_lattice",
    "init_belief",
    "load_raster_graph",
    "load_scenario",
    "load_scenario_file",
    "marginal_attack_distribution",
    "posterior_query",
    "present_value",
    "recommend_alert",
    "shortest_hops",
]
