"""Opinion dynamics with biased assimilation: disagreement metrics,
two-island regime theory, and random-walk recommender polarization."""

__version__ = "0.1.0"

from .graph import (
    BiasProfile,
    OpinionState,
    WeightedGraph,
    is_connected,
    laplacian_apply,
    neighbor_opinion_sum,
    parse_edge_list,
    read_edge_list,
    weighted_degree,
)
from .dynamics import (
    ConvergenceSpec,
    EnvironmentParams,
    FlockingParams,
    Trajectory,
    UrnState,
    biased_step,
    degroot_step,
    flocking_step,
    polarization_threshold,
    run_single_agent,
    run_until_convergence,
    single_agent_step,
    urn_step,
)
from .metrics import (
    CONVEX_CATALOG,
    convex_divergence,
    gdi,
    is_majorized,
    is_polarizing,
    ndi,
)
from .two_island import (
    RegimeVerdict,
    TwoIslandNetwork,
    TwoIslandParams,
    build_two_island,
    classify_regime,
    critical_homophily,
    homophily_degree,
    island_update_map,
    solve_fixed_point,
)
from .recsys import (
    AcceptanceMode,
    BipartiteGraph,
    GenerativeParams,
    OpinionDistribution,
    PolarizationEstimate,
    RecommenderConfig,
    acceptance_decision,
    estimate_polarization,
    limiting_quantities,
    plant_probe,
    sample_bipartite_graph,
    simple_icf,
    simple_ppr,
    simple_salsa,
    walk_distribution,
)
from .config import ConfigError, parse_config, validate_config
from .runner import RunManifest, run_experiment
