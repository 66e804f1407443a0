"""Fair content spread: suggest edges that raise spread while equalizing it across groups."""
from __future__ import annotations

from .algorithms import (
    InstanceTooLarge,
    ScaleConfig,
    brute_force,
    forest_fire_expand,
    lp_advanced,
    lp_approx,
    lp_scale,
)
from .candidates import CandidateMethod, CandidateSpec, fof_candidates, generate_candidates, igc_candidates
from .cascade import (
    MIP,
    RMPP,
    CascadeKind,
    CascadeModel,
    FairnessReport,
    fairness_report,
    spread_ic,
    spread_mip,
    spread_rmpp,
)
from .graph import (
    INF,
    CandidateDistanceIndex,
    CandidateEdge,
    Graph,
    NetworkInstance,
    candidate_distance_index,
    distance_diff,
    edge_delta_multiple,
    edge_delta_single,
    multi_source_shortest_distances,
)
from .harness import RunConfig, RunReport, emit, run
from .lp import LpModel, LpSolution, LpStatus, build_lp, compute_delta_weights, reduce_variables, solve_lp
from .netio import load_network, read_candidates, write_network
from .rounding import RoundingConfig, SuggestionResult, round_once, round_select
from .synthetic import SyntheticParams, instance_with_disparity, synthetic_instance

__version__ = "0.1.0"
