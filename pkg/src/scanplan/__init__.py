"""scanplan: resource-optimal sensory-data exchange planning for
two-robot loop-closure search.

The package models candidate inter-robot loop closures as a bipartite
exchange graph, solves for minimum-cost complete-search exchange policies
exactly (admissible policies are vertex covers, and the bipartite LP
relaxation is integral), certifies when one-directional policies are
optimal, and simulates the full broker-mediated rendezvous with
byte-accurate accounting.
"""

from .candidates import (
    AppearanceParams,
    GeometryParams,
    Pose,
    Trajectory,
    build_appearance,
    build_geometric,
    fov_overlap,
    read_kitti_poses,
    synthetic_two_loop,
)
from .errors import (
    DuplicateEdge,
    EmptySide,
    EmptyTrajectory,
    GraphFormatError,
    GroundTruthOutsideCandidates,
    InadmissiblePolicy,
    IndexOutOfRange,
    LabelDomainMismatch,
    NegativeWeight,
    NonUniformWeights,
    ScanPlanError,
    ScoreOutOfRange,
    UnknownVertex,
    ValidationError,
)
from .graph import (
    Edge,
    ExchangeGraph,
    IncidenceView,
    ScanVertex,
    VertexId,
    build_graph,
    dumps_graph,
    effective_weight,
    load_graph,
    loads_graph,
    save_graph,
)
from .objectives import Objective
from .policy import (
    Policy,
    Transmission,
    WorkloadReport,
    comm_cost,
    dumps_policy,
    execute_order,
    full_bidirectional,
    is_admissible,
    load_policy,
    loads_policy,
    monolog,
    objective_cost,
    save_policy,
    workloads,
)
from .protocol import (
    RendezvousConfig,
    RendezvousTrace,
    compare_strategies,
    format_trace,
    run_rendezvous,
    strategy_table_csv,
)
from .solver import (
    GhcCertificate,
    SolveResult,
    check_ghc,
    check_hall_uniform,
    p1_closed_form,
    solve,
    solve_brute_force,
    solve_uniform_matching,
)

__version__ = "0.1.0"

__all__ = [
    "AppearanceParams",
    "Edge",
    "ExchangeGraph",
    "GeometryParams",
    "GhcCertificate",
    "IncidenceView",
    "Objective",
    "Policy",
    "Transmission",
    "Pose",
    "RendezvousConfig",
    "RendezvousTrace",
    "ScanVertex",
    "SolveResult",
    "Trajectory",
    "VertexId",
    "WorkloadReport",
    "build_appearance",
    "build_geometric",
    "build_graph",
    "check_ghc",
    "check_hall_uniform",
    "comm_cost",
    "compare_strategies",
    "dumps_graph",
    "effective_weight",
    "execute_order",
    "dumps_policy",
    "loads_policy",
    "load_policy",
    "save_policy",
    "format_trace",
    "fov_overlap",
    "full_bidirectional",
    "is_admissible",
    "load_graph",
    "loads_graph",
    "monolog",
    "objective_cost",
    "p1_closed_form",
    "read_kitti_poses",
    "run_rendezvous",
    "save_graph",
    "solve",
    "solve_brute_force",
    "solve_uniform_matching",
    "strategy_table_csv",
    "synthetic_two_loop",
    "workloads",
    # errors
    "ScanPlanError",
    "GraphFormatError",
    "ValidationError",
    "DuplicateEdge",
    "NegativeWeight",
    "IndexOutOfRange",
    "UnknownVertex",
    "EmptyTrajectory",
    "ScoreOutOfRange",
    "LabelDomainMismatch",
    "InadmissiblePolicy",
    "EmptySide",
    "NonUniformWeights",
    "GroundTruthOutsideCandidates",
]
