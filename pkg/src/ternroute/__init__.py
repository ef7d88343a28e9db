"""Parallel connection-based router for island-style routing resource graphs.

Multi-pin nets are decomposed into two-pin connections, scheduled over a
recursive partitioning ternary tree (cutline-crossing connections route
before the two sides, sides route in parallel), and negotiated to a
conflict-free solution with hybrid present/historical congestion updating.
"""

from .cost import (
    CostConfig,
    CostState,
    Phase,
    advance_iteration,
    classify_congested,
    estimate_to_sink,
    legacy_node_cost,
    node_use_cost,
    present_cost,
    total_cost,
    update_historical,
)
from .evaluate import (
    RoutingReport,
    emit_report,
    load_report,
    load_solution,
    make_report,
    save_solution,
    score,
    validate,
    wirelength,
)
from .netlist import (
    Connection,
    GenerationError,
    InvalidNetlistError,
    Net,
    Netlist,
    NetlistParseError,
    decompose,
    generate_benchmark,
    load_netlist,
    save_netlist,
)
from .router import (
    ConnectionEvent,
    IterationStats,
    RouteOptions,
    Router,
    RouterPool,
    RoutingResult,
    UnroutableError,
    blocked_route,
    parallel_route,
    route_all,
)
from .rptt import (
    RpttNode,
    balance_cut,
    balance_cut_axis,
    build_tree,
    dump_tree,
    tree_depth,
    tree_leaves,
)
from .rrg import (
    GraphParseError,
    RoutingGraph,
    RrgNode,
    generate_grid,
    load_rrg,
    save_rrg,
)

__version__ = "0.1.0"
