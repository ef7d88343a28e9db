"""Cost arithmetic for negotiated-congestion routing.

A node's use cost combines its wirelength-derived base cost, an accumulated
historical congestion penalty, and a present congestion penalty, discounted
by how many sibling connections of the same net already use the node:

    use_cost = base * historical * present / (1 + share)

The optional legacy mode is the classic additive form instead:

    use_cost = (base + historical) * present

The present penalty grows exponentially across iterations through a scale
factor ``pf``; the historical penalty grows linearly through ``hf``. The
hybrid controller starts present-centric (fast present growth) and, once a
design has been classified as congested and a few iterations have passed,
flips to historical-centric updating: ``pf`` drops to ``alpha`` and ``hf``
rises to ``beta``, which trades raw pathfinding pressure for order-robust
congestion resolution.
"""

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .rrg import RoutingGraph


class ConfigError(ValueError):
    pass


class Phase(enum.Enum):
    PRESENT_CENTRIC = "present-centric"
    HISTORICAL_CENTRIC = "historical-centric"


@dataclass
class CostConfig:
    p0: float = 0.5
    pf: float = 2.0
    hf: float = 1.0
    alpha: float = 1.1
    beta: float = 2.0
    congestion_threshold: float = 0.05
    switch_iteration: int = 3
    astar_weight: float = 1.0
    legacy_mode: bool = False
    hus_enabled: bool = True

    def validate(self) -> "CostConfig":
        if self.p0 <= 0:
            raise ConfigError(f"p0 must be > 0, got {self.p0}")
        if self.pf < 1:
            raise ConfigError(f"pf must be >= 1, got {self.pf}")
        if self.hf <= 0:
            raise ConfigError(f"hf must be > 0, got {self.hf}")
        if not self.alpha < self.pf:
            raise ConfigError(
                f"alpha must stay below pf (slower present growth), "
                f"got alpha={self.alpha} pf={self.pf}"
            )
        if not self.beta > self.hf:
            raise ConfigError(
                f"beta must exceed hf (faster historical growth), "
                f"got beta={self.beta} hf={self.hf}"
            )
        if not (0.0 <= self.congestion_threshold):
            raise ConfigError("congestion_threshold must be >= 0")
        if self.switch_iteration < 0:
            raise ConfigError("switch_iteration must be >= 0")
        if self.astar_weight < 1.0:
            raise ConfigError(f"astar_weight must be >= 1, got {self.astar_weight}")
        return self


@dataclass
class CostState:
    iteration: int = 1
    phase: Phase = Phase.PRESENT_CENTRIC
    effective_pf: float = 2.0
    effective_hf: float = 1.0
    congested_design: bool = False

    @classmethod
    def initial(cls, config: CostConfig) -> "CostState":
        return cls(
            iteration=1,
            phase=Phase.PRESENT_CENTRIC,
            effective_pf=config.pf,
            effective_hf=config.hf,
            congested_design=False,
        )

    def present_factor(self, config: CostConfig) -> float:
        """Scale applied to occupancy in the present cost this iteration."""
        return config.p0 * self.effective_pf ** (self.iteration - 1)


def node_use_cost(b: float, h: float, p: float, share: int) -> float:
    """Cost of adding a node to the current connection's path."""
    return b * h * p / (1.0 + share)


def legacy_node_cost(b: float, h: float, p: float) -> float:
    """Classic additive congestion cost."""
    return (b + h) * p


def total_cost(c_prev: float, c_est: float, c_n: float) -> float:
    """Search key: upstream path cost + remaining estimate + node use cost."""
    return c_prev + c_est + c_n


def manhattan_tiles(graph: RoutingGraph, node: int, sink: int) -> int:
    """Tile distance a path leaving ``node`` must still cover to reach the
    sink's tile. The node's own span is discounted, which keeps the value a
    lower bound regardless of which way the wire points."""
    d = abs(int(graph.tile_x[node]) - int(graph.tile_x[sink])) + abs(
        int(graph.tile_y[node]) - int(graph.tile_y[sink])
    )
    return max(0, d - int(graph.length[node]))


def estimate_to_sink(
    graph: RoutingGraph, node: int, sink: int, weight: float = 1.0
) -> float:
    """Admissible (at weight 1) remaining-cost estimate for the search."""
    if node == sink:
        return 0.0
    return weight * manhattan_tiles(graph, node, sink) * graph.min_unit_cost()


def update_historical(h_prev: float, occ: int, hf: float) -> float:
    """One end-of-iteration historical update for a single node."""
    if occ > 1:
        return h_prev + hf * (occ - 1)
    return h_prev


def present_cost(
    iteration: int, occ: int, p0: float, pf: float, capacity: int = 1
) -> float:
    """Present congestion penalty for a node whose occupancy would be ``occ``
    if the current connection used it. Free nodes cost nothing extra."""
    if occ <= capacity:
        return 1.0
    return 1.0 + p0 * pf ** (iteration - 1) * occ


def classify_congested(
    overused_nodes: int, connections: int, threshold: float
) -> bool:
    """Congested design: first-iteration overuse is large relative to the
    number of connections (strict comparison)."""
    return overused_nodes / connections > threshold


def advance_iteration(
    state: CostState,
    config: CostConfig,
    overused_nodes: int,
    connections: int,
    graph: Optional[RoutingGraph] = None,
) -> CostState:
    """End-of-iteration barrier update.

    Bumps the iteration counter, classifies the design after the first
    iteration, flips to historical-centric coefficients once a congested
    design has passed the switch iteration, and applies the historical
    update to every over-occupied node of the graph (when one is given).
    """
    next_iter = state.iteration + 1
    congested = state.congested_design
    if state.iteration == 1 and connections > 0:
        congested = classify_congested(
            overused_nodes, connections, config.congestion_threshold
        )

    if config.hus_enabled and congested and next_iter > config.switch_iteration:
        phase = Phase.HISTORICAL_CENTRIC
        eff_pf, eff_hf = config.alpha, config.beta
    else:
        phase = Phase.PRESENT_CENTRIC
        eff_pf, eff_hf = config.pf, config.hf

    new_state = CostState(
        iteration=next_iter,
        phase=phase,
        effective_pf=eff_pf,
        effective_hf=eff_hf,
        congested_design=congested,
    )

    if graph is not None:
        over = graph.occupancy > 1
        if np.any(over):
            graph.historical[over] += eff_hf * (
                graph.occupancy[over].astype(np.float64) - 1.0
            )

    return new_state
