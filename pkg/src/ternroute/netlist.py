"""Nets, two-pin connections, and the synthetic benchmark generator.

A multi-pin net is decomposed into one connection per sink. Connections own
the bounding box the router searches in and the partitioner cuts on; every
connection of a net contains the net's source tile, which is what makes the
scheduler's no-intra-net-parallelism guarantee hold (two boxes sharing a
tile can never sit strictly on opposite sides of a cutline).
"""

import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from .rrg import RoutingGraph

DEFAULT_BBOX_MARGIN = 3

_LOCAL_PLACEMENT_RETRIES = 64
_GLOBAL_PLACEMENT_RETRIES = 256


class InvalidNetlistError(ValueError):
    pass


class NetlistParseError(ValueError):
    """Raised for malformed netlist files; message carries the line number."""


class GenerationError(RuntimeError):
    """Benchmark generation could not place the requested pins."""


@dataclass
class Net:
    id: int
    source_node: int
    sink_nodes: List[int]
    # node id -> number of this net's routed connections using the node
    usage: Dict[int, int] = field(default_factory=dict)


@dataclass
class Connection:
    net_id: int
    conn_idx: int
    source: int
    sink: int
    bbox: Tuple[int, int, int, int]  # x_min, y_min, x_max, y_max (tiles)
    path: List[int] = field(default_factory=list)
    congested_flag: bool = False

    @property
    def x_min(self) -> int:
        return self.bbox[0]

    @property
    def y_min(self) -> int:
        return self.bbox[1]

    @property
    def x_max(self) -> int:
        return self.bbox[2]

    @property
    def y_max(self) -> int:
        return self.bbox[3]

    def bbox_area(self) -> int:
        return (self.bbox[2] - self.bbox[0] + 1) * (self.bbox[3] - self.bbox[1] + 1)


@dataclass
class Netlist:
    nets: List[Net]
    connections: List[Connection]


def connection_bbox(
    graph: RoutingGraph, source: int, sink: int, margin: int
) -> Tuple[int, int, int, int]:
    """Tile rectangle covering both endpoints, expanded by the margin and
    clamped to the grid."""
    sx, sy = int(graph.tile_x[source]), int(graph.tile_y[source])
    tx, ty = int(graph.tile_x[sink]), int(graph.tile_y[sink])
    return (
        max(0, min(sx, tx) - margin),
        max(0, min(sy, ty) - margin),
        min(graph.grid_width - 1, max(sx, tx) + margin),
        min(graph.grid_height - 1, max(sy, ty) + margin),
    )


def decompose(
    nets: List[Net], graph: RoutingGraph, margin: int = DEFAULT_BBOX_MARGIN
) -> List[Connection]:
    """Split every net into (source, sink) connections with search boxes."""
    connections: List[Connection] = []
    for net in nets:
        if not net.sink_nodes:
            raise InvalidNetlistError(f"net {net.id} has no sinks")
        for node in [net.source_node] + list(net.sink_nodes):
            if not (0 <= node < graph.num_nodes):
                raise InvalidNetlistError(
                    f"net {net.id} references unknown node {node}"
                )
            if not graph.is_pin(node):
                raise InvalidNetlistError(
                    f"net {net.id} endpoint {node} is not a pin node"
                )
        for idx, sink in enumerate(net.sink_nodes):
            connections.append(
                Connection(
                    net_id=net.id,
                    conn_idx=idx,
                    source=net.source_node,
                    sink=sink,
                    bbox=connection_bbox(graph, net.source_node, sink, margin),
                )
            )
    return connections


def _sample_fanout(rng: random.Random, mean: float) -> int:
    """Geometric fanout on {1, 2, ...} with the given mean."""
    if mean <= 1.0:
        return 1
    p = 1.0 / mean
    u = rng.random()
    return 1 + int(math.log(1.0 - u) / math.log(1.0 - p))


def generate_benchmark(
    graph: RoutingGraph,
    num_nets: int,
    fanout_mean: float,
    locality: int,
    seed: int,
    margin: int = DEFAULT_BBOX_MARGIN,
) -> Netlist:
    """Place nets with sinks close to their sources.

    Pins are allocated globally without replacement (node capacity is 1, so
    two nets sharing an endpoint pin could never be legalized). Sinks land
    within ``locality`` tiles of the source with high probability; when a
    neighborhood runs out of free sink pins the generator falls back to a
    uniformly random tile, and gives up with GenerationError only when the
    whole device is exhausted. Deterministic in all parameters plus seed.
    """
    if num_nets < 0:
        raise ValueError("num_nets must be >= 0")
    if locality < 1:
        raise ValueError("locality must be >= 1")
    if fanout_mean < 1.0:
        raise ValueError("fanout_mean must be >= 1")

    rng = random.Random(seed)
    width, height = graph.grid_width, graph.grid_height
    ntiles = width * height
    src_pins, snk_pins = graph.pins_by_tile()
    # Allocation cursor per tile; pins are handed out in id order.
    src_free = [list(map(int, p)) for p in src_pins]
    snk_free = [list(map(int, p)) for p in snk_pins]

    def take_pin(pools: List[List[int]], tile: int) -> int:
        return pools[tile].pop(0)

    def pick_source_tile() -> int:
        for _ in range(_GLOBAL_PLACEMENT_RETRIES):
            t = rng.randrange(ntiles)
            if src_free[t]:
                return t
        raise GenerationError("no free source pins left on the device")

    def pick_sink_tile(sx: int, sy: int) -> int:
        for _ in range(_LOCAL_PLACEMENT_RETRIES):
            x = sx + rng.randint(-locality, locality)
            y = sy + rng.randint(-locality, locality)
            if not (0 <= x < width and 0 <= y < height):
                continue
            if x == sx and y == sy:
                continue
            t = y * width + x
            if snk_free[t]:
                return t
        for _ in range(_GLOBAL_PLACEMENT_RETRIES):
            t = rng.randrange(ntiles)
            if (t % width, t // width) == (sx, sy):
                continue
            if snk_free[t]:
                return t
        raise GenerationError("no free sink pins left on the device")

    nets: List[Net] = []
    for net_id in range(num_nets):
        st = pick_source_tile()
        source = take_pin(src_free, st)
        sx, sy = st % width, st // width
        fanout = _sample_fanout(rng, fanout_mean)
        sinks: List[int] = []
        for _ in range(fanout):
            tt = pick_sink_tile(sx, sy)
            sinks.append(take_pin(snk_free, tt))
        nets.append(Net(id=net_id, source_node=source, sink_nodes=sinks))

    return Netlist(nets=nets, connections=decompose(nets, graph, margin))


def save_netlist(netlist: Netlist, path: str) -> None:
    """Write ``NET <id> <src> <sink>+`` lines."""
    with open(path, "w") as f:
        for net in netlist.nets:
            sinks = " ".join(str(s) for s in net.sink_nodes)
            f.write(f"NET {net.id} {net.source_node} {sinks}\n")


def load_netlist(
    path: str, graph: RoutingGraph, margin: int = DEFAULT_BBOX_MARGIN
) -> Netlist:
    """Parse a netlist file and rebuild its connections against the graph."""
    nets: List[Net] = []
    seen_ids = set()
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if parts[0] != "NET":
                raise NetlistParseError(
                    f"line {lineno}: unknown record type {parts[0]!r}"
                )
            if len(parts) < 4:
                raise NetlistParseError(
                    f"line {lineno}: net needs an id, a source and >= 1 sink"
                )
            try:
                net_id = int(parts[1])
                source = int(parts[2])
                sinks = [int(s) for s in parts[3:]]
            except ValueError:
                raise NetlistParseError(f"line {lineno}: non-integer field")
            if net_id in seen_ids:
                raise NetlistParseError(f"line {lineno}: duplicate net id {net_id}")
            seen_ids.add(net_id)
            for node in [source] + sinks:
                if not (0 <= node < graph.num_nodes):
                    raise NetlistParseError(
                        f"line {lineno}: unknown node id {node}"
                    )
            nets.append(Net(id=net_id, source_node=source, sink_nodes=sinks))
    return Netlist(nets=nets, connections=decompose(nets, graph, margin))
