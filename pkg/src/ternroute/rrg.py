"""Routing resource graph: array-backed graph model, grid generator, file I/O.

Nodes are wires and pins of an island-style interconnect fabric; directed
edges are programmable switch points (PIPs). The graph is stored in CSR
form over numpy arrays so that search kernels can run without touching
Python objects. Topology arrays are frozen after construction; only the
occupancy and historical-cost arrays are mutable during routing.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

VALID_WIRE_LENGTHS = (1, 2, 4, 12)

# Directions a wire can be traversed in. The anchor of a wire is always its
# low endpoint, so W/S wires are entered at anchor+length and exited at the
# anchor.
_DIR_E, _DIR_W, _DIR_N, _DIR_S = 0, 1, 2, 3

DEFAULT_OUT_PINS = 4
DEFAULT_IN_PINS = 8
PIN_BASE_COST = 0.5


class GraphParseError(ValueError):
    """Raised for malformed RRG files; message carries the line number."""


def default_base_cost(length: int) -> float:
    """Base cost of a node: 0.5 for pins, increasing with wire length.

    Monotone in length, but sub-linear per tile so long wires stay
    attractive per unit distance.
    """
    if length == 0:
        return PIN_BASE_COST
    return 1.0 + 0.25 * (length - 1)


@dataclass
class RrgNode:
    """View of a single routing resource node."""

    id: int
    tile_x: int
    tile_y: int
    length: int
    base_cost: float
    capacity: int = 1
    occupancy: int = 0
    historical: float = 1.0


class RoutingGraph:
    """Directed routing resource graph over a width x height tile grid.

    Topology lives in CSR arrays (``indptr``, ``edge_dst``) plus per-node
    attribute arrays. ``occupancy`` and ``historical`` are the only arrays
    a router mutates; everything else is read-only once built.
    """

    def __init__(
        self,
        grid_width: int,
        grid_height: int,
        tile_x: np.ndarray,
        tile_y: np.ndarray,
        length: np.ndarray,
        base_cost: np.ndarray,
        indptr: np.ndarray,
        edge_dst: np.ndarray,
    ):
        self.grid_width = int(grid_width)
        self.grid_height = int(grid_height)
        self.tile_x = np.ascontiguousarray(tile_x, dtype=np.int32)
        self.tile_y = np.ascontiguousarray(tile_y, dtype=np.int32)
        self.length = np.ascontiguousarray(length, dtype=np.int32)
        self.base_cost = np.ascontiguousarray(base_cost, dtype=np.float64)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.edge_dst = np.ascontiguousarray(edge_dst, dtype=np.int32)

        n = self.num_nodes
        if self.indptr.shape[0] != n + 1:
            raise ValueError("indptr length must be num_nodes + 1")
        if np.any(self.edge_dst < 0) or np.any(self.edge_dst >= n):
            raise ValueError("edge destination out of range")

        self.occupancy = np.zeros(n, dtype=np.int32)
        self.historical = np.ones(n, dtype=np.float64)

        self._out_degree = np.diff(self.indptr)
        self._in_degree = np.bincount(self.edge_dst, minlength=n).astype(np.int64)

        for arr in (self.tile_x, self.tile_y, self.length, self.base_cost,
                    self.indptr, self.edge_dst):
            arr.setflags(write=False)

        self._min_unit_cost: Optional[float] = None
        self._pins_by_tile: Optional[Tuple[List[np.ndarray], List[np.ndarray]]] = None

    @property
    def num_nodes(self) -> int:
        return int(self.tile_x.shape[0])

    @property
    def num_edges(self) -> int:
        return int(self.edge_dst.shape[0])

    def node(self, node_id: int) -> RrgNode:
        return RrgNode(
            id=node_id,
            tile_x=int(self.tile_x[node_id]),
            tile_y=int(self.tile_y[node_id]),
            length=int(self.length[node_id]),
            base_cost=float(self.base_cost[node_id]),
            capacity=1,
            occupancy=int(self.occupancy[node_id]),
            historical=float(self.historical[node_id]),
        )

    def out_edges(self, node_id: int) -> np.ndarray:
        return self.edge_dst[self.indptr[node_id]:self.indptr[node_id + 1]]

    def has_edge(self, src: int, dst: int) -> bool:
        # Neighbor lists are sorted at construction, so membership is a bisect.
        lo, hi = self.indptr[src], self.indptr[src + 1]
        i = np.searchsorted(self.edge_dst[lo:hi], dst)
        return bool(i < hi - lo and self.edge_dst[lo + int(i)] == dst)

    def is_pin(self, node_id: int) -> bool:
        return int(self.length[node_id]) == 0

    def min_unit_cost(self) -> float:
        """Cheapest per-tile cost over wire nodes, with no congestion applied.

        Used as the admissible distance unit for the search heuristic.
        """
        if self._min_unit_cost is None:
            wires = self.length > 0
            if not np.any(wires):
                self._min_unit_cost = 0.0
            else:
                per_tile = self.base_cost[wires] / self.length[wires]
                self._min_unit_cost = float(per_tile.min())
        return self._min_unit_cost

    def _tile_flat(self) -> np.ndarray:
        return self.tile_y.astype(np.int64) * self.grid_width + self.tile_x

    def pins_by_tile(self) -> Tuple[List[np.ndarray], List[np.ndarray]]:
        """Per-tile source and sink pin ids, indexed by flattened tile.

        A pin is source-capable when it has outgoing PIPs, sink-capable when
        it only receives them. Classification is structural so graphs loaded
        from file behave the same as freshly generated ones.
        """
        if self._pins_by_tile is None:
            pin = self.length == 0
            src_mask = pin & (self._out_degree > 0)
            snk_mask = pin & (self._out_degree == 0) & (self._in_degree > 0)
            flat = self._tile_flat()
            ntiles = self.grid_width * self.grid_height
            src_tiles: List[np.ndarray] = [np.empty(0, dtype=np.int64)] * ntiles
            snk_tiles: List[np.ndarray] = [np.empty(0, dtype=np.int64)] * ntiles
            for mask, dest in ((src_mask, src_tiles), (snk_mask, snk_tiles)):
                ids = np.nonzero(mask)[0]
                order = np.argsort(flat[ids], kind="stable")
                ids = ids[order]
                tiles = flat[ids]
                starts = np.searchsorted(tiles, np.arange(ntiles))
                ends = np.searchsorted(tiles, np.arange(ntiles), side="right")
                for t in range(ntiles):
                    if ends[t] > starts[t]:
                        dest[t] = ids[starts[t]:ends[t]]
            self._pins_by_tile = (src_tiles, snk_tiles)
        return self._pins_by_tile

    def reset_routing_state(self) -> None:
        self.occupancy[:] = 0
        self.historical[:] = 1.0

    def structural_equal(self, other: "RoutingGraph") -> bool:
        return (
            self.grid_width == other.grid_width
            and self.grid_height == other.grid_height
            and np.array_equal(self.tile_x, other.tile_x)
            and np.array_equal(self.tile_y, other.tile_y)
            and np.array_equal(self.length, other.length)
            and np.array_equal(self.base_cost, other.base_cost)
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.edge_dst, other.edge_dst)
        )


def _splitmix64(x: np.ndarray) -> np.ndarray:
    z = x + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _edge_keep_mask(seed: int, src: np.ndarray, dst: np.ndarray,
                    density: float) -> np.ndarray:
    """Deterministic per-edge coin flip, stable across runs and platforms."""
    with np.errstate(over="ignore"):
        key = src.astype(np.uint64) * np.uint64(0x9E3779B97F4A7C15)
        key ^= dst.astype(np.uint64) * np.uint64(0xC2B2AE3D27D4EB4F)
        key ^= np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        h = _splitmix64(key)
    return (h >> np.uint64(11)).astype(np.float64) < density * float(2**53)


def generate_grid(
    width: int,
    height: int,
    wires_per_dir_per_len: Dict[int, int],
    switch_density: float,
    seed: int,
    out_pins_per_tile: int = DEFAULT_OUT_PINS,
    in_pins_per_tile: int = DEFAULT_IN_PINS,
    base_cost_fn: Optional[Callable[[int], float]] = None,
) -> RoutingGraph:
    """Build a deterministic island-style routing resource graph.

    Every tile gets the same node block: ``out_pins_per_tile`` source pins,
    ``in_pins_per_tile`` sink pins, then for each wire length class (ascending)
    and each of the four directions E/W/N/S, ``count`` wire nodes anchored at
    the tile. A wire spans ``length`` tiles from its anchor along its axis;
    W/S wires are entered at the far endpoint and exited at the anchor, so
    the anchor is always the low endpoint. PIPs:

      * source pin -> every wire entered at the pin's tile
      * wire exit -> wire entry at the same on-grid tile, thinned to
        ``switch_density`` by a seeded hash
      * wire exit -> every sink pin at the exit tile

    Wires whose far endpoint falls off the grid still exist (their node count
    stays closed-form: tiles x block size) but get no PIPs at the missing
    endpoint.
    """
    if width < 1 or height < 1:
        raise ValueError(f"grid dimensions must be >= 1, got {width}x{height}")
    if not wires_per_dir_per_len:
        raise ValueError("at least one wire length class is required")
    for ln, cnt in wires_per_dir_per_len.items():
        if ln not in VALID_WIRE_LENGTHS:
            raise ValueError(
                f"wire length {ln} not supported; valid lengths: {VALID_WIRE_LENGTHS}"
            )
        if cnt < 0:
            raise ValueError(f"wire count for length {ln} must be >= 0")
    if not any(c >= 1 for c in wires_per_dir_per_len.values()):
        raise ValueError("at least one wire class must have count >= 1")
    if not (0.0 < switch_density <= 1.0):
        raise ValueError(f"switch_density must be in (0, 1], got {switch_density}")
    if out_pins_per_tile < 1 or in_pins_per_tile < 1:
        raise ValueError("pin counts per tile must be >= 1")

    cost_of = base_cost_fn or default_base_cost

    # Per-tile wire slot layout, shared by every tile.
    slot_len: List[int] = []
    slot_dir: List[int] = []
    for ln in sorted(k for k, c in wires_per_dir_per_len.items() if c >= 1):
        cnt = wires_per_dir_per_len[ln]
        for d in (_DIR_E, _DIR_W, _DIR_N, _DIR_S):
            slot_len.extend([ln] * cnt)
            slot_dir.extend([d] * cnt)
    wires_per_tile = len(slot_len)
    block = out_pins_per_tile + in_pins_per_tile + wires_per_tile
    ntiles = width * height
    n = ntiles * block

    slot_len_a = np.asarray(slot_len, dtype=np.int32)
    slot_dir_a = np.asarray(slot_dir, dtype=np.int32)

    tile_idx = np.arange(ntiles, dtype=np.int64)
    tx = (tile_idx % width).astype(np.int32)
    ty = (tile_idx // width).astype(np.int32)

    tile_x = np.repeat(tx, block)
    tile_y = np.repeat(ty, block)
    length = np.zeros(n, dtype=np.int32)
    wire_off = out_pins_per_tile + in_pins_per_tile
    for t in range(ntiles):
        base = t * block
        length[base + wire_off: base + block] = slot_len_a
    base_cost = np.fromiter(
        (cost_of(int(l)) for l in length), dtype=np.float64, count=n
    )

    # Entry/exit tile of every wire node (flattened; -1 when off grid).
    wire_ids = (
        tile_idx[:, None] * block + wire_off + np.arange(wires_per_tile)[None, :]
    ).ravel()
    w_ax = np.repeat(tx, wires_per_tile).astype(np.int64)
    w_ay = np.repeat(ty, wires_per_tile).astype(np.int64)
    w_len = np.tile(slot_len_a, ntiles).astype(np.int64)
    w_dir = np.tile(slot_dir_a, ntiles)

    entry_x = w_ax + np.where(w_dir == _DIR_W, w_len, 0)
    entry_y = w_ay + np.where(w_dir == _DIR_S, w_len, 0)
    exit_x = w_ax + np.where(w_dir == _DIR_E, w_len, 0)
    exit_y = w_ay + np.where(w_dir == _DIR_N, w_len, 0)

    def flatten(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        flat = ys * width + xs
        flat[(xs < 0) | (xs >= width) | (ys < 0) | (ys >= height)] = -1
        return flat

    entry_flat = flatten(entry_x, entry_y)
    exit_flat = flatten(exit_x, exit_y)

    # Group wire ids by entry/exit tile for per-tile PIP construction.
    def group(flat: np.ndarray) -> List[np.ndarray]:
        groups: List[np.ndarray] = [np.empty(0, dtype=np.int64)] * ntiles
        valid = flat >= 0
        ids = wire_ids[valid]
        keys = flat[valid]
        order = np.argsort(keys, kind="stable")
        ids, keys = ids[order], keys[order]
        starts = np.searchsorted(keys, np.arange(ntiles))
        ends = np.searchsorted(keys, np.arange(ntiles), side="right")
        for t in range(ntiles):
            if ends[t] > starts[t]:
                groups[t] = ids[starts[t]:ends[t]]
        return groups

    entries_at = group(entry_flat)
    exits_at = group(exit_flat)

    src_parts: List[np.ndarray] = []
    dst_parts: List[np.ndarray] = []
    for t in range(ntiles):
        base = t * block
        out_pins = np.arange(base, base + out_pins_per_tile, dtype=np.int64)
        in_pins = np.arange(
            base + out_pins_per_tile, base + wire_off, dtype=np.int64
        )
        ent = entries_at[t]
        ext = exits_at[t]

        if ent.size:
            src_parts.append(np.repeat(out_pins, ent.size))
            dst_parts.append(np.tile(ent, out_pins.size))
        if ext.size:
            src_parts.append(np.repeat(ext, in_pins.size))
            dst_parts.append(np.tile(in_pins, ext.size))
        if ent.size and ext.size:
            ww_src = np.repeat(ext, ent.size)
            ww_dst = np.tile(ent, ext.size)
            keep = ww_src != ww_dst
            if switch_density < 1.0:
                keep &= _edge_keep_mask(seed, ww_src, ww_dst, switch_density)
            if np.any(keep):
                src_parts.append(ww_src[keep])
                dst_parts.append(ww_dst[keep])

    if src_parts:
        src = np.concatenate(src_parts)
        dst = np.concatenate(dst_parts)
    else:
        src = np.empty(0, dtype=np.int64)
        dst = np.empty(0, dtype=np.int64)

    # Canonical edge order (src, dst): makes serialization byte-stable.
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])

    return RoutingGraph(
        grid_width=width,
        grid_height=height,
        tile_x=tile_x,
        tile_y=tile_y,
        length=length,
        base_cost=base_cost,
        indptr=indptr,
        edge_dst=dst.astype(np.int32),
    )


def save_rrg(graph: RoutingGraph, path: str) -> None:
    """Write the graph in the line-based RRG v1 text format."""
    lines: List[str] = []
    lines.append(
        f"RRG v1 {graph.grid_width} {graph.grid_height} "
        f"{graph.num_nodes} {graph.num_edges}"
    )
    tx, ty = graph.tile_x, graph.tile_y
    ln, bc = graph.length, graph.base_cost
    for i in range(graph.num_nodes):
        lines.append(f"N {i} {tx[i]} {ty[i]} {ln[i]} {float(bc[i])!r}")
    indptr, dst = graph.indptr, graph.edge_dst
    for s in range(graph.num_nodes):
        for j in range(indptr[s], indptr[s + 1]):
            lines.append(f"E {s} {dst[j]}")
    with open(path, "w") as f:
        f.write("\n".join(lines))
        f.write("\n")


def load_rrg(path: str) -> RoutingGraph:
    """Parse an RRG v1 file; raises GraphParseError naming the bad line."""
    with open(path) as f:
        raw = f.read().splitlines()
    if not raw:
        raise GraphParseError("line 1: empty file, expected RRG v1 header")

    head = raw[0].split()
    if len(head) != 6 or head[0] != "RRG" or head[1] != "v1":
        raise GraphParseError(f"line 1: malformed header: {raw[0]!r}")
    try:
        width, height, n, m = (int(v) for v in head[2:])
    except ValueError:
        raise GraphParseError(f"line 1: non-integer field in header: {raw[0]!r}")
    if width < 1 or height < 1 or n < 0 or m < 0:
        raise GraphParseError("line 1: header values out of range")

    tile_x = np.zeros(n, dtype=np.int32)
    tile_y = np.zeros(n, dtype=np.int32)
    length = np.zeros(n, dtype=np.int32)
    base_cost = np.zeros(n, dtype=np.float64)
    seen = np.zeros(n, dtype=bool)
    src_list = np.zeros(m, dtype=np.int64)
    dst_list = np.zeros(m, dtype=np.int64)
    n_nodes = 0
    n_edges = 0

    for lineno, line in enumerate(raw[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "N":
            if len(parts) != 6:
                raise GraphParseError(f"line {lineno}: malformed node line")
            try:
                nid = int(parts[1])
                x, y, ln = int(parts[2]), int(parts[3]), int(parts[4])
                bc = float(parts[5])
            except ValueError:
                raise GraphParseError(f"line {lineno}: non-numeric node field")
            if not (0 <= nid < n):
                raise GraphParseError(f"line {lineno}: node id {nid} out of range")
            if seen[nid]:
                raise GraphParseError(f"line {lineno}: duplicate node id {nid}")
            seen[nid] = True
            tile_x[nid], tile_y[nid], length[nid] = x, y, ln
            base_cost[nid] = bc
            n_nodes += 1
        elif tag == "E":
            if len(parts) != 3:
                raise GraphParseError(f"line {lineno}: malformed edge line")
            try:
                s, d = int(parts[1]), int(parts[2])
            except ValueError:
                raise GraphParseError(f"line {lineno}: non-numeric edge field")
            if not (0 <= s < n) or not (0 <= d < n):
                raise GraphParseError(
                    f"line {lineno}: unknown node in edge {s} -> {d}"
                )
            if s == d:
                raise GraphParseError(f"line {lineno}: self-loop edge on node {s}")
            if n_edges >= m:
                raise GraphParseError(
                    f"line {lineno}: more edges than declared in header"
                )
            src_list[n_edges] = s
            dst_list[n_edges] = d
            n_edges += 1
        else:
            raise GraphParseError(f"line {lineno}: unknown record type {tag!r}")

    if n_nodes != n:
        raise GraphParseError(
            f"line {len(raw)}: header declares {n} nodes, found {n_nodes}"
        )
    if n_edges != m:
        raise GraphParseError(
            f"line {len(raw)}: header declares {m} edges, found {n_edges}"
        )
    # Edge destinations must reference declared nodes (they do by range check),
    # but an edge may still point at a node id never declared via an N line.
    if n and not np.all(seen):
        missing = int(np.nonzero(~seen)[0][0])
        raise GraphParseError(f"line {len(raw)}: node id {missing} never declared")

    order = np.lexsort((dst_list, src_list))
    src_list, dst_list = src_list[order], dst_list[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src_list, minlength=n), out=indptr[1:])

    return RoutingGraph(
        grid_width=width,
        grid_height=height,
        tile_x=tile_x,
        tile_y=tile_y,
        length=length,
        base_cost=base_cost,
        indptr=indptr,
        edge_dst=dst_list.astype(np.int32),
    )
