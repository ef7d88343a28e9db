"""Bounding-box constrained A* over the CSR routing graph.

The kernel is compiled with numba and releases the GIL, so worker threads
searching different connections run truly in parallel. All mutable search
state lives in per-thread scratch arrays; an epoch stamp marks which
entries are valid for the current search, avoiding a full clear per call.

Congestion state (occupancy, historical) is read without locking: writers
commit under a lock on the Python side and stale values are acceptable to
the negotiation loop. The heuristic is the remaining tile distance (with
the node's own span discounted) times the cheapest per-tile cost, which
never overestimates the uncongested remaining cost; re-relaxation of
already-popped nodes is allowed, so paths stay optimal even where reuse
discounts make the heuristic locally inconsistent.
"""

from typing import Tuple

import numpy as np
from numba import njit


class SearchContext:
    """Per-thread scratch for the A* kernel."""

    def __init__(self, num_nodes: int):
        self.g_score = np.zeros(num_nodes, dtype=np.float64)
        self.parent = np.full(num_nodes, -1, dtype=np.int32)
        self.epoch = np.zeros(num_nodes, dtype=np.int64)
        self.share = np.zeros(num_nodes, dtype=np.int32)
        self._epoch_counter = 0

    def next_epoch(self) -> int:
        self._epoch_counter += 1
        return self._epoch_counter


@njit(cache=True, nogil=True)
def _astar(indptr, edge_dst, tile_x, tile_y, length, base_cost,
           occupancy, historical, share,
           source, sink, bx_min, by_min, bx_max, by_max,
           pres_factor, legacy, weight, min_unit,
           g_score, parent, epoch, epoch_id):
    sink_x = tile_x[sink]
    sink_y = tile_y[sink]

    cap = 1024
    heap_f = np.empty(cap, dtype=np.float64)
    heap_g = np.empty(cap, dtype=np.float64)
    heap_n = np.empty(cap, dtype=np.int32)

    g_score[source] = 0.0
    parent[source] = -1
    epoch[source] = epoch_id
    d0 = abs(tile_x[source] - sink_x) + abs(tile_y[source] - sink_y) - length[source]
    if d0 < 0:
        d0 = 0
    heap_f[0] = weight * min_unit * d0
    heap_g[0] = 0.0
    heap_n[0] = source
    size = 1

    found = False
    final_g = 0.0

    while size > 0:
        top_g = heap_g[0]
        v = heap_n[0]
        # pop: move last entry to the root and sift down
        size -= 1
        if size > 0:
            lf = heap_f[size]
            lg = heap_g[size]
            ln = heap_n[size]
            i = 0
            while True:
                c = 2 * i + 1
                if c >= size:
                    break
                if c + 1 < size and heap_f[c + 1] < heap_f[c]:
                    c += 1
                if heap_f[c] < lf:
                    heap_f[i] = heap_f[c]
                    heap_g[i] = heap_g[c]
                    heap_n[i] = heap_n[c]
                    i = c
                else:
                    break
            heap_f[i] = lf
            heap_g[i] = lg
            heap_n[i] = ln

        if top_g > g_score[v]:
            continue  # stale heap entry
        if v == sink:
            found = True
            final_g = top_g
            break

        for j in range(indptr[v], indptr[v + 1]):
            u = edge_dst[j]
            ux = tile_x[u]
            uy = tile_y[u]
            if ux < bx_min or ux > bx_max or uy < by_min or uy > by_max:
                continue
            lu = length[u]
            if lu == 0 and u != sink:
                continue  # foreign pins are dead ends
            sh = share[u]
            occ = occupancy[u]
            if sh > 0:
                occ -= 1  # our net already holds this node
            would_be = occ + 1
            if would_be > 1:
                p = 1.0 + pres_factor * would_be
            else:
                p = 1.0
            if legacy:
                c_u = (base_cost[u] + historical[u]) * p
            else:
                c_u = base_cost[u] * historical[u] * p / (1.0 + sh)
            ng = top_g + c_u
            if epoch[u] == epoch_id and ng >= g_score[u]:
                continue
            g_score[u] = ng
            parent[u] = v
            epoch[u] = epoch_id

            du = abs(ux - sink_x) + abs(uy - sink_y) - lu
            if du < 0:
                du = 0
            nf = ng + weight * min_unit * du

            if size == cap:
                cap *= 2
                tf = np.empty(cap, dtype=np.float64)
                tg = np.empty(cap, dtype=np.float64)
                tn = np.empty(cap, dtype=np.int32)
                tf[:size] = heap_f
                tg[:size] = heap_g
                tn[:size] = heap_n
                heap_f, heap_g, heap_n = tf, tg, tn
            i = size
            size += 1
            while i > 0:
                par = (i - 1) // 2
                if heap_f[par] > nf:
                    heap_f[i] = heap_f[par]
                    heap_g[i] = heap_g[par]
                    heap_n[i] = heap_n[par]
                    i = par
                else:
                    break
            heap_f[i] = nf
            heap_g[i] = ng
            heap_n[i] = u

    if not found:
        return 0, 0.0, np.empty(0, dtype=np.int32)

    count = 1
    v = sink
    while parent[v] != -1:
        v = parent[v]
        count += 1
    path = np.empty(count, dtype=np.int32)
    v = sink
    for k in range(count - 1, -1, -1):
        path[k] = v
        v = parent[v]
    return 1, final_g, path


def run_search(
    graph,
    ctx: SearchContext,
    source: int,
    sink: int,
    bbox: Tuple[int, int, int, int],
    pres_factor: float,
    legacy: bool,
    weight: float,
) -> Tuple[bool, float, np.ndarray]:
    """One constrained search; returns (found, path cost, node-id path)."""
    eid = ctx.next_epoch()
    status, cost, path = _astar(
        graph.indptr, graph.edge_dst, graph.tile_x, graph.tile_y,
        graph.length, graph.base_cost, graph.occupancy, graph.historical,
        ctx.share,
        source, sink, bbox[0], bbox[1], bbox[2], bbox[3],
        pres_factor, legacy, weight, graph.min_unit_cost(),
        ctx.g_score, ctx.parent, ctx.epoch, eid,
    )
    return bool(status), float(cost), path


def warmup_kernel() -> None:
    """Force JIT compilation so timed runs never pay the compile cost."""
    indptr = np.array([0, 1, 1], dtype=np.int64)
    edge_dst = np.array([1], dtype=np.int32)
    tile_x = np.array([0, 1], dtype=np.int32)
    tile_y = np.array([0, 0], dtype=np.int32)
    length = np.array([0, 0], dtype=np.int32)
    base_cost = np.array([0.5, 0.5], dtype=np.float64)
    occupancy = np.zeros(2, dtype=np.int32)
    historical = np.ones(2, dtype=np.float64)
    # Topology arrays are read-only in real graphs; match that here so the
    # warmup compiles the exact specialization later calls will hit.
    for arr in (indptr, edge_dst, tile_x, tile_y, length, base_cost):
        arr.setflags(write=False)
    ctx = SearchContext(2)
    _astar(
        indptr, edge_dst, tile_x, tile_y, length, base_cost,
        occupancy, historical, ctx.share,
        0, 1, 0, 0, 1, 1,
        0.5, False, 1.0, 1.0,
        ctx.g_score, ctx.parent, ctx.epoch, ctx.next_epoch(),
    )
