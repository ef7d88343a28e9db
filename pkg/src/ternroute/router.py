"""Connection router: A* search, rip-up and reroute, and the parallel
negotiation loop scheduled over the partitioning ternary tree.

Each routing iteration rebuilds the tree from the connections that are
still illegal (unrouted, or running through an over-occupied node), then
executes its leaves on a worker pool. The ordering contract enforced by
the scheduler: at every internal tree node all middle-subtree connections
finish before any left/right-subtree connection starts, the two sides run
with no mutual ordering, and a leaf routes its connections sequentially.
The contract is implemented with dependency gates instead of blocking
waits, so a fixed-size pool can never deadlock and worker stacks stay flat.

Graph topology and the tree are shared read-only. Occupancy, per-net usage
counts and the overuse set are committed under a single lock; searches read
congestion state without locking and tolerate staleness. Connections of one
net are never in flight simultaneously: every bounding box of a net contains
the net's source tile, so no cutline can put two of them on strictly
opposite sides, and mid-before-sides ordering serializes the rest.
"""

import heapq
import json
import threading
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .cost import CostConfig, CostState, Phase, advance_iteration
from .netlist import Connection, Netlist, connection_bbox
from .rptt import RpttNode, build_tree, dump_tree
from .search import SearchContext, run_search

SCHEDULER_RPTT = "rptt"
SCHEDULER_BINARY = "binary"

_BBOX_RETRIES = 3


class UnroutableError(RuntimeError):
    """A sink stayed unreachable even with the search box grown to the
    full device."""


@dataclass
class RouteOptions:
    cost: CostConfig = field(default_factory=CostConfig)
    threads: int = 16
    max_iterations: int = 500
    bbox_margin: int = 3
    scheduler: str = SCHEDULER_RPTT
    instrument: bool = False
    stats_jsonl: Optional[str] = None
    dump_tree: Optional[str] = None  # debug: write each iteration's tree

    def validate(self) -> "RouteOptions":
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.scheduler not in (SCHEDULER_RPTT, SCHEDULER_BINARY):
            raise ValueError(f"unknown scheduler {self.scheduler!r}")
        self.cost.validate()
        return self


@dataclass
class RouteTask:
    connection: Connection
    bbox: Tuple[int, int, int, int]
    priority: Tuple[int, int, int]  # (bbox area, net id, conn idx)


@dataclass
class IterationStats:
    iteration: int
    overused_nodes: int
    routed_connections: int
    phase: str
    wall_ms: float

    def to_dict(self) -> Dict:
        return {
            "iteration": self.iteration,
            "overused_nodes": self.overused_nodes,
            "routed_connections": self.routed_connections,
            "phase": self.phase,
            "wall_ms": self.wall_ms,
        }


@dataclass
class ConnectionEvent:
    """Instrumentation record for scheduling-contract checks."""

    iteration: int
    net_id: int
    conn_idx: int
    start_ns: int
    end_ns: int
    worker: int


@dataclass
class RoutingResult:
    success: bool
    iterations: int
    overflow_nodes: int
    wall_time_s: float
    per_iteration: List[IterationStats] = field(default_factory=list)
    events: List[ConnectionEvent] = field(default_factory=list)


class _Gate:
    """Internal tree node whose middle subtree gates its side leaves."""

    __slots__ = ("mid_pending", "side_leaves")

    def __init__(self):
        self.mid_pending = 0
        self.side_leaves: List["_LeafTask"] = []


class _LeafTask:
    __slots__ = ("tasks", "gates_remaining", "mid_memberships")

    def __init__(self, tasks: List[RouteTask]):
        self.tasks = tasks
        self.gates_remaining = 0
        self.mid_memberships: Tuple[_Gate, ...] = ()


def _task_order(conn: Connection) -> Tuple[int, int, int]:
    return (conn.bbox_area(), conn.net_id, conn.conn_idx)


def _make_leaf(connections: List[Connection], gates: Tuple[_Gate, ...],
               memberships: Tuple[_Gate, ...]) -> _LeafTask:
    tasks = [RouteTask(c, c.bbox, _task_order(c)) for c in connections]
    tasks.sort(key=lambda t: t.priority)
    leaf = _LeafTask(tasks)
    leaf.gates_remaining = len(gates)
    leaf.mid_memberships = memberships
    for g in gates:
        g.side_leaves.append(leaf)
    for g in memberships:
        g.mid_pending += 1
    return leaf


def _build_plan(root: RpttNode, scheduler: str) -> List[_LeafTask]:
    """Flatten the tree into gated leaf tasks.

    In binary-emulation mode a middle subtree is not recursed into: its
    whole connection set becomes one sequential task, which is how a plain
    bi-partitioning tree would route the cutline-crossing nets.
    """
    leaves: List[_LeafTask] = []
    stack: List[Tuple[RpttNode, Tuple[_Gate, ...], Tuple[_Gate, ...]]] = [
        (root, (), ())
    ]
    while stack:
        node, gates, memberships = stack.pop()
        if node.is_leaf:
            if node.connections:
                leaves.append(_make_leaf(node.connections, gates, memberships))
            continue
        if node.mid is not None:
            gate = _Gate()
            side_gates = gates + (gate,)
            if scheduler == SCHEDULER_BINARY:
                leaves.append(
                    _make_leaf(node.mid.connections, gates, memberships + (gate,))
                )
            else:
                stack.append((node.mid, gates, memberships + (gate,)))
        else:
            side_gates = gates
        stack.append((node.left, side_gates, memberships))
        stack.append((node.right, side_gates, memberships))
    return leaves


class RouterPool:
    """Fixed-size worker pool executing gated leaf tasks.

    Workers never block on other tasks: a leaf enters the ready queue only
    once every middle subtree it waits on has fully completed, so any number
    of workers (including one) makes progress and the pool cannot deadlock.
    """

    def __init__(self, router: "Router", threads: Optional[int] = None):
        self.router = router
        self.threads = threads if threads is not None else router.options.threads
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        self._cv = threading.Condition()
        # Max-heap on task count: largest ready leaf first packs the fixed
        # worker set better than submission order.
        self._ready: List[Tuple[int, int, _LeafTask]] = []
        self._seq = 0
        self._pending = 0
        self._error: Optional[BaseException] = None
        self._shutdown = False
        self._workers = [
            threading.Thread(target=self._worker_loop, args=(i,), daemon=True)
            for i in range(self.threads)
        ]
        for w in self._workers:
            w.start()

    def _push_ready(self, leaf: _LeafTask) -> None:
        self._seq += 1
        heapq.heappush(self._ready, (-len(leaf.tasks), self._seq, leaf))

    def submit_plan(self, leaves: List[_LeafTask]) -> None:
        with self._cv:
            self._pending += len(leaves)
            for leaf in leaves:
                if leaf.gates_remaining == 0:
                    self._push_ready(leaf)
            self._cv.notify_all()

    def finish(self) -> None:
        """Block until every submitted task (and the tasks it gated) is done."""
        with self._cv:
            while self._pending > 0 and self._error is None:
                self._cv.wait()
            if self._error is not None:
                raise RuntimeError(
                    f"routing worker failed; iteration aborted: {self._error}"
                ) from self._error

    def close(self) -> None:
        with self._cv:
            self._shutdown = True
            self._cv.notify_all()
        for w in self._workers:
            w.join()

    def __enter__(self) -> "RouterPool":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _worker_loop(self, worker_idx: int) -> None:
        ctx = SearchContext(self.router.graph.num_nodes)
        while True:
            with self._cv:
                while (not self._ready and not self._shutdown
                       and self._error is None):
                    self._cv.wait()
                if self._shutdown or self._error is not None:
                    return
                _, _, leaf = heapq.heappop(self._ready)
            try:
                for task in leaf.tasks:
                    self.router.route_connection(
                        task.connection, ctx, worker=worker_idx
                    )
            except BaseException as exc:
                with self._cv:
                    if self._error is None:
                        self._error = exc
                    self._cv.notify_all()
                return
            with self._cv:
                for gate in leaf.mid_memberships:
                    gate.mid_pending -= 1
                    if gate.mid_pending == 0:
                        for side in gate.side_leaves:
                            side.gates_remaining -= 1
                            if side.gates_remaining == 0:
                                self._push_ready(side)
                self._pending -= 1
                self._cv.notify_all()


def parallel_route(tree_node: RpttNode, pool: RouterPool) -> None:
    """Schedule a subtree onto the pool and return without waiting.

    Ordering inside the subtree (mid before sides, sides unordered, leaves
    sequential) is enforced by the plan's gates.
    """
    pool.submit_plan(_build_plan(tree_node, pool.router.options.scheduler))


def blocked_route(tree_node: RpttNode, router: "Router",
                  threads: Optional[int] = None) -> None:
    """Route a subtree to completion on a pool of its own."""
    with RouterPool(router, threads) as pool:
        parallel_route(tree_node, pool)
        pool.finish()


class Router:
    """Holds the mutable routing state for one (graph, netlist) pair."""

    def __init__(self, graph, netlist: Netlist,
                 options: Optional[RouteOptions] = None):
        self.graph = graph
        self.netlist = netlist
        self.options = (options or RouteOptions()).validate()
        self.state = CostState.initial(self.options.cost)
        self.nets_by_id = {net.id: net for net in netlist.nets}
        self.commit_lock = threading.Lock()
        self.overused: set = set()
        self.events: List[ConnectionEvent] = []
        self.per_iteration: List[IterationStats] = []
        self._pres_factor = self.state.present_factor(self.options.cost)
        self._default_ctx: Optional[SearchContext] = None
        self.overused.update(
            int(i) for i in np.nonzero(graph.occupancy > 1)[0]
        )

    # -- state commits -----------------------------------------------------

    def rip_up(self, conn: Connection) -> None:
        """Release a connection's path; inverse of install, no-op if unrouted."""
        if not conn.path:
            return
        net = self.nets_by_id[conn.net_id]
        occ = self.graph.occupancy
        with self.commit_lock:
            for nid in conn.path:
                cnt = net.usage[nid] - 1
                if cnt == 0:
                    del net.usage[nid]
                    occ[nid] -= 1
                    if occ[nid] <= 1:
                        self.overused.discard(nid)
                else:
                    net.usage[nid] = cnt
            conn.path = []

    def _install(self, conn: Connection, path: List[int]) -> None:
        net = self.nets_by_id[conn.net_id]
        occ = self.graph.occupancy
        with self.commit_lock:
            for nid in path:
                cnt = net.usage.get(nid, 0)
                net.usage[nid] = cnt + 1
                if cnt == 0:
                    occ[nid] += 1
                    if occ[nid] > 1:
                        self.overused.add(nid)
            conn.path = path

    # -- per-connection routing --------------------------------------------

    def _search_boxes(self, conn: Connection):
        yield conn.bbox
        margin = max(self.options.bbox_margin, 1)
        prev = conn.bbox
        for _ in range(_BBOX_RETRIES):
            margin *= 2
            box = connection_bbox(self.graph, conn.source, conn.sink, margin)
            if box != prev:
                yield box
                prev = box
        full = (0, 0, self.graph.grid_width - 1, self.graph.grid_height - 1)
        if full != prev:
            yield full

    def route_connection(self, conn: Connection,
                         ctx: Optional[SearchContext] = None,
                         worker: int = -1) -> List[int]:
        """Rip up and re-route one connection under current costs.

        The path is installed immediately (occupancy and the net's usage
        counts are bumped); overuse is allowed here and negotiated away by
        later iterations. The search box grows by doubling the margin when
        the sink is unreachable, then falls back to the whole device.
        """
        if conn.source == conn.sink:
            self.rip_up(conn)
            return []
        if ctx is None:
            if self._default_ctx is None:
                self._default_ctx = SearchContext(self.graph.num_nodes)
            ctx = self._default_ctx

        start_ns = time.monotonic_ns() if self.options.instrument else 0
        self.rip_up(conn)

        net = self.nets_by_id[conn.net_id]
        touched = list(net.usage.items())
        for nid, cnt in touched:
            ctx.share[nid] = cnt
        cfg = self.options.cost
        try:
            found = False
            path_arr = None
            used_box = conn.bbox
            for box in self._search_boxes(conn):
                found, _cost, path_arr = run_search(
                    self.graph, ctx, conn.source, conn.sink, box,
                    self._pres_factor, cfg.legacy_mode, cfg.astar_weight,
                )
                if found:
                    used_box = box
                    break
        finally:
            for nid, _ in touched:
                ctx.share[nid] = 0

        if not found:
            raise UnroutableError(
                f"net {conn.net_id} connection {conn.conn_idx}: sink "
                f"{conn.sink} unreachable from {conn.source} even on the "
                f"full device"
            )
        if used_box != conn.bbox:
            conn.bbox = used_box  # keep partitioning honest about the region
        path = [int(n) for n in path_arr]
        self._install(conn, path)

        if self.options.instrument:
            self.events.append(ConnectionEvent(
                iteration=self.state.iteration,
                net_id=conn.net_id,
                conn_idx=conn.conn_idx,
                start_ns=start_ns,
                end_ns=time.monotonic_ns(),
                worker=worker,
            ))
        return path

    # -- iteration machinery -------------------------------------------------

    def overused_count_scratch(self) -> int:
        return int(np.count_nonzero(self.graph.occupancy > 1))

    def _check_counters(self) -> None:
        scratch = self.overused_count_scratch()
        if scratch != len(self.overused):
            raise RuntimeError(
                f"incremental overuse tracking diverged: set has "
                f"{len(self.overused)}, scratch recount has {scratch}"
            )

    def _select_illegal(self) -> List[Connection]:
        occ = self.graph.occupancy
        selected = []
        for conn in self.netlist.connections:
            if conn.source == conn.sink:
                continue
            if not conn.path:
                conn.congested_flag = False
                selected.append(conn)
                continue
            path = np.asarray(conn.path, dtype=np.int64)
            congested = bool(np.any(occ[path] > 1))
            conn.congested_flag = congested
            if congested:
                selected.append(conn)
        return selected

    def route_all(self) -> RoutingResult:
        """Negotiate until no node is over-occupied or iterations run out."""
        opts = self.options
        t_start = time.perf_counter()
        to_route = [c for c in self.netlist.connections if c.source != c.sink]

        stats_file = open(opts.stats_jsonl, "w") if opts.stats_jsonl else None
        dump_file = open(opts.dump_tree, "w") if opts.dump_tree else None
        try:
            if not to_route:
                return RoutingResult(
                    success=True, iterations=0, overflow_nodes=0,
                    wall_time_s=time.perf_counter() - t_start,
                )

            with RouterPool(self) as pool:
                success = False
                while True:
                    iter_t0 = time.perf_counter()
                    tree = build_tree(to_route)
                    if dump_file:
                        dump_file.write(
                            f"# iteration {self.state.iteration}\n"
                            f"{dump_tree(tree)}\n"
                        )
                        dump_file.flush()
                    parallel_route(tree, pool)
                    pool.finish()

                    self._check_counters()
                    overused = len(self.overused)
                    stats = IterationStats(
                        iteration=self.state.iteration,
                        overused_nodes=overused,
                        routed_connections=len(to_route),
                        phase=self.state.phase.value,
                        wall_ms=(time.perf_counter() - iter_t0) * 1e3,
                    )
                    self.per_iteration.append(stats)
                    if stats_file:
                        stats_file.write(json.dumps(stats.to_dict()) + "\n")
                        stats_file.flush()

                    if overused == 0:
                        success = True
                        break
                    if self.state.iteration >= opts.max_iterations:
                        break

                    self.state = advance_iteration(
                        self.state, opts.cost, overused,
                        len(self.netlist.connections), self.graph,
                    )
                    self._pres_factor = self.state.present_factor(opts.cost)
                    to_route = self._select_illegal()

            return RoutingResult(
                success=success,
                iterations=self.state.iteration,
                overflow_nodes=len(self.overused),
                wall_time_s=time.perf_counter() - t_start,
                per_iteration=self.per_iteration,
                events=self.events,
            )
        finally:
            if stats_file:
                stats_file.close()
            if dump_file:
                dump_file.close()


def route_all(graph, netlist: Netlist,
              options: Optional[RouteOptions] = None) -> RoutingResult:
    """Route every connection of the netlist; returns stats and success."""
    return Router(graph, netlist, options).route_all()
