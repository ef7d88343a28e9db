"""Solution validation, wirelength metrics, contest-style scoring, reports.

The validator is deliberately independent of the router: it recomputes
node usage from the solution paths alone and never looks at the router's
incremental counters. Nodes shared by connections of one net count once;
a node used by more than one distinct net is an overflow.

Wirelength of a path is the sum of node lengths in tiles (pins contribute
zero). A net's wirelength counts each node once across its connections;
the critical-path wirelength is the maximum single-connection wirelength,
and the overall score is 0.9 * runtime_seconds + 0.1 * critical wirelength.
"""

import csv
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .netlist import Netlist
from .rrg import RoutingGraph

Solution = Dict[Tuple[int, int], List[int]]  # (net id, conn idx) -> path


class SolutionParseError(ValueError):
    """Raised for malformed solution files; message carries the line number."""


@dataclass
class Violation:
    kind: str  # "overflow" | "disconnected"
    detail: str
    node: Optional[int] = None
    net_id: Optional[int] = None
    conn_idx: Optional[int] = None


@dataclass
class RoutingReport:
    legal: bool
    overflow_nodes: int
    disconnected_connections: int
    total_wirelength: int
    critical_path_wirelength: int
    runtime_s: float
    score: float
    per_iteration: List[Dict] = field(default_factory=list)


def _paths(netlist: Netlist, solution: Optional[Solution]) -> Solution:
    if solution is not None:
        return solution
    return {
        (c.net_id, c.conn_idx): c.path for c in netlist.connections
    }


def validate(
    graph: RoutingGraph, netlist: Netlist, solution: Optional[Solution] = None
) -> Tuple[int, int, List[Violation]]:
    """Check a solution from scratch.

    Returns (overflow node count, disconnected connection count, details).
    When ``solution`` is omitted the paths installed on the netlist's
    connections are checked.
    """
    paths = _paths(netlist, solution)
    violations: List[Violation] = []

    # Distinct nets per node, counting a net once however many of its
    # connections use the node.
    nets_on_node: Dict[int, int] = {}
    for net in netlist.nets:
        used = set()
        for idx in range(len(net.sink_nodes)):
            used.update(paths.get((net.id, idx), ()))
        for nid in used:
            nets_on_node[nid] = nets_on_node.get(nid, 0) + 1

    overflow = 0
    for nid, cnt in sorted(nets_on_node.items()):
        if cnt > 1:
            overflow += 1
            violations.append(Violation(
                kind="overflow", node=nid,
                detail=f"node {nid} used by {cnt} distinct nets",
            ))

    disconnected = 0
    for conn in netlist.connections:
        path = paths.get((conn.net_id, conn.conn_idx), [])
        reason = None
        if conn.source == conn.sink:
            if path:
                reason = "trivial connection carries a path"
        elif not path:
            reason = "unrouted"
        elif path[0] != conn.source:
            reason = f"path starts at {path[0]}, source is {conn.source}"
        elif path[-1] != conn.sink:
            reason = f"path ends at {path[-1]}, sink is {conn.sink}"
        else:
            for a, b in zip(path, path[1:]):
                if not (0 <= b < graph.num_nodes) or not graph.has_edge(a, b):
                    reason = f"no edge {a} -> {b}"
                    break
        if reason is not None:
            disconnected += 1
            violations.append(Violation(
                kind="disconnected", net_id=conn.net_id, conn_idx=conn.conn_idx,
                detail=f"net {conn.net_id} conn {conn.conn_idx}: {reason}",
            ))

    return overflow, disconnected, violations


def wirelength(
    graph: RoutingGraph, netlist: Netlist, solution: Optional[Solution] = None
) -> Tuple[int, int]:
    """(total wirelength, critical-path wirelength) in tiles."""
    paths = _paths(netlist, solution)
    length = graph.length

    total = 0
    critical = 0
    for net in netlist.nets:
        used = set()
        for idx in range(len(net.sink_nodes)):
            path = paths.get((net.id, idx), [])
            wl = 0
            for nid in path:
                wl += int(length[nid])
            critical = max(critical, wl)
            used.update(path)
        total += sum(int(length[nid]) for nid in used)
    return total, critical


def score(runtime_s: float, critical_path_wl: float) -> float:
    """Contest-style objective: runtime-dominated, wirelength-seasoned."""
    return 0.9 * runtime_s + 0.1 * critical_path_wl


def make_report(
    graph: RoutingGraph,
    netlist: Netlist,
    runtime_s: float,
    solution: Optional[Solution] = None,
    per_iteration: Optional[List[Dict]] = None,
) -> RoutingReport:
    overflow, disconnected, _ = validate(graph, netlist, solution)
    total, critical = wirelength(graph, netlist, solution)
    return RoutingReport(
        legal=(overflow == 0 and disconnected == 0),
        overflow_nodes=overflow,
        disconnected_connections=disconnected,
        total_wirelength=total,
        critical_path_wirelength=critical,
        runtime_s=runtime_s,
        score=score(runtime_s, critical),
        per_iteration=per_iteration or [],
    )


_REPORT_FIELDS = [
    "legal", "overflow_nodes", "disconnected_connections",
    "total_wirelength", "critical_path_wirelength", "runtime_s", "score",
]


def emit_report(report: RoutingReport, path: str, format: str = "json") -> None:
    """Write a report; field names and ordering are stable across runs."""
    if format == "json":
        payload = {name: getattr(report, name) for name in _REPORT_FIELDS}
        payload["per_iteration"] = report.per_iteration
        with open(path, "w") as f:
            json.dump(payload, f, indent=2, sort_keys=False)
            f.write("\n")
    elif format == "csv":
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(_REPORT_FIELDS)
            writer.writerow([getattr(report, name) for name in _REPORT_FIELDS])
    else:
        raise ValueError(f"unknown report format {format!r}")


def load_report(path: str) -> RoutingReport:
    with open(path) as f:
        data = json.load(f)
    return RoutingReport(
        legal=bool(data["legal"]),
        overflow_nodes=int(data["overflow_nodes"]),
        disconnected_connections=int(data["disconnected_connections"]),
        total_wirelength=int(data["total_wirelength"]),
        critical_path_wirelength=int(data["critical_path_wirelength"]),
        runtime_s=float(data["runtime_s"]),
        score=float(data["score"]),
        per_iteration=list(data.get("per_iteration", [])),
    )


def save_solution(netlist: Netlist, path: str) -> None:
    """Write ``PATH <net_id> <conn_idx> <node_id>+`` lines for routed
    connections."""
    with open(path, "w") as f:
        for conn in netlist.connections:
            if conn.path:
                nodes = " ".join(str(n) for n in conn.path)
                f.write(f"PATH {conn.net_id} {conn.conn_idx} {nodes}\n")


def load_solution(path: str, graph: RoutingGraph, netlist: Netlist) -> Solution:
    """Parse a solution file against its graph and netlist."""
    known = {(c.net_id, c.conn_idx) for c in netlist.connections}
    solution: Solution = {}
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if parts[0] != "PATH":
                raise SolutionParseError(
                    f"line {lineno}: unknown record type {parts[0]!r}"
                )
            if len(parts) < 4:
                raise SolutionParseError(
                    f"line {lineno}: need net id, connection index and a path"
                )
            try:
                net_id, conn_idx = int(parts[1]), int(parts[2])
                nodes = [int(n) for n in parts[3:]]
            except ValueError:
                raise SolutionParseError(f"line {lineno}: non-integer field")
            if (net_id, conn_idx) not in known:
                raise SolutionParseError(
                    f"line {lineno}: unknown connection "
                    f"(net {net_id}, index {conn_idx})"
                )
            for n in nodes:
                if not (0 <= n < graph.num_nodes):
                    raise SolutionParseError(
                        f"line {lineno}: unknown node id {n}"
                    )
            if (net_id, conn_idx) in solution:
                raise SolutionParseError(
                    f"line {lineno}: duplicate path for net {net_id} "
                    f"index {conn_idx}"
                )
            solution[(net_id, conn_idx)] = nodes
    return solution
