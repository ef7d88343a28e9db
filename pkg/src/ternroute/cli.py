"""Command-line front end: generate | route | validate | score | bench.

Option precedence, uniform for every tunable: command-line flag, then a
``TERNROUTE_<NAME>`` environment variable, then the JSON config file given
with --config, then the built-in default. Exit codes: 0 success or legal
solution, 1 illegal or unconverged solution, 2 usage or parse errors.
"""

import argparse
import json
import os
import statistics
import sys
import time
from typing import Dict, List, Optional

from . import evaluate
from .cost import CostConfig
from .netlist import GenerationError, generate_benchmark, load_netlist, save_netlist
from .router import RouteOptions, route_all
from .rrg import generate_grid, load_rrg, save_rrg
from .search import warmup_kernel

ENV_PREFIX = "TERNROUTE_"

EXIT_OK = 0
EXIT_ILLEGAL = 1
EXIT_USAGE = 2

# name -> (type, default); the single source of truth for tunables shared
# by route and bench.
_TUNABLES = {
    "threads": (int, 16),
    "max_iterations": (int, 500),
    "margin": (int, 3),
    "p0": (float, 0.5),
    "pf": (float, 2.0),
    "hf": (float, 1.0),
    "alpha": (float, 1.1),
    "beta": (float, 2.0),
    "congestion_threshold": (float, 0.05),
    "switch_iteration": (int, 3),
    "astar_weight": (float, 1.0),
    "legacy_cost": (bool, False),
    "no_hus": (bool, False),
}


def _parse_bool(text: str) -> bool:
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _resolve(name: str, cli_value, config_file: Dict):
    """CLI flag > environment > config file > default."""
    typ, default = _TUNABLES[name]
    if cli_value is not None:
        return cli_value
    env = os.environ.get(ENV_PREFIX + name.upper())
    if env is not None:
        return _parse_bool(env) if typ is bool else typ(env)
    if name in config_file:
        return typ(config_file[name])
    return default


def _add_tunable_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", default=None,
                        help="JSON config file with tunable defaults")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: 16)")
    parser.add_argument("--max-iterations", type=int, default=None,
                        help="iteration cap before giving up (default: 500)")
    parser.add_argument("--margin", type=int, default=None,
                        help="bounding-box margin in tiles (default: 3)")
    parser.add_argument("--p0", type=float, default=None,
                        help="present congestion base scale (default: 0.5)")
    parser.add_argument("--pf", type=float, default=None,
                        help="present congestion growth factor (default: 2.0)")
    parser.add_argument("--hf", type=float, default=None,
                        help="historical congestion increment (default: 1.0)")
    parser.add_argument("--alpha", type=float, default=None,
                        help="present factor after the hybrid switch (default: 1.1)")
    parser.add_argument("--beta", type=float, default=None,
                        help="historical increment after the hybrid switch (default: 2.0)")
    parser.add_argument("--congestion-threshold", type=float, default=None,
                        help="overuse/connections ratio that marks a design "
                             "congested (default: 0.05)")
    parser.add_argument("--switch-iteration", type=int, default=None,
                        help="iteration after which a congested design flips to "
                             "historical-centric updating (default: 3)")
    parser.add_argument("--astar-weight", type=float, default=None,
                        help="heuristic weight, 1.0 = admissible (default: 1.0)")
    parser.add_argument("--legacy-cost", action="store_const", const=True,
                        default=None,
                        help="use the additive (base+hist)*present node cost")
    parser.add_argument("--no-hus", action="store_const", const=True,
                        default=None,
                        help="disable the hybrid updating strategy")


def _route_options(args: argparse.Namespace, threads: Optional[int] = None,
                   hus_enabled: Optional[bool] = None) -> RouteOptions:
    config_file: Dict = {}
    if args.config:
        with open(args.config) as f:
            config_file = json.load(f)
    val = {name: _resolve(name, getattr(args, name), config_file)
           for name in _TUNABLES}
    cost = CostConfig(
        p0=val["p0"], pf=val["pf"], hf=val["hf"],
        alpha=val["alpha"], beta=val["beta"],
        congestion_threshold=val["congestion_threshold"],
        switch_iteration=val["switch_iteration"],
        astar_weight=val["astar_weight"],
        legacy_mode=val["legacy_cost"],
        hus_enabled=not val["no_hus"] if hus_enabled is None else hus_enabled,
    )
    return RouteOptions(
        cost=cost,
        threads=threads if threads is not None else val["threads"],
        max_iterations=val["max_iterations"],
        bbox_margin=val["margin"],
        stats_jsonl=getattr(args, "stats_jsonl", None),
        dump_tree=getattr(args, "dump_tree", None),
    ).validate()


def _resolved_margin(args: argparse.Namespace) -> int:
    config_file: Dict = {}
    if args.config:
        with open(args.config) as f:
            config_file = json.load(f)
    return _resolve("margin", args.margin, config_file)


def _parse_wires(spec: str) -> Dict[int, int]:
    """Parse a wire mix like ``1:8,4:4`` into {length: count}."""
    wires: Dict[int, int] = {}
    for item in spec.split(","):
        if ":" not in item:
            raise ValueError(f"bad wire class {item!r}, expected LENGTH:COUNT")
        ln, cnt = item.split(":", 1)
        wires[int(ln)] = int(cnt)
    return wires


def cmd_generate(args: argparse.Namespace) -> int:
    graph = generate_grid(
        width=args.width,
        height=args.height,
        wires_per_dir_per_len=_parse_wires(args.wires),
        switch_density=args.density,
        seed=args.seed,
    )
    save_rrg(graph, args.out_rrg)
    print(f"wrote {args.out_rrg}: {graph.num_nodes} nodes, "
          f"{graph.num_edges} edges")
    netlist = generate_benchmark(
        graph,
        num_nets=args.nets,
        fanout_mean=args.fanout_mean,
        locality=args.locality,
        seed=args.seed,
        margin=_resolved_margin(args),
    )
    save_netlist(netlist, args.out_netlist)
    print(f"wrote {args.out_netlist}: {len(netlist.nets)} nets, "
          f"{len(netlist.connections)} connections")
    return EXIT_OK


def cmd_route(args: argparse.Namespace) -> int:
    options = _route_options(args)
    graph = load_rrg(args.rrg)
    netlist = load_netlist(args.netlist, graph, margin=options.bbox_margin)
    warmup_kernel()

    t0 = time.perf_counter()
    result = route_all(graph, netlist, options)
    runtime_s = time.perf_counter() - t0

    evaluate.save_solution(netlist, args.out_solution)
    report = evaluate.make_report(
        graph, netlist, runtime_s,
        per_iteration=[s.to_dict() for s in result.per_iteration],
    )
    if args.out_report:
        evaluate.emit_report(report, args.out_report, args.report_format)

    print(f"iterations: {result.iterations}")
    print(f"legal: {report.legal}")
    print(f"overflow nodes: {report.overflow_nodes}")
    print(f"total wirelength: {report.total_wirelength}")
    print(f"critical wirelength: {report.critical_path_wirelength}")
    print(f"runtime: {runtime_s:.3f} s")
    print(f"score: {report.score:.3f}")
    return EXIT_OK if (result.success and report.legal) else EXIT_ILLEGAL


def cmd_validate(args: argparse.Namespace) -> int:
    margin = _resolved_margin(args)
    graph = load_rrg(args.rrg)
    netlist = load_netlist(args.netlist, graph, margin=margin)
    solution = evaluate.load_solution(args.solution, graph, netlist)
    overflow, disconnected, violations = evaluate.validate(
        graph, netlist, solution
    )
    for v in violations[:args.max_violations]:
        print(v.detail)
    if len(violations) > args.max_violations:
        print(f"... and {len(violations) - args.max_violations} more")
    if overflow == 0 and disconnected == 0:
        print("solution is legal")
        return EXIT_OK
    print(f"illegal: {overflow} overflowed nodes, "
          f"{disconnected} disconnected connections")
    return EXIT_ILLEGAL


def cmd_score(args: argparse.Namespace) -> int:
    if args.report:
        report = evaluate.load_report(args.report)
        runtime_s = report.runtime_s
        critical = report.critical_path_wirelength
    else:
        if args.runtime is None or args.critical_wl is None:
            print("score: provide --report or both --runtime and --critical-wl",
                  file=sys.stderr)
            return EXIT_USAGE
        runtime_s, critical = args.runtime, args.critical_wl
    print(f"{evaluate.score(runtime_s, critical):.4f}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    import csv as _csv

    threads_list = [int(t) for t in args.threads_list.split(",")]
    hus_list = [h.strip() for h in args.hus.split(",")]
    for h in hus_list:
        if h not in ("on", "off"):
            raise ValueError(f"--hus entries must be on/off, got {h!r}")

    margin = _resolved_margin(args)
    graph = load_rrg(args.rrg)
    warmup_kernel()
    bench_name = os.path.basename(args.netlist)

    rows: List[Dict] = []
    for hus in hus_list:
        for threads in threads_list:
            runtimes, scores, criticals, iters = [], [], [], []
            legal = True
            for _rep in range(args.repeats):
                netlist = load_netlist(args.netlist, graph, margin=margin)
                graph.reset_routing_state()
                options = _route_options(
                    args, threads=threads, hus_enabled=(hus == "on")
                )
                t0 = time.perf_counter()
                result = route_all(graph, netlist, options)
                runtime_s = time.perf_counter() - t0
                report = evaluate.make_report(graph, netlist, runtime_s)
                legal = legal and result.success and report.legal
                runtimes.append(runtime_s)
                scores.append(report.score)
                criticals.append(report.critical_path_wirelength)
                iters.append(result.iterations)
            rows.append({
                "benchmark": bench_name,
                "threads": threads,
                "hus": hus,
                "repeats": args.repeats,
                "legal": legal,
                "runtime_median_s": round(statistics.median(runtimes), 4),
                "runtime_mean_s": round(statistics.fmean(runtimes), 4),
                "iterations_median": statistics.median(iters),
                "critical_wirelength_median": statistics.median(criticals),
                "score_median": round(statistics.median(scores), 4),
            })

    # Ratios against the hus=on row at the same thread count; 1.0 on the
    # baseline itself, blank when no baseline was swept.
    baseline = {
        r["threads"]: r for r in rows if r["hus"] == "on"
    }
    for r in rows:
        base = baseline.get(r["threads"])
        if base is None:
            r["runtime_ratio_vs_hus"] = ""
            r["score_ratio_vs_hus"] = ""
        else:
            r["runtime_ratio_vs_hus"] = round(
                r["runtime_median_s"] / base["runtime_median_s"], 4
            )
            r["score_ratio_vs_hus"] = round(
                r["score_median"] / base["score_median"], 4
            )

    fields = [
        "benchmark", "threads", "hus", "repeats", "legal",
        "runtime_median_s", "runtime_mean_s", "iterations_median",
        "critical_wirelength_median", "score_median",
        "runtime_ratio_vs_hus", "score_ratio_vs_hus",
    ]
    with open(args.out, "w", newline="") as f:
        writer = _csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {args.out}: {len(rows)} rows")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ternroute",
        description="Parallel connection-based router for island-style "
                    "routing resource graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate",
                       help="emit a synthetic routing graph and benchmark")
    p.add_argument("--width", type=int, required=True, help="grid width in tiles")
    p.add_argument("--height", type=int, required=True, help="grid height in tiles")
    p.add_argument("--wires", default="1:6,4:2",
                   help="wire classes LENGTH:COUNT[,..] (default: 1:6,4:2)")
    p.add_argument("--density", type=float, default=1.0,
                   help="fraction of wire-to-wire switch points kept (default: 1.0)")
    p.add_argument("--seed", type=int, default=1, help="generator seed (default: 1)")
    p.add_argument("--nets", type=int, default=100,
                   help="number of nets to place (default: 100)")
    p.add_argument("--fanout-mean", type=float, default=4.0,
                   help="geometric mean fanout (default: 4.0)")
    p.add_argument("--locality", type=int, default=3,
                   help="sink placement radius in tiles (default: 3)")
    p.add_argument("--out-rrg", required=True, help="output graph file")
    p.add_argument("--out-netlist", required=True, help="output netlist file")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--margin", type=int, default=None,
                   help="bounding-box margin in tiles (default: 3)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("route", help="route a netlist on a graph")
    p.add_argument("--rrg", required=True, help="input graph file")
    p.add_argument("--netlist", required=True, help="input netlist file")
    p.add_argument("--out-solution", required=True, help="output solution file")
    p.add_argument("--out-report", default=None, help="output report file")
    p.add_argument("--report-format", choices=["json", "csv"], default="json",
                   help="report format (default: json)")
    p.add_argument("--stats-jsonl", default=None,
                   help="write per-iteration stats as JSON lines")
    p.add_argument("--dump-tree", default=None, metavar="FILE",
                   help="debug: write each iteration's partitioning tree")
    _add_tunable_args(p)
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("validate", help="check a solution file, exit 0 iff legal")
    p.add_argument("--rrg", required=True, help="input graph file")
    p.add_argument("--netlist", required=True, help="input netlist file")
    p.add_argument("--solution", required=True, help="solution file to check")
    p.add_argument("--max-violations", type=int, default=20,
                   help="cap on printed violations (default: 20)")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--margin", type=int, default=None,
                   help="bounding-box margin in tiles (default: 3)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("score", help="compute 0.9*runtime + 0.1*critical wirelength")
    p.add_argument("--runtime", type=float, default=None, help="runtime in seconds")
    p.add_argument("--critical-wl", type=float, default=None,
                   help="critical-path wirelength in tiles")
    p.add_argument("--report", default=None,
                   help="recompute the score of a JSON report")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("bench", help="sweep thread counts and hybrid updating")
    p.add_argument("--rrg", required=True, help="input graph file")
    p.add_argument("--netlist", required=True, help="input netlist file")
    p.add_argument("--threads-list", default="1,2,4,8",
                   help="comma list of thread counts (default: 1,2,4,8)")
    p.add_argument("--hus", default="on",
                   help="comma list of on/off variants to run (default: on)")
    p.add_argument("--repeats", type=int, default=3,
                   help="repetitions per configuration (default: 3)")
    p.add_argument("--out", required=True, help="output CSV file")
    _add_tunable_args(p)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, json.JSONDecodeError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        # Unroutable designs and aborted iterations: no solution produced.
        print(f"routing failed: {exc}", file=sys.stderr)
        return EXIT_ILLEGAL


if __name__ == "__main__":
    sys.exit(main())
