"""
Negotiating congestion, with and without hybrid updating
========================================================

A deliberately overcrowded fabric: the first pass overuses wires, then
rising present and historical penalties push connections apart until the
solution is conflict-free. The hybrid strategy flips a congested design
from present-centric to historical-centric updating after a few
iterations, which typically cuts the iteration count substantially.
"""

import time

from ternroute import CostConfig, RouteOptions, generate_benchmark, generate_grid, route_all
from ternroute.search import warmup_kernel

warmup_kernel()


def run(hus_enabled):
    graph = generate_grid(14, 14, {1: 2}, switch_density=1.0, seed=5)
    netlist = generate_benchmark(graph, num_nets=160, fanout_mean=3.0,
                                 locality=2, seed=5)
    options = RouteOptions(
        threads=1,  # deterministic, so the comparison is apples to apples
        max_iterations=500,
        cost=CostConfig(hus_enabled=hus_enabled),
    )
    t0 = time.perf_counter()
    result = route_all(graph, netlist, options)
    wall = time.perf_counter() - t0
    return result, wall


for hus_enabled in (True, False):
    label = "hybrid on " if hus_enabled else "hybrid off"
    result, wall = run(hus_enabled)
    first = result.per_iteration[0]
    phases = {s.phase for s in result.per_iteration}
    print(f"{label}: converged={result.success} "
          f"iterations={result.iterations} wall={wall:.2f}s")
    print(f"  first-pass overuse: {first.overused_nodes} nodes "
          f"over {first.routed_connections} connections")
    print(f"  phases seen: {sorted(phases)}")
