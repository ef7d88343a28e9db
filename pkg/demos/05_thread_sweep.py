"""
Thread sweep
============

Routes one mid-sized benchmark at several worker counts. Search kernels
run outside the interpreter lock, so speedup tracks the machine's real
parallel capacity; on shared or throttled vCPUs the curve flattens early.
"""

import statistics
import time

from ternroute import RouteOptions, generate_benchmark, generate_grid, route_all
from ternroute.search import warmup_kernel

warmup_kernel()


def fresh_instance():
    graph = generate_grid(32, 32, {1: 5, 2: 2, 4: 2}, switch_density=1.0,
                          seed=7, in_pins_per_tile=12)
    netlist = generate_benchmark(graph, num_nets=1500, fanout_mean=3.0,
                                 locality=2, seed=11)
    return graph, netlist


graph, netlist = fresh_instance()
print(f"{len(netlist.connections)} connections on a "
      f"{graph.grid_width}x{graph.grid_height} grid\n")

base = None
for threads in (1, 2, 4, 8):
    times = []
    for _rep in range(3):
        graph, netlist = fresh_instance()
        t0 = time.perf_counter()
        result = route_all(graph, netlist, RouteOptions(threads=threads))
        times.append(time.perf_counter() - t0)
        assert result.success
    med = statistics.median(times)
    base = base or med
    print(f"threads={threads:2d}  median {med:.2f}s  "
          f"speedup {base / med:.2f}x")
