"""Acceptance suite: one test per criterion, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict lines
and the measured numbers behind them.
"""

import random
import statistics
import time

import numpy as np

from ternroute.cost import (
    CostConfig,
    classify_congested,
    legacy_node_cost,
    node_use_cost,
    present_cost,
    total_cost,
    update_historical,
)
from ternroute.evaluate import score, validate
from ternroute.netlist import Net, Netlist, decompose, generate_benchmark
from ternroute.router import RouteOptions, Router, blocked_route
from ternroute.rptt import balance_cut, balance_cut_axis, build_tree
from ternroute.rrg import generate_grid

from oracles import (
    brute_force_cut,
    build_cluster_netlist,
    dijkstra_min_cost,
    random_conn_set,
    recount_from_paths,
)

from test_router import (
    assert_mid_before_sides,
    assert_no_intra_net_overlap,
    events_by_key,
    ordering_benchmark,
    pin_at,
)


def verdict(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {num} ({name}): {status}" + (f" - {detail}" if detail else ""))
    return ok


# -- 1: legality over a generated benchmark sweep ------------------------------


def test_acceptance_1_legality_suite():
    t0 = time.perf_counter()
    failures = []
    for i in range(1, 26):
        width = 7 + i                      # 8 .. 32
        nets = round(50 + (2000 - 50) * (i - 1) / 24)
        g = generate_grid(width, width, {1: 5, 2: 2, 4: 2}, 1.0, i,
                          in_pins_per_tile=12)
        nl = generate_benchmark(g, nets, 3.0, 3, seed=i)
        result = Router(g, nl, RouteOptions(threads=2)).route_all()
        overflow, disconnected, _ = validate(g, nl)
        if not (result.success and overflow == 0 and disconnected == 0):
            failures.append((i, width, nets, overflow, disconnected))
    elapsed = time.perf_counter() - t0
    ok = not failures
    assert verdict(1, "legality suite",
                   ok, f"25 benchmarks in {elapsed:.1f}s, failures: {failures}")


# -- 2: cutline selection equals brute force -----------------------------------


def test_acceptance_2_cutline_oracle():
    t0 = time.perf_counter()
    rng = random.Random(123)
    mismatches = 0
    for _ in range(100):
        conns = random_conn_set(rng, rng.randint(1, 200), span=30)
        for axis in ("x", "y"):
            got = balance_cut_axis(conns, axis)
            ok, n_l, n_m, n_r, diff, cutline = brute_force_cut(conns, axis)
            if got.success != ok or got.diff != diff:
                mismatches += 1
                continue
            if ok and (got.cutline != cutline
                       or (len(got.c_l), len(got.c_m), len(got.c_r))
                       != (n_l, n_m, n_r)):
                mismatches += 1
        chosen = balance_cut(conns)
        bx, by = brute_force_cut(conns, "x"), brute_force_cut(conns, "y")
        if chosen.axis != ("x" if bx[4] < by[4] else "y"):
            mismatches += 1
    elapsed = time.perf_counter() - t0
    assert verdict(2, "cutline oracle", mismatches == 0,
                   f"100 random sets, {mismatches} mismatches, {elapsed:.1f}s")


# -- 3: search equals Dijkstra on uncongested instances --------------------------


def test_acceptance_3_astar_oracle():
    t0 = time.perf_counter()
    g = generate_grid(8, 8, {1: 4, 4: 2}, 1.0, 7)
    rng = random.Random(99)
    checked = 0
    exact = 0
    while checked < 100:
        sx, sy = rng.randrange(8), rng.randrange(8)
        tx, ty = rng.randrange(8), rng.randrange(8)
        if (sx, sy) == (tx, ty):
            continue
        net = Net(id=checked, source_node=pin_at(g, sx, sy, "src"),
                  sink_nodes=[pin_at(g, tx, ty, "snk")])
        nl = Netlist(nets=[net], connections=decompose([net], g))
        conn = nl.connections[0]
        router = Router(g, nl, RouteOptions(threads=1))
        path = router.route_connection(conn)
        got = sum(float(g.base_cost[n]) for n in path[1:])
        want = dijkstra_min_cost(g, conn.source, conn.sink, bbox=conn.bbox)
        if got == want:                     # tolerance 0
            exact += 1
        router.rip_up(conn)
        checked += 1
    elapsed = time.perf_counter() - t0
    assert verdict(3, "search vs Dijkstra", exact == 100,
                   f"{exact}/100 exact matches, {elapsed:.1f}s")


# -- 4: cost equation unit values -------------------------------------------------


def test_acceptance_4_equation_values():
    checks = [
        node_use_cost(1, 1, 1, 0) == 1.0,
        node_use_cost(1, 1, 1, 1) == 0.5,
        node_use_cost(2, 3, 2, 0) == 12.0,
        legacy_node_cost(1, 0, 1) == 1.0,
        legacy_node_cost(1, 2, 3) == 9.0,
        total_cost(0, 0, 0) == 0.0,
        total_cost(1, 2, 3) == 6.0,
        update_historical(1, 1, 1) == 1.0,
        update_historical(1, 3, 1) == 3.0,
        update_historical(1, 3, 2) == 5.0,
        present_cost(1, 2, 0.5, 2.0) == 2.0,
        present_cost(3, 2, 0.5, 2.0) == 5.0,
        present_cost(4, 1, 0.5, 2.0) == 1.0,
        classify_congested(100, 1000, 0.05) is True,
        classify_congested(50, 1000, 0.05) is False,
        classify_congested(0, 1000, 0.05) is False,
    ]
    assert verdict(4, "equation unit values", all(checks),
                   f"{sum(checks)}/{len(checks)} exact")


# -- 5: scheduling contract --------------------------------------------------------


def multi_sink_contract_instance(seed):
    g = generate_grid(12, 12, {1: 4}, 1.0, seed)
    nl = generate_benchmark(g, 90, 3.0, 2, seed=seed, margin=2)
    return g, nl


def test_acceptance_5_scheduling_contract():
    t0 = time.perf_counter()
    order_violations = 0
    overlap_violations = 0
    runs = 0

    for rep in range(25):
        g, nl = ordering_benchmark()
        tree = build_tree(nl.connections)
        router = Router(g, nl, RouteOptions(threads=8, instrument=True))
        blocked_route(tree, router, threads=8)
        try:
            assert_mid_before_sides(tree, events_by_key(router))
        except AssertionError:
            order_violations += 1
        runs += 1

    for rep in range(25):
        g, nl = multi_sink_contract_instance(seed=rep + 1)
        tree = build_tree(nl.connections)
        router = Router(g, nl, RouteOptions(threads=8, instrument=True))
        blocked_route(tree, router, threads=8)
        try:
            assert_mid_before_sides(tree, events_by_key(router))
        except AssertionError:
            order_violations += 1
        try:
            assert_no_intra_net_overlap(router)
        except AssertionError:
            overlap_violations += 1
        runs += 1

    elapsed = time.perf_counter() - t0
    ok = order_violations == 0 and overlap_violations == 0
    assert verdict(5, "scheduling contract", ok,
                   f"{runs} runs at 8 threads, {order_violations} ordering / "
                   f"{overlap_violations} intra-net violations, {elapsed:.1f}s")


# -- 6: thread scaling ----------------------------------------------------------------


def scaling_benchmark():
    g = generate_grid(48, 48, {1: 5, 2: 2, 4: 2}, 1.0, 7, in_pins_per_tile=8)
    nl = generate_benchmark(g, 2600, 4.0, 2, seed=11)
    return g, nl


def machine_parallel_ceiling(g, nl):
    """Speedup of two fully independent search threads on this host.

    Upper-bounds any scheduler's 2-thread gain here: no ordering, no
    shared state, no interpreter lock (the kernel releases it).
    """
    import threading

    from ternroute.search import SearchContext, run_search

    conns = [c for c in nl.connections if c.source != c.sink]

    def work(chunk, ctx):
        for c in chunk:
            run_search(g, ctx, c.source, c.sink, c.bbox, 0.5, False, 1.0)

    t0 = time.perf_counter()
    work(conns, SearchContext(g.num_nodes))
    one = time.perf_counter() - t0

    ctxs = [SearchContext(g.num_nodes) for _ in range(2)]
    halves = [conns[0::2], conns[1::2]]
    t0 = time.perf_counter()
    ts = [threading.Thread(target=work, args=(halves[i], ctxs[i]))
          for i in range(2)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    two = time.perf_counter() - t0
    return one / two


def test_acceptance_6_thread_scaling():
    t0 = time.perf_counter()
    g, nl = scaling_benchmark()
    assert len(nl.connections) >= 10_000

    medians = {}
    for threads in (1, 2, 4, 8):
        times = []
        for _rep in range(3):
            g, nl = scaling_benchmark()
            t1 = time.perf_counter()
            result = Router(g, nl, RouteOptions(threads=threads)).route_all()
            times.append(time.perf_counter() - t1)
            assert result.success
        medians[threads] = statistics.median(times)

    ratio8 = medians[8] / medians[1]
    monotone = all(
        medians[b] <= 1.10 * medians[a]
        for a, b in ((1, 2), (2, 4), (4, 8))
    )
    g, nl = scaling_benchmark()
    ceiling = machine_parallel_ceiling(g, nl)
    detail = (
        f"{len(nl.connections)} connections, medians "
        + ", ".join(f"{t}T={medians[t]:.2f}s" for t in (1, 2, 4, 8))
        + f", 8T/1T={ratio8:.2f} (need <= 0.60), "
        + f"monotone within 10%: {monotone}; host ceiling for two fully "
        + f"independent search threads: {ceiling:.2f}x, "
        + f"{time.perf_counter()-t0:.0f}s total"
    )
    ok = ratio8 <= 0.60 and monotone
    assert verdict(6, "thread scaling", ok, detail)


# -- 7: hybrid updating ablation ---------------------------------------------------------


CONGESTED_BENCHES = [
    ("cong-a", 14, {1: 2}, 160, 2, 5),
    ("cong-b", 12, {1: 2}, 115, 2, 8),
    ("cong-c", 14, {1: 2}, 160, 2, 37),
]


def run_congested(width, wires, nets, locality, seed, hus):
    g = generate_grid(width, width, wires, 1.0, seed, in_pins_per_tile=8)
    nl = generate_benchmark(g, nets, 3.0, locality, seed=seed)
    opts = RouteOptions(threads=1, max_iterations=500,
                        cost=CostConfig(hus_enabled=hus))
    t0 = time.perf_counter()
    result = Router(g, nl, opts).route_all()
    return result, time.perf_counter() - t0


def test_acceptance_7_hus_ablation():
    t0 = time.perf_counter()
    ok = True
    lines = []
    for name, width, wires, nets, locality, seed in CONGESTED_BENCHES:
        iters = {}
        runtimes = {}
        for hus in (True, False):
            reps = []
            for _ in range(3):
                result, wall = run_congested(width, wires, nets, locality,
                                             seed, hus)
                reps.append(wall)
            iters[hus] = result.iterations
            runtimes[hus] = statistics.median(reps)
        it_ratio = iters[True] / iters[False]
        rt_ratio = runtimes[True] / runtimes[False]
        good = iters[True] <= iters[False] and rt_ratio <= 1.10
        ok = ok and good
        lines.append(
            f"{name}: iterations {iters[True]} vs {iters[False]} "
            f"(ratio {it_ratio:.2f}), runtime ratio {rt_ratio:.2f}"
        )
    detail = "; ".join(lines) + f"; {time.perf_counter()-t0:.0f}s total"
    assert verdict(7, "hybrid updating ablation", ok, detail)


# -- 8: ternary vs binary scheduling ---------------------------------------------------------


def quadrant_benchmark(seed=3):
    g = generate_grid(26, 26, {1: 12, 4: 4}, 1.0, seed,
                      out_pins_per_tile=8, in_pins_per_tile=24)
    q = g.grid_width // 4
    c = g.grid_width // 2
    clusters = [
        ((q, q), 4, 60), ((3 * q, q), 4, 60),
        ((q, 3 * q), 4, 60), ((3 * q, 3 * q), 4, 60),
        ((c, c), 7, 620),
    ]
    return g, build_cluster_netlist(g, clusters, fanout=3, locality=3,
                                    seed=seed)


def test_acceptance_8_rptt_vs_binary():
    t0 = time.perf_counter()
    medians = {}
    for sched in ("rptt", "binary"):
        times = []
        for _rep in range(3):
            g, nl = quadrant_benchmark()
            t1 = time.perf_counter()
            result = Router(
                g, nl, RouteOptions(threads=2, scheduler=sched)
            ).route_all()
            times.append(time.perf_counter() - t1)
            assert result.success
        medians[sched] = statistics.median(times)
    ratio = medians["rptt"] / medians["binary"]
    ok = medians["rptt"] <= medians["binary"]
    assert verdict(8, "ternary vs binary scheduling", ok,
                   f"rptt {medians['rptt']:.2f}s vs binary "
                   f"{medians['binary']:.2f}s (ratio {ratio:.2f}), "
                   f"{time.perf_counter()-t0:.0f}s total")


# -- 9: score formula against published rows ----------------------------------------------------


def test_acceptance_9_score_formula():
    rows = [
        (35.26, 234, 55.13),
        (94.29, 584, 143.26),
        (73.03, 668, 132.52),
        (52.03, 226, 69.43),
        (78.33, 310, 101.50),
        (119.88, 277, 135.59),
    ]
    errs = [abs(score(rt, wl) - printed) for rt, wl, printed in rows]
    ok = all(e <= 0.05 for e in errs)
    assert verdict(9, "score formula", ok,
                   f"{len(rows)} published rows, max error {max(errs):.3f}")


# -- 10: rip-up inversion and counter consistency ----------------------------------------------


def test_acceptance_10_counter_consistency():
    t0 = time.perf_counter()
    g = generate_grid(10, 10, {1: 3}, 1.0, 14)
    nl = generate_benchmark(g, 90, 3.0, 2, seed=14)
    router = Router(g, nl, RouteOptions(threads=1))
    rng = random.Random(77)

    for _ in range(1000):
        conn = rng.choice(nl.connections)
        if conn.path and rng.random() < 0.5:
            router.rip_up(conn)
        else:
            router.route_connection(conn)

    usage, occupancy, overused = recount_from_paths(nl)
    ok = True
    for net in nl.nets:
        ok = ok and net.usage == usage[net.id]
    got_occ = {i: int(v) for i, v in enumerate(g.occupancy) if v}
    ok = ok and got_occ == occupancy
    ok = ok and router.overused == overused

    # Rip everything up: the graph must return to its pristine state.
    for conn in nl.connections:
        router.rip_up(conn)
    ok = ok and int(np.count_nonzero(g.occupancy)) == 0
    ok = ok and all(not net.usage for net in nl.nets)
    assert verdict(10, "rip-up and counter consistency", ok,
                   f"1000 randomized ops, {time.perf_counter()-t0:.1f}s")
