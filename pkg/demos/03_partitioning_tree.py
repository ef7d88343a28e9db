"""
The partitioning ternary tree
=============================

Shows how connections are split for parallel scheduling: a balance-driven
cutline per node, sides strictly disjoint, cut-crossers in the middle.
The middle subtree of every node routes before its sides; the two sides
run concurrently.
"""

from ternroute import balance_cut, build_tree, dump_tree, generate_benchmark, generate_grid
from ternroute.rptt import tree_depth, tree_leaves

graph = generate_grid(16, 16, {1: 4}, switch_density=1.0, seed=3)
netlist = generate_benchmark(graph, num_nets=120, fanout_mean=3.0,
                             locality=2, seed=5, margin=1)
conns = netlist.connections
print(f"{len(conns)} connections")

cut = balance_cut(conns)
print(f"root cutline: axis {cut.axis} at coordinate {cut.cutline}")
print(f"  left {len(cut.c_l)}, crossing {len(cut.c_m)}, right {len(cut.c_r)} "
      f"(imbalance {cut.diff})")

tree = build_tree(conns)
leaves = tree_leaves(tree)
sizes = sorted((len(l.connections) for l in leaves), reverse=True)
print(f"tree depth {tree_depth(tree)}, {len(leaves)} leaves")
print(f"largest leaves: {sizes[:8]}")

# A small instance is easier to read in full.
small = build_tree(conns[:24])
print("\ntree for the first 24 connections:")
print(dump_tree(small))
