"""Balance-driven cutline selection and the recursive partitioning ternary tree.

Connections are split by bounding box around an axis-aligned cutline: the
left child takes boxes entirely at or below the cut, the right child takes
boxes entirely above it, and the middle child takes everything straddling
the cut. Sides are geographically disjoint, so their connections can route
in parallel once the middle set is done.

The cutline on each axis is the coordinate minimizing the imbalance
|after - before|, where before counts boxes ending at or left of a
coordinate and after counts boxes starting strictly right of it; both
profiles are accumulated in linear passes. The axis with the smaller
imbalance wins, Y on ties. A node where either side would come out empty
becomes a leaf.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .netlist import Connection

AXIS_X = "x"
AXIS_Y = "y"


@dataclass
class RpttNode:
    connections: List[Connection]
    cut_axis: Optional[str] = None
    cut_coord: Optional[int] = None
    left: Optional["RpttNode"] = None
    mid: Optional["RpttNode"] = None
    right: Optional["RpttNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.cut_axis is None


@dataclass
class CutResult:
    success: bool
    c_l: List[Connection]
    c_m: List[Connection]
    c_r: List[Connection]
    diff: float
    cutline: int
    axis: Optional[str] = None


def balance_cut_axis(connections: List[Connection], axis: str) -> CutResult:
    """Best single-axis cut of the connections' bounding boxes.

    Returns the first (lowest-coordinate) cutline achieving the minimal
    imbalance. ``diff`` is reported as infinity when the cut fails, i.e.
    when no cutline leaves both sides nonempty.
    """
    if axis not in (AXIS_X, AXIS_Y):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    if not connections:
        return CutResult(False, [], [], [], math.inf, 0, axis)

    if axis == AXIS_X:
        mins = np.fromiter((c.bbox[0] for c in connections), dtype=np.int64)
        maxs = np.fromiter((c.bbox[2] for c in connections), dtype=np.int64)
    else:
        mins = np.fromiter((c.bbox[1] for c in connections), dtype=np.int64)
        maxs = np.fromiter((c.bbox[3] for c in connections), dtype=np.int64)

    lo = int(mins.min())
    hi = int(maxs.max())
    span = hi - lo + 1

    # size_before[i] = #boxes with max <= i, size_after[i] = #boxes with min > i
    size_before = np.cumsum(np.bincount(maxs - lo, minlength=span))
    size_after = len(connections) - np.cumsum(np.bincount(mins - lo, minlength=span))

    imbalance = np.abs(size_after - size_before)
    best = int(np.argmin(imbalance))  # first minimum wins
    cutline = lo + best

    left_mask = maxs <= cutline
    right_mask = mins > cutline
    c_l = [c for c, m in zip(connections, left_mask) if m]
    c_r = [c for c, m in zip(connections, right_mask) if m]
    c_m = [c for c, l, r in zip(connections, left_mask, right_mask) if not (l or r)]

    success = bool(c_l) and bool(c_r)
    diff = float(imbalance[best]) if success else math.inf
    return CutResult(success, c_l, c_m, c_r, diff, cutline, axis)


def balance_cut(connections: List[Connection]) -> CutResult:
    """Try both axes, keep the one with the smaller imbalance; Y on ties."""
    rx = balance_cut_axis(connections, AXIS_X)
    ry = balance_cut_axis(connections, AXIS_Y)
    return rx if rx.diff < ry.diff else ry


def build_tree(connections: List[Connection]) -> RpttNode:
    """Recursively partition until no balanced cut exists.

    A node with an empty middle set simply gets no middle child. Built
    iteratively: imbalanced inputs can produce trees far deeper than the
    interpreter's recursion limit.
    """
    root = RpttNode(connections=list(connections))
    stack = [root]
    while stack:
        node = stack.pop()
        cut = balance_cut(node.connections)
        if not cut.success:
            continue  # leaf: children stay None
        node.cut_axis = cut.axis
        node.cut_coord = cut.cutline
        node.left = RpttNode(connections=cut.c_l)
        node.right = RpttNode(connections=cut.c_r)
        stack.append(node.left)
        stack.append(node.right)
        if cut.c_m:
            node.mid = RpttNode(connections=cut.c_m)
            stack.append(node.mid)
    return root


def tree_leaves(root: RpttNode) -> List[RpttNode]:
    leaves = []
    stack = [root]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            leaves.append(node)
        else:
            for child in (node.right, node.mid, node.left):
                if child is not None:
                    stack.append(child)
    return leaves


def tree_depth(root: RpttNode) -> int:
    depth = 0
    stack: List[Tuple[RpttNode, int]] = [(root, 1)]
    while stack:
        node, d = stack.pop()
        depth = max(depth, d)
        for child in (node.left, node.mid, node.right):
            if child is not None:
                stack.append((child, d + 1))
    return depth


def dump_tree(root: RpttNode) -> str:
    """Indented one-line-per-node text form, for debugging and golden tests."""
    out: List[str] = []
    stack: List[Tuple[RpttNode, int, str]] = [(root, 0, "root")]
    while stack:
        node, depth, label = stack.pop()
        if node.is_leaf:
            shape = "leaf"
        else:
            shape = f"cut {node.cut_axis}@{node.cut_coord}"
        out.append(f"{'  ' * depth}{label}: {shape} n={len(node.connections)}")
        for name, child in (("right", node.right), ("mid", node.mid),
                            ("left", node.left)):
            if child is not None:
                stack.append((child, depth + 1, name))
    return "\n".join(out)
