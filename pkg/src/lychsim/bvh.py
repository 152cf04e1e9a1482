"""Median-split BVH construction over axis-aligned bounds.

Nodes are stored as flat arrays for consumption by the numba trace kernels:
leaves reference a contiguous range of the reordered primitive array, inner
nodes reference two children.  Splits take the median along the longest axis
of the node bounds; leaves hold at most `leaf_size` primitives.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class BvhArrays:
    node_min: np.ndarray   # (N, 3) float64
    node_max: np.ndarray   # (N, 3) float64
    node_a: np.ndarray     # (N,) int32: left child, or primitive start for leaves
    node_b: np.ndarray     # (N,) int32: right child, or primitive count for leaves
    node_leaf: np.ndarray  # (N,) uint8
    order: np.ndarray      # (M,) int32 permutation: slot -> original primitive index

    @property
    def num_nodes(self):
        return len(self.node_a)


def build_bvh(prim_min: np.ndarray, prim_max: np.ndarray, leaf_size: int = 4) -> BvhArrays:
    """Build a BVH over primitives given their per-primitive AABBs.

    Returns flat arrays plus the permutation that maps reordered slots back
    to original primitive indices.  Zero primitives yield a single empty leaf
    whose bounds reject every ray.
    """
    prim_min = np.asarray(prim_min, dtype=np.float64).reshape(-1, 3)
    prim_max = np.asarray(prim_max, dtype=np.float64).reshape(-1, 3)
    n = len(prim_min)
    if n == 0:
        return BvhArrays(
            node_min=np.full((1, 3), np.inf),
            node_max=np.full((1, 3), -np.inf),
            node_a=np.zeros(1, dtype=np.int32),
            node_b=np.zeros(1, dtype=np.int32),
            node_leaf=np.ones(1, dtype=np.uint8),
            order=np.zeros(0, dtype=np.int32),
        )

    centroids = 0.5 * (prim_min + prim_max)
    order = np.arange(n, dtype=np.int32)
    cap = max(1, 2 * n)
    node_min = np.empty((cap, 3))
    node_max = np.empty((cap, 3))
    node_a = np.zeros(cap, dtype=np.int32)
    node_b = np.zeros(cap, dtype=np.int32)
    node_leaf = np.zeros(cap, dtype=np.uint8)
    count = 1

    stack = [(0, n, 0)]  # (lo, hi, node index)
    while stack:
        lo, hi, ni = stack.pop()
        idx = order[lo:hi]
        node_min[ni] = prim_min[idx].min(axis=0)
        node_max[ni] = prim_max[idx].max(axis=0)
        if hi - lo <= leaf_size:
            node_a[ni] = lo
            node_b[ni] = hi - lo
            node_leaf[ni] = 1
            continue
        axis = int(np.argmax(node_max[ni] - node_min[ni]))
        keys = centroids[idx, axis]
        if keys.max() - keys.min() == 0.0:
            # Degenerate along every useful axis: split positionally.
            sub = np.arange(len(idx))
        else:
            sub = np.argsort(keys, kind="stable")
        order[lo:hi] = idx[sub]
        mid = lo + (hi - lo) // 2
        left, right = count, count + 1
        count += 2
        node_a[ni] = left
        node_b[ni] = right
        stack.append((mid, hi, right))
        stack.append((lo, mid, left))

    return BvhArrays(
        node_min=node_min[:count].copy(),
        node_max=node_max[:count].copy(),
        node_a=node_a[:count].copy(),
        node_b=node_b[:count].copy(),
        node_leaf=node_leaf[:count].copy(),
        order=order,
    )


def triangle_bounds(v0, v1, v2):
    """Per-triangle AABBs for (F,3) corner arrays."""
    tri_min = np.minimum(np.minimum(v0, v1), v2)
    tri_max = np.maximum(np.maximum(v0, v1), v2)
    return tri_min, tri_max
