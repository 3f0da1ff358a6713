"""
Space-partitioning KDE approximations.

Both trees are stored as flat per-node arrays (structure of arrays) with an
index permutation `order`; node i owns train[order[start[i]:end[i]]] and its
children, when present, sit at left[i] and right[i].

kd nodes carry the tight bounding box of their points; ball nodes carry the
centroid and the largest distance to it. For a query x each node yields
kmin <= exp(-gamma ||x - x_i||^2) <= kmax over its members, and the depth-first
traversal substitutes count * (kmin + kmax) / 2 for a node once

    (kmax - kmin) / 2 <= atol + rtol * S_lower / n

where S_lower is the running lower bound of the full kernel sum. Each pruned
node contributes at most count * (atol + rtol * S_exact / n) error, so the
approximate sum S obeys |S - S_exact| <= n * atol + rtol * S_exact.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from config import DEFAULT_ATOL, DEFAULT_LEAF_SIZE, DEFAULT_RTOL
from estimators.errors import DomainError
from estimators.kernels import Bandwidth, kde_normalizer
from estimators.points import as_point, as_point_set
from logger import get_logger

logger = get_logger("Tree")


class TreeKind(str, Enum):
    KD = "kd"
    BALL = "ball"


class SplitRule(str, Enum):
    """How a kd node chooses its cut along the widest dimension."""

    MEDIAN = "median"
    # Midpoint of the node's tight box; an empty side slides the cut onto the nearest point.
    SLIDING_MIDPOINT = "sliding_midpoint"


@dataclass(frozen=True)
class TreeNode:
    """Read-only view of one node."""

    count: int
    start: int
    end: int
    left: int | None
    right: int | None
    lo: NDArray[np.float64] | None = None
    hi: NDArray[np.float64] | None = None
    center: NDArray[np.float64] | None = None
    radius: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass(frozen=True)
class SpatialTree:
    kind: TreeKind
    split_rule: SplitRule
    leaf_size: int
    bw: Bandwidth
    train: NDArray[np.float64]
    order: NDArray[np.intp]
    start: NDArray[np.intp]
    end: NDArray[np.intp]
    left: NDArray[np.intp]
    right: NDArray[np.intp]
    lo: NDArray[np.float64] | None
    hi: NDArray[np.float64] | None
    center: NDArray[np.float64] | None
    radius: NDArray[np.float64] | None

    @property
    def n_train(self) -> int:
        return self.train.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.start.shape[0]

    def count(self, i: int) -> int:
        return int(self.end[i] - self.start[i])

    def is_leaf(self, i: int) -> bool:
        return self.left[i] < 0

    def node(self, i: int) -> TreeNode:
        leaf = self.is_leaf(i)
        return TreeNode(
            count=self.count(i),
            start=int(self.start[i]),
            end=int(self.end[i]),
            left=None if leaf else int(self.left[i]),
            right=None if leaf else int(self.right[i]),
            lo=None if self.lo is None else self.lo[i],
            hi=None if self.hi is None else self.hi[i],
            center=None if self.center is None else self.center[i],
            radius=None if self.radius is None else float(self.radius[i]),
        )

    def leaf_points(self, i: int) -> NDArray[np.float64]:
        return self.train[self.order[self.start[i]:self.end[i]]]

    @property
    def depth(self) -> int:
        """Number of levels, counting the root as level 1."""
        best = 0
        stack = [(0, 1)]
        while stack:
            i, level = stack.pop()
            best = max(best, level)
            if not self.is_leaf(i):
                stack.append((int(self.left[i]), level + 1))
                stack.append((int(self.right[i]), level + 1))
        return best


def _box_sq_dist_range(lo: NDArray[np.float64], hi: NDArray[np.float64], x: NDArray[np.float64]) -> tuple[float, float]:
    """Squared min/max distance from x to an axis-aligned box."""
    below = lo - x
    above = x - hi
    nearest = np.maximum(np.maximum(below, above), 0.0)
    farthest = np.maximum(np.abs(below), np.abs(above))
    return float(np.dot(nearest, nearest)), float(np.dot(farthest, farthest))


def _ball_sq_dist_range(center: NDArray[np.float64], radius: float, x: NDArray[np.float64]) -> tuple[float, float]:
    """Squared min/max distance from x to a ball, by the triangle inequality."""
    diff = x - center
    delta = math.sqrt(float(np.dot(diff, diff)))
    near = max(delta - radius, 0.0)
    far = delta + radius
    return near * near, far * far


def node_kernel_bounds(node: TreeNode, x: ArrayLike, bw: Bandwidth) -> tuple[float, float]:
    """
    Bracket the unnormalized kernel exp(-gamma ||x - x_i||^2) over a node's points.

    Returns:
        (kmin, kmax) from the max and min distance between x and the node geometry.
    """
    point = as_point(x, bw.dim)
    if node.center is not None:
        near_sq, far_sq = _ball_sq_dist_range(node.center, node.radius, point)
    else:
        near_sq, far_sq = _box_sq_dist_range(node.lo, node.hi, point)
    return math.exp(-bw.gamma * far_sq), math.exp(-bw.gamma * near_sq)


def _build(
    X: NDArray[np.float64], kind: TreeKind, leaf_size: int, split_rule: SplitRule
) -> dict[str, list]:
    """Partition X top-down; returns per-node lists keyed by field name."""
    n, _ = X.shape
    order = np.arange(n, dtype=np.intp)
    fields: dict[str, list] = {k: [] for k in ("start", "end", "left", "right", "lo", "hi", "center", "radius")}

    def new_node(start: int, end: int) -> int:
        pts = X[order[start:end]]
        fields["start"].append(start)
        fields["end"].append(end)
        fields["left"].append(-1)
        fields["right"].append(-1)
        if kind is TreeKind.KD:
            fields["lo"].append(pts.min(axis=0))
            fields["hi"].append(pts.max(axis=0))
        else:
            centroid = pts.mean(axis=0)
            fields["center"].append(centroid)
            fields["radius"].append(float(np.sqrt(((pts - centroid) ** 2).sum(axis=1).max())))
        return len(fields["start"]) - 1

    stack = [new_node(0, n)]
    while stack:
        i = stack.pop()
        start, end = fields["start"][i], fields["end"][i]
        count = end - start
        if count <= leaf_size:
            continue

        idx = order[start:end]
        pts = X[idx]
        spread = pts.max(axis=0) - pts.min(axis=0)
        if spread.max() <= 0.0:
            continue
        # np.argmax returns the lowest index among ties
        dim = int(np.argmax(spread))
        values = pts[:, dim]

        if kind is TreeKind.KD and split_rule is SplitRule.SLIDING_MIDPOINT:
            cut = 0.5 * (values.min() + values.max())
            mask = values < cut
            if not mask.any():
                mask = values <= values.min()
            order[start:end] = np.concatenate([idx[mask], idx[~mask]])
            mid = start + int(mask.sum())
        else:
            half = count // 2
            perm = np.argpartition(values, half)
            order[start:end] = idx[perm]
            mid = start + half

        left = new_node(start, mid)
        right = new_node(mid, end)
        fields["left"][i] = left
        fields["right"][i] = right
        stack.extend((right, left))

    fields["order"] = order
    return fields


def _build_tree(X: ArrayLike, leaf_size: int, bw: Bandwidth, kind: TreeKind, split_rule: SplitRule) -> SpatialTree:
    if leaf_size < 1:
        raise DomainError(f"leaf_size must be >= 1, got {leaf_size}")
    train = as_point_set(X, dim=bw.dim).copy()
    train.setflags(write=False)
    fields = _build(train, kind, leaf_size, split_rule)

    def as_index(key: str) -> NDArray[np.intp]:
        return np.asarray(fields[key], dtype=np.intp)

    tree = SpatialTree(
        kind=kind,
        split_rule=split_rule,
        leaf_size=leaf_size,
        bw=bw,
        train=train,
        order=fields["order"],
        start=as_index("start"),
        end=as_index("end"),
        left=as_index("left"),
        right=as_index("right"),
        lo=np.asarray(fields["lo"]) if kind is TreeKind.KD else None,
        hi=np.asarray(fields["hi"]) if kind is TreeKind.KD else None,
        center=np.asarray(fields["center"]) if kind is TreeKind.BALL else None,
        radius=np.asarray(fields["radius"]) if kind is TreeKind.BALL else None,
    )
    logger.info(
        "Built %s tree (n=%d, d=%d, leaf_size=%d, nodes=%d, split=%s)",
        kind.value, tree.n_train, bw.dim, leaf_size, tree.n_nodes, split_rule.value,
    )
    return tree


def build_kd_tree(
    X: ArrayLike,
    leaf_size: int = DEFAULT_LEAF_SIZE,
    bw: Bandwidth | None = None,
    split_rule: SplitRule = SplitRule.MEDIAN,
) -> SpatialTree:
    """Nested axis-aligned boxes; splits the widest dimension by `split_rule`."""
    if bw is None:
        raise DomainError("a Bandwidth is required to build a tree")
    return _build_tree(X, leaf_size, bw, TreeKind.KD, split_rule)


def build_ball_tree(X: ArrayLike, leaf_size: int = DEFAULT_LEAF_SIZE, bw: Bandwidth | None = None) -> SpatialTree:
    """Nested balls; splits the widest dimension at the median."""
    if bw is None:
        raise DomainError("a Bandwidth is required to build a tree")
    return _build_tree(X, leaf_size, bw, TreeKind.BALL, SplitRule.MEDIAN)


def _node_bounds(tree: SpatialTree, i: int, x: NDArray[np.float64]) -> tuple[float, float]:
    if tree.kind is TreeKind.KD:
        near_sq, far_sq = _box_sq_dist_range(tree.lo[i], tree.hi[i], x)
    else:
        near_sq, far_sq = _ball_sq_dist_range(tree.center[i], float(tree.radius[i]), x)
    gamma = tree.bw.gamma
    return math.exp(-gamma * far_sq), math.exp(-gamma * near_sq)


def _validate_tolerances(atol: float, rtol: float) -> None:
    if not atol >= 0 or not rtol >= 0:
        raise DomainError(f"atol and rtol must be non-negative, got atol={atol}, rtol={rtol}")


def _tree_sum(tree: SpatialTree, x: NDArray[np.float64], atol: float, rtol: float) -> tuple[float, int]:
    """Approximate kernel sum at x and the number of kernel evaluations spent."""
    n = tree.n_train
    gamma = tree.bw.gamma
    kmin, kmax = _node_bounds(tree, 0, x)
    s_lower = n * kmin
    total = 0.0
    evals = 0
    stack = [(0, kmin, kmax)]

    while stack:
        i, kmin, kmax = stack.pop()
        count = tree.count(i)

        if 0.5 * (kmax - kmin) <= atol + rtol * s_lower / n:
            total += 0.5 * count * (kmin + kmax)
            continue

        if tree.is_leaf(i):
            diff = tree.leaf_points(i) - x
            exact = float(np.exp(-gamma * np.einsum("ij,ij->i", diff, diff)).sum())
            total += exact
            s_lower += exact - count * kmin
            evals += count
            continue

        left, right = int(tree.left[i]), int(tree.right[i])
        lmin, lmax = _node_bounds(tree, left, x)
        rmin, rmax = _node_bounds(tree, right, x)
        s_lower += tree.count(left) * lmin + tree.count(right) * rmin - count * kmin
        # Pop the closer child first so s_lower tightens quickly
        if lmax >= rmax:
            stack.append((right, rmin, rmax))
            stack.append((left, lmin, lmax))
        else:
            stack.append((left, lmin, lmax))
            stack.append((right, rmin, rmax))

    return total, evals


def estimate_tree_with_stats(
    tree: SpatialTree, x: ArrayLike, atol: float = DEFAULT_ATOL, rtol: float = DEFAULT_RTOL
) -> tuple[float, int]:
    """Density at x plus the number of kernel evaluations the traversal made."""
    _validate_tolerances(atol, rtol)
    point = as_point(x, tree.bw.dim)
    total, evals = _tree_sum(tree, point, atol, rtol)
    return total / (tree.n_train * kde_normalizer(tree.bw)), evals


def estimate_tree(tree: SpatialTree, x: ArrayLike, atol: float = DEFAULT_ATOL, rtol: float = DEFAULT_RTOL) -> float:
    """Density at x within |f - f_exact| <= atol / normalizer + rtol * f_exact."""
    return estimate_tree_with_stats(tree, x, atol, rtol)[0]


def estimate_tree_batch(
    tree: SpatialTree,
    Q: ArrayLike,
    atol: float = DEFAULT_ATOL,
    rtol: float = DEFAULT_RTOL,
    workers: int = 1,
) -> NDArray[np.float64]:
    """Per-query traversals; queries are independent so threads only change the wall time."""
    _validate_tolerances(atol, rtol)
    queries = as_point_set(Q, dim=tree.bw.dim, allow_empty=True)
    scale = 1.0 / (tree.n_train * kde_normalizer(tree.bw))

    def run(query: NDArray[np.float64]) -> float:
        return _tree_sum(tree, query, atol, rtol)[0] * scale

    if workers > 1 and queries.shape[0] > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.fromiter(pool.map(run, queries), dtype=np.float64, count=queries.shape[0])
    return np.fromiter((run(q) for q in queries), dtype=np.float64, count=queries.shape[0])
