"""
Reference solutions used to check the projection DP.

Both oracles are written independently of the production DP:

* brute_force_project enumerates every set of at most S cut edges of a small
  tree and fits each resulting block with its best grid value.
* exact_line_projection is the continuous O(p^2 S) segmentation DP on a line:
  at most S + 1 contiguous segments, each fitted by its mean.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import List, Tuple

import numpy as np

from src.config import get_settings
from src.models import GridSpec, RootedTree
from src.utils import DimensionError, InstanceTooLargeError, ParameterError, get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class BruteForceResult:
    """Exhaustive minimizer over cut sets and blockwise grid values."""

    objective: float
    theta: np.ndarray
    cut_edges: Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class SegmentDpTable:
    """
    best_cost[j, k]: least SSE of u[0..j] split into exactly k + 1 segments
    (infinite when k > j). split[j, k] is the last index of the previous
    segment in the optimum.
    """

    best_cost: np.ndarray
    split: np.ndarray
    prefix: np.ndarray
    prefix_sq: np.ndarray

    def sse(self, start: int, stop: int) -> float:
        """SSE of u[start..stop] around its mean (inclusive bounds)."""
        count = stop - start + 1
        total = self.prefix[stop + 1] - self.prefix[start]
        return float(self.prefix_sq[stop + 1] - self.prefix_sq[start] - total * total / count)


@dataclass(frozen=True, eq=False)
class LineProjectionResult:
    objective: float
    theta: np.ndarray
    segments: Tuple[Tuple[int, int], ...]
    table: SegmentDpTable


def _components(p: int, edges: List[Tuple[int, int]]) -> np.ndarray:
    """Union-find labels of the forest spanned by edges."""
    root = list(range(p))

    def find(a: int) -> int:
        while root[a] != a:
            root[a] = root[root[a]]
            a = root[a]
        return a

    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            root[max(ri, rj)] = min(ri, rj)
    return np.array([find(v) for v in range(p)])


def brute_force_project(u: np.ndarray, tree: RootedTree, S: int, grid: GridSpec) -> BruteForceResult:
    """
    Exhaustive discretized projection for tiny trees.

    Raises:
        InstanceTooLargeError: p or the grid exceed the configured guard rails
    """
    settings = get_settings()
    u = np.asarray(u, dtype=float)
    if u.size != tree.p:
        raise DimensionError(f"Input vector has length {u.size} but the tree has p={tree.p} vertices")
    if S < 0:
        raise ParameterError(f"Sparsity S must be nonnegative, got {S}")
    if tree.p > settings.brute_force_max_p or grid.size > settings.brute_force_max_grid:
        raise InstanceTooLargeError(
            f"Brute force refuses p={tree.p}, |grid|={grid.size} "
            f"(limits p<={settings.brute_force_max_p}, |grid|<={settings.brute_force_max_grid})"
        )

    values = grid.values
    # cost[c, i] = (values[c] - u[i])^2
    cost = (values[:, None] - u[None, :]) ** 2
    edges = list(tree.edges)

    best_obj = np.inf
    best_theta = None
    best_cut: Tuple[int, ...] = ()
    for k in range(min(S, len(edges)) + 1):
        for cut in combinations(range(len(edges)), k):
            cut_set = set(cut)
            labels = _components(tree.p, [e for idx, e in enumerate(edges) if idx not in cut_set])
            theta = np.empty(tree.p)
            total = 0.0
            for label in np.unique(labels):
                members = labels == label
                block_cost = cost[:, members].sum(axis=1)
                c = int(np.argmin(block_cost))
                theta[members] = values[c]
                total += block_cost[c]
            if total < best_obj:
                best_obj, best_theta, best_cut = total, theta, cut

    return BruteForceResult(objective=float(best_obj), theta=best_theta, cut_edges=best_cut)


def segment_table(u: np.ndarray, S: int) -> SegmentDpTable:
    """Fill best_cost[j, k] for k = 0..min(S, p-1) with prefix-sum SSE queries."""
    u = np.asarray(u, dtype=float)
    p = u.size
    K = min(S, p - 1)
    prefix = np.concatenate(([0.0], np.cumsum(u)))
    prefix_sq = np.concatenate(([0.0], np.cumsum(u * u)))

    best = np.full((p, K + 1), np.inf)
    split = np.full((p, K + 1), -1, dtype=np.int64)

    ends = np.arange(p)
    best[:, 0] = prefix_sq[ends + 1] - prefix[ends + 1] ** 2 / (ends + 1)

    for k in range(1, K + 1):
        for j in range(k, p):
            # previous segment ends at i in k-1..j-1, last segment is i+1..j
            i = np.arange(k - 1, j)
            count = j - i
            total = prefix[j + 1] - prefix[i + 1]
            last = prefix_sq[j + 1] - prefix_sq[i + 1] - total * total / count
            cand = best[i, k - 1] + last
            pick = int(np.argmin(cand))
            best[j, k] = cand[pick]
            split[j, k] = i[pick]

    # Round-off can leave tiny negative SSEs
    np.maximum(best, 0.0, out=best)
    return SegmentDpTable(best_cost=best, split=split, prefix=prefix, prefix_sq=prefix_sq)


def exact_line_projection(u: np.ndarray, S: int) -> LineProjectionResult:
    """
    Continuous least-squares fit of u by at most S + 1 constant segments.

    Returns:
        LineProjectionResult with the optimal SSE, the fitted vector and the
        segments as inclusive (start, stop) index pairs
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size == 0:
        raise DimensionError("Input vector must be a nonempty 1-D vector")
    if S < 0:
        raise ParameterError(f"Sparsity S must be nonnegative, got {S}")

    table = segment_table(u, S)
    p = u.size
    last_row = table.best_cost[p - 1]
    k = int(np.argmin(last_row))

    segments: List[Tuple[int, int]] = []
    stop = p - 1
    while k >= 0:
        start = int(table.split[stop, k]) + 1 if k > 0 else 0
        segments.append((start, stop))
        stop = start - 1
        k -= 1
    segments.reverse()

    theta = np.empty(p)
    for start, stop in segments:
        theta[start : stop + 1] = u[start : stop + 1].mean()

    objective = float(np.sum((theta - u) ** 2))
    logger.debug(f"exact_line_projection p={p} S={S}: {len(segments)} segments, objective={objective:.6g}")
    return LineProjectionResult(objective=objective, theta=theta, segments=tuple(segments), table=table)
