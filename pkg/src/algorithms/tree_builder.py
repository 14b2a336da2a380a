"""
Spanning-tree construction with a degree cap.

A DFS spanning tree of the graph is rewired so that no vertex has more than
d_max incident edges: excess child edges (v, w) are replaced by (w', w), where
w' immediately precedes w in the DFS vertex ordering. Any vector with k
gradient nonzeros on the graph then has at most 2k on the tree.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from src.models import Graph, RootedTree, TreePolicy, NO_PARENT
from src.models.graph import Edge
from src.utils import ParameterError, get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class SpanningTree:
    """A DFS spanning tree together with the DFS vertex ordering."""

    p: int
    start: int
    parent: np.ndarray
    children: Tuple[Tuple[int, ...], ...]
    dfs_order: np.ndarray
    # (parent, child) pairs in discovery order
    edges: Tuple[Edge, ...]

    def degrees(self) -> np.ndarray:
        deg = np.array([len(c) for c in self.children], dtype=np.int64)
        deg[self.parent != NO_PARENT] += 1
        return deg


def tree_rng(seed: int, iteration: int) -> np.random.Generator:
    """Independent PCG64 stream for one PGD iteration, split by SeedSequence spawn key."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(iteration,)))


def spanning_tree_dfs(
    g: Graph,
    rng: Optional[np.random.Generator] = None,
    start: Optional[int] = None,
    priority: Optional[np.ndarray] = None,
) -> SpanningTree:
    """
    Depth-first-search spanning tree of g.

    Args:
        g: Connected graph
        rng: If given, the start vertex (unless fixed) is uniform and each
            forward step moves to a uniformly random unvisited neighbour
        start: Start vertex; defaults to 0 in deterministic mode
        priority: Deterministic tie-break rank per vertex (smaller first);
            defaults to ascending vertex index

    Returns:
        SpanningTree holding the tree edges and the DFS vertex ordering
    """
    g.require_connected()
    p = g.p

    if rng is not None:
        if start is None:
            start = int(rng.integers(p))
        # First unvisited entry of a uniform permutation is uniform over the unvisited set
        neighbor_lists: List[List[int]] = [list(rng.permutation(nb)) if nb else [] for nb in g.adjacency]
    else:
        start = 0 if start is None else start
        rank = np.arange(p) if priority is None else np.asarray(priority)
        neighbor_lists = [sorted(nb, key=lambda v: rank[v]) for nb in g.adjacency]

    if not 0 <= start < p:
        raise ParameterError(f"DFS start vertex {start} is outside 0..{p - 1}")

    visited = np.zeros(p, dtype=bool)
    parent = np.full(p, NO_PARENT, dtype=np.int64)
    pointer = np.zeros(p, dtype=np.int64)
    children: List[List[int]] = [[] for _ in range(p)]
    order = [start]
    edges: List[Edge] = []

    visited[start] = True
    stack = [start]
    while stack:
        v = stack[-1]
        nb = neighbor_lists[v]
        i = pointer[v]
        while i < len(nb) and visited[nb[i]]:
            i += 1
        if i == len(nb):
            pointer[v] = i
            stack.pop()
            continue
        w = int(nb[i])
        pointer[v] = i + 1
        visited[w] = True
        parent[w] = v
        children[v].append(w)
        order.append(w)
        edges.append((v, w))
        stack.append(w)

    return SpanningTree(
        p=p,
        start=start,
        parent=parent,
        children=tuple(tuple(c) for c in children),
        dfs_order=np.asarray(order, dtype=np.int64),
        edges=tuple(edges),
    )


def cap_degree(tree: SpanningTree, d_max: int) -> RootedTree:
    """
    Rewire a DFS spanning tree to maximum degree <= d_max.

    Each vertex keeps its first d_max edges in DFS edge order (the edge to its
    parent, then its earliest-visited children). Every other child edge (v, w)
    is replaced by (w', w) with w' the vertex visited just before w.

    Args:
        tree: Spanning tree with its DFS ordering
        d_max: Degree cap, at least 2

    Returns:
        RootedTree rooted at the first degree-1 vertex in DFS order
    """
    if d_max < 2:
        raise ParameterError(f"d_max must be at least 2, got {d_max}")

    order = tree.dfs_order
    position = np.empty(tree.p, dtype=np.int64)
    position[order] = np.arange(tree.p)

    rewired = {}
    for v in order:
        v = int(v)
        if len(tree.children[v]) + (tree.parent[v] != NO_PARENT) <= d_max:
            continue
        kept = d_max - (1 if tree.parent[v] != NO_PARENT else 0)
        for w in tree.children[v][kept:]:
            rewired[w] = int(order[position[w] - 1])

    edges = []
    for w in order[1:]:
        w = int(w)
        edges.append((rewired.get(w, int(tree.parent[w])), w))

    if rewired:
        logger.debug(f"cap_degree rewired {len(rewired)} edges to reach d_max={d_max}")

    return RootedTree.from_edges(tree.p, edges, d_max=d_max, rank=position)


def build_tree(
    g: Graph,
    policy: TreePolicy,
    iteration: int,
    priority: Optional[np.ndarray] = None,
) -> RootedTree:
    """
    Tree T_t used at PGD iteration t.

    fixed_dfs returns the same deterministic tree for every iteration;
    random_dfs draws a fresh random DFS tree from the stream (seed, iteration).
    """
    if policy.mode == "fixed_dfs":
        spanning = spanning_tree_dfs(g, start=policy.start, priority=priority)
    else:
        spanning = spanning_tree_dfs(g, rng=tree_rng(policy.seed, iteration))
    return cap_degree(spanning, policy.d_max)
