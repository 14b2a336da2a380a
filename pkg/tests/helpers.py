"""Instance generators shared by the test modules."""

from typing import Optional

import networkx as nx
import numpy as np

from src.algorithms import cap_degree, spanning_tree_dfs
from src.models import Graph, RootedTree


def _nx_random_tree(p: int, seed: int) -> nx.Graph:
    if hasattr(nx, "random_labeled_tree"):
        return nx.random_labeled_tree(p, seed=seed)
    return nx.random_tree(p, seed=seed)


def random_connected_graph(p: int, rng: np.random.Generator, extra_edge_prob: float = 0.3) -> Graph:
    """Random tree plus Bernoulli extra edges."""
    g = nx.Graph(_nx_random_tree(p, int(rng.integers(2**31))))
    g.add_nodes_from(range(p))
    for i in range(p):
        for j in range(i + 1, p):
            if not g.has_edge(i, j) and rng.random() < extra_edge_prob:
                g.add_edge(i, j)
    return Graph.from_networkx(g)


def random_tree(p: int, rng: np.random.Generator, d_max: Optional[int] = None) -> RootedTree:
    """Random labelled tree, degree-capped to d_max when one is given."""
    t = _nx_random_tree(p, int(rng.integers(2**31)))
    edges = sorted(t.edges())
    if d_max is not None:
        return cap_degree(spanning_tree_dfs(Graph.from_edges(p, edges), start=0), d_max)
    degree = max((d for _, d in t.degree()), default=0)
    return RootedTree.from_edges(p, edges, d_max=max(2, degree))


def path_tree(p: int) -> RootedTree:
    return RootedTree.from_edges(p, [(i, i + 1) for i in range(p - 1)], d_max=2)


def path_graph(p: int) -> Graph:
    return Graph.from_edges(p, [(i, i + 1) for i in range(p - 1)])


def random_feasible(tree: RootedTree, S: int, values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Grid-valued vector with at most S breaks on the tree: cut S random edges, one value per block."""
    theta = np.empty(tree.p)
    cut = set(rng.choice(tree.p - 1, size=min(S, tree.p - 1), replace=False).tolist()) if tree.p > 1 else set()
    child_of_edge = tree.dfs_order[1:]
    cut_children = {int(child_of_edge[k]) for k in cut}
    theta[tree.root] = rng.choice(values)
    for v in tree.dfs_order[1:]:
        v = int(v)
        theta[v] = rng.choice(values) if v in cut_children else theta[tree.parent[v]]
    return theta
