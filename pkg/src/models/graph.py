"""
Graph representation and the discrete gradient operator.
Provides gradient-sparsity accounting and partition utilities shared by the
tree builder, the projection and the estimation engine.
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from src.utils import (
    DimensionError,
    DisconnectedGraphError,
    GraphStructureError,
    ParameterError,
)

Edge = Tuple[int, int]


@dataclass(frozen=True)
class Graph:
    """
    Undirected graph on vertices 0..p-1.

    Edge order is the load order and fixes the order of gradient entries.
    Orientation (i, j) is kept as given; it only affects signs of gradients.
    """

    p: int
    edges: Tuple[Edge, ...]
    adjacency: Tuple[Tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    incidence: sparse.csr_matrix = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.p < 1:
            raise GraphStructureError(f"Graph needs at least one vertex, got p={self.p}")

        edges = tuple((int(i), int(j)) for i, j in self.edges)
        seen = set()
        neighbors: List[List[int]] = [[] for _ in range(self.p)]

        for k, (i, j) in enumerate(edges):
            if not (0 <= i < self.p and 0 <= j < self.p):
                raise GraphStructureError(f"Edge {k} = ({i}, {j}) has a vertex outside 0..{self.p - 1}")
            if i == j:
                raise GraphStructureError(f"Edge {k} is a self-loop at vertex {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise GraphStructureError(f"Edge {k} = ({i}, {j}) duplicates an earlier edge")
            seen.add(key)
            neighbors[i].append(j)
            neighbors[j].append(i)

        m = len(edges)
        rows = np.repeat(np.arange(m), 2)
        cols = np.array([v for e in edges for v in e], dtype=np.int64)
        vals = np.tile([1.0, -1.0], m)

        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "adjacency", tuple(tuple(nb) for nb in neighbors))
        object.__setattr__(
            self,
            "incidence",
            sparse.csr_matrix((vals, (rows, cols)), shape=(m, self.p)),
        )

    @classmethod
    def from_edges(cls, p: int, edges: Iterable[Sequence[int]]) -> "Graph":
        return cls(p=p, edges=tuple((int(e[0]), int(e[1])) for e in edges))

    @classmethod
    def from_networkx(cls, nx_graph) -> "Graph":
        """
        Build a Graph from a networkx graph.

        Nodes are relabelled 0..p-1 in sorted node order; edge order follows
        ``nx_graph.edges()``.
        """
        import networkx as nx

        relabelled = nx.convert_node_labels_to_integers(nx_graph, ordering="sorted")
        return cls.from_edges(relabelled.number_of_nodes(), relabelled.edges())

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def edge_array(self) -> np.ndarray:
        """Edges as an (m, 2) integer array."""
        if not self.edges:
            return np.zeros((0, 2), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)

    def degrees(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.adjacency], dtype=np.int64)

    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.p else 0

    def adjacency_matrix(self, keep: Optional[np.ndarray] = None) -> sparse.csr_matrix:
        """Symmetric 0/1 adjacency matrix, optionally restricted to a boolean edge mask."""
        ea = self.edge_array
        if keep is not None:
            ea = ea[keep]
        data = np.ones(len(ea))
        a = sparse.coo_matrix((data, (ea[:, 0], ea[:, 1])), shape=(self.p, self.p))
        return (a + a.T).tocsr()

    def component_labels(self) -> np.ndarray:
        _, labels = csgraph.connected_components(self.adjacency_matrix(), directed=False)
        return labels

    def is_connected(self) -> bool:
        return bool(np.all(self.component_labels() == 0))

    def require_connected(self) -> None:
        """Raise DisconnectedGraphError naming the first vertex not reachable from vertex 0."""
        labels = self.component_labels()
        unreachable = np.flatnonzero(labels != labels[0])
        if unreachable.size:
            raise DisconnectedGraphError(int(unreachable[0]), start_vertex=0)


@dataclass(frozen=True, eq=False)
class GradientVector:
    """Edgewise differences theta_i - theta_j in graph edge order."""

    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def nnz(self, tol: float = 0.0) -> int:
        return int(np.count_nonzero(np.abs(self.values) > tol))


@dataclass(frozen=True, eq=False)
class Partition:
    """
    Partition of 0..p-1 into labelled blocks.

    Labels are 0..block_count-1, every label used, numbered in order of first
    appearance.
    """

    block_id: np.ndarray
    block_count: int

    def __post_init__(self):
        labels = np.asarray(self.block_id, dtype=np.int64)
        if labels.ndim != 1 or labels.size == 0:
            raise DimensionError("Partition labels must be a nonempty 1-D vector")
        used = np.unique(labels)
        if used[0] != 0 or used[-1] != self.block_count - 1 or used.size != self.block_count:
            raise DimensionError(
                f"Partition labels must use every value in 0..{self.block_count - 1}, got {used.tolist()}"
            )
        object.__setattr__(self, "block_id", labels)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        """Normalise arbitrary labels to 0..k-1 in order of first appearance."""
        labels = np.asarray(labels)
        _, first_index, inverse = np.unique(labels, return_index=True, return_inverse=True)
        rank = np.empty_like(first_index)
        rank[np.argsort(first_index, kind="stable")] = np.arange(first_index.size)
        return cls(block_id=rank[inverse], block_count=int(first_index.size))

    @property
    def p(self) -> int:
        return int(self.block_id.size)

    def blocks(self) -> List[np.ndarray]:
        order = np.argsort(self.block_id, kind="stable")
        bounds = np.cumsum(np.bincount(self.block_id, minlength=self.block_count))[:-1]
        return np.split(order, bounds)

    def indicator(self, block: int) -> np.ndarray:
        return (self.block_id == block).astype(float)


def _check_length(g: Graph, theta: np.ndarray, name: str = "theta") -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.size != g.p:
        raise DimensionError(f"{name} has length {theta.size} but the graph has p={g.p} vertices")
    return theta


def gradient(g: Graph, theta: np.ndarray) -> GradientVector:
    """
    Discrete gradient of theta over g.

    Args:
        g: Graph whose edge order fixes the output order
        theta: Vertex values, length g.p

    Returns:
        GradientVector with entry k = theta[i] - theta[j] for edge k = (i, j)
    """
    theta = _check_length(g, theta)
    return GradientVector(values=g.incidence @ theta)


def gradient_sparsity(g: Graph, theta: np.ndarray, tol: float = 0.0) -> int:
    """Number of edges whose endpoint values differ by more than tol."""
    if tol < 0:
        raise ParameterError(f"Tolerance must be nonnegative, got {tol}")
    return gradient(g, theta).nnz(tol)


def induce_partition(g: Graph, theta: np.ndarray, tol: float = 0.0) -> Partition:
    """
    Partition induced by theta over g.

    Blocks are the connected components of the subgraph keeping the edges
    with |theta_i - theta_j| <= tol.
    """
    theta = _check_length(g, theta)
    g.require_connected()

    keep = np.abs(gradient(g, theta).values) <= tol
    _, labels = csgraph.connected_components(g.adjacency_matrix(keep), directed=False)
    return Partition.from_labels(labels)


def partition_boundary(g: Graph, part: Partition) -> List[int]:
    """Indices of edges of g whose endpoints fall in different blocks."""
    if part.p != g.p:
        raise DimensionError(f"Partition covers {part.p} vertices but the graph has p={g.p}")
    ea = g.edge_array
    if ea.size == 0:
        return []
    return np.flatnonzero(part.block_id[ea[:, 0]] != part.block_id[ea[:, 1]]).tolist()


def project_onto_partition(part: Partition, u: np.ndarray) -> np.ndarray:
    """Orthogonal projection of u onto vectors constant on each block (blockwise means)."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size != part.p:
        raise DimensionError(f"Vector has length {u.size} but the partition covers {part.p} vertices")
    sums = np.bincount(part.block_id, weights=u, minlength=part.block_count)
    counts = np.bincount(part.block_id, minlength=part.block_count)
    return (sums / counts)[part.block_id]
