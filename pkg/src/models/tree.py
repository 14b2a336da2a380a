"""
Rooted spanning trees and the policy that generates them.
"""

import hashlib
from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.utils import GraphStructureError
from .graph import Edge, Graph

NO_PARENT = -1


class TreePolicy(BaseModel):
    """How trees are generated across PGD iterations."""

    model_config = ConfigDict(frozen=True)

    mode: Literal["fixed_dfs", "random_dfs"] = "random_dfs"
    d_max: int = Field(default=2)
    seed: int = Field(default=0, ge=0)
    # Start vertex of the deterministic DFS
    start: int = Field(default=0, ge=0)

    @field_validator("d_max")
    @classmethod
    def validate_d_max(cls, v: int) -> int:
        if v < 2:
            raise ValueError(f"d_max must be at least 2, got {v}")
        return v


@dataclass(frozen=True, eq=False)
class RootedTree:
    """
    Spanning tree on 0..p-1 rooted at a degree-1 vertex.

    ``dfs_order`` is a preorder from the root, so every vertex appears after
    its parent; iterating it in reverse visits children before parents.
    """

    p: int
    root: int
    parent: np.ndarray
    children: Tuple[Tuple[int, ...], ...]
    dfs_order: np.ndarray
    edges: Tuple[Edge, ...]
    d_max: int

    @classmethod
    def from_edges(
        cls,
        p: int,
        edges: Sequence[Sequence[int]],
        d_max: int,
        rank: Optional[np.ndarray] = None,
        root: Optional[int] = None,
    ) -> "RootedTree":
        """
        Root a tree given by its edge list.

        Args:
            p: Number of vertices
            edges: The p-1 tree edges
            d_max: Degree cap the tree must satisfy
            rank: Optional visiting rank per vertex; the root is the degree-1
                vertex of smallest rank and children are ordered by rank.
                Defaults to vertex index.
            root: Explicit root (must have degree 1)

        Returns:
            RootedTree
        """
        edges = tuple((int(i), int(j)) for i, j in edges)
        if len(edges) != p - 1:
            raise GraphStructureError(f"A tree on {p} vertices needs {p - 1} edges, got {len(edges)}")

        rank = np.arange(p) if rank is None else np.asarray(rank)
        neighbors: List[List[int]] = [[] for _ in range(p)]
        for i, j in edges:
            if i == j or not (0 <= i < p and 0 <= j < p):
                raise GraphStructureError(f"Invalid tree edge ({i}, {j}) for p={p}")
            neighbors[i].append(j)
            neighbors[j].append(i)
        for nb in neighbors:
            nb.sort(key=lambda v: rank[v])

        degrees = np.array([len(nb) for nb in neighbors])
        if degrees.size and degrees.max() > d_max:
            worst = int(np.argmax(degrees))
            raise GraphStructureError(
                f"Vertex {worst} has degree {degrees[worst]} which exceeds d_max={d_max}"
            )

        if root is None:
            leaves = np.flatnonzero(degrees == 1)
            root = int(leaves[np.argmin(rank[leaves])]) if leaves.size else 0
        elif not 0 <= root < p:
            raise GraphStructureError(f"Root {root} is outside 0..{p - 1}")
        elif p > 1 and degrees[root] != 1:
            raise GraphStructureError(f"Root {root} must have degree 1, has degree {degrees[root]}")

        parent = np.full(p, NO_PARENT, dtype=np.int64)
        children: List[List[int]] = [[] for _ in range(p)]
        visited = np.zeros(p, dtype=bool)
        order = []

        stack = [root]
        visited[root] = True
        while stack:
            v = stack.pop()
            order.append(v)
            kids = [w for w in neighbors[v] if not visited[w]]
            for w in kids:
                visited[w] = True
                parent[w] = v
            children[v] = kids
            stack.extend(reversed(kids))

        if len(order) != p:
            missing = int(np.flatnonzero(~visited)[0])
            raise GraphStructureError(f"Tree edges do not span the vertices: vertex {missing} is unreachable")

        return cls(
            p=p,
            root=root,
            parent=parent,
            children=tuple(tuple(c) for c in children),
            dfs_order=np.asarray(order, dtype=np.int64),
            edges=edges,
            d_max=d_max,
        )

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.array([len(c) for c in self.children], dtype=np.int64)
        deg[self.parent != NO_PARENT] += 1
        return deg

    def max_degree(self) -> int:
        return int(self.degrees().max())

    @property
    def fingerprint(self) -> str:
        """Stable hash of the (unordered) edge set."""
        canon = sorted((min(i, j), max(i, j)) for i, j in self.edges)
        payload = ";".join(f"{i}-{j}" for i, j in canon)
        return hashlib.sha1(f"{self.p}:{payload}".encode()).hexdigest()[:16]

    def as_graph(self) -> Graph:
        return Graph.from_edges(self.p, self.edges)
