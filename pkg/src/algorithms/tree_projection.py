"""
Exact discretized projection onto gradient-sparse vectors over a tree.

Solves  min ||theta - u||_2^2  over theta in grid^p with ||grad_T theta||_0 <= S
by dynamic programming from the leaves to the root:

    f_v(c, s)   best cost on the subtree of v with theta_v = c and at most s
                breaks inside the subtree
    m_w(s)      min_c f_w(c, s)
    g_w(c, s)   min{ f_w(c, s), m_w(s - 1) }   (keep or break the edge to w)
    f_v(c, s) = (c - u_v)^2 + min_{s_1 + ... + s_k = s} sum_i g_{w_i}(c, s_i)

Children are combined one at a time by min-plus convolution over the budget
axis, which is the same minimum as enumerating all compositions of s.
Ties go to the smallest grid value, and keeping an edge beats breaking it.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from src.models import GridSpec, RootedTree
from src.utils import (
    DimensionError,
    InternalInvariantError,
    NumericError,
    ParameterError,
    get_logger,
)

logger = get_logger(__name__)

# Relative tolerance between the DP minimum and the recomputed objective
_OBJECTIVE_RTOL = 1e-9


@dataclass(eq=False)
class DpTable:
    """
    Forward pass of the projection DP.

    Per non-root vertex w the table keeps the break decision of the edge to
    its parent and argmin_c f_w(c, s); per vertex with several children it
    keeps the budget handed to each later child at each fold. The full f_v
    tables are kept only on request.
    """

    u: np.ndarray
    grid_values: np.ndarray
    budget: int
    root: int
    root_table: np.ndarray
    breaks: List[Optional[np.ndarray]]
    best_value: List[Optional[np.ndarray]]
    splits: List[List[np.ndarray]]
    tree_fingerprint: str
    tables: Optional[List[np.ndarray]] = field(default=None)

    @property
    def p(self) -> int:
        return int(self.u.size)

    @property
    def minimum(self) -> float:
        return float(self.root_table[:, self.budget].min())


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    """Grid-valued minimizer with its objective ||theta - u||^2 and tree gradient sparsity."""

    theta: np.ndarray
    objective: float
    used_sparsity: int


def _check_inputs(u: np.ndarray, tree: RootedTree, S: int) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size != tree.p:
        raise DimensionError(f"Input vector has length {u.size} but the tree has p={tree.p} vertices")
    if S < 0:
        raise ParameterError(f"Sparsity S must be nonnegative, got {S}")
    bad = np.flatnonzero(~np.isfinite(u))
    if bad.size:
        raise NumericError(f"Input vector is not finite at index {int(bad[0])}")
    return u


def _edge_message(f_w: np.ndarray):
    """g_w, the break mask, and argmin_c f_w(c, s) for one child table."""
    best = np.argmin(f_w, axis=0)
    m_w = f_w[best, np.arange(f_w.shape[1])]
    g_w = f_w.copy()
    breaks = np.zeros(f_w.shape, dtype=bool)
    if f_w.shape[1] > 1:
        shifted = m_w[None, :-1]
        breaks[:, 1:] = shifted < f_w[:, 1:]
        g_w[:, 1:] = np.minimum(f_w[:, 1:], shifted)
    return g_w, breaks, best


def _min_plus(acc: np.ndarray, g: np.ndarray, limit: int):
    """
    Min-plus convolution along the budget axis, per grid value.

    out[c, s] = min_{j <= s} acc[c, s - j] + g[c, j]; arg holds the minimizing j.
    g must be constant in j from ``limit`` on and acc nonincreasing in its
    budget, so larger j never win and the loop stops at ``limit``.
    """
    width = acc.shape[1]
    out = acc + g[:, :1]
    arg = np.zeros(acc.shape, dtype=np.int64)
    for j in range(1, min(width, limit + 1)):
        cand = acc[:, : width - j] + g[:, j : j + 1]
        tail = out[:, j:]
        better = cand < tail
        tail[better] = cand[better]
        arg[:, j:][better] = j
    return out, arg


def dp_forward(
    u: np.ndarray,
    tree: RootedTree,
    S: int,
    grid: GridSpec,
    keep_tables: bool = False,
) -> DpTable:
    """
    Compute f_v(c, s) for every vertex from the leaves to the root.

    Args:
        u: Target vector, length tree.p
        tree: Rooted tree (root of degree 1)
        S: Sparsity budget; budgets above p-1 are equivalent to p-1
        grid: Projection grid
        keep_tables: Keep every f_v (for inspection); otherwise only the
            root table and the backtracking records survive

    Returns:
        DpTable
    """
    u = _check_inputs(u, tree, S)
    values = grid.values
    budget = min(S, tree.p - 1)
    width = budget + 1

    f: List[Optional[np.ndarray]] = [None] * tree.p
    breaks: List[Optional[np.ndarray]] = [None] * tree.p
    best_value: List[Optional[np.ndarray]] = [None] * tree.p
    splits: List[List[np.ndarray]] = [[] for _ in range(tree.p)]
    kept: Optional[List[np.ndarray]] = [None] * tree.p if keep_tables else None
    # g_w is constant in the budget from size[w] on (edges below w plus the edge to its parent)
    size = np.ones(tree.p, dtype=np.int64)

    for v in tree.dfs_order[::-1]:
        v = int(v)
        local = (values - u[v]) ** 2
        acc = None
        for w in tree.children[v]:
            g_w, breaks[w], best_value[w] = _edge_message(f[w])
            f[w] = None
            size[v] += size[w]
            if acc is None:
                acc = g_w
            else:
                acc, arg = _min_plus(acc, g_w, int(size[w]))
                splits[v].append(arg)
        if acc is None:
            f_v = np.repeat(local[:, None], width, axis=1)
        else:
            f_v = local[:, None] + acc
        f[v] = f_v
        if kept is not None:
            kept[v] = f_v

    return DpTable(
        u=u,
        grid_values=values,
        budget=budget,
        root=tree.root,
        root_table=f[tree.root],
        breaks=breaks,
        best_value=best_value,
        splits=splits,
        tree_fingerprint=tree.fingerprint,
        tables=kept,
    )


def dp_backtrack(table: DpTable, tree: RootedTree, S: int, grid: GridSpec) -> ProjectionResult:
    """
    Recover the minimizer from a forward table.

    The root takes argmin_c f_root(c, S). Walking down, each child either
    copies its parent's value with budget s_i, or takes argmin_c f_w(c, s_i - 1)
    with budget s_i - 1.
    """
    if table.p != tree.p or table.root != tree.root or table.tree_fingerprint != tree.fingerprint:
        raise InternalInvariantError("DP table was built for a different tree")
    if table.budget != min(S, tree.p - 1) or table.grid_values.size != grid.size:
        raise InternalInvariantError("DP table was built for a different budget or grid")

    theta_idx = np.empty(tree.p, dtype=np.int64)
    budgets = np.empty(tree.p, dtype=np.int64)
    theta_idx[tree.root] = int(np.argmin(table.root_table[:, table.budget]))
    budgets[tree.root] = table.budget

    for v in tree.dfs_order:
        v = int(v)
        kids = tree.children[v]
        if not kids:
            continue
        ci, remaining = theta_idx[v], budgets[v]

        # Undo the folds from the last child back to the first
        child_budget = [0] * len(kids)
        for i in range(len(kids) - 1, 0, -1):
            j = int(table.splits[v][i - 1][ci, remaining])
            child_budget[i] = j
            remaining -= j
        child_budget[0] = remaining

        for w, s_w in zip(kids, child_budget):
            if table.breaks[w][ci, s_w]:
                if s_w < 1:
                    raise InternalInvariantError(f"Edge to vertex {w} breaks with zero budget")
                theta_idx[w] = table.best_value[w][s_w - 1]
                budgets[w] = s_w - 1
            else:
                theta_idx[w] = ci
                budgets[w] = s_w

    theta = table.grid_values[theta_idx]
    objective = float(np.sum((theta - table.u) ** 2))
    expected = table.minimum
    if abs(objective - expected) > _OBJECTIVE_RTOL * max(1.0, abs(expected)):
        raise InternalInvariantError(
            f"Backtracked objective {objective!r} differs from the DP minimum {expected!r}"
        )

    parent_idx = theta_idx[tree.parent[tree.dfs_order[1:]]]
    used = int(np.count_nonzero(parent_idx != theta_idx[tree.dfs_order[1:]]))
    if used > S:
        raise InternalInvariantError(f"Backtracked vector uses {used} breaks with budget {S}")

    return ProjectionResult(theta=theta, objective=objective, used_sparsity=used)


def project_tree(u: np.ndarray, tree: RootedTree, S: int, grid: GridSpec) -> ProjectionResult:
    """
    Best grid-valued approximation of u with at most S breaks on tree.

    Args:
        u: Target vector, length tree.p
        tree: Rooted tree
        S: Gradient-sparsity budget over the tree
        grid: Projection grid

    Returns:
        ProjectionResult with a global minimizer
    """
    table = dp_forward(u, tree, S, grid)
    result = dp_backtrack(table, tree, S, grid)
    logger.debug(
        f"project_tree p={tree.p} S={S} |grid|={grid.size}: "
        f"objective={result.objective:.6g}, breaks={result.used_sparsity}"
    )
    return result
