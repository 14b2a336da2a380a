"""Tests for the exact discretized projection over trees."""

import itertools
import time

import numpy as np
import pytest

from src.algorithms import brute_force_project, dp_backtrack, dp_forward, project_tree
from src.algorithms.tree_projection import _min_plus
from src.models import GridSpec, RootedTree, gradient_sparsity, snap_to_grid
from src.utils import DimensionError, InternalInvariantError, NumericError, ParameterError
from tests.helpers import path_tree, random_feasible, random_tree


def tree_sparsity(tree: RootedTree, theta: np.ndarray) -> int:
    return gradient_sparsity(tree.as_graph(), theta)


def test_two_vertex_path():
    grid = GridSpec(delta_min=0.0, delta_max=1.0, step=1.0)
    result = project_tree(np.array([0.1, 0.9]), path_tree(2), 1, grid)
    assert result.theta.tolist() == [0.0, 1.0]
    assert result.objective == pytest.approx(0.02)
    assert result.used_sparsity == 1


def test_zero_budget_gives_best_constant(rng, small_grid):
    u = rng.uniform(0, 1, size=7)
    tree = path_tree(7)
    result = project_tree(u, tree, 0, small_grid)
    assert np.unique(result.theta).size == 1
    costs = [np.sum((c - u) ** 2) for c in small_grid.values]
    assert result.objective == pytest.approx(min(costs))
    assert result.theta[0] == small_grid.values[int(np.argmin(costs))]


def test_full_budget_snaps_each_entry(rng, small_grid):
    u = rng.uniform(0, 1, size=9)
    tree = random_tree(9, rng)
    result = project_tree(u, tree, 8, small_grid)
    assert np.array_equal(result.theta, snap_to_grid(u, small_grid))


def test_budget_above_edge_count_is_equivalent(rng, small_grid):
    u = rng.uniform(0, 1, size=6)
    tree = path_tree(6)
    assert project_tree(u, tree, 5, small_grid).objective == project_tree(u, tree, 50, small_grid).objective


def test_ties_go_to_smaller_grid_value():
    grid = GridSpec(delta_min=0.0, delta_max=1.0, step=1.0)
    result = project_tree(np.array([0.5, 0.5]), path_tree(2), 1, grid)
    assert result.theta.tolist() == [0.0, 0.0]
    assert result.used_sparsity == 0


def test_single_vertex():
    grid = GridSpec(delta_min=-1.0, delta_max=1.0, step=0.5)
    tree = RootedTree.from_edges(1, [], d_max=2)
    result = project_tree(np.array([0.3]), tree, 3, grid)
    assert result.theta.tolist() == [0.5]
    assert result.used_sparsity == 0


def test_star_tree_uses_budget_across_children():
    """A high-degree vertex splits its budget across children."""
    edges = [(0, 1)] + [(1, k) for k in range(2, 7)]
    tree = RootedTree.from_edges(7, edges, d_max=6)
    grid = GridSpec(delta_min=0.0, delta_max=2.0, step=1.0)
    u = np.array([0.0, 0.0, 2.0, 0.0, 2.0, 0.0, 1.0])
    for S in range(7):
        result = project_tree(u, tree, S, grid)
        brute = brute_force_project(u, tree, S, grid)
        assert result.objective == pytest.approx(brute.objective, abs=1e-12)
        assert result.used_sparsity <= S
    assert project_tree(u, tree, 3, grid).objective == pytest.approx(0.0)


def test_matches_brute_force_on_random_trees(rng):
    """Objective equals exhaustive search for random trees, grids and every budget."""
    for _ in range(200):
        p = int(rng.integers(2, 11))
        tree = random_tree(p, rng)
        size = int(rng.integers(2, 6))
        step = float(rng.choice([0.25, 0.5, 1.0]))
        lo = float(rng.choice([-1.0, -0.5, 0.0]))
        grid = GridSpec(delta_min=lo, delta_max=lo + step * (size - 1), step=step)
        u = rng.uniform(lo - 0.3, grid.delta_max + 0.3, size=p)
        for S in range(p):
            result = project_tree(u, tree, S, grid)
            brute = brute_force_project(u, tree, S, grid)
            assert result.objective == pytest.approx(brute.objective, rel=1e-12, abs=1e-12)
            assert result.used_sparsity <= S
            assert tree_sparsity(tree, result.theta) == result.used_sparsity
            assert np.all(np.isin(result.theta, grid.values))


def test_objective_matches_recomputation(rng, small_grid):
    u = rng.uniform(-0.5, 1.5, size=30)
    tree = random_tree(30, rng, d_max=4)
    result = project_tree(u, tree, 6, small_grid)
    assert result.objective == pytest.approx(float(np.sum((result.theta - u) ** 2)), rel=1e-9)


def test_beats_random_feasible_vectors(rng, small_grid):
    u = rng.uniform(0, 1, size=25)
    tree = random_tree(25, rng, d_max=3)
    S = 4
    result = project_tree(u, tree, S, small_grid)
    for _ in range(100):
        v = random_feasible(tree, S, small_grid.values, rng)
        assert tree_sparsity(tree, v) <= S
        assert result.objective <= float(np.sum((v - u) ** 2)) + 1e-12


def test_root_table_minimum_per_budget_matches_brute_force(rng, small_grid):
    tree = random_tree(8, rng)
    u = rng.uniform(0, 1, size=8)
    table = dp_forward(u, tree, 7, small_grid, keep_tables=True)
    assert table.tables is not None and len(table.tables) == 8
    for s in range(8):
        brute = brute_force_project(u, tree, s, small_grid)
        assert table.root_table[:, s].min() == pytest.approx(brute.objective, abs=1e-12)
    # more budget never hurts
    assert np.all(np.diff(table.root_table, axis=1) <= 1e-12)


def test_backtrack_rejects_table_for_other_tree(rng, small_grid):
    u = rng.uniform(0, 1, size=6)
    table = dp_forward(u, path_tree(6), 2, small_grid)
    other = RootedTree.from_edges(6, [(0, 1), (1, 2), (1, 3), (3, 4), (4, 5)], d_max=3)
    with pytest.raises(InternalInvariantError):
        dp_backtrack(table, other, 2, small_grid)
    with pytest.raises(InternalInvariantError):
        dp_backtrack(table, path_tree(6), 3, small_grid)


def test_invalid_inputs(small_grid):
    tree = path_tree(4)
    with pytest.raises(DimensionError):
        project_tree(np.zeros(3), tree, 1, small_grid)
    with pytest.raises(ParameterError):
        project_tree(np.zeros(4), tree, -1, small_grid)
    with pytest.raises(NumericError, match="index 2"):
        project_tree(np.array([0.0, 0.0, np.nan, 0.0]), tree, 1, small_grid)


@pytest.mark.slow
def test_path_runtime_is_linear_in_p(rng):
    grid = GridSpec(delta_min=-0.6, delta_max=1.0, step=0.05)
    assert grid.size == 33
    sizes = np.array([100, 200, 400, 800])
    times = []
    for p in sizes:
        u = rng.uniform(-0.6, 1.0, size=p)
        tree = path_tree(int(p))
        project_tree(u, tree, 10, grid)
        start = time.perf_counter()
        for _ in range(3):
            project_tree(u, tree, 10, grid)
        times.append((time.perf_counter() - start) / 3)
    times = np.array(times)
    slope, intercept = np.polyfit(sizes, times, 1)
    fitted = slope * sizes + intercept
    r2 = 1 - np.sum((times - fitted) ** 2) / np.sum((times - times.mean()) ** 2)
    assert r2 >= 0.95


def subtree_vertices(tree: RootedTree, v: int):
    out, stack = [], [v]
    while stack:
        x = stack.pop()
        out.append(x)
        stack.extend(tree.children[x])
    return out


def exhaustive_tables(u: np.ndarray, tree: RootedTree, values: np.ndarray, width: int):
    """f_v(c, s) by enumerating grid^p: best subtree cost with theta_v = c and at most s breaks below v."""
    subtrees = [subtree_vertices(tree, v) for v in range(tree.p)]
    tables = [np.full((values.size, width), np.inf) for _ in range(tree.p)]
    for idx in itertools.product(range(values.size), repeat=tree.p):
        theta = values[list(idx)]
        for v, verts in enumerate(subtrees):
            cost = float(np.sum((theta[verts] - u[verts]) ** 2))
            breaks = sum(theta[w] != theta[tree.parent[w]] for w in verts if w != v)
            if breaks < width:
                row = tables[v][idx[v], breaks:]
                np.minimum(row, cost, out=row)
    return tables


def edge_message(f_w: np.ndarray) -> np.ndarray:
    """g_w(c, s) = min(f_w(c, s), min_c' f_w(c', s - 1))."""
    g = f_w.copy()
    g[:, 1:] = np.minimum(f_w[:, 1:], f_w[:, :-1].min(axis=0)[None, :])
    return g


@pytest.mark.parametrize("p,S", [(4, 1), (5, 2), (6, 5), (6, 9)])
def test_every_table_entry_matches_enumeration(rng, p, S):
    grid = GridSpec(delta_min=0.0, delta_max=1.0, step=0.5)
    for _ in range(3):
        tree = random_tree(p, rng)
        u = rng.uniform(-0.2, 1.2, size=p)
        table = dp_forward(u, tree, S, grid, keep_tables=True)
        expected = exhaustive_tables(u, tree, grid.values, table.budget + 1)
        for v in range(p):
            assert table.tables[v].shape == expected[v].shape
            assert np.allclose(table.tables[v], expected[v], rtol=0, atol=1e-12), f"vertex {v}"


def test_leaf_tables_are_local_cost(rng, small_grid):
    u = rng.uniform(0, 1, size=7)
    tree = random_tree(7, rng)
    table = dp_forward(u, tree, 3, small_grid, keep_tables=True)
    for v in range(tree.p):
        if not tree.children[v]:
            local = (small_grid.values - u[v]) ** 2
            assert np.array_equal(table.tables[v], np.repeat(local[:, None], 4, axis=1))


def test_single_child_table_adds_edge_message(rng, small_grid):
    u = rng.uniform(0, 1, size=5)
    tree = path_tree(5)
    table = dp_forward(u, tree, 3, small_grid, keep_tables=True)
    for v in range(tree.p):
        if len(tree.children[v]) == 1:
            (w,) = tree.children[v]
            local = (small_grid.values - u[v]) ** 2
            expected = local[:, None] + edge_message(table.tables[w])
            assert np.allclose(table.tables[v], expected, rtol=0, atol=1e-15)


def test_two_vertex_tables_closed_form():
    grid = GridSpec(delta_min=0.0, delta_max=1.0, step=0.5)
    c = grid.values
    tree = path_tree(2)
    r = tree.root
    w = 1 - r
    u = np.zeros(2)
    u[r], u[w] = 0.1, 0.9
    table = dp_forward(u, tree, 1, grid, keep_tables=True)

    child = (c - 0.9) ** 2
    assert np.allclose(table.tables[w], np.column_stack([child, child]))
    keep = (c - 0.1) ** 2 + child
    cut = (c - 0.1) ** 2 + np.minimum(child, child.min())
    assert np.allclose(table.tables[r], np.column_stack([keep, cut]))
    assert table.minimum == pytest.approx(0.01 + 0.01)


@pytest.mark.parametrize("k", [2, 3])
def test_child_folds_match_budget_split_enumeration(rng, k):
    """Folding children one at a time equals the best split of the budget over all children."""
    m, width = 4, 7
    rows = np.arange(m)[:, None]
    cols = np.arange(width)[None, :]
    for _ in range(20):
        limits = rng.integers(1, width + 2, size=k)
        messages = []
        for limit in limits:
            g = np.minimum.accumulate(rng.uniform(0, 5, size=(m, width)), axis=1)
            if limit < width:
                g[:, limit:] = g[:, limit : limit + 1]
            messages.append(g)

        acc = messages[0]
        for g, limit in zip(messages[1:], limits[1:]):
            previous = acc
            acc, arg = _min_plus(acc, g, int(limit))
            assert np.all(arg <= cols)
            assert np.allclose(previous[rows, cols - arg] + g[rows, arg], acc)

        expected = np.empty((m, width))
        for s in range(width):
            best = np.full(m, np.inf)
            for split in itertools.product(range(s + 1), repeat=k):
                if sum(split) == s:
                    best = np.minimum(best, sum(g[:, j] for g, j in zip(messages, split)))
            expected[:, s] = best
        assert np.allclose(acc, expected, rtol=0, atol=1e-12)
