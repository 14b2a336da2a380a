"""Tests for the tree-PGD loop and the tuning recipe."""

import math

import numpy as np
import pytest

from src.algorithms import project_tree
from src.losses import SquaredErrorLoss
from src.models import Dataset, Graph, GridSpec, PgdConfig, TreePolicy, snap_to_grid
from src.services import TRACE_COLUMNS, corollary1_config, default_grid, run_tree_pgd
from src.utils import DimensionError, NumericError, ParameterError
from tests.helpers import path_graph, path_tree


def identity_problem(rng, p=8):
    y = rng.uniform(0, 1, size=p)
    return path_graph(p), Dataset(X=np.eye(p), y=y)


def noiseless_path_problem(seed, p=50, n=200):
    rng = np.random.default_rng(seed)
    grid = GridSpec(delta_min=-1.0, delta_max=1.0, step=0.05)
    values = grid.values
    theta_star = np.concatenate([np.full(15, values[30]), np.full(20, values[14]), np.full(15, values[36])])
    X = rng.standard_normal((n, p))
    return path_graph(p), Dataset(X=X, y=X @ theta_star), theta_star, grid


class FailingLoss(SquaredErrorLoss):
    """Squared error whose gradient turns non-finite on the second call."""

    def __init__(self):
        super().__init__()
        self.calls = 0

    def gradient(self, theta, data):
        self.calls += 1
        grad = super().gradient(theta, data)
        if self.calls >= 2:
            grad[3] = np.nan
        return grad


def test_full_budget_with_identity_design_snaps_response(rng, small_grid):
    g, data = identity_problem(rng)
    cfg = PgdConfig(sparsity=g.p - 1, eta=float(g.p), tau=5, grid=small_grid)
    result = run_tree_pgd(g, SquaredErrorLoss(), data, cfg)
    assert np.array_equal(result.theta, snap_to_grid(data.y, small_grid))


def test_one_step_zero_budget_is_constant_fit(rng, small_grid):
    g, data = identity_problem(rng, p=10)
    cfg = PgdConfig(sparsity=0, eta=4.0, tau=1, grid=small_grid)
    result = run_tree_pgd(g, SquaredErrorLoss(), data, cfg)

    u = -4.0 * SquaredErrorLoss().gradient(np.zeros(10), data)
    assert np.unique(result.theta).size == 1
    assert result.theta[0] == snap_to_grid(float(u.mean()), small_grid)
    expected = project_tree(u, path_tree(10), 0, small_grid).theta
    assert np.array_equal(result.theta, expected)


def test_noiseless_recovery_on_path():
    g, data, theta_star, grid = noiseless_path_problem(seed=0)
    cfg = PgdConfig(sparsity=8, tau=50, grid=grid, tree_policy=TreePolicy(d_max=2, seed=0))
    result = run_tree_pgd(g, SquaredErrorLoss(), data, cfg, theta_star=theta_star)
    assert np.linalg.norm(result.theta - theta_star) <= 2 * grid.step * math.sqrt(g.p)
    assert result.trace.errors[-1] < np.linalg.norm(theta_star)


@pytest.mark.slow
def test_error_is_nonincreasing_after_warmup():
    monotone = 0
    for seed in range(20):
        g, data, theta_star, grid = noiseless_path_problem(seed=seed)
        cfg = PgdConfig(sparsity=8, tau=50, grid=grid, tree_policy=TreePolicy(d_max=2, seed=seed))
        result = run_tree_pgd(g, SquaredErrorLoss(), data, cfg, theta_star=theta_star)
        errors = result.trace.errors
        assert errors[-1] <= 2 * grid.step * math.sqrt(g.p)
        if np.all(np.diff(errors[2:]) <= 1e-9):
            monotone += 1
    assert monotone >= 18


def test_runs_are_deterministic(rng):
    g = Graph.from_edges(9, [(i, j) for i in range(9) for j in range(i + 1, 9) if (j - i) in (1, 3)])
    X = rng.standard_normal((30, 9))
    data = Dataset(X=X, y=rng.standard_normal(30))
    cfg = PgdConfig(
        sparsity=3,
        tau=10,
        grid=GridSpec(delta_min=-2.0, delta_max=2.0, step=0.1),
        tree_policy=TreePolicy(mode="random_dfs", d_max=3, seed=11),
    )
    first = run_tree_pgd(g, SquaredErrorLoss(), data, cfg)
    second = run_tree_pgd(g, SquaredErrorLoss(), data, cfg)
    assert np.array_equal(first.theta, second.theta)
    assert [r.tree_fingerprint for r in first.trace.records] == [r.tree_fingerprint for r in second.trace.records]


def test_fixed_mode_reuses_one_tree(rng, small_grid):
    g, data = identity_problem(rng)
    cfg = PgdConfig(sparsity=2, eta=4.0, tau=6, grid=small_grid, tree_policy=TreePolicy(mode="fixed_dfs"))
    result = run_tree_pgd(g, SquaredErrorLoss(), data, cfg)
    assert len({r.tree_fingerprint for r in result.trace.records}) == 1


def test_trace_length_history_and_frame(rng, small_grid):
    g, data = identity_problem(rng)
    cfg = PgdConfig(sparsity=2, eta=2.0, tau=7, grid=small_grid, record_history=True)
    result = run_tree_pgd(g, SquaredErrorLoss(), data, cfg)
    trace = result.trace
    assert len(trace) == 7
    assert len(trace.history) == 7
    assert np.array_equal(trace.history[-1], result.theta)
    assert trace.grid_source == "config"
    assert trace.smoothness is None
    frame = trace.to_frame()
    assert list(frame.columns[: len(TRACE_COLUMNS)]) == TRACE_COLUMNS
    assert frame["iteration"].tolist() == list(range(1, 8))
    assert (frame["sparsity"] <= 2).all()


def test_stop_on_fixed_point(rng, small_grid):
    g, data = identity_problem(rng)
    cfg = PgdConfig(sparsity=g.p - 1, eta=float(g.p), tau=20, grid=small_grid, stop_on_fixed_point=True)
    result = run_tree_pgd(g, SquaredErrorLoss(), data, cfg)
    assert result.trace.stopped_early
    assert len(result.trace) == 2
    assert result.trace.records[-1].step_norm == 0.0


def test_non_finite_gradient_names_iteration(rng, small_grid):
    g, data = identity_problem(rng)
    cfg = PgdConfig(sparsity=2, eta=1.0, tau=5, grid=small_grid)
    with pytest.raises(NumericError, match="Iteration 2.*index 3"):
        run_tree_pgd(g, FailingLoss(), data, cfg)


def test_dimension_mismatch(rng, small_grid):
    g = path_graph(5)
    data = Dataset(X=np.eye(4), y=np.zeros(4))
    with pytest.raises(DimensionError, match="4 columns"):
        run_tree_pgd(g, SquaredErrorLoss(), data, PgdConfig(sparsity=1, grid=small_grid))


def test_runtime_grid_and_default_step(rng):
    g, data = identity_problem(rng)
    cfg = PgdConfig(sparsity=3, tau=3, theta_norm_bound=1.0, grid_step=0.1)
    result = run_tree_pgd(g, SquaredErrorLoss(), data, cfg)
    trace = result.trace
    assert trace.grid_source == "runtime"
    assert trace.smoothness == pytest.approx(1 / g.p)
    assert trace.eta == pytest.approx(g.p)
    assert trace.grid.step == 0.1
    assert trace.grid.delta_min == -trace.grid.delta_max

    with pytest.raises(ParameterError, match="theta_norm_bound"):
        run_tree_pgd(g, SquaredErrorLoss(), data, PgdConfig(sparsity=3, tau=3))


def test_default_grid_half_width(rng):
    g, data = identity_problem(rng)
    loss = SquaredErrorLoss()
    L = 1 / g.p
    grid = default_grid(loss, data, np.zeros(g.p), L, norm_bound=0.5, step=0.25)
    half_width = float(np.max(np.abs(loss.gradient(np.zeros(g.p), data)))) / L + 1.5
    assert grid.delta_max >= half_width
    assert grid.delta_max < half_width + 0.25
    assert grid.covers(snap_to_grid(data.y, grid))
    with pytest.raises(ParameterError):
        default_grid(loss, data, np.zeros(g.p), L, norm_bound=None, step=0.25)


def test_recipe_example():
    cfg = corollary1_config(s_star=4, lambda1=1.0, lambda_p=1.0, sigma=1.0, n=500, p=900, d_max=2, norm_theta_bound=2.0)
    assert cfg.sparsity == 16
    assert cfg.eta == pytest.approx(2 / 3)
    assert cfg.grid.step == pytest.approx(math.sqrt(4 / 450000))
    delta_max = 3 * (2.0 + math.sqrt(4 * math.log(900) / 500))
    assert delta_max <= cfg.grid.delta_max < delta_max + cfg.grid.step
    assert cfg.grid.delta_min == -cfg.grid.delta_max
    assert cfg.tau == math.ceil(4 * math.log(450000 / 4))
    assert cfg.tree_policy.d_max == 2


def test_recipe_step_scales_with_noise():
    base = corollary1_config(4, 1.0, 1.0, 1.0, 500, 900, 2, 2.0)
    doubled = corollary1_config(4, 1.0, 1.0, 2.0, 500, 900, 2, 2.0)
    assert doubled.grid.step == pytest.approx(2 * base.grid.step)


def test_recipe_step_near_experiment_grid():
    cfg = corollary1_config(80, 1.0, 1.0, 1.0, 500, 900, 2, 10.0)
    assert 0.1 <= 0.05 / cfg.grid.step <= 10


def test_recipe_rejects_nonpositive_inputs():
    with pytest.raises(ParameterError, match="sigma"):
        corollary1_config(4, 1.0, 1.0, 0.0, 500, 900, 2, 2.0)
