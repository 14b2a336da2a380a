"""
Tree-projected gradient descent.

Each iteration takes a gradient step u_t = theta_{t-1} - eta * grad L(theta_{t-1})
and projects it onto grid-valued vectors with at most S breaks over the
iteration's tree T_t.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

from src.algorithms import build_tree, project_tree
from src.config import get_settings
from src.losses import LossModel
from src.models import Dataset, Graph, GridSpec, PgdConfig, RootedTree, TreePolicy
from src.utils import DimensionError, NumericError, ParameterError, get_logger

logger = get_logger(__name__)

# Columns written by ``estimate --trace-out``
TRACE_COLUMNS = ["iteration", "objective", "step_norm", "sparsity"]


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    tree_fingerprint: str
    objective: float
    projection_objective: float
    step_norm: float
    used_sparsity: int
    error: Optional[float] = None


@dataclass
class PgdTrace:
    """
    Per-iteration record of a run plus the step size and grid it used.

    ``grid_source`` is "config" when the grid came with the configuration
    and "runtime" when default_grid derived it.
    """

    eta: float
    grid: GridSpec
    grid_source: str
    smoothness: Optional[float] = None
    records: List[IterationRecord] = field(default_factory=list)
    history: Optional[List[np.ndarray]] = None
    stopped_early: bool = False

    def __len__(self) -> int:
        return len(self.records)

    @property
    def errors(self) -> np.ndarray:
        return np.array([np.nan if r.error is None else r.error for r in self.records])

    def to_frame(self) -> pd.DataFrame:
        """One row per iteration."""
        rows = [
            {
                "iteration": r.iteration,
                "objective": r.objective,
                "step_norm": r.step_norm,
                "sparsity": r.used_sparsity,
                "projection_objective": r.projection_objective,
                "error": r.error,
                "tree": r.tree_fingerprint,
            }
            for r in self.records
        ]
        return pd.DataFrame(
            rows,
            columns=TRACE_COLUMNS + ["projection_objective", "error", "tree"],
        )


@dataclass(frozen=True, eq=False)
class PgdResult:
    theta: np.ndarray
    trace: PgdTrace


def default_grid(
    loss: LossModel,
    data: Dataset,
    theta0: np.ndarray,
    L: float,
    norm_bound: Optional[float],
    step: float,
) -> GridSpec:
    """
    Symmetric grid with half-width ||grad L(theta0)||_inf / L + 3 * norm_bound,
    rounded up to a multiple of step.

    Stands in for the unobservable ||grad L(theta*)||_inf / L + 3||theta*|| + 2 Lambda.
    """
    if norm_bound is None:
        raise ParameterError("A bound on ||theta*||_2 (theta_norm_bound) is required when no grid is configured")
    if not step > 0:
        raise ParameterError(f"Grid step must be positive, got {step}")
    g0 = loss.gradient(theta0, data)
    half_width = float(np.max(np.abs(g0))) / L + 3 * norm_bound
    k = max(1, math.ceil(half_width / step))
    return GridSpec(delta_min=-k * step, delta_max=k * step, step=step)


def _initial_theta(cfg: PgdConfig, p: int) -> np.ndarray:
    if cfg.theta0 is None:
        return np.zeros(p)
    theta0 = np.asarray(cfg.theta0, dtype=float)
    if theta0.size != p:
        raise DimensionError(f"Initial vector has length {theta0.size} but the graph has p={p} vertices")
    return theta0


def run_tree_pgd(
    g: Graph,
    loss: LossModel,
    data: Dataset,
    cfg: PgdConfig,
    theta_star: Optional[np.ndarray] = None,
    priority: Optional[np.ndarray] = None,
) -> PgdResult:
    """
    Run tau iterations of tree-PGD.

    Args:
        g: Connected graph
        loss: Loss with gradient
        data: Samples; X must have g.p columns
        cfg: Run configuration
        theta_star: Truth, when known; the trace then records ||theta_t - theta*||
        priority: Neighbour ranking for the deterministic DFS of fixed_dfs

    Returns:
        PgdResult with theta_tau and the trace

    Raises:
        NumericError: A gradient is not finite; the message names the iteration
    """
    g.require_connected()
    data.require_p(g.p)
    theta = _initial_theta(cfg, g.p)
    if theta_star is not None:
        theta_star = np.asarray(theta_star, dtype=float)
        if theta_star.size != g.p:
            raise DimensionError(f"Truth has length {theta_star.size} but the graph has p={g.p} vertices")

    L: Optional[float] = None
    if cfg.eta is None or cfg.grid is None:
        L = cfg.smoothness if cfg.smoothness is not None else loss.smoothness(data)
    eta = cfg.eta if cfg.eta is not None else 1.0 / L

    if cfg.grid is not None:
        grid, grid_source = cfg.grid, "config"
    else:
        grid = default_grid(loss, data, theta, L, cfg.theta_norm_bound, cfg.grid_step)
        grid_source = "runtime"
        logger.info(f"Derived grid {grid} at runtime")

    trace = PgdTrace(
        eta=eta,
        grid=grid,
        grid_source=grid_source,
        smoothness=L,
        history=[] if cfg.record_history else None,
    )
    policy: TreePolicy = cfg.tree_policy
    fixed_tree: Optional[RootedTree] = None
    if policy.mode == "fixed_dfs":
        fixed_tree = build_tree(g, policy, 1, priority=priority)

    logger.info(
        f"Starting tree-PGD: p={g.p}, n={data.n}, loss={loss.name}, S={cfg.sparsity}, "
        f"eta={eta:.6g}, tau={cfg.tau}, tree={policy.mode}/d_max={policy.d_max}, |grid|={grid.size}"
    )

    for t in range(1, cfg.tau + 1):
        try:
            grad = loss.gradient(theta, data)
        except NumericError as e:
            raise NumericError(f"Iteration {t}: {e}") from e
        bad = np.flatnonzero(~np.isfinite(grad))
        if bad.size:
            raise NumericError(f"Iteration {t}: gradient is not finite at index {int(bad[0])}")

        u = theta - eta * grad
        tree = fixed_tree if fixed_tree is not None else build_tree(g, policy, t, priority=priority)
        projection = project_tree(u, tree, cfg.sparsity, grid)

        new_theta = projection.theta
        step_norm = float(np.linalg.norm(new_theta - theta))
        error = float(np.linalg.norm(new_theta - theta_star)) if theta_star is not None else None
        record = IterationRecord(
            iteration=t,
            tree_fingerprint=tree.fingerprint,
            objective=loss.value(new_theta, data),
            projection_objective=projection.objective,
            step_norm=step_norm,
            used_sparsity=projection.used_sparsity,
            error=error,
        )
        trace.records.append(record)
        if trace.history is not None:
            trace.history.append(new_theta.copy())
        logger.debug(
            f"iter {t}: objective={record.objective:.6g} step={step_norm:.4g} "
            f"breaks={record.used_sparsity}" + (f" error={error:.4g}" if error is not None else "")
        )

        theta = new_theta
        if cfg.stop_on_fixed_point and step_norm == 0.0:
            trace.stopped_early = True
            logger.info(f"Fixed point reached at iteration {t}")
            break

    logger.info(f"Finished tree-PGD after {len(trace)} iterations, objective={trace.records[-1].objective:.6g}")
    return PgdResult(theta=theta, trace=trace)


def corollary1_config(
    s_star: int,
    lambda1: float,
    lambda_p: float,
    sigma: float,
    n: int,
    p: int,
    d_max: int,
    norm_theta_bound: float,
    tree_mode: str = "random_dfs",
    seed: int = 0,
    c1: Optional[float] = None,
    c2: Optional[float] = None,
    c3: Optional[float] = None,
) -> PgdConfig:
    """
    Tuning recipe for the linear model with Gaussian noise.

    S = c1 (lambda1 / lambda_p)^2 s*, eta = 2 / (3 lambda1),
    omega = sigma lambda1^(3/2) / lambda_p^2, delta = omega sqrt(s* / (n p)),
    Delta_max = -Delta_min = c2 (||theta*|| + omega sqrt(s* log(p) / n)),
    tau = c3 log(n p / (omega^2 s*)).

    ``norm_theta_bound`` plays the role of c0 sqrt(p). S and tau are rounded
    up; the grid keeps delta exact and widens Delta_max to a multiple of it.
    Constants default to the settings (c1, c2, c3 = 4, 3, 4).
    """
    settings = get_settings()
    c1 = settings.corollary_c1 if c1 is None else c1
    c2 = settings.corollary_c2 if c2 is None else c2
    c3 = settings.corollary_c3 if c3 is None else c3

    inputs = dict(s_star=s_star, lambda1=lambda1, lambda_p=lambda_p, sigma=sigma, n=n, p=p,
                  norm_theta_bound=norm_theta_bound, c1=c1, c2=c2, c3=c3)
    for name, value in inputs.items():
        if not value > 0:
            raise ParameterError(f"{name} must be positive, got {value}")

    S = math.ceil(c1 * (lambda1 / lambda_p) ** 2 * s_star - 1e-9)
    eta = 2.0 / (3.0 * lambda1)
    omega = sigma * lambda1**1.5 / lambda_p**2
    delta = omega * math.sqrt(s_star / (n * p))
    delta_max = c2 * (norm_theta_bound + omega * math.sqrt(s_star * math.log(p) / n))
    k = max(1, math.ceil(delta_max / delta - 1e-9))
    tau = max(1, math.ceil(c3 * math.log(n * p / (omega**2 * s_star)) - 1e-9))

    logger.debug(f"Recipe: S={S} eta={eta:.4g} delta={delta:.4g} Delta_max={k * delta:.4g} tau={tau}")
    return PgdConfig(
        sparsity=S,
        eta=eta,
        tau=tau,
        grid=GridSpec(delta_min=-k * delta, delta_max=k * delta, step=delta),
        tree_policy=TreePolicy(mode=tree_mode, d_max=d_max, seed=seed),
        theta_norm_bound=norm_theta_bound,
    )
