"""
Lattice recovery experiment.

Every (method, S, sigma, replicate) run draws its data from the stream
(seed, 0, sigma, replicate), shared by all methods, and its trees from
(seed, 1 + method, sigma, replicate). Runs are independent and may execute
in worker processes; results are sorted before aggregation so the tables do
not depend on completion order.
"""

import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.config import get_settings
from src.losses import SquaredErrorLoss, diagnostics, linear_model_constants
from src.models import ExperimentSpec, Graph, LatticeSpec, MethodSpec, PgdConfig, TreePolicy
from src.parsers import write_pgm
from src.utils import get_logger, run_context
from .pgd_engine import run_tree_pgd
from .synthetic import TruthImage, generate_linear_data, lattice_column_major_priority, make_lattice, make_truth_image

logger = get_logger(__name__)

RUN_COLUMNS = ["method", "d_max", "tree_mode", "S", "sigma", "replicate", "mse", "runtime_ms"]
SUMMARY_COLUMNS = [
    "method", "tree_mode", "d_max", "S", "sigma",
    "mean_mse", "stderr_mse", "replicates", "failures",
]

# Stream tags under the experiment seed
DATA_STREAM = 0
TREE_STREAM_BASE = 1


def experiment_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))


def tree_seed(seed: int, method_index: int, sigma_index: int, replicate: int) -> int:
    """Integer seed for the per-run tree stream."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(TREE_STREAM_BASE + method_index, sigma_index, replicate))
    return int(ss.generate_state(1)[0])


@dataclass(frozen=True)
class RunJob:
    method_index: int
    method: MethodSpec
    S: int
    sigma_index: int
    sigma: float
    replicate: int


@dataclass(frozen=True)
class RunContext:
    """Everything a worker needs besides the job itself."""

    lattice: LatticeSpec
    theta_star: Tuple[float, ...]
    n: int
    seed: int
    timing: bool
    keep_estimates: bool


@dataclass(frozen=True, eq=False)
class RunOutcome:
    job: RunJob
    mse: Optional[float]
    runtime_ms: float
    error: Optional[str] = None
    theta: Optional[np.ndarray] = None


@lru_cache(maxsize=4)
def _lattice(spec: LatticeSpec) -> Tuple[Graph, np.ndarray]:
    return make_lattice(spec), lattice_column_major_priority(spec)


def run_job(job: RunJob, context: RunContext) -> RunOutcome:
    """One tree-PGD fit; failures are returned, not raised."""
    with run_context(method=job.method.name, S=job.S, sigma=job.sigma, rep=job.replicate):
        return _run_job(job, context)


def _run_job(job: RunJob, context: RunContext) -> RunOutcome:
    g, priority = _lattice(context.lattice)
    theta_star = np.asarray(context.theta_star)
    started = time.perf_counter()
    try:
        data = generate_linear_data(
            theta_star, context.n, job.sigma,
            experiment_rng(context.seed, DATA_STREAM, job.sigma_index, job.replicate),
        )
        cfg = PgdConfig(
            sparsity=job.S,
            eta=job.method.eta,
            tau=job.method.tau,
            grid=job.method.grid,
            tree_policy=TreePolicy(
                mode=job.method.tree_mode,
                d_max=job.method.d_max,
                seed=tree_seed(context.seed, job.method_index, job.sigma_index, job.replicate),
            ),
        )
        result = run_tree_pgd(g, SquaredErrorLoss(), data, cfg, priority=priority)
    except Exception as e:
        logger.warning(f"Run failed: {e}")
        return RunOutcome(job=job, mse=None, runtime_ms=0.0, error=f"{type(e).__name__}: {e}")

    elapsed = (time.perf_counter() - started) * 1000 if context.timing else 0.0
    mse = float(np.mean((result.theta - theta_star) ** 2))
    keep = context.keep_estimates and job.replicate == 0
    return RunOutcome(job=job, mse=mse, runtime_ms=round(elapsed, 3), theta=result.theta if keep else None)


@dataclass
class ResultTable:
    """
    Per-run MSEs and their aggregates.

    ``summary`` has one row per (method, S, sigma); ``best()`` keeps the S with
    the smallest mean MSE for each (method, sigma).
    """

    runs: pd.DataFrame
    summary: pd.DataFrame
    failures: List[str] = field(default_factory=list)

    def best(self) -> pd.DataFrame:
        ranked = self.summary.assign(_order=np.arange(len(self.summary)))
        ranked = ranked.sort_values(["mean_mse", "S"], kind="mergesort", na_position="last")
        best = ranked.groupby(["method", "sigma"], sort=False).head(1)
        return best.sort_values("_order", kind="mergesort").drop(columns="_order").reset_index(drop=True)

    def replicate_values(self, method: str, sigma: float, S: Optional[int] = None) -> np.ndarray:
        """MSE per replicate; S defaults to the best S at this sigma."""
        if S is None:
            best = self.best()
            row = best[(best["method"] == method) & (best["sigma"] == sigma)]
            if row.empty:
                return np.array([])
            S = int(row["S"].iloc[0])
        rows = self.runs[(self.runs["method"] == method) & (self.runs["sigma"] == sigma) & (self.runs["S"] == S)]
        return rows.sort_values("replicate")["mse"].to_numpy(dtype=float)

    def mean_mse(self, method: str, sigma: float) -> float:
        best = self.best()
        row = best[(best["method"] == method) & (best["sigma"] == sigma)]
        return float(row["mean_mse"].iloc[0]) if not row.empty else float("nan")

    def to_csv(self, path: Union[str, Path]) -> Tuple[Path, Path]:
        """Write the per-run CSV and ``<stem>_summary.csv`` (best S rows) next to it."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        summary_path = path.with_name(f"{path.stem}_summary.csv")
        self.runs.to_csv(path, index=False)
        self.best().to_csv(summary_path, index=False)
        logger.info(f"Wrote {len(self.runs)} runs to {path} and the summary to {summary_path}")
        return path, summary_path


def sparsity_levels(method: MethodSpec, s_star: int, multipliers: Tuple[int, ...]) -> List[int]:
    """Explicit S values, or the sweep multiplier * s* (just 0 for a constant truth)."""
    if method.sparsity is not None:
        return sorted(set(method.sparsity))
    return sorted({m * s_star for m in multipliers})


def _summarize(runs: pd.DataFrame) -> pd.DataFrame:
    rows = []
    keys = ["method", "tree_mode", "d_max", "S", "sigma"]
    for key, group in runs.groupby(keys, sort=False):
        values = group["mse"].dropna().to_numpy(dtype=float)
        k = values.size
        rows.append(
            dict(
                zip(keys, key),
                mean_mse=float(np.mean(values)) if k else float("nan"),
                stderr_mse=float(np.std(values, ddof=1) / np.sqrt(k)) if k > 1 else 0.0,
                replicates=int(k),
                failures=int(len(group) - k),
            )
        )
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


class ExperimentRunner:
    """
    Runs an ExperimentSpec and collects a ResultTable.
    Coordinates truth generation, the run grid, parallel execution and image export.
    """

    def __init__(
        self,
        spec: ExperimentSpec,
        max_workers: Optional[int] = None,
        timing: bool = False,
        images_dir: Optional[Union[str, Path]] = None,
        progress: bool = True,
    ):
        self.settings = get_settings()
        self.spec = spec
        self.max_workers = max_workers or self.settings.max_workers
        self.timing = timing
        self.images_dir = Path(images_dir) if images_dir is not None else None
        self.progress = progress

        truths = [
            make_truth_image(spec.lattice, spec.truth, spec.truth_path, grid=m.grid) for m in spec.methods
        ]
        self.truth: TruthImage = truths[0]
        self.sparsity = {
            m.name: sparsity_levels(m, self.truth.s_star, self.settings.s_multipliers) for m in spec.methods
        }
        logger.info("Initialized ExperimentRunner")

    def jobs(self) -> List[RunJob]:
        jobs = []
        for m_idx, method in enumerate(self.spec.methods):
            for S in self.sparsity[method.name]:
                for s_idx, sigma in enumerate(self.spec.sigmas):
                    for rep in range(self.spec.replicates):
                        jobs.append(RunJob(m_idx, method, S, s_idx, sigma, rep))
        return jobs

    def _context(self) -> RunContext:
        return RunContext(
            lattice=self.spec.lattice,
            theta_star=tuple(self.truth.theta.tolist()),
            n=self.spec.n,
            seed=self.spec.seed,
            timing=self.timing,
            keep_estimates=self.images_dir is not None,
        )

    def _execute(self, jobs: List[RunJob]) -> List[RunOutcome]:
        context = self._context()
        bar = tqdm(total=len(jobs), desc="tree-PGD runs", file=sys.stderr, disable=not self.progress)
        outcomes: List[RunOutcome] = []
        if self.max_workers <= 1:
            for job in jobs:
                outcomes.append(run_job(job, context))
                bar.update(1)
        else:
            with ProcessPoolExecutor(max_workers=self.max_workers) as pool:
                futures = [pool.submit(run_job, job, context) for job in jobs]
                for future in as_completed(futures):
                    outcomes.append(future.result())
                    bar.update(1)
        bar.close()
        return outcomes

    def run(self) -> ResultTable:
        spec = self.spec
        jobs = self.jobs()
        logger.info(
            f"Starting experiment: {spec.lattice.rows}x{spec.lattice.cols} lattice, n={spec.n}, "
            f"s*={self.truth.s_star}, {len(spec.methods)} methods, {len(spec.sigmas)} noise levels, "
            f"{spec.replicates} replicates, {len(jobs)} runs, {self.max_workers} workers"
        )
        outcomes = self._execute(jobs)
        outcomes.sort(key=lambda o: (o.job.method_index, o.job.S, o.job.sigma_index, o.job.replicate))

        runs = pd.DataFrame(
            [
                {
                    "method": o.job.method.name,
                    "d_max": o.job.method.d_max,
                    "tree_mode": o.job.method.tree_mode,
                    "S": o.job.S,
                    "sigma": o.job.sigma,
                    "replicate": o.job.replicate,
                    "mse": o.mse,
                    "runtime_ms": o.runtime_ms,
                }
                for o in outcomes
            ],
            columns=RUN_COLUMNS,
        )
        failures = [
            f"{o.job.method.name} S={o.job.S} sigma={o.job.sigma} replicate={o.job.replicate}: {o.error}"
            for o in outcomes
            if o.error is not None
        ]
        table = ResultTable(runs=runs, summary=_summarize(runs), failures=failures)
        if failures:
            logger.warning(f"{len(failures)} of {len(outcomes)} runs failed")

        if self.images_dir is not None:
            self.write_images(table, outcomes)
        logger.info("Experiment complete")
        return table

    def theory_diagnostics(self) -> pd.DataFrame:
        """
        Error-bound quantities per (method, S), up to constants.

        Uses the identity-covariance design of the experiment (lambda_1 = lambda_p = 1)
        and reports Lambda at the smallest noise level.
        """
        alpha, L = linear_model_constants(1.0, 1.0)
        sigma = min(self.spec.sigmas)
        rows = []
        for method in self.spec.methods:
            for S in self.sparsity[method.name]:
                cfg = PgdConfig(
                    sparsity=S,
                    eta=method.eta,
                    tau=method.tau,
                    grid=method.grid,
                    tree_policy=TreePolicy(mode=method.tree_mode, d_max=method.d_max),
                )
                d = diagnostics(
                    cfg, alpha, L, None, self.truth.s_star, self.spec.lattice.p,
                    sigma=sigma, lambda1=1.0, n=self.spec.n,
                )
                rows.append(
                    {
                        "method": method.name,
                        "S": S,
                        "S_prime": d.S_prime,
                        "gamma": d.gamma,
                        "Gamma": d.Gamma,
                        "Lambda": d.Lambda,
                        "status": d.status,
                    }
                )
        return pd.DataFrame(rows, columns=["method", "S", "S_prime", "gamma", "Gamma", "Lambda", "status"])

    def write_images(self, table: ResultTable, outcomes: List[RunOutcome]) -> List[Path]:
        """Truth, noisy image X'y/n and each method's replicate-0 estimate at its best S, per sigma."""
        spec = self.spec
        rows, cols = spec.lattice.rows, spec.lattice.cols
        value_range = (
            min(m.grid.delta_min for m in spec.methods),
            max(m.grid.delta_max for m in spec.methods),
        )
        estimates: Dict[Tuple[str, int, float], np.ndarray] = {
            (o.job.method.name, o.job.S, o.job.sigma): o.theta for o in outcomes if o.theta is not None
        }

        written = [write_pgm(self.images_dir / "truth.pgm", self.truth.theta, rows, cols, value_range)]
        for s_idx, sigma in enumerate(spec.sigmas):
            data = generate_linear_data(
                self.truth.theta, spec.n, sigma, experiment_rng(spec.seed, DATA_STREAM, s_idx, 0)
            )
            noisy = data.X.T @ data.y / data.n
            written.append(write_pgm(self.images_dir / f"noisy_sigma{sigma:g}.pgm", noisy, rows, cols, value_range))

        for _, row in table.best().iterrows():
            theta = estimates.get((row["method"], int(row["S"]), float(row["sigma"])))
            if theta is None:
                continue
            name = f"{row['method']}_sigma{float(row['sigma']):g}.pgm"
            written.append(write_pgm(self.images_dir / name, theta, rows, cols, value_range))

        logger.info(f"Wrote {len(written)} images to {self.images_dir}")
        return written


def run_experiment(
    spec: ExperimentSpec,
    max_workers: Optional[int] = None,
    timing: bool = False,
    images_dir: Optional[Union[str, Path]] = None,
    progress: bool = True,
) -> ResultTable:
    """Run every (method, S, sigma, replicate) of the experiment."""
    runner = ExperimentRunner(spec, max_workers=max_workers, timing=timing, images_dir=images_dir, progress=progress)
    return runner.run()
