"""
Command-line interface for tree-PGD.
Provides commands for single projections, estimation runs and the lattice
recovery experiment.

Flag names follow the usual symbols:

    --sparsity  S       projection sparsity (breaks allowed per tree)
    --eta       eta     step size
    --tau       tau     iteration count
    --dmax      d_max   degree cap of the iteration trees
    --grid      Delta   'min,max,step' projection grid
"""

import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import click
import numpy as np
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from src import SEED_POLICY, __version__
from src.algorithms import brute_force_project, build_tree, exact_line_projection, project_tree
from src.config import get_settings
from src.losses import LOSS_NAMES, get_loss
from src.models import (
    EXPERIMENT_ETA,
    EXPERIMENT_GRID,
    EXPERIMENT_SIGMAS,
    EXPERIMENT_TAU,
    Dataset,
    ExperimentSpec,
    GridSpec,
    LatticeSpec,
    MethodSpec,
    PgdConfig,
    RootedTree,
    TreePolicy,
    experiment_methods,
)
from src.parsers import read_graph, read_matrix_csv, read_tree, read_vector, write_tree, write_vector
from src.services import TRACE_COLUMNS, ExperimentRunner, run_tree_pgd
from src.utils import get_logger, run_context
from src.utils.errors import EXIT_USAGE, ParameterError, exit_code_for

PROG_NAME = "treepgd"
TREE_MODES = {"fixed": "fixed_dfs", "random": "random_dfs"}

# Results go to files or stdout; everything human-readable goes to stderr
console = Console(stderr=True)
logger = get_logger(__name__)


class TreePgdGroup(click.Group):
    """Click group whose usage errors exit with status 1."""

    def make_context(self, *args, **kwargs):
        try:
            return super().make_context(*args, **kwargs)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise


def _fail(command: str, e: Exception) -> None:
    """Report an error on stderr and exit with its mapped status."""
    console.print(f"\n[bold red]✗ Error: {escape(str(e))}[/bold red]")
    logger.opt(exception=e).error("{} failed: {}", command, e)
    sys.exit(exit_code_for(e))


def _grid_option(ctx, param, value: Optional[str]) -> Optional[GridSpec]:
    if value is None:
        return None
    try:
        return GridSpec.parse(value)
    except (ValueError, ValidationError) as e:
        raise click.BadParameter(str(e).splitlines()[0])


def _float_list_option(ctx, param, value: str) -> List[float]:
    try:
        values = [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")
    if not values:
        raise click.BadParameter("at least one value is required")
    return values


def _write_result(path: str, theta: np.ndarray, header: Sequence[str]) -> Path:
    written = write_vector(path, theta, header=header)
    logger.info(f"Wrote result to {written}")
    return written


@click.group(cls=TreePgdGroup)
@click.version_option(
    version=__version__,
    prog_name=PROG_NAME,
    message=f"%(prog)s %(version)s (seed-policy: {SEED_POLICY})",
)
def cli():
    """
    Tree-PGD

    Estimation of piecewise-constant parameters on graphs by gradient steps
    projected onto gradient-sparse vectors over spanning trees.
    """
    pass


@cli.command()
@click.option("--graph", "graph_path", type=click.Path(exists=True, dir_okay=False), help="Graph edge-list file")
@click.option("--tree", "tree_path", type=click.Path(exists=True, dir_okay=False), help="Tree edge-list file")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True, help="Vector u to project")
@click.option("--sparsity", "-S", type=click.IntRange(min=0), required=True, help="Budget S of breaks over the tree")
@click.option("--grid", type=str, callback=_grid_option, required=True, help="Grid as min,max,step")
@click.option("--tree-mode", type=click.Choice(list(TREE_MODES)), default="fixed", show_default=True,
              help="How to build the tree from --graph")
@click.option("--dmax", type=click.IntRange(min=2), default=2, show_default=True, help="Degree cap for a tree built from --graph")
@click.option("--seed", type=int, default=None, help="Seed for --tree-mode random")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Output vector file")
@click.option("--tree-out", type=click.Path(dir_okay=False), help="Also write the tree used")
def project(
    graph_path: Optional[str],
    tree_path: Optional[str],
    input_path: str,
    sparsity: int,
    grid: GridSpec,
    tree_mode: str,
    dmax: int,
    seed: Optional[int],
    out: str,
    tree_out: Optional[str],
):
    """Project a vector onto grid-valued vectors with at most S breaks over a tree."""
    if (graph_path is None) == (tree_path is None):
        raise click.UsageError("Give exactly one of --graph or --tree")

    try:
        if tree_path is not None:
            tree: RootedTree = read_tree(tree_path)
        else:
            seed = get_settings().default_seed if seed is None else seed
            policy = TreePolicy(mode=TREE_MODES[tree_mode], d_max=dmax, seed=seed)
            tree = build_tree(read_graph(graph_path), policy, iteration=1)

        u = read_vector(input_path)
        result = project_tree(u, tree, sparsity, grid)

        _write_result(out, result.theta, [f"objective {result.objective!r} used_sparsity {result.used_sparsity}"])
        if tree_out:
            write_tree(tree_out, tree)

        console.print(
            f"[bold green]✓[/bold green] objective={result.objective:.6g} "
            f"breaks={result.used_sparsity}/{sparsity} tree={tree.fingerprint}"
        )
    except Exception as e:
        _fail("project", e)


@cli.command()
@click.option("--graph", "graph_path", type=click.Path(exists=True, dir_okay=False), required=True, help="Graph edge-list file")
@click.option("--X", "x_path", type=click.Path(exists=True, dir_okay=False), required=True, help="Design matrix CSV, one row per line")
@click.option("--y", "y_path", type=click.Path(exists=True, dir_okay=False), required=True, help="Response vector file")
@click.option("--loss", type=click.Choice(list(LOSS_NAMES)), default="linear", show_default=True)
@click.option("--sparsity", "-S", type=click.IntRange(min=0), required=True, help="Projection sparsity S")
@click.option("--eta", type=click.FloatRange(min=0, min_open=True), default=None, help="Step size (default 1/L)")
@click.option("--tau", type=click.IntRange(min=1), default=50, show_default=True, help="Iterations")
@click.option("--grid", type=str, callback=_grid_option, default=None, help="Grid as min,max,step (derived if absent)")
@click.option("--theta-norm-bound", type=click.FloatRange(min=0, min_open=True), default=None,
              help="Bound on ||theta*||_2, used to derive the grid")
@click.option("--grid-step", type=click.FloatRange(min=0, min_open=True), default=None, help="Step of a derived grid")
@click.option("--smoothness", type=click.FloatRange(min=0, min_open=True), default=None, help="Smoothness constant L")
@click.option("--tree", "tree_mode", type=click.Choice(list(TREE_MODES)), default="random", show_default=True)
@click.option("--dmax", type=click.IntRange(min=2), default=2, show_default=True, help="Degree cap d_max")
@click.option("--seed", type=int, default=None, help="Seed of the random trees")
@click.option("--stop-on-fixed-point", is_flag=True, help="Stop once an iteration leaves theta unchanged")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Output estimate file")
@click.option("--trace-out", type=click.Path(dir_okay=False), help="Per-iteration trace CSV")
def estimate(
    graph_path: str,
    x_path: str,
    y_path: str,
    loss: str,
    sparsity: int,
    eta: Optional[float],
    tau: int,
    grid: Optional[GridSpec],
    theta_norm_bound: Optional[float],
    grid_step: Optional[float],
    smoothness: Optional[float],
    tree_mode: str,
    dmax: int,
    seed: Optional[int],
    stop_on_fixed_point: bool,
    out: str,
    trace_out: Optional[str],
):
    """Fit a gradient-sparse parameter vector by tree-PGD."""
    settings = get_settings()
    try:
        if grid is None and theta_norm_bound is None:
            raise ParameterError("Without --grid the bound --theta-norm-bound is required")

        g = read_graph(graph_path)
        data = Dataset(X=read_matrix_csv(x_path), y=read_vector(y_path))
        cfg = PgdConfig(
            sparsity=sparsity,
            eta=eta,
            tau=tau,
            grid=grid,
            tree_policy=TreePolicy(
                mode=TREE_MODES[tree_mode],
                d_max=dmax,
                seed=settings.default_seed if seed is None else seed,
            ),
            stop_on_fixed_point=stop_on_fixed_point,
            theta_norm_bound=theta_norm_bound,
            grid_step=grid_step or settings.default_grid_step,
            smoothness=smoothness,
        )

        with run_context(command="estimate", loss=loss, S=sparsity):
            result = run_tree_pgd(g, get_loss(loss), data, cfg)
        trace = result.trace
        last = trace.records[-1]

        _write_result(
            out,
            result.theta,
            [
                f"objective {last.objective!r} used_sparsity {last.used_sparsity}",
                f"eta {trace.eta!r} grid {trace.grid} grid_source {trace.grid_source}",
            ],
        )
        if trace_out:
            frame = trace.to_frame()[TRACE_COLUMNS]
            Path(trace_out).parent.mkdir(parents=True, exist_ok=True)
            frame.to_csv(trace_out, index=False)
            logger.info(f"Wrote trace to {trace_out}")

        table = Table(title="Estimation Summary")
        table.add_column("Metric", style="cyan")
        table.add_column("Value", style="green")
        table.add_row("Iterations", str(len(trace)))
        table.add_row("Final Objective", f"{last.objective:.6g}")
        table.add_row("Breaks on Last Tree", f"{last.used_sparsity}/{sparsity}")
        table.add_row("Step Size", f"{trace.eta:.6g}")
        table.add_row("Grid", f"{trace.grid} ({trace.grid_source})")
        console.print(table)
    except Exception as e:
        _fail("estimate", e)


@cli.command()
@click.option("--rows", type=click.IntRange(min=1), default=30, show_default=True)
@click.option("--cols", type=click.IntRange(min=1), default=30, show_default=True)
@click.option("--n", type=click.IntRange(min=1), default=500, show_default=True, help="Samples per replicate")
@click.option("--sigmas", type=str, callback=_float_list_option,
              default=",".join(f"{s:g}" for s in EXPERIMENT_SIGMAS), show_default=True, help="Noise levels")
@click.option("--replicates", type=click.IntRange(min=1), default=20, show_default=True)
@click.option("--methods", "method_specs", multiple=True,
              help="Repeatable: fixed:<dmax> or random:<dmax>[:S1,S2,...] (default: fixed:2 random:2 random:3 random:4)")
@click.option("--truth", type=click.Choice(["two_rectangles", "half_plane", "constant"]), default="two_rectangles",
              show_default=True)
@click.option("--truth-file", type=click.Path(exists=True, dir_okay=False), help="Text image overriding --truth")
@click.option("--eta", type=click.FloatRange(min=0, min_open=True), default=EXPERIMENT_ETA, show_default=True)
@click.option("--tau", type=click.IntRange(min=1), default=EXPERIMENT_TAU, show_default=True)
@click.option("--grid", type=str, callback=_grid_option, default=str(EXPERIMENT_GRID), show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker processes")
@click.option("--timing", is_flag=True, help="Record runtime_ms (outputs then differ between runs)")
@click.option("--out-csv", type=click.Path(dir_okay=False), default=None, help="Per-run CSV")
@click.option("--out-images-dir", type=click.Path(file_okay=False), default=None, help="Directory for PGM images")
@click.option("--no-progress", is_flag=True, help="Hide the progress bar")
def simulate(
    rows: int,
    cols: int,
    n: int,
    sigmas: List[float],
    replicates: int,
    method_specs: Tuple[str, ...],
    truth: str,
    truth_file: Optional[str],
    eta: float,
    tau: int,
    grid: GridSpec,
    seed: Optional[int],
    workers: Optional[int],
    timing: bool,
    out_csv: Optional[str],
    out_images_dir: Optional[str],
    no_progress: bool,
):
    """Run the lattice recovery experiment and write MSE tables."""
    settings = get_settings()
    try:
        overrides = dict(eta=eta, tau=tau, grid=grid)
        if method_specs:
            try:
                methods = [MethodSpec.parse(text, **overrides) for text in method_specs]
            except ValueError as e:
                raise click.BadParameter(str(e).splitlines()[0], param_hint="--methods")
        else:
            methods = [m.model_copy(update=overrides) for m in experiment_methods()]

        spec = ExperimentSpec(
            lattice=LatticeSpec(rows=rows, cols=cols),
            truth=truth,
            truth_path=truth_file,
            n=n,
            sigmas=sigmas,
            replicates=replicates,
            methods=methods,
            seed=settings.default_seed if seed is None else seed,
        )

        if out_csv is None:
            settings.ensure_directories()
            out_csv = str(settings.output_path / "simulation.csv")

        runner = ExperimentRunner(
            spec, max_workers=workers, timing=timing, images_dir=out_images_dir, progress=not no_progress
        )
        table = runner.run()
        csv_path, summary_path = table.to_csv(out_csv)

        results = Table(title=f"Mean MSE (best S), s*={runner.truth.s_star}")
        results.add_column("Method", style="cyan")
        for sigma in spec.sigmas:
            results.add_column(f"σ={sigma:g}", style="green", justify="right")
        best = table.best()
        for method in spec.methods:
            cells = []
            for sigma in spec.sigmas:
                row = best[(best["method"] == method.name) & (best["sigma"] == sigma)]
                cells.append(f"{row['mean_mse'].iloc[0]:.4f} (S={int(row['S'].iloc[0])})" if not row.empty else "-")
            results.add_row(method.name, *cells)
        console.print(results)

        theory = Table(title="Error-bound diagnostics (up to constants)")
        for column in ("method", "S", "gamma", "Gamma", "status"):
            theory.add_column(column, style="cyan" if column == "method" else "green")
        for _, row in runner.theory_diagnostics().iterrows():
            theory.add_row(
                row["method"],
                str(row["S"]),
                "-" if row["gamma"] is None or np.isnan(row["gamma"]) else f"{row['gamma']:.3f}",
                "-" if row["Gamma"] is None or np.isnan(row["Gamma"]) else f"{row['Gamma']:.3f}",
                row["status"],
            )
        console.print(theory)

        if table.failures:
            console.print(f"[yellow]⚠ {len(table.failures)} runs failed; see the log[/yellow]")
        console.print(f"[bold green]✓[/bold green] Runs: {csv_path}\n  Summary: {summary_path}")
    except click.UsageError:
        raise
    except Exception as e:
        _fail("simulate", e)


@cli.command(hidden=True)
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--sparsity", "-S", type=click.IntRange(min=0), required=True)
@click.option("--tree", "tree_path", type=click.Path(exists=True, dir_okay=False),
              help="Tree for the brute-force oracle; without it u is segmented as a line")
@click.option("--grid", type=str, callback=_grid_option, default=None, help="Grid for the brute-force oracle")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def oracle(input_path: str, sparsity: int, tree_path: Optional[str], grid: Optional[GridSpec], out: str):
    """Reference projections for debugging (brute force on a tree, exact line segmentation)."""
    if (tree_path is None) != (grid is None):
        raise click.UsageError("--tree and --grid go together")
    try:
        u = read_vector(input_path)
        if tree_path is not None:
            result = brute_force_project(u, read_tree(tree_path), sparsity, grid)
            header = [f"objective {result.objective!r} cut_edges {' '.join(map(str, result.cut_edges)) or '-'}"]
        else:
            result = exact_line_projection(u, sparsity)
            header = [f"objective {result.objective!r} segments {len(result.segments)}"]
        _write_result(out, result.theta, header)
        console.print(f"[bold green]✓[/bold green] objective={result.objective:.6g}")
    except Exception as e:
        _fail("oracle", e)


@cli.command()
def info():
    """Show version and active settings."""
    console.print("\n[bold blue]System Information[/bold blue]\n")

    try:
        settings = get_settings()

        table = Table()
        table.add_column("Setting", style="cyan")
        table.add_column("Value", style="green")

        table.add_row("Version", __version__)
        table.add_row("Seed Policy", SEED_POLICY)
        table.add_row("Project Root", str(settings.project_root))
        table.add_row("Output Directory", str(settings.output_dir))
        table.add_row("Log Level", settings.log_level)
        table.add_row("Log File", settings.log_file or "disabled")
        table.add_row("Workers", str(settings.max_workers))
        table.add_row("Default Seed", str(settings.default_seed))
        table.add_row("Default Grid Step", str(settings.default_grid_step))
        table.add_row("Power Iterations", str(settings.power_iterations))
        table.add_row("Brute-force Limits", f"p<={settings.brute_force_max_p}, |grid|<={settings.brute_force_max_grid}")
        table.add_row("Recipe Constants", f"c1={settings.corollary_c1}, c2={settings.corollary_c2}, c3={settings.corollary_c3}")
        table.add_row("S Sweep", ", ".join(f"{m}s*" for m in settings.s_multipliers))

        console.print(table)
        console.print()

    except Exception as e:
        _fail("info", e)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit status instead of exiting."""
    try:
        cli.main(args=list(argv) if argv is not None else None, prog_name=PROG_NAME, standalone_mode=True)
    except SystemExit as e:
        if e.code is None:
            return 0
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
