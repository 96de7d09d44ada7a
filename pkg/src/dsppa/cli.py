"""Command-line interface: datagen, solve, tune, bench, verify, repro.

Matrices move through DSM1 binary or CSV files; results are JSON
reports.  Exit codes: 0 success, 2 bad arguments, 3 file format or data
problems, 4 numerical failure (divergence), 5 verification or
reproduction check failed.
"""

from __future__ import annotations

import os
import sys
from dataclasses import replace

import click
import numpy as np

from dsppa import errors
from dsppa.bench import run_bench, write_bench_csv
from dsppa.datagen import ScenarioSpec, gen_dataset
from dsppa.io import read_config, read_matrix, write_json, write_matrix, write_report
from dsppa.lla import LLAConfig, lla_solve
from dsppa.metrics import lambda_grid_search, metric_report
from dsppa.problem import ProblemData
from dsppa.prox import PenaltySpec
from dsppa.solvers import SolverConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FORMAT = 3
EXIT_NUMERIC = 4
EXIT_CHECK_FAILED = 5


def _exit_code(exc: errors.DsppaError) -> int:
    if isinstance(exc, (errors.FormatError, errors.DataError)):
        return EXIT_FORMAT
    if isinstance(exc, errors.NumericError):
        return EXIT_NUMERIC
    return EXIT_USAGE


def _fail(exc: errors.DsppaError):
    click.echo(f"error: {exc}", err=True)
    sys.exit(_exit_code(exc))


def _workers(value: int | None) -> int:
    env = os.environ.get("DSPPA_WORKERS")
    if env is not None:
        return max(1, int(env))
    if value is not None:
        return max(1, value)
    return os.cpu_count() or 1


def _apply_config(ctx, param, path):
    """--config key=value file: values become defaults for other options."""
    if path is None:
        return None
    cfg = read_config(path)
    ctx.default_map = dict(ctx.default_map or {})
    for key, value in cfg.items():
        ctx.default_map.setdefault(key.replace("-", "_"), value)
    return path


_config_option = click.option(
    "--config", type=click.Path(exists=True), callback=_apply_config,
    is_eager=True, expose_value=False, help="key=value file with option defaults",
)


@click.group()
def cli():
    """Dantzig selector solvers with feature-splitting parallelism."""


@cli.command()
@_config_option
@click.option("--n", type=int, required=True)
@click.option("--p", type=int, required=True)
@click.option("--rho", type=float, default=0.5, show_default=True)
@click.option("--pattern", type=click.Choice(["sparse8", "dense"]), default="sparse8", show_default=True)
@click.option("--noise", type=click.Choice(["gaussian", "mixednormal", "t", "cauchy"]), default="gaussian", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--fmt", type=click.Choice(["dsm1", "csv"]), default="dsm1", show_default=True)
@click.option("--x-out", type=click.Path(), required=True)
@click.option("--y-out", type=click.Path(), required=True)
@click.option("--beta-out", type=click.Path(), default=None, help="also store the true coefficients")
def datagen(n, p, rho, pattern, noise, seed, fmt, x_out, y_out, beta_out):
    """Generate a synthetic dataset and write it to matrix files."""
    try:
        spec = ScenarioSpec(n, p, rho, pattern, noise, seed)
        X, y, beta_star, _ = gen_dataset(spec)
        write_matrix(x_out, X, fmt)
        write_matrix(y_out, y, fmt)
        if beta_out:
            write_matrix(beta_out, beta_star, fmt)
    except errors.DsppaError as exc:
        _fail(exc)
    click.echo(f"wrote {n}x{p} design to {x_out}")


def _load_problem(x_path, y_path) -> ProblemData:
    X = read_matrix(x_path)
    y = read_matrix(y_path).ravel()
    return ProblemData(X, y)


def _solver_options(fn):
    for deco in reversed([
        click.option("--lam", "--lambda", "lam", type=float, required=True),
        click.option("--mu", type=float, default=None, help="default: scaled so eta stays near 10"),
        click.option("--k", type=int, default=1, show_default=True),
        click.option("--tol", type=float, default=1e-4, show_default=True),
        click.option("--max-iter", type=int, default=500, show_default=True),
        click.option("--workers", type=int, default=None, help="default: available cores; DSPPA_WORKERS overrides"),
        click.option("--diag", is_flag=True, help="record full iterate traces"),
    ]):
        fn = deco(fn)
    return fn


@cli.command()
@_config_option
@click.option("--algo", type=click.Choice(["ppa", "pppa", "ippa", "ladmm", "tadmm"]), default="ppa", show_default=True)
@click.option("--penalty", type=click.Choice(["l1", "scad", "mcp"]), default="l1", show_default=True)
@click.option("--a", type=float, default=None, help="SCAD/MCP shape (defaults 3.7 / 3.0)")
@_solver_options
@click.option("--x", "x_path", type=click.Path(exists=True), required=True)
@click.option("--y", "y_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--beta-true", type=click.Path(exists=True), default=None, help="true coefficients for metric reporting")
@click.option("--rho", type=float, default=0.0, show_default=True, help="AR(1) parameter for model error")
def solve(algo, penalty, a, lam, mu, k, tol, max_iter, workers, diag, x_path, y_path, out, beta_true, rho):
    """Fit one Dantzig selector and write the run report."""
    from dsppa.bench import run_algorithm

    try:
        data = _load_problem(x_path, y_path)
        if mu is None:
            from dsppa.solvers import suggest_mu

            mu = suggest_mu(data)
        cfg = SolverConfig(lam=lam, mu=mu, k=k, tol=tol, max_iter=max_iter,
                           workers=_workers(workers), record_state=diag)
        if penalty == "l1":
            report = run_algorithm(data, algo, cfg)
        else:
            if algo in ("ladmm", "tadmm"):
                raise errors.ArgumentError("folded-concave penalties run on the proximal point solvers only")
            pen = PenaltySpec(penalty, lam, a)
            report = lla_solve(data, LLAConfig(pen, replace(cfg, algorithm=algo)))
        metrics = None
        if beta_true:
            beta_star = read_matrix(beta_true).ravel()
            metrics = metric_report(report.beta_hat, beta_star, rho,
                                    iterations=report.iterations, wall_time=report.wall_time_s)
        write_report(report, out, metrics)
        np.save(str(out) + ".beta.npy", report.beta_hat)
    except errors.DsppaError as exc:
        _fail(exc)
    click.echo(f"{report.algorithm}: {report.iterations} iterations, "
               f"{report.beta_nnz} nonzeros, converged={report.converged}")


@cli.command()
@_config_option
@click.option("--algo", type=click.Choice(["ppa", "pppa", "ippa"]), default="ppa", show_default=True)
@click.option("--grid-points", type=int, default=50, show_default=True)
@click.option("--grid-floor", type=float, default=0.01, show_default=True, help="smallest lambda as a fraction of lambda_max")
@click.option("--mu", type=float, default=None, help="default: scaled so eta stays near 10")
@click.option("--k", type=int, default=1, show_default=True)
@click.option("--tol", type=float, default=1e-4, show_default=True)
@click.option("--max-iter", type=int, default=500, show_default=True)
@click.option("--workers", type=int, default=None)
@click.option("--x", "x_path", type=click.Path(exists=True), required=True)
@click.option("--y", "y_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
def tune(algo, grid_points, grid_floor, mu, k, tol, max_iter, workers, x_path, y_path, out):
    """Select lambda on a log grid by the HBIC criterion."""
    try:
        data = _load_problem(x_path, y_path)
        if mu is None:
            from dsppa.solvers import suggest_mu

            mu = suggest_mu(data)
        lam_max = data.lambda_max()
        grid = np.geomspace(lam_max, grid_floor * lam_max, grid_points)
        template = SolverConfig(lam=lam_max, mu=mu, k=k, tol=tol, max_iter=max_iter,
                                algorithm=algo, workers=_workers(workers))
        best_lam, reports = lambda_grid_search(data, template, grid)
        idx = int(np.argmin(np.abs(grid - best_lam)))
        write_report(reports[idx], out)
    except errors.DsppaError as exc:
        _fail(exc)
    click.echo(f"selected lambda = {best_lam:.6g} over {grid_points} grid points")


@cli.command()
@_config_option
@click.option("--n", type=int, required=True)
@click.option("--p", type=int, required=True)
@click.option("--rho", type=float, default=0.5, show_default=True)
@click.option("--pattern", type=click.Choice(["sparse8", "dense"]), default="sparse8", show_default=True)
@click.option("--noise", type=click.Choice(["gaussian", "mixednormal", "t", "cauchy"]), default="gaussian", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--algos", default="ppa,pppa,ippa", show_default=True, help="comma-separated algorithm list")
@click.option("--k-list", default="1,2,4", show_default=True, help="comma-separated block counts")
@click.option("--replicates", type=int, default=3, show_default=True)
@click.option("--lam", "--lambda", "lam", type=float, default=None, help="default: sqrt(2 log p / n)")
@click.option("--mu", type=float, default=None, help="default: scaled so eta stays near 10")
@click.option("--workers", type=int, default=None)
@click.option("--out", type=click.Path(), required=True)
@click.option("--csv-out", type=click.Path(), default=None, help="plot-ready CSV path")
def bench(n, p, rho, pattern, noise, seed, algos, k_list, replicates, lam, mu, workers, out, csv_out):
    """Sweep algorithms and block counts over seeded replicates."""
    try:
        spec = ScenarioSpec(n, p, rho, pattern, noise, seed)
        result = run_bench(
            spec,
            [a.strip() for a in algos.split(",") if a.strip()],
            [int(x) for x in k_list.split(",") if x.strip()],
            replicates,
            lam=lam,
            mu=mu,
            workers=_workers(workers),
        )
        write_json(result, out)
        if csv_out:
            write_bench_csv(result, csv_out)
    except errors.DsppaError as exc:
        _fail(exc)
    click.echo(f"bench wrote {len(result['cells'])} cells to {out}")


@cli.command()
@_config_option
@click.option("--x", "x_path", type=click.Path(exists=True), required=True)
@click.option("--y", "y_path", type=click.Path(exists=True), required=True)
@click.option("--lam", "--lambda", "lam", type=float, required=True)
@click.option("--mu", type=float, default=1.0, show_default=True)
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--max-iter", type=int, default=200, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def verify(x_path, y_path, lam, mu, k, max_iter, out):
    """Run convergence-theory checks on an instance; nonzero exit on failure."""
    from dsppa.verify import verify_instance

    try:
        data = _load_problem(x_path, y_path)
        result = verify_instance(data, lam, mu=mu, k=k, max_iter=max_iter)
        write_json(result, out)
    except errors.DsppaError as exc:
        _fail(exc)
    click.echo(f"verification {'passed' if result['passed'] else 'FAILED'}, report at {out}")
    if not result["passed"]:
        sys.exit(EXIT_CHECK_FAILED)


@cli.command()
@_config_option
@click.option("--scenario", type=click.Choice(["table1", "table3", "table7"]), required=True)
@click.option("--results-dir", type=click.Path(), default="repro-results", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def repro(scenario, results_dir, seed):
    """Run a registered scaled experiment and store its artifact."""
    from dsppa.repro import run_repro

    try:
        result = run_repro(scenario, results_dir, seed)
    except errors.DsppaError as exc:
        _fail(exc)
    click.echo(f"{scenario}: {'passed' if result['passed'] else 'FAILED'}")
    if not result["passed"]:
        sys.exit(EXIT_CHECK_FAILED)
