"""Benchmark sweeps over algorithms, block counts, and replicates.

Each (algorithm, K) cell aggregates AE/FP/FN/iterations/time across
seeded replicates.  Solver failures are recorded in the cell and never
abort the sweep.  Results serialize to JSON plus a plot-ready CSV of
(algorithm, K, mean_time, mean_AE).
"""

from __future__ import annotations

import math
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from dsppa.baselines import ladmm_solve, tadmm_solve
from dsppa.datagen import ScenarioSpec, gen_dataset
from dsppa.errors import DsppaError
from dsppa.metrics import metric_report
from dsppa.problem import ProblemData
from dsppa.solvers import SolveReport, SolverConfig, solve

ALGORITHMS = ("ppa", "pppa", "ippa", "ladmm", "tadmm")


def default_lambda(n: int, p: int) -> float:
    """The usual high-dimensional scale sqrt(2 log p / n)."""
    return math.sqrt(2.0 * math.log(p) / n)


def run_algorithm(data: ProblemData, algorithm: str, config: SolverConfig) -> SolveReport:
    """Dispatch a solve across the five supported algorithms."""
    algorithm = algorithm.lower()
    if algorithm == "ladmm":
        return ladmm_solve(data, config)
    if algorithm == "tadmm":
        return tadmm_solve(data, config)
    return solve(data, replace(config, algorithm=algorithm))


def _aggregate(values: list[float]) -> dict:
    if not values:
        return {"mean": None, "std": None}
    arr = np.asarray(values, dtype=np.float64)
    return {"mean": float(arr.mean()), "std": float(arr.std(ddof=1)) if arr.size > 1 else 0.0}


def run_bench(
    scenario: ScenarioSpec,
    algorithms: Sequence[str],
    k_list: Sequence[int],
    replicates: int,
    lam: Optional[float] = None,
    mu: Optional[float] = None,
    tol: float = 1e-4,
    max_iter: int = 500,
    workers: int = 1,
) -> dict:
    """Sweep (algorithm, K) cells over seeded replicates of the scenario."""
    if lam is None:
        lam = default_lambda(scenario.n, scenario.p)

    datasets = []
    for rep in range(replicates):
        spec = replace(scenario, seed=scenario.seed + rep)
        X, y, beta_star, rho = gen_dataset(spec)
        datasets.append((ProblemData(X, y), beta_star, rho))

    if mu is None:
        # one shared mu keeps cells comparable across algorithms and K
        from dsppa.solvers import suggest_mu

        mu = suggest_mu(datasets[0][0])

    cells = []
    for algorithm in algorithms:
        algorithm = algorithm.lower()
        ks = k_list if algorithm not in ("ppa", "ladmm") else [1]
        for k in ks:
            cfg = SolverConfig(lam=lam, mu=mu, tol=tol, max_iter=max_iter, k=k, workers=workers)
            ae, fp, fn, iters, times, per_iter = [], [], [], [], [], []
            errors = []
            for rep, (data, beta_star, rho) in enumerate(datasets):
                try:
                    report = run_algorithm(data, algorithm, cfg)
                except DsppaError as exc:
                    errors.append({"replicate": rep, "error": str(exc)})
                    continue
                m = metric_report(report.beta_hat, beta_star, rho,
                                  iterations=report.iterations, wall_time=report.wall_time_s)
                ae.append(m.ae)
                fp.append(float(m.fp))
                fn.append(float(m.fn))
                iters.append(float(report.iterations))
                times.append(report.wall_time_s)
                per_iter.append(report.wall_time_s / max(report.iterations, 1))
            cells.append({
                "algorithm": algorithm,
                "K": k,
                "replicates": len(ae),
                "AE": _aggregate(ae),
                "FP": _aggregate(fp),
                "FN": _aggregate(fn),
                "iterations": _aggregate(iters),
                "time_s": _aggregate(times),
                "time_per_iter_s": _aggregate(per_iter),
                "errors": errors,
            })

    return {
        "scenario": {
            "n": scenario.n, "p": scenario.p, "rho": scenario.rho,
            "beta_pattern": scenario.beta_pattern, "noise": scenario.noise,
            "seed": scenario.seed,
        },
        "lambda": lam,
        "mu": mu,
        "workers": workers,
        "cells": cells,
    }


def bench_csv_rows(result: dict) -> list[str]:
    """Plot-ready CSV lines (algorithm, K, mean_time, mean_AE)."""
    lines = ["algorithm,K,mean_time_s,mean_AE"]
    for cell in result["cells"]:
        t = cell["time_s"]["mean"]
        a = cell["AE"]["mean"]
        lines.append(f'{cell["algorithm"]},{cell["K"]},{"" if t is None else repr(t)},{"" if a is None else repr(a)}')
    return lines


def write_bench_csv(result: dict, path: Union[str, Path]) -> None:
    Path(path).write_text("\n".join(bench_csv_rows(result)) + "\n")
