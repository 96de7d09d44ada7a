"""Scripted desk-scale reproductions of the headline experiment trends.

Each scenario runs a scaled-down version of one experiment family and
asserts a generous band (replicate counts are cut from 100 to 10, so
bands allow 2-3x the reported spreads).  Results land in a directory as
JSON artifacts.

The module also carries the documentation index: every public operation
mapped to the mathematical object it implements.  A test asserts the
index covers the public API, so new operations must document themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from dsppa.baselines import tadmm_solve
from dsppa.datagen import ScenarioSpec, gen_dataset
from dsppa.io import write_json
from dsppa.lla import LLAConfig, lla_solve
from dsppa.metrics import hbic_score, lambda_grid_search, metric_report
from dsppa.problem import ProblemData
from dsppa.prox import PenaltySpec
from dsppa.solvers import SolverConfig, pppa_solve
from dsppa.errors import ArgumentError


@dataclass(frozen=True)
class ReproScenario:
    """One registered scaled experiment: id, dimensions, assertion bands."""

    scenario_id: str
    n: int
    p: int
    replicates: int
    description: str
    runner: Callable[["ReproScenario", int], dict]

    def run(self, seed: int = 0) -> dict:
        return self.runner(self, seed)


def _tune_and_fit(data: ProblemData, grid_points: int = 20, grid_floor: float = 0.01,
                  workers: int = 1) -> tuple[float, "np.ndarray", int]:
    """HBIC-tuned serial fit; returns (lambda, beta_hat, total iterations)."""
    from dsppa.solvers import suggest_mu

    lam_max = data.lambda_max()
    grid = np.geomspace(lam_max, grid_floor * lam_max, grid_points)
    template = SolverConfig(lam=lam_max, mu=suggest_mu(data), workers=workers)
    best_lam, reports = lambda_grid_search(data, template, grid)
    idx = int(np.argmin(np.abs(grid - best_lam)))
    best = reports[idx]
    total_iters = sum(r.iterations for r in reports if r is not None)
    return best_lam, best.beta_hat, total_iters


def run_sparse_recovery(scn: ReproScenario, seed: int = 0) -> dict:
    """Sparse design, rho=0.5: tuned l1 fits should find the support.

    Bands: mean squared l2 error <= 0.5, mean FP <= 2, FN = 0 on every
    replicate, iterations within the cap.
    """
    rows = []
    for rep in range(scn.replicates):
        spec = ScenarioSpec(scn.n, scn.p, 0.5, "sparse8", seed=seed + rep)
        X, y, beta_star, rho = gen_dataset(spec)
        data = ProblemData(X, y)
        lam, beta_hat, iters = _tune_and_fit(data)
        m = metric_report(beta_hat, beta_star, rho)
        rows.append({"replicate": rep, "lambda": lam, "l2_error_sq": m.l2_error_sq,
                     "FP": m.fp, "FN": m.fn, "iterations": iters})
    mean_l2 = float(np.mean([r["l2_error_sq"] for r in rows]))
    mean_fp = float(np.mean([r["FP"] for r in rows]))
    max_fn = max(r["FN"] for r in rows)
    passed = mean_l2 <= 0.5 and mean_fp <= 2.0 and max_fn == 0
    return {"scenario": scn.scenario_id, "rows": rows,
            "mean_l2_error_sq": mean_l2, "mean_FP": mean_fp, "max_FN": max_fn,
            "bands": {"mean_l2_error_sq": 0.5, "mean_FP": 2.0, "max_FN": 0},
            "passed": bool(passed)}


def run_partition_sweep(scn: ReproScenario, seed: int = 0) -> dict:
    """Dense design: AE identical across K for the global-step solver,
    and the three-block baseline stores exactly (2K-1)p auxiliary reals."""
    from dsppa.solvers import suggest_mu

    spec = ScenarioSpec(scn.n, scn.p, 0.5, "dense", seed=seed)
    X, y, beta_star, rho = gen_dataset(spec)
    data = ProblemData(X, y)
    lam = math.sqrt(2.0 * math.log(scn.p) / scn.n)
    mu = suggest_mu(data)

    k_list = (1, 4, 8)
    cells = []
    for k in k_list:
        rep = pppa_solve(data, SolverConfig(lam=lam, mu=mu, k=k))
        m = metric_report(rep.beta_hat, beta_star, rho)
        cells.append({"K": k, "AE": m.ae, "iterations": rep.iterations,
                      "time_s": rep.wall_time_s,
                      "time_per_iter_s": rep.wall_time_s / max(rep.iterations, 1)})
    aes = [c["AE"] for c in cells]
    ae_spread = max(aes) - min(aes)

    tad = tadmm_solve(data, SolverConfig(lam=lam, mu=mu, k=4, max_iter=5))
    aux_ok = tad.aux_size == (2 * 4 - 1) * scn.p

    passed = ae_spread <= 1e-8 and aux_ok
    return {"scenario": scn.scenario_id, "lambda": lam, "cells": cells,
            "ae_spread": ae_spread, "tadmm_aux_size": tad.aux_size,
            "tadmm_aux_expected": (2 * 4 - 1) * scn.p,
            "bands": {"ae_spread": 1e-8}, "passed": bool(passed)}


def run_nonconvex_comparison(scn: ReproScenario, seed: int = 0) -> dict:
    """SCAD/MCP versus the tuned l1 fit on paired replicates.

    Bands: folded-concave FN = 0 with FP no worse than the paired l1 FP
    on at least 8 of 10 replicates, and every outer pass satisfying its
    weighted constraints within 1e-6.
    """
    from dsppa.solvers import suggest_mu

    rows = []
    for rep in range(scn.replicates):
        spec = ScenarioSpec(scn.n, scn.p, 0.5, "sparse8", seed=seed + rep)
        X, y, beta_star, rho = gen_dataset(spec)
        data = ProblemData(X, y)
        mu = suggest_mu(data)
        lam, l1_beta, _ = _tune_and_fit(data)
        l1_m = metric_report(l1_beta, beta_star, rho)

        row = {"replicate": rep, "lambda": lam, "l1_FP": l1_m.fp, "l1_FN": l1_m.fn}
        for kind in ("scad", "mcp"):
            lam_nc = tune_lla_lambda(data, kind, lam, mu)
            pen = PenaltySpec(kind, lam_nc)
            # tight inner tolerance so the weighted constraints hold to 1e-6
            rep_nc = lla_solve(data, LLAConfig(pen, SolverConfig(lam=lam_nc, mu=mu, tol=1e-11, max_iter=40000)))
            m = metric_report(rep_nc.beta_hat, beta_star, rho)
            row[f"{kind}_lambda"] = lam_nc
            row[f"{kind}_FP"] = m.fp
            row[f"{kind}_FN"] = m.fn
            row[f"{kind}_constraint_excess"] = max_weighted_constraint_excess(data, rep_nc)
        rows.append(row)

    verdict = {}
    for kind in ("scad", "mcp"):
        wins = sum(1 for r in rows if r[f"{kind}_FN"] == 0 and r[f"{kind}_FP"] <= r["l1_FP"])
        excess = max(r[f"{kind}_constraint_excess"] for r in rows)
        verdict[kind] = {"wins": wins, "needed": math.ceil(0.8 * scn.replicates),
                         "max_constraint_excess": excess,
                         "passed": bool(wins >= math.ceil(0.8 * scn.replicates) and excess <= 1e-6)}
    passed = all(v["passed"] for v in verdict.values())
    return {"scenario": scn.scenario_id, "rows": rows, "verdict": verdict, "passed": bool(passed)}


def tune_lla_lambda(data: ProblemData, kind: str, lam_l1: float, mu: float,
                    factors: Sequence[float] = (1.0, 1.4, 2.0, 2.8, 4.0)) -> float:
    """HBIC pick for a folded-concave fit over multiples of the l1 lambda.

    The l1-tuned lambda undershoots for the weighted problem (unpenalized
    coordinates tighten the residual correlations), so candidates scan
    upward from it.  Cheap moderate-tolerance fits are enough for scoring.
    """
    best_lam, best_score = lam_l1, math.inf
    for f in factors:
        lam = float(f * lam_l1)
        fit = lla_solve(data, LLAConfig(PenaltySpec(kind, lam), SolverConfig(lam=lam, mu=mu, tol=1e-6, max_iter=3000)))
        score = hbic_score(data, fit.beta_hat)
        if score < best_score:
            best_score, best_lam = score, lam
    return best_lam


def max_weighted_constraint_excess(data: ProblemData, report) -> float:
    """Largest violation of |X^T(X beta - y)/n|_j <= bound_j/n over the
    weighted outer passes of an LLA run (0 when all constraints hold).

    The plain l1 initialization pass carries no weights and is excluded;
    only the weighted solves are checked against their own bounds.
    """
    passes = report.extras.get("passes")
    if not passes:
        raise ArgumentError("report carries no outer-pass record")
    worst = 0.0
    for p in passes:
        if p["bounds"] is None:
            continue
        corr = np.abs(data.X.T @ (data.X @ p["beta"] - data.y)) / data.n
        worst = max(worst, float(np.max(corr - p["bounds"] / data.n)))
    return max(worst, 0.0)


def _registry() -> dict[str, ReproScenario]:
    scenarios = [
        ReproScenario("table1", 500, 1000, 10,
                      "sparse recovery accuracy at desk scale", run_sparse_recovery),
        ReproScenario("table3", 720, 2560, 1,
                      "partition insensitivity and baseline memory", run_partition_sweep),
        ReproScenario("table7", 300, 1000, 10,
                      "folded-concave selection versus l1", run_nonconvex_comparison),
    ]
    return {s.scenario_id: s for s in scenarios}


SCENARIOS = _registry()


def run_repro(scenario_id: str, results_dir: Optional[Union[str, Path]] = None, seed: int = 0) -> dict:
    """Run a registered scenario, optionally writing its JSON artifact."""
    if scenario_id not in SCENARIOS:
        raise ArgumentError(f"unknown scenario {scenario_id!r}; have {sorted(SCENARIOS)}")
    result = SCENARIOS[scenario_id].run(seed)
    if results_dir is not None:
        out = Path(results_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(result, out / f"{scenario_id}.json")
    return result


# One line per public operation: the mathematical object it implements.
OPERATION_INDEX = {
    "problem.ProblemData": "holds (X, y) and caches X^T y for the constraint A beta - z = X^T y",
    "problem.ProblemData.lambda_max": "||X^T y||_inf / n, smallest lambda with beta = 0 feasible",
    "linalg.Partition": "column-block sizes (p_1, ..., p_K) with sum p_i = p",
    "linalg.GramBlocks": "column blocks A_i = X^T X_i of the Gram matrix A = X^T X",
    "linalg.gram_blocks": "computes A_i = X^T X_i per block",
    "linalg.blocked_matvec": "sum_i A_i beta_i accumulated in ascending block order",
    "linalg.gram_quad_operator": "v -> mu A^T (A v) assembled from blocks",
    "linalg.block_quad_operator": "v -> mu A_i^T (A_i v) for one block",
    "linalg.power_method_max_eigen": "largest eigenvalue of a symmetric PSD operator by power iteration",
    "prox.PenaltySpec": "penalty choice l1 / SCAD (a > 2) / MCP (a > 1) at level lambda",
    "prox.soft_threshold": "prox of tau ||.||_1: sign(v) max(|v| - tau, 0)",
    "prox.weighted_soft_threshold": "coordinate-wise soft threshold with per-coordinate tau_j",
    "prox.project_linf_box": "Euclidean projection onto {z : |z_j| <= bound_j}",
    "prox.penalty_derivative": "dP_{a,lambda}(t)/dt for l1, SCAD, MCP at t = |beta|",
    "solvers.SolverConfig": "solver settings: lambda, mu, tol, block count, step rule",
    "solvers.SolveReport": "estimate, traces, timing split, step sizes, state sizes",
    "solvers.stopping_check": "relative change ||b' - b||_2 / max(||b'||_2, 1) vs tol",
    "solvers.beta_block_update": "beta_i <- soft(beta_i + A_i^T u / eta_i, w_i / eta_i)",
    "solvers.z_update": "z <- clamp(z - u/mu, +/- bound)",
    "solvers.dual_update": "u <- u - (mu/d)(2 r_new - r_old), d = 2 or K+1",
    "solvers.suggest_mu": "mu = (target_eta - 1) / eigen(A^T A), keeping the step parameter moderate",
    "solvers.ppa_solve": "serial proximal point iteration with global eta = eigen(mu A^T A) + 1",
    "solvers.pppa_solve": "column-partitioned iteration, same global eta, partition-insensitive",
    "solvers.ippa_solve": "per-block eta_i = eigen(mu A_i^T A_i) + 1 and dual divisor K+1",
    "solvers.solve": "algorithm dispatch over the three proximal point variants",
    "lla.LLAConfig": "outer-loop settings for the local linear approximation driver",
    "lla.compute_weights": "w_j = dP(|beta_j|)/lambda and bounds n dP(|beta_j|)",
    "lla.lla_solve": "plain l1 pass then L weighted passes linearizing SCAD/MCP",
    "baselines.TadmmState": "beta blocks, (K-1)p slack, Kp duals of the three-block scheme",
    "baselines.ladmm_solve": "linearized ADMM: soft step, box clamp, ascent u <- u + mu r",
    "baselines.tadmm_solve": "seven-step three-block parallel ADMM with per-block eta_i",
    "verify.ContractionMetric": "positive definite H or H_K defining the contraction norm",
    "verify.build_contraction_metric": "H = [[eta I,0,A^T],[0,mu I,-I],[A,-I,(2/mu)I]] and the per-block analogue",
    "verify.build_m_matrix": "PSD companion with mu A^T A (or blockwise) in place of eta I",
    "verify.h_norm_sq": "quadratic form g^T H g",
    "verify.check_contraction": "monotone ||g^t - g^{t+1}||_H^2, ||g^t - g*||_H^2, and the 1/(T+1) rate bound",
    "verify.kkt_feasibility": "max(0, ||X^T(X beta - y)/n||_inf - lambda) and the (weighted) l1 objective",
    "verify.lp_oracle_solve": "split-variable linear program: min 1^T(b+ + b-) s.t. |A(b+ - b-) - X^T y| <= n lambda",
    "verify.partition_insensitivity_check": "max_t relative l-inf gap of (beta, z, u) trajectories across partitions",
    "verify.verify_instance": "bundled contraction, insensitivity, and feasibility checks",
    "datagen.ScenarioSpec": "synthetic scenario: (n, p, rho, signal pattern, noise kind, seed)",
    "datagen.gen_ar1_design": "rows N(0, Sigma), Sigma_jj' = rho^|j-j'| via the AR(1) recursion",
    "datagen.gen_sparse_beta": "eight fixed values {3,1.5,10,4,2,5,2.5,4.5} on a random support",
    "datagen.gen_dense_beta": "10 of 80 segments active, beta_j = xi_j (1 + |a_j|)",
    "datagen.gen_noise": "i.i.d. Gaussian / mixed normal / Student t / Cauchy draws",
    "datagen.gen_dataset": "y = X beta* + eps composed from the seeded generators",
    "metrics.MetricReport": "l1 / squared l2 / model errors, FP, FN, AE, iterations, time",
    "metrics.ar1_quadratic_form": "v^T Sigma v in O(p) via s_j = rho (s_{j-1} + v_{j-1})",
    "metrics.estimation_errors": "||d||_1, ||d||_2^2, d^T Sigma d for d = beta_hat - beta*",
    "metrics.selection_counts": "FP/FN at a zero threshold and AE = ||d||_1 / p",
    "metrics.metric_report": "bundles estimation errors and selection counts",
    "metrics.hbic_score": "log(RSS/n) + |A_hat| log(log n) log(p) / n",
    "metrics.default_lambda_grid": "50 log-spaced points on [0.01 lambda_max, lambda_max]",
    "metrics.lambda_grid_search": "warm-started descending-lambda path scored by HBIC",
    "io.read_matrix": "DSM1 binary / CSV matrix reader with magic-byte dispatch",
    "io.write_matrix": "DSM1 binary / CSV matrix writer",
    "io.read_matrix_dsm1": "DSM1 binary reader",
    "io.write_matrix_dsm1": "DSM1 binary writer",
    "io.read_matrix_csv": "CSV matrix reader with single-header auto-detection",
    "io.report_dict": "flattens a solve report to the documented JSON schema",
    "io.write_report": "writes the run-report JSON",
    "io.write_json": "JSON writer with sorted keys",
    "io.read_config": "key=value config parser",
    "bench.default_lambda": "sqrt(2 log p / n)",
    "bench.run_algorithm": "dispatch across the five solver entry points",
    "bench.run_bench": "replicated (algorithm, K) sweep with per-cell aggregation",
    "bench.bench_csv_rows": "plot-ready (algorithm, K, mean_time, mean_AE) lines",
    "bench.write_bench_csv": "writes the plot-ready CSV",
    "repro.ReproScenario": "registered scaled experiment with assertion bands",
    "repro.run_repro": "executes a registered scenario and stores its artifact",
    "repro.run_sparse_recovery": "sparse design accuracy bands at desk scale",
    "repro.run_partition_sweep": "AE constancy across K and baseline memory check",
    "repro.run_nonconvex_comparison": "SCAD/MCP versus paired l1 selection comparison",
    "repro.tune_lla_lambda": "HBIC pick over multiples of the l1 lambda for SCAD/MCP fits",
    "repro.max_weighted_constraint_excess": "worst weighted-constraint violation over outer passes",
}
