"""Evaluation metrics and HBIC-style lambda selection.

Model error under the AR(1) covariance is computed by the O(p)
recursion s_j = rho (s_{j-1} + v_{j-1}) so the p x p covariance is never
materialized: v^T Sigma v = sum_j v_j (v_j + 2 s_j).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from dsppa.errors import DimensionError, ArgumentError, DsppaError, TuningError
from dsppa.problem import ProblemData
from dsppa.solvers import SolveReport, SolverConfig, solve

ZERO_TOL = 1e-4


@dataclass
class MetricReport:
    """Per-fit quality numbers used in the benchmark tables."""

    l1_error: float
    l2_error_sq: float
    model_error: float
    fp: int
    fn: int
    ae: float
    iterations: int = 0
    wall_time: float = 0.0

    def as_dict(self) -> dict:
        return {
            "l1_error": self.l1_error,
            "l2_error_sq": self.l2_error_sq,
            "model_error": self.model_error,
            "FP": self.fp,
            "FN": self.fn,
            "AE": self.ae,
            "iterations": self.iterations,
            "wall_time": self.wall_time,
        }


def ar1_quadratic_form(v: np.ndarray, rho: float) -> float:
    """v^T Sigma v for Sigma_jj' = rho^|j-j'| in O(p) time and O(1) memory."""
    if not 0.0 <= rho < 1.0:
        raise ArgumentError(f"need 0 <= rho < 1, got {rho}")
    v = np.asarray(v, dtype=np.float64)
    total = 0.0
    s = 0.0  # s_j = sum_{i<j} rho^(j-i) v_i
    for vj in v:
        total += vj * (vj + 2.0 * s)
        s = rho * (s + vj)
    return float(total)


def estimation_errors(beta_hat: np.ndarray, beta_star: np.ndarray, rho: float) -> tuple[float, float, float]:
    """(l1, squared l2, model) errors; model error uses the AR(1) form."""
    beta_hat = np.asarray(beta_hat, dtype=np.float64)
    beta_star = np.asarray(beta_star, dtype=np.float64)
    if beta_hat.shape != beta_star.shape:
        raise DimensionError(f"shapes differ: {beta_hat.shape} vs {beta_star.shape}")
    d = beta_hat - beta_star
    l1 = float(np.sum(np.abs(d)))
    l2_sq = float(d @ d)
    model = l2_sq if rho == 0.0 else ar1_quadratic_form(d, rho)
    return l1, l2_sq, model


def selection_counts(beta_hat: np.ndarray, beta_star: np.ndarray, zero_tol: float = ZERO_TOL) -> tuple[int, int, float]:
    """(FP, FN, AE): false/missed selections at zero_tol and mean absolute error."""
    if zero_tol <= 0:
        raise ArgumentError(f"zero_tol must be > 0, got {zero_tol}")
    beta_hat = np.asarray(beta_hat, dtype=np.float64)
    beta_star = np.asarray(beta_star, dtype=np.float64)
    if beta_hat.shape != beta_star.shape:
        raise DimensionError(f"shapes differ: {beta_hat.shape} vs {beta_star.shape}")
    selected = np.abs(beta_hat) > zero_tol
    truth = beta_star != 0.0
    fp = int(np.count_nonzero(selected & ~truth))
    fn = int(np.count_nonzero(~selected & truth))
    ae = float(np.sum(np.abs(beta_hat - beta_star)) / beta_hat.size)
    return fp, fn, ae


def metric_report(
    beta_hat: np.ndarray,
    beta_star: np.ndarray,
    rho: float,
    zero_tol: float = ZERO_TOL,
    iterations: int = 0,
    wall_time: float = 0.0,
) -> MetricReport:
    l1, l2_sq, model = estimation_errors(beta_hat, beta_star, rho)
    fp, fn, ae = selection_counts(beta_hat, beta_star, zero_tol)
    return MetricReport(l1, l2_sq, model, fp, fn, ae, iterations, wall_time)


def hbic_score(data: ProblemData, beta_hat: np.ndarray, zero_tol: float = ZERO_TOL) -> float:
    """log(RSS/n) + |A_hat| log(log n) log(p) / n; -inf on a perfect fit."""
    beta_hat = np.asarray(beta_hat, dtype=np.float64)
    if beta_hat.shape != (data.p,):
        raise DimensionError(f"beta length {beta_hat.shape[0]} != p={data.p}")
    resid = data.y - data.X @ beta_hat
    rss = float(resid @ resid)
    if rss == 0.0:
        return -math.inf
    n, p = data.n, data.p
    size = int(np.count_nonzero(np.abs(beta_hat) > zero_tol))
    return math.log(rss / n) + size * math.log(math.log(n)) * math.log(p) / n


def default_lambda_grid(data: ProblemData, num: int = 50) -> np.ndarray:
    """num log-spaced points from lambda_max down to 0.01 lambda_max."""
    lam_max = data.lambda_max()
    return np.geomspace(lam_max, 0.01 * lam_max, num)


def lambda_grid_search(
    data: ProblemData,
    template: SolverConfig,
    grid: np.ndarray,
    zero_tol: float = ZERO_TOL,
    warm_start: bool = True,
) -> tuple[float, list[SolveReport | None]]:
    """Solve along a descending lambda grid and pick the HBIC argmin.

    Consecutive solves warm start from the previous state.  Ties go to
    the larger lambda (the sparser fit).  The returned report list is
    aligned with the input grid; failed solves leave a None entry.
    """
    grid = np.asarray(grid, dtype=np.float64).ravel()
    if grid.size == 0:
        raise ArgumentError("lambda grid is empty")
    order = np.argsort(grid)[::-1]
    reports: list[SolveReport | None] = [None] * grid.size
    scores = np.full(grid.size, np.inf)
    state = None
    failures = 0
    for idx in order:
        cfg = replace(template, lam=float(grid[idx]), init_state=state if warm_start else None)
        try:
            rep = solve(data, cfg)
        except DsppaError:
            failures += 1
            continue
        state = rep.final_state
        reports[idx] = rep
        scores[idx] = hbic_score(data, rep.beta_hat, zero_tol)
    if failures == grid.size:
        raise TuningError("every solve on the lambda grid failed")
    best_score = scores.min()
    # among score ties, prefer the largest lambda
    tied = np.flatnonzero(scores <= best_score)
    best_idx = tied[np.argmax(grid[tied])]
    return float(grid[best_idx]), reports
