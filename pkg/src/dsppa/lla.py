"""Local linear approximation driver for SCAD and MCP Dantzig selectors.

Each nonconvex fit is a short sequence of weighted l1 solves.  Pass 0
solves the plain l1 problem; every later pass linearizes the penalty at
the current estimate, giving per-coordinate soft-threshold weights
w_j = dP(|beta_j|)/lambda and box bounds n * dP(|beta_j|).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from dsppa.errors import ArgumentError
from dsppa.problem import ProblemData
from dsppa.prox import PenaltySpec, penalty_derivative
from dsppa.solvers import SolveReport, SolverConfig, solve, stopping_check


@dataclass(frozen=True)
class LLAConfig:
    """Outer-loop settings: penalty, pass count, inner solver, warm start."""

    penalty: PenaltySpec
    inner: SolverConfig
    outer_iters: int = 2
    warm_start: bool = True

    def __post_init__(self):
        if self.penalty.kind == "l1":
            raise ArgumentError("LLA needs a SCAD or MCP penalty; plain l1 has no outer loop")
        if self.outer_iters < 1:
            raise ArgumentError(f"outer_iters must be >= 1, got {self.outer_iters}")


def compute_weights(beta_current: np.ndarray, penalty: PenaltySpec, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Weights and box bounds for the linearized problem at beta_current.

    Returns (w, b) with w_j = dP(|beta_j|)/lambda and b_j = n * dP(|beta_j|),
    so b = n * lambda * w always holds.  At beta = 0 every w_j is 1 and the
    linearized problem is exactly the plain l1 Dantzig selector.
    """
    if penalty.kind == "l1":
        raise ArgumentError("weights are only defined for SCAD or MCP")
    deriv = penalty_derivative(penalty, np.abs(np.asarray(beta_current, dtype=np.float64)))
    return deriv / penalty.lam, n * deriv


def lla_solve(data: ProblemData, config: LLAConfig) -> SolveReport:
    """Run the weighted-l1 outer loop and return the final inner report.

    The returned report carries the last pass's solver diagnostics with
    the traces of all passes concatenated and iterations summed.  Stops
    early if the relative change between consecutive outer estimates
    falls below the inner tolerance.
    """
    pen = config.penalty
    base = replace(config.inner, lam=pen.lam, weights=None, bounds=None, init_state=None)
    report = solve(data, base)
    total_iters = report.iterations
    rel_trace = list(report.rel_change_trace)
    feas_trace = list(report.feasibility_trace)
    wall = report.wall_time_s
    precompute = report.precompute_time_s
    beta = report.beta_hat
    passes = [{"beta": beta, "weights": None, "bounds": None, "iterations": report.iterations}]

    for _ in range(config.outer_iters):
        w, b = compute_weights(beta, pen, data.n)
        cfg = replace(
            base,
            weights=w,
            bounds=b,
            init_state=report.final_state if config.warm_start else None,
        )
        report = solve(data, cfg)
        passes.append({"beta": report.beta_hat, "weights": w, "bounds": b, "iterations": report.iterations})
        total_iters += report.iterations
        rel_trace.extend(report.rel_change_trace)
        feas_trace.extend(report.feasibility_trace)
        wall += report.wall_time_s
        precompute += report.precompute_time_s
        outer_change, outer_stop = stopping_check(report.beta_hat, beta, base.tol)
        beta = report.beta_hat
        if outer_stop:
            break

    report.iterations = total_iters
    report.rel_change_trace = rel_trace
    report.feasibility_trace = feas_trace
    report.wall_time_s = wall
    report.precompute_time_s = precompute
    report.algorithm = f"lla-{pen.kind}-{report.algorithm}"
    report.extras["passes"] = passes
    return report
