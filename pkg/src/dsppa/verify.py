"""Executable convergence-theory checks and a small-scale LP oracle.

The solvers' iterate triples g = (beta, z, u) contract in the norm of a
positive definite matrix H (global step size) or H_K (per-block step
sizes).  This module assembles those matrices, checks the three
monotonicity properties on recorded traces, evaluates constraint
feasibility, verifies partition insensitivity, and solves tiny
instances exactly as linear programs for cross-validation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import linprog

from dsppa.errors import ArgumentError, DimensionError, NumericError
from dsppa.linalg import GramBlocks, Partition
from dsppa.problem import ProblemData
from dsppa.solvers import SolverConfig, solve

# floating-point slack for the monotonicity checks
def _slack(magnitude: float) -> float:
    return 1e-10 * (1.0 + magnitude)


@dataclass(frozen=True)
class ContractionMetric:
    """The 3p x 3p matrix defining the contraction norm, with provenance."""

    matrix: np.ndarray
    provenance: str  # "H" | "H_K"
    etas: tuple[float, ...]
    mu: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def build_contraction_metric(
    gram: GramBlocks,
    mu: float,
    eta_spec: Union[float, Sequence[float]],
) -> ContractionMetric:
    """Assemble H (scalar eta_spec) or H_K (per-block etas) exactly.

    H   = [[eta I, 0, A^T], [0, mu I, -I], [A, -I, (2/mu) I]]
    H_K = [[diag(eta_i I_{p_i}), 0, A_i^T rows], [0, mu I, -I],
           [A_1..A_K, -I, ((K+1)/mu) I]]
    Requires each eta to strictly exceed the mu-scaled top eigenvalue of
    its Gram block (of the full Gram for H).
    """
    if mu <= 0:
        raise ArgumentError(f"mu must be > 0, got {mu}")
    p = gram.p
    A = gram.assemble()
    if np.isscalar(eta_spec):
        eta = float(eta_spec)
        lam_max = float(np.linalg.eigvalsh(mu * (A.T @ A)).max())
        if eta <= lam_max:
            raise ArgumentError(f"eta={eta} must exceed eigen(mu A^T A)={lam_max}")
        top = eta * np.eye(p)
        etas = (eta,)
        corner = (2.0 / mu) * np.eye(p)
        provenance = "H"
    else:
        etas = tuple(float(e) for e in eta_spec)
        if len(etas) != gram.block_count:
            raise DimensionError(f"{len(etas)} etas for {gram.block_count} blocks")
        diag = np.zeros(p)
        for eta_i, block, sl in zip(etas, gram.blocks, gram.partition.slices()):
            lam_i = float(np.linalg.eigvalsh(mu * (block.T @ block)).max())
            if eta_i <= lam_i:
                raise ArgumentError(f"eta={eta_i} must exceed eigen(mu A_i^T A_i)={lam_i}")
            diag[sl] = eta_i
        top = np.diag(diag)
        corner = ((gram.block_count + 1) / mu) * np.eye(p)
        provenance = "H_K"

    Z = np.zeros((p, p))
    I = np.eye(p)
    H = np.block([
        [top, Z, A.T],
        [Z, mu * I, -I],
        [A, -I, corner],
    ])
    return ContractionMetric(H, provenance, etas, mu)


def build_m_matrix(gram: GramBlocks, mu: float, k: Optional[int] = None) -> np.ndarray:
    """The PSD companion matrix: H with eta blocks replaced by mu A_i^T A_i
    (blockwise for the per-block variant, full Gram otherwise)."""
    p = gram.p
    A = gram.assemble()
    Z = np.zeros((p, p))
    I = np.eye(p)
    if k is None or k == 1:
        top = mu * (A.T @ A)
        corner = (2.0 / mu) * I
    else:
        top = np.zeros((p, p))
        for block, sl in zip(gram.blocks, gram.partition.slices()):
            top[sl, sl] = mu * (block.T @ block)
        corner = ((gram.block_count + 1) / mu) * I
    return np.block([[top, Z, A.T], [Z, mu * I, -I], [A, -I, corner]])


def h_norm_sq(metric: ContractionMetric, g: np.ndarray) -> float:
    """g^T H g (squared metric norm); nonnegative, zero only at g = 0."""
    g = np.asarray(g, dtype=np.float64).ravel()
    if g.shape[0] != metric.dim:
        raise DimensionError(f"vector length {g.shape[0]} != metric dim {metric.dim}")
    return float(g @ (metric.matrix @ g))


def _stack(state: tuple) -> np.ndarray:
    beta, z, u = state
    return np.concatenate([np.ravel(beta), np.ravel(z), np.ravel(u)])


def check_contraction(
    snapshots: Sequence[tuple],
    metric: ContractionMetric,
    g_star: tuple,
) -> dict:
    """Check the three contraction properties on a recorded trace.

    (a) ||g^t - g^{t+1}||_H^2 non-increasing, (b) ||g^t - g*||_H^2
    non-increasing, (c) ||g^T - g^{T+1}||_H^2 <= ||g^0 - g*||_H^2 / (T+1)
    at every T, all up to slack 1e-10 (1 + magnitude).
    """
    if len(snapshots) < 2:
        raise ArgumentError("need at least two snapshots")
    gs = [_stack(s) for s in snapshots]
    star = _stack(g_star)
    diffs = [h_norm_sq(metric, gs[t] - gs[t + 1]) for t in range(len(gs) - 1)]
    dists = [h_norm_sq(metric, g - star) for g in gs]

    diff_viol = max(
        (diffs[t + 1] - diffs[t] - _slack(diffs[t]) for t in range(len(diffs) - 1)),
        default=-np.inf,
    )
    dist_viol = max(
        (dists[t + 1] - dists[t] - _slack(dists[t]) for t in range(len(dists) - 1)),
        default=-np.inf,
    )
    rate_viol = max(
        diffs[t] - dists[0] / (t + 1) - _slack(dists[0] / (t + 1))
        for t in range(len(diffs))
    )

    return {
        "metric": metric.provenance,
        "iterations": len(gs) - 1,
        "diff_monotone": bool(diff_viol <= 0),
        "dist_monotone": bool(dist_viol <= 0),
        "rate_bound": bool(rate_viol <= 0),
        "max_diff_violation": float(max(diff_viol, 0.0)),
        "max_dist_violation": float(max(dist_viol, 0.0)),
        "rate_violation": float(max(rate_viol, 0.0)),
        "passed": bool(diff_viol <= 0 and dist_viol <= 0 and rate_viol <= 0),
    }


def kkt_feasibility(
    data: ProblemData,
    beta: np.ndarray,
    lam: float,
    bounds: Optional[np.ndarray] = None,
    weights: Optional[np.ndarray] = None,
) -> tuple[float, float]:
    """Constraint violation and objective at beta.

    Returns (max(0, ||X^T(X beta - y)/n||_inf - lam), ||beta||_1).  With
    per-coordinate bounds the violation is checked coordinate-wise, and
    with weights the objective is sum_j w_j |beta_j|.
    """
    beta = np.asarray(beta, dtype=np.float64).ravel()
    if beta.shape[0] != data.p:
        raise DimensionError(f"beta length {beta.shape[0]} != p={data.p}")
    corr = np.abs(data.X.T @ (data.X @ beta - data.y)) / data.n
    if bounds is not None:
        bounds = np.asarray(bounds, dtype=np.float64).ravel()
        violation = float(max(0.0, np.max(corr - bounds)))
    else:
        violation = float(max(0.0, np.max(corr) - lam))
    if weights is not None:
        obj = float(np.sum(np.asarray(weights, dtype=np.float64) * np.abs(beta)))
    else:
        obj = float(np.sum(np.abs(beta)))
    return violation, obj


def lp_oracle_solve(data: ProblemData, lam: float) -> np.ndarray:
    """Exact small-scale solution via the split-variable linear program.

    min sum(b+ + b-) s.t. -n lam <= A(b+ - b-) - X^T y <= n lam, b± >= 0.
    Intended for instances with at most a couple hundred variables.
    """
    p, n = data.p, data.n
    if 2 * p > 200:
        raise ArgumentError(f"LP oracle limited to 2p <= 200 variables, got p={p}")
    A = data.X.T @ data.X
    c = np.ones(2 * p)
    A_ub = np.vstack([np.hstack([A, -A]), np.hstack([-A, A])])
    b_ub = np.concatenate([n * lam + data.xty, n * lam - data.xty])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=(0, None), method="highs")
    if not res.success:
        raise NumericError(f"LP oracle failed: {res.message}")
    return res.x[:p] - res.x[p:]


def partition_insensitivity_check(
    data: ProblemData,
    config: SolverConfig,
    partitions: Sequence[Union[int, Partition]],
    tol: float = 1e-8,
) -> dict:
    """Compare full (beta, z, u) trajectories across partitions to K=1.

    Reports the max over iterations of the relative l-inf discrepancy
    against the single-block run; passes iff every partition stays
    within tol.
    """
    base_cfg = replace(config, algorithm="pppa", k=1, partition=None, record_state=True)
    base = solve(data, base_cfg)
    ref = [_stack(s) for s in base.snapshots]

    results = {}
    worst = 0.0
    for part in partitions:
        if isinstance(part, Partition):
            cfg = replace(config, algorithm="pppa", partition=part, record_state=True)
            key = "uneven-" + "-".join(str(s) for s in part.sizes)
        else:
            cfg = replace(config, algorithm="pppa", k=int(part), partition=None, record_state=True)
            key = f"K={part}"
        rep = solve(data, cfg)
        cur = [_stack(s) for s in rep.snapshots]
        steps = min(len(ref), len(cur))
        disc = max(
            float(np.max(np.abs(cur[t] - ref[t])) / max(1.0, float(np.max(np.abs(ref[t])))))
            for t in range(steps)
        )
        if len(cur) != len(ref):
            disc = max(disc, np.inf)
        results[key] = disc
        worst = max(worst, disc)

    return {
        "reference_iterations": len(ref) - 1,
        "discrepancies": results,
        "max_discrepancy": worst,
        "tolerance": tol,
        "passed": bool(worst <= tol),
    }


def verify_instance(
    data: ProblemData,
    lam: float,
    mu: float = 1.0,
    k: int = 3,
    max_iter: int = 200,
) -> dict:
    """Run the full check suite on one instance and return a JSON-ready dict."""
    from dsppa.solvers import ippa_solve, pppa_solve

    out = {"n": data.n, "p": data.p, "lambda": lam, "mu": mu, "k": k}

    cfg = SolverConfig(lam=lam, mu=mu, max_iter=max_iter, record_state=True)
    ref_cfg = replace(cfg, tol=1e-10, max_iter=50000, record_state=False)

    rep1 = pppa_solve(data, replace(cfg, k=1))
    star1 = pppa_solve(data, replace(ref_cfg, k=1)).final_state
    gram = GramBlocks(
        (data.X.T @ data.X,),
        Partition.even(data.p, 1),
    )
    metric = build_contraction_metric(gram, mu, rep1.etas[0])
    out["contraction_serial"] = check_contraction(rep1.snapshots, metric, star1)

    rep3 = ippa_solve(data, replace(cfg, k=k))
    star3 = ippa_solve(data, replace(ref_cfg, k=k)).final_state
    from dsppa.linalg import gram_blocks as _gb

    gram_k = _gb(data.X, Partition.even(data.p, k))
    metric_k = build_contraction_metric(gram_k, mu, rep3.etas)
    out["contraction_blocked"] = check_contraction(rep3.snapshots, metric_k, star3)

    out["partition_insensitivity"] = partition_insensitivity_check(
        data, replace(cfg, record_state=False), [2, 3, 4]
    )

    viol, obj = kkt_feasibility(data, rep1.beta_hat, lam)
    out["kkt"] = {"violation": viol, "l1_objective": obj}
    out["passed"] = bool(
        out["contraction_serial"]["passed"]
        and out["contraction_blocked"]["passed"]
        and out["partition_insensitivity"]["passed"]
    )
    return out
