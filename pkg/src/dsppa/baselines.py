"""Linearized ADMM and three-block parallel ADMM reference solvers.

Both solve the same constrained form as the proximal point solvers
(A beta - z = X^T y with z box-constrained) but carry more iterate state:
the three-block scheme keeps K-1 slack vectors and K dual vectors of
length p, versus a single dual vector for the proximal point family.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from dsppa.errors import DivergedError
from dsppa.linalg import Partition, block_quad_operator, gram_blocks, gram_quad_operator, power_method_max_eigen
from dsppa.problem import ProblemData
from dsppa.prox import project_linf_box, soft_threshold, weighted_soft_threshold
from dsppa.solvers import DIVERGENCE_LIMIT, SolveReport, SolverConfig, stopping_check


@dataclass
class TadmmState:
    """Iterate state of the three-block scheme: beta blocks, slack, z, duals."""

    beta_blocks: list[np.ndarray]
    omega: list[np.ndarray]  # slack vectors for blocks 2..K, each length p
    z: np.ndarray
    duals: list[np.ndarray]  # u_1..u_K, each length p

    @property
    def aux_size(self) -> int:
        """Stored slack + dual reals: (2K - 1) * p."""
        return sum(w.size for w in self.omega) + sum(u.size for u in self.duals)


def ladmm_solve(data: ProblemData, config: SolverConfig) -> SolveReport:
    """Linearized ADMM for the Dantzig selector.

    beta <- soft(beta - (mu/eta) A^T (A beta - z - X^T y + u/mu), 1/eta)
    z    <- clamp(A beta - X^T y + u/mu, +/- n lambda)
    u    <- u + mu (A beta - z - X^T y)
    with eta = eigen(mu A^T A) + 1.
    """
    cfg = config
    t0 = time.perf_counter()
    p, n = data.p, data.n
    part = Partition.even(p, 1)
    gram = gram_blocks(data.X, part)
    A = gram.blocks[0]
    eta = power_method_max_eigen(gram_quad_operator(gram, cfg.mu), p, tol=cfg.power_tol, max_iter=cfg.power_max_iter) + 1.0

    bound = cfg.bounds if cfg.bounds is not None else np.full(p, n * cfg.lam)
    weights = cfg.weights

    if cfg.init_state is not None:
        beta, z, u = (np.array(v, dtype=np.float64) for v in cfg.init_state)
    else:
        beta = np.full(p, cfg.init_value)
        z = np.full(p, cfg.init_value)
        u = np.full(p, cfg.init_value)
    z = project_linf_box(z, bound)
    precompute_time = time.perf_counter() - t0

    rel_trace: list[float] = []
    feas_trace: list[float] = []
    snapshots = [(beta.copy(), z.copy(), u.copy())] if cfg.record_state else None

    converged = False
    it = 0
    t_loop = time.perf_counter()
    for it in range(1, cfg.max_iter + 1):
        grad = A @ (A @ beta - z - data.xty + u / cfg.mu)
        v = beta - (cfg.mu / eta) * grad
        if weights is None:
            beta_new = soft_threshold(v, 1.0 / eta)
        else:
            beta_new = weighted_soft_threshold(v, weights / eta)
        a_beta = A @ beta_new
        z = project_linf_box(a_beta - data.xty + u / cfg.mu, bound)
        r = a_beta - z - data.xty
        u_prev = u
        u = u + cfg.mu * r

        value, stop = stopping_check(beta_new, beta, cfg.tol)
        # a settled dual guards against stopping while beta sits pinned
        # at zero during the warm-up iterations
        _, u_stop = stopping_check(u, u_prev, cfg.tol)
        rel_trace.append(value)
        feas_trace.append(float(np.max(np.abs(r))))
        beta = beta_new
        if snapshots is not None:
            snapshots.append((beta.copy(), z.copy(), u.copy()))
        if not np.isfinite(value) or np.linalg.norm(beta) > DIVERGENCE_LIMIT:
            raise DivergedError(f"iterate norm exceeded {DIVERGENCE_LIMIT:g} at iteration {it}")
        if stop and u_stop and it >= 2:
            converged = True
            break
    wall_time = time.perf_counter() - t_loop

    return SolveReport(
        beta_hat=beta,
        iterations=it,
        converged=converged,
        termination="tol-reached" if converged else "max-iter",
        rel_change_trace=rel_trace,
        feasibility_trace=feas_trace,
        wall_time_s=wall_time,
        precompute_time_s=precompute_time,
        algorithm="ladmm",
        lam=cfg.lam,
        mu=cfg.mu,
        k=1,
        etas=(eta,),
        final_state=(beta.copy(), z.copy(), u.copy()),
        snapshots=snapshots,
        dual_size=p,
        aux_size=0,
    )


def tadmm_solve(data: ProblemData, config: SolverConfig) -> SolveReport:
    """Three-block parallel ADMM with K column blocks (K=1 falls back to LADMM).

    Per iteration, in order: linearized beta_1 and beta_i steps, slack
    half-step, z projection, slack full-step, then the K dual steps.
    """
    cfg = config
    if cfg.partition is None and cfg.k == 1:
        return ladmm_solve(data, replace(cfg, algorithm="ppa"))
    t0 = time.perf_counter()
    p, n = data.p, data.n
    part = cfg.partition if cfg.partition is not None else Partition.even(p, cfg.k)
    if part.block_count == 1:
        return ladmm_solve(data, replace(cfg, algorithm="ppa", partition=None, k=1))
    k = part.block_count
    gram = gram_blocks(data.X, part, workers=cfg.workers)
    etas = [
        power_method_max_eigen(block_quad_operator(gram.blocks[i], cfg.mu), part.sizes[i], tol=cfg.power_tol, max_iter=cfg.power_max_iter) + 1.0
        for i in range(k)
    ]

    bound = cfg.bounds if cfg.bounds is not None else np.full(p, n * cfg.lam)
    weights = part.split(cfg.weights) if cfg.weights is not None else None

    c = cfg.init_value
    if cfg.init_state is not None:
        beta0, z0, u0 = (np.array(v, dtype=np.float64) for v in cfg.init_state)
        state = TadmmState(part.split(beta0.copy()), [np.full(p, c) for _ in range(k - 1)], z0, [u0.copy() for _ in range(k)])
    else:
        state = TadmmState(
            [np.full(s, c) for s in part.sizes],
            [np.full(p, c) for _ in range(k - 1)],
            np.full(p, c),
            [np.full(p, c) for _ in range(k)],
        )
    state.z = project_linf_box(state.z, bound)
    precompute_time = time.perf_counter() - t0

    rel_trace: list[float] = []
    feas_trace: list[float] = []
    beta = np.concatenate(state.beta_blocks)
    snapshots = None
    if cfg.record_state:
        snapshots = [(beta.copy(), state.z.copy(), state.duals[0].copy())]

    converged = False
    it = 0
    t_loop = time.perf_counter()
    for it in range(1, cfg.max_iter + 1):
        blocks = gram.blocks
        omega_sum = np.sum(state.omega, axis=0)
        new_blocks: list[np.ndarray] = []
        # block 1 couples to z and the slack sum; blocks 2..K couple to their slack
        for i in range(k):
            bi = state.beta_blocks[i]
            if i == 0:
                resid = blocks[0] @ bi + omega_sum - state.z - data.xty + state.duals[0] / cfg.mu
            else:
                resid = blocks[i] @ bi - state.omega[i - 1] + state.duals[i] / cfg.mu
            v = bi - (cfg.mu / etas[i]) * (blocks[i].T @ resid)
            if weights is None:
                new_blocks.append(soft_threshold(v, 1.0 / etas[i]))
            else:
                new_blocks.append(weighted_soft_threshold(v, weights[i] / etas[i]))

        block_prods = [blocks[i] @ new_blocks[i] for i in range(k)]
        a_beta = block_prods[0].copy()
        for prod in block_prods[1:]:
            a_beta += prod

        omega_half = [(data.xty + state.z + k * block_prods[i] - a_beta) / k for i in range(1, k)]
        z_new = project_linf_box(block_prods[0] + np.sum(omega_half, axis=0) - data.xty + state.duals[0] / cfg.mu, bound)
        omega_new = [(data.xty + z_new + k * block_prods[i] - a_beta) / k for i in range(1, k)]
        omega_new_sum = np.sum(omega_new, axis=0)

        r1 = block_prods[0] + omega_new_sum - z_new - data.xty
        duals_prev = np.concatenate(state.duals)
        state.duals[0] = state.duals[0] + cfg.mu * r1
        for i in range(1, k):
            state.duals[i] = state.duals[i] + cfg.mu * (block_prods[i] - omega_new[i - 1])

        beta_new = np.concatenate(new_blocks)
        value, stop = stopping_check(beta_new, beta, cfg.tol)
        # settled duals guard against stopping while beta sits pinned at
        # zero during the warm-up iterations
        _, u_stop = stopping_check(np.concatenate(state.duals), duals_prev, cfg.tol)
        rel_trace.append(value)
        feas_trace.append(float(np.max(np.abs(a_beta - z_new - data.xty))))

        state.beta_blocks = new_blocks
        state.omega = omega_new
        state.z = z_new
        beta = beta_new
        if snapshots is not None:
            snapshots.append((beta.copy(), state.z.copy(), state.duals[0].copy()))
        if not np.isfinite(value) or np.linalg.norm(beta) > DIVERGENCE_LIMIT:
            raise DivergedError(f"iterate norm exceeded {DIVERGENCE_LIMIT:g} at iteration {it}")
        if stop and u_stop and it >= 2:
            converged = True
            break
    wall_time = time.perf_counter() - t_loop

    return SolveReport(
        beta_hat=beta,
        iterations=it,
        converged=converged,
        termination="tol-reached" if converged else "max-iter",
        rel_change_trace=rel_trace,
        feasibility_trace=feas_trace,
        wall_time_s=wall_time,
        precompute_time_s=precompute_time,
        algorithm="tadmm",
        lam=cfg.lam,
        mu=cfg.mu,
        k=k,
        etas=tuple(etas),
        final_state=(beta.copy(), state.z.copy(), state.duals[0].copy()),
        snapshots=snapshots,
        dual_size=k * p,
        aux_size=state.aux_size,
    )
