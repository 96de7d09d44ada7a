import numpy as np
import pytest

from dsppa.errors import ArgumentError, DimensionError
from dsppa.linalg import Partition
from dsppa.solvers import (
    SolverConfig,
    beta_block_update,
    dual_update,
    ippa_solve,
    ppa_solve,
    pppa_solve,
    solve,
    stopping_check,
    suggest_mu,
    z_update,
)
from conftest import make_instance


class TestConfig:
    def test_validation(self):
        for kwargs in [dict(lam=-1.0), dict(lam=1.0, mu=0.0), dict(lam=1.0, tol=0.0),
                       dict(lam=1.0, k=0), dict(lam=1.0, algorithm="sgd"),
                       dict(lam=1.0, weights=np.array([-1.0]))]:
            with pytest.raises(ArgumentError):
                SolverConfig(**kwargs)

    def test_algorithm_normalized(self):
        assert SolverConfig(lam=1.0, algorithm="PPA").algorithm == "ppa"


class TestUpdateOps:
    def test_stopping_check(self):
        value, stop = stopping_check(np.array([1.0, 0.0]), np.array([1.0, 0.0]), 1e-4)
        assert value == 0.0 and stop
        value, stop = stopping_check(np.array([0.1, 0.0]), np.array([0.0, 0.0]), 1e-4)
        # denominator floors at 1 for small iterates
        assert value == pytest.approx(0.1) and not stop
        with pytest.raises(DimensionError):
            stopping_check(np.zeros(2), np.zeros(3), 1e-4)

    def test_beta_block_update_grid_oracle(self):
        # the update minimizes |b| + (eta/2) ||b - (beta + A^T u / eta)||^2
        rng = np.random.default_rng(0)
        for _ in range(10):
            A = rng.standard_normal((4, 2))
            beta = rng.standard_normal(2)
            u = rng.standard_normal(4)
            eta = float(rng.uniform(1.0, 5.0))
            out = beta_block_update(beta, A, u, eta)
            v = beta + A.T @ u / eta
            grid = np.linspace(-8, 8, 32001)
            for j in range(2):
                obj = np.abs(grid) + 0.5 * eta * (grid - v[j]) ** 2
                assert abs(out[j] - grid[np.argmin(obj)]) < 6e-4

    def test_beta_block_update_weighted(self):
        A = np.eye(2)
        u = np.array([4.0, 4.0])
        out = beta_block_update(np.zeros(2), A, u, 2.0, weight=np.array([1.0, 6.0]))
        # v = (2, 2); thresholds 0.5 and 3.0
        np.testing.assert_allclose(out, [1.5, 0.0])

    def test_beta_block_update_bad_eta(self):
        with pytest.raises(ArgumentError):
            beta_block_update(np.zeros(2), np.eye(2), np.zeros(2), 0.0)

    def test_z_update_is_box_projection(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            z = rng.standard_normal(3)
            u = rng.standard_normal(3)
            mu = float(rng.uniform(0.5, 2.0))
            bound = float(rng.uniform(0.1, 1.0))
            out = z_update(z, u, mu, bound)
            target = z - u / mu
            np.testing.assert_allclose(out, np.clip(target, -bound, bound), atol=1e-12)

    def test_dual_update_formula(self):
        u = np.array([1.0, 2.0])
        r_new = np.array([0.5, -0.5])
        r_old = np.array([0.1, 0.1])
        out = dual_update(u, r_new, r_old, mu=2.0, coeff_divisor=2.0)
        np.testing.assert_allclose(out, u - 1.0 * (2 * r_new - r_old))
        out = dual_update(u, r_new, r_old, mu=2.0, coeff_divisor=4.0)
        np.testing.assert_allclose(out, u - 0.5 * (2 * r_new - r_old))
        with pytest.raises(DimensionError):
            dual_update(u, np.zeros(3), r_old, 1.0, 2.0)


class TestSuggestMu:
    def test_matches_dense_eigensolver(self):
        data, _ = make_instance(5, 30, 12, scale=1.0)
        A = data.X.T @ data.X
        truth = float(np.linalg.eigvalsh(A.T @ A).max())
        mu = suggest_mu(data, target_eta=10.0)
        # power method runs at its default moderate tolerance
        assert mu == pytest.approx(9.0 / truth, rel=1e-2)

    def test_rejects_bad_target(self):
        data, _ = make_instance(5, 10, 4)
        with pytest.raises(ArgumentError):
            suggest_mu(data, target_eta=1.0)


class TestSolvers:
    def test_lambda_above_max_gives_zero(self):
        data, _ = make_instance(2, 20, 8)
        lam = 1.1 * data.lambda_max()
        rep = ppa_solve(data, SolverConfig(lam=lam, tol=1e-10, max_iter=20000))
        assert np.max(np.abs(rep.beta_hat)) < 1e-6

    def test_k1_variants_identical(self):
        data, _ = make_instance(3, 20, 10)
        cfg = SolverConfig(lam=0.5 * data.lambda_max(), max_iter=80)
        b_ppa = ppa_solve(data, cfg).beta_hat
        b_pppa = pppa_solve(data, cfg).beta_hat
        b_ippa = ippa_solve(data, cfg).beta_hat
        np.testing.assert_array_equal(b_ppa, b_pppa)
        np.testing.assert_array_equal(b_ppa, b_ippa)

    def test_z_stays_in_box(self):
        data, _ = make_instance(4, 20, 10)
        lam = 0.4 * data.lambda_max()
        cfg = SolverConfig(lam=lam, max_iter=60, record_state=True)
        rep = ppa_solve(data, cfg)
        bound = data.n * lam
        for _, z, _ in rep.snapshots:
            assert np.max(np.abs(z)) <= bound + 1e-12

    def test_converged_report_fields(self):
        data, _ = make_instance(6, 25, 10)
        rep = ppa_solve(data, SolverConfig(lam=0.5 * data.lambda_max(), tol=1e-6, max_iter=20000))
        assert rep.converged and rep.termination == "tol-reached"
        assert rep.iterations == len(rep.rel_change_trace)
        assert rep.rel_change_trace[-1] <= 1e-6
        assert rep.dual_size == data.p and rep.aux_size == 0
        beta, z, u = rep.final_state
        np.testing.assert_array_equal(beta, rep.beta_hat)

    def test_no_spurious_first_iteration_stop(self):
        # the dual starts near zero, so beta barely moves on pass one;
        # a loose tolerance must not terminate there
        data, _ = make_instance(8, 30, 12)
        rep = ppa_solve(data, SolverConfig(lam=0.5 * data.lambda_max(), tol=1e-2, max_iter=400))
        assert rep.iterations >= 2

    def test_warm_start_short_circuits(self):
        data, _ = make_instance(9, 25, 10)
        cfg = SolverConfig(lam=0.5 * data.lambda_max(), tol=1e-8, max_iter=20000)
        rep = ppa_solve(data, cfg)
        from dataclasses import replace
        warm = ppa_solve(data, replace(cfg, init_state=rep.final_state))
        assert warm.iterations <= max(5, rep.iterations // 10)
        np.testing.assert_allclose(warm.beta_hat, rep.beta_hat, atol=1e-5, rtol=1e-4)

    def test_uneven_partition_accepted(self):
        data, _ = make_instance(10, 20, 9)
        cfg = SolverConfig(lam=0.5 * data.lambda_max(), max_iter=40,
                           partition=Partition((1, 5, 3)), algorithm="pppa")
        rep = solve(data, cfg)
        assert rep.k == 3

    def test_partition_total_mismatch(self):
        data, _ = make_instance(10, 20, 9)
        cfg = SolverConfig(lam=1.0, partition=Partition((4, 4)), algorithm="pppa")
        with pytest.raises(DimensionError):
            solve(data, cfg)

    def test_worker_count_bitwise_identical(self):
        data, _ = make_instance(11, 30, 16)
        lam = 0.4 * data.lambda_max()
        base = None
        for workers in (1, 2, 4):
            cfg = SolverConfig(lam=lam, k=4, max_iter=60, workers=workers, algorithm="pppa")
            beta = solve(data, cfg).beta_hat
            if base is None:
                base = beta
            else:
                np.testing.assert_array_equal(beta, base)

    def test_ippa_k1_uses_divisor_two(self):
        # at K=1 the per-block eta equals the global eta and the dual
        # divisor K+1 equals 2, so the trajectories must coincide exactly
        data, _ = make_instance(12, 15, 6)
        cfg = SolverConfig(lam=0.5 * data.lambda_max(), max_iter=30, record_state=True)
        s1 = ippa_solve(data, cfg).snapshots
        s2 = ppa_solve(data, cfg).snapshots
        for (b1, z1, u1), (b2, z2, u2) in zip(s1, s2):
            np.testing.assert_array_equal(b1, b2)
            np.testing.assert_array_equal(u1, u2)
