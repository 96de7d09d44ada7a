import numpy as np
import pytest

from conftest import make_instance
from dsppa.errors import ArgumentError, DimensionError
from dsppa.linalg import Partition, gram_blocks
from dsppa.problem import ProblemData
from dsppa.solvers import SolverConfig
from dsppa.verify import (
    build_contraction_metric,
    build_m_matrix,
    check_contraction,
    h_norm_sq,
    kkt_feasibility,
    lp_oracle_solve,
    partition_insensitivity_check,
    verify_instance,
)


def _gram(X, sizes):
    return gram_blocks(X, Partition(sizes))


class TestContractionMetric:
    def test_zero_gram_eigenvalues(self):
        # with A = 0, eta = mu = 1 the metric decouples into p copies of
        # [1] and p copies of [[1,-1],[-1,2]] with eigenvalues (3 +/- sqrt 5)/2
        p = 3
        gram = _gram(np.zeros((4, p)), (p,))
        metric = build_contraction_metric(gram, 1.0, 1.0)
        eigs = np.sort(np.linalg.eigvalsh(metric.matrix))
        lo, hi = (3 - np.sqrt(5)) / 2, (3 + np.sqrt(5)) / 2
        expected = np.sort([1.0] * p + [lo] * p + [hi] * p)
        np.testing.assert_allclose(eigs, expected, atol=1e-12)
        assert metric.provenance == "H" and metric.dim == 3 * p

    def test_blockwise_k1_equals_global(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((8, 5)) / np.sqrt(8)
        gram = _gram(X, (5,))
        eta = 5.0
        h = build_contraction_metric(gram, 1.0, eta)
        hk = build_contraction_metric(gram, 1.0, [eta])
        np.testing.assert_allclose(h.matrix, hk.matrix, atol=1e-14)
        assert hk.provenance == "H_K"

    def test_positive_definite(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((10, 6)) / np.sqrt(10)
        gram = _gram(X, (2, 2, 2))
        A = gram.assemble()
        etas = [float(np.linalg.eigvalsh(b.T @ b).max()) + 1.0 for b in gram.blocks]
        metric = build_contraction_metric(gram, 1.0, etas)
        assert np.linalg.eigvalsh(metric.matrix).min() > 0
        eta = float(np.linalg.eigvalsh(A.T @ A).max()) + 1.0
        metric = build_contraction_metric(gram, 1.0, eta)
        assert np.linalg.eigvalsh(metric.matrix).min() > 0

    def test_eta_too_small_rejected(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((6, 4))
        gram = _gram(X, (4,))
        with pytest.raises(ArgumentError):
            build_contraction_metric(gram, 1.0, 1e-9)

    def test_eta_count_mismatch(self):
        gram = _gram(np.eye(4), (2, 2))
        with pytest.raises(DimensionError):
            build_contraction_metric(gram, 1.0, [10.0, 10.0, 10.0])


class TestMMatrix:
    @pytest.mark.parametrize("k", [None, 2, 3])
    def test_positive_semidefinite(self, k):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((9, 6)) / np.sqrt(9)
        sizes = (6,) if k in (None, 1) else Partition.even(6, k).sizes
        gram = _gram(X, sizes)
        for mu in (0.5, 1.0, 2.0):
            M = build_m_matrix(gram, mu, k=k)
            assert np.linalg.eigvalsh(M).min() >= -1e-10


class TestHNorm:
    def test_matches_triple_loop(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((5, 3)) / np.sqrt(5)
        gram = _gram(X, (3,))
        metric = build_contraction_metric(gram, 1.0, 5.0)
        g = rng.standard_normal(9)
        H = metric.matrix
        expected = sum(g[i] * H[i, j] * g[j] for i in range(9) for j in range(9))
        assert h_norm_sq(metric, g) == pytest.approx(expected, rel=1e-10)

    def test_nonnegative(self):
        gram = _gram(np.eye(3), (3,))
        metric = build_contraction_metric(gram, 1.0, 3.0)
        rng = np.random.default_rng(5)
        for _ in range(50):
            assert h_norm_sq(metric, rng.standard_normal(9)) >= 0.0
        assert h_norm_sq(metric, np.zeros(9)) == 0.0

    def test_dim_mismatch(self):
        gram = _gram(np.eye(3), (3,))
        metric = build_contraction_metric(gram, 1.0, 3.0)
        with pytest.raises(DimensionError):
            h_norm_sq(metric, np.zeros(4))


class TestCheckContraction:
    def _metric(self):
        return build_contraction_metric(_gram(np.zeros((2, 1)), (1,)), 1.0, 1.0)

    def test_contracting_sequence_passes(self):
        metric = self._metric()
        star = (np.zeros(1), np.zeros(1), np.zeros(1))
        snaps = [(np.array([2.0 ** -t]), np.zeros(1), np.zeros(1)) for t in range(8)]
        out = check_contraction(snaps, metric, star)
        assert out["passed"] and out["diff_monotone"] and out["dist_monotone"] and out["rate_bound"]

    def test_expanding_sequence_fails(self):
        metric = self._metric()
        star = (np.zeros(1), np.zeros(1), np.zeros(1))
        snaps = [(np.array([2.0 ** t]), np.zeros(1), np.zeros(1)) for t in range(6)]
        out = check_contraction(snaps, metric, star)
        assert not out["passed"]

    def test_needs_two_snapshots(self):
        with pytest.raises(ArgumentError):
            check_contraction([(np.zeros(1),) * 3], self._metric(), (np.zeros(1),) * 3)


class TestKKT:
    def test_zero_beta(self):
        data, _ = make_instance(41, 10, 5)
        viol, obj = kkt_feasibility(data, np.zeros(5), lam=0.0)
        assert obj == 0.0
        assert viol == pytest.approx(data.lambda_max())
        viol, _ = kkt_feasibility(data, np.zeros(5), lam=2 * data.lambda_max())
        assert viol == 0.0

    def test_weighted_objective(self):
        data = ProblemData(np.eye(3), np.zeros(3))
        _, obj = kkt_feasibility(data, np.array([1.0, -2.0, 0.0]), 1.0,
                                 weights=np.array([2.0, 0.5, 1.0]))
        assert obj == pytest.approx(3.0)

    def test_per_coordinate_bounds(self):
        data = ProblemData(np.eye(2), np.array([3.0, 0.0]))
        # correlations at beta=0 are (1.5, 0); bounds (1, 1) leave excess 0.5
        viol, _ = kkt_feasibility(data, np.zeros(2), 0.0, bounds=np.array([1.0, 1.0]))
        assert viol == pytest.approx(0.5)


class TestLPOracle:
    def test_p1_closed_form(self):
        # scalar instance: min |b| s.t. |a^2 b - a y| <= n lam
        rng = np.random.default_rng(6)
        for _ in range(10):
            a = float(rng.uniform(0.5, 2.0))
            yv = rng.standard_normal(1) * 2
            data = ProblemData(np.array([[a]]), yv)
            lam = float(rng.uniform(0.05, 1.5))
            c = a * yv[0]
            if abs(c) <= lam:
                expected = 0.0
            else:
                expected = (c - np.sign(c) * lam) / (a * a)
            out = lp_oracle_solve(data, lam)
            assert out[0] == pytest.approx(expected, abs=1e-8)

    def test_grid_oracle_p2(self):
        data, _ = make_instance(42, 8, 2, nnz=2)
        lam = 0.5 * data.lambda_max()
        out = lp_oracle_solve(data, lam)
        viol, obj = kkt_feasibility(data, out, lam)
        assert viol <= 1e-8
        # no feasible grid point beats the LP objective
        grid = np.linspace(-20, 20, 401)
        A = data.X.T @ data.X
        for b1 in grid:
            for b2 in grid:
                beta = np.array([b1, b2])
                if np.max(np.abs(A @ beta - data.xty)) <= data.n * lam:
                    assert np.abs(beta).sum() >= obj - 1e-8

    def test_size_limit(self):
        data = ProblemData(np.zeros((2, 101)) + np.eye(2, 101), np.zeros(2))
        with pytest.raises(ArgumentError):
            lp_oracle_solve(data, 1.0)


class TestPartitionInsensitivity:
    def test_small_instance(self):
        data, _ = make_instance(43, 20, 12)
        cfg = SolverConfig(lam=0.5 * data.lambda_max(), max_iter=50)
        out = partition_insensitivity_check(data, cfg, [2, 3, Partition((1, 5, 6))])
        assert out["passed"]
        assert out["max_discrepancy"] <= 1e-10
        assert set(out["discrepancies"]) == {"K=2", "K=3", "uneven-1-5-6"}


class TestVerifyInstance:
    def test_passes_on_small_instance(self):
        data, _ = make_instance(44, 20, 9)
        out = verify_instance(data, 0.5 * data.lambda_max(), mu=1.0, k=3, max_iter=100)
        assert out["passed"]
        assert out["contraction_serial"]["metric"] == "H"
        assert out["contraction_blocked"]["metric"] == "H_K"
        assert out["kkt"]["violation"] >= 0.0
