import math

import numpy as np
import pytest

from conftest import make_instance
from dsppa.errors import ArgumentError, DimensionError
from dsppa.metrics import (
    ar1_quadratic_form,
    default_lambda_grid,
    estimation_errors,
    hbic_score,
    lambda_grid_search,
    metric_report,
    selection_counts,
)
from dsppa.problem import ProblemData
from dsppa.solvers import SolverConfig


class TestAR1QuadraticForm:
    def test_matches_explicit_sigma(self):
        rng = np.random.default_rng(0)
        for rho in (0.0, 0.3, 0.5, 0.9):
            sigma = rho ** np.abs(np.subtract.outer(np.arange(6), np.arange(6)))
            for _ in range(5):
                v = rng.standard_normal(6)
                expected = float(v @ sigma @ v)
                assert ar1_quadratic_form(v, rho) == pytest.approx(expected, abs=1e-12)

    def test_rho_zero_is_sum_of_squares(self):
        v = np.array([1.0, -2.0, 3.0])
        assert ar1_quadratic_form(v, 0.0) == pytest.approx(14.0)

    def test_invalid_rho(self):
        with pytest.raises(ArgumentError):
            ar1_quadratic_form(np.ones(3), 1.0)


class TestErrors:
    def test_estimation_errors(self):
        bh = np.array([1.0, 0.0, 2.0])
        bs = np.array([0.0, 0.0, 2.0])
        l1, l2_sq, model = estimation_errors(bh, bs, 0.0)
        assert l1 == 1.0 and l2_sq == 1.0 and model == 1.0
        with pytest.raises(DimensionError):
            estimation_errors(np.zeros(2), np.zeros(3), 0.0)

    def test_selection_counts(self):
        bs = np.array([2.0, 0.0, 0.0, 1.0])
        bh = np.array([1.9, 0.5, 1e-6, 0.0])
        fp, fn, ae = selection_counts(bh, bs)
        assert fp == 1 and fn == 1
        assert ae == pytest.approx((0.1 + 0.5 + 1e-6 + 1.0) / 4)

    def test_metric_report_dict(self):
        m = metric_report(np.array([1.0]), np.array([1.0]), 0.0, iterations=5, wall_time=0.1)
        d = m.as_dict()
        assert set(d) == {"l1_error", "l2_error_sq", "model_error", "FP", "FN", "AE",
                          "iterations", "wall_time"}
        assert d["iterations"] == 5


class TestHBIC:
    def test_formula(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((30, 10))
        y = rng.standard_normal(30)
        data = ProblemData(X, y)
        beta = np.zeros(10)
        beta[0] = 0.5
        resid = y - X @ beta
        expected = math.log(resid @ resid / 30) + 1 * math.log(math.log(30)) * math.log(10) / 30
        assert hbic_score(data, beta) == pytest.approx(expected, rel=1e-12)

    def test_perfect_fit(self):
        data = ProblemData(np.eye(3), np.array([1.0, 2.0, 3.0]))
        assert hbic_score(data, np.array([1.0, 2.0, 3.0])) == -math.inf

    def test_penalizes_extra_selections_at_equal_rss(self):
        data = ProblemData(np.eye(4), np.ones(4))
        sparse = np.array([0.5, 0.0, 0.0, 0.0])
        denser = np.array([0.5, 1e-3, 0.0, 0.0])
        # the tiny extra coordinate barely changes RSS but adds a size term
        assert hbic_score(data, sparse) < hbic_score(data, denser)


class TestGrid:
    def test_default_grid_endpoints(self):
        data, _ = make_instance(51, 20, 8)
        grid = default_lambda_grid(data, num=10)
        assert len(grid) == 10
        assert grid[0] == pytest.approx(data.lambda_max())
        assert grid[-1] == pytest.approx(0.01 * data.lambda_max())
        assert np.all(np.diff(grid) < 0)

    def test_search_returns_grid_member(self):
        data, _ = make_instance(52, 40, 12, nnz=2, noise=0.05)
        grid = default_lambda_grid(data, num=8)
        template = SolverConfig(lam=1.0, tol=1e-6, max_iter=20000)
        best_lam, reports = lambda_grid_search(data, template, grid)
        assert best_lam in grid
        assert len(reports) == len(grid)
        # the winner scores no worse than any other computed point
        scores = [hbic_score(data, r.beta_hat) if r is not None else math.inf for r in reports]
        idx = int(np.argmin(np.abs(grid - best_lam)))
        assert scores[idx] == min(scores)

    def test_empty_grid_rejected(self):
        data, _ = make_instance(53, 10, 4)
        with pytest.raises(ArgumentError):
            lambda_grid_search(data, SolverConfig(lam=1.0), np.array([]))

    def test_tie_prefers_larger_lambda(self):
        # with a zero design every fit is exactly beta = 0, so all scores
        # tie and the sparser (larger lambda) candidate must win
        data = ProblemData(np.zeros((5, 3)), np.ones(5))
        grid = np.array([0.3, 0.1, 0.2])
        template = SolverConfig(lam=1.0, tol=1e-8, max_iter=100)
        best_lam, reports = lambda_grid_search(data, template, grid)
        assert best_lam == pytest.approx(0.3)
        for r in reports:
            assert np.max(np.abs(r.beta_hat)) == 0.0
