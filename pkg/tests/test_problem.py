import numpy as np
import pytest

from dsppa.errors import DataError, DimensionError
from dsppa.problem import ProblemData


def test_xty_cached():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((7, 4))
    y = rng.standard_normal(7)
    data = ProblemData(X, y)
    np.testing.assert_allclose(data.xty, X.T @ y, atol=1e-12)
    assert data.n == 7 and data.p == 4


def test_lambda_max():
    X = np.array([[1.0, 0.0], [0.0, 2.0]])
    y = np.array([3.0, 4.0])
    data = ProblemData(X, y)
    # ||X^T y||_inf / n = max(3, 8) / 2
    assert data.lambda_max() == pytest.approx(4.0)


def test_column_response_accepted():
    data = ProblemData(np.eye(3), np.ones((3, 1)))
    assert data.y.shape == (3,)


def test_shape_validation():
    with pytest.raises(DimensionError):
        ProblemData(np.ones((3, 2)), np.ones(4))
    with pytest.raises(DimensionError):
        ProblemData(np.ones(3), np.ones(3))


def test_nonfinite_rejected():
    X = np.ones((2, 2))
    with pytest.raises(DataError):
        ProblemData(X * np.nan, np.ones(2))
    with pytest.raises(DataError):
        ProblemData(X, np.array([1.0, np.inf]))


def test_immutable():
    data = ProblemData(np.eye(2), np.ones(2))
    with pytest.raises(Exception):
        data.X = np.zeros((2, 2))
