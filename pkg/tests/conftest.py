import numpy as np
import pytest

from dsppa.problem import ProblemData


def make_instance(seed, n, p, nnz=3, noise=0.1, scale=None):
    """Small random regression instance with a sparse signal.

    scale defaults to 1/sqrt(n), which keeps eigen(X^T X) near 1 so the
    proximal step sizes stay moderate without retuning mu.
    """
    rng = np.random.default_rng(seed)
    if scale is None:
        scale = 1.0 / np.sqrt(n)
    X = rng.standard_normal((n, p)) * scale
    beta = np.zeros(p)
    support = rng.choice(p, size=min(nnz, p), replace=False)
    beta[support] = rng.uniform(1.0, 3.0, size=len(support)) * rng.choice([-1.0, 1.0], size=len(support))
    y = X @ beta + noise * rng.standard_normal(n)
    return ProblemData(X, y), beta


@pytest.fixture
def tiny_instance():
    return make_instance(7, 10, 6)
