"""Problem container: design matrix, response, and cached X^T y."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from dsppa.errors import DataError, DimensionError


@dataclass(frozen=True)
class ProblemData:
    """A regression instance for the Dantzig selector.

    X is n x p row-major float64, y is length n.  xty = X^T y is cached
    because every solver needs it each iteration.
    """

    X: np.ndarray
    y: np.ndarray
    xty: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        y = np.asarray(self.y, dtype=np.float64).ravel()
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DimensionError(f"design matrix must be 2-D non-empty, got shape {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise DimensionError(f"response length {y.shape[0]} != row count {X.shape[0]}")
        if not np.all(np.isfinite(X)):
            raise DataError("design matrix contains non-finite entries")
        if not np.all(np.isfinite(y)):
            raise DataError("response contains non-finite entries")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "xty", X.T @ y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def lambda_max(self) -> float:
        """Smallest lambda for which beta = 0 is feasible: ||X^T y||_inf / n."""
        return float(np.max(np.abs(self.xty)) / self.n)
