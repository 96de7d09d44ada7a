"""Seeded synthetic data generation for the simulation designs.

Design rows follow an AR(1) correlation structure corr(x_j, x_j') =
rho^|j - j'| generated by the recursion x_1 = z_1, x_j = rho x_{j-1} +
sqrt(1 - rho^2) z_j, which keeps unit marginal variance without a p x p
Cholesky factor.  Separate RNG streams per role (design, beta, noise)
keep each draw independent of the others for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dsppa.errors import ArgumentError

SPARSE8_VALUES = (3.0, 1.5, 10.0, 4.0, 2.0, 5.0, 2.5, 4.5)

# stream tags so regenerating one component never shifts another
_ROLE_DESIGN = 1
_ROLE_BETA = 2
_ROLE_NOISE = 3


def _rng(seed: int, role: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), role])


@dataclass(frozen=True)
class ScenarioSpec:
    """One synthetic scenario: dimensions, correlation, signal, noise, seed."""

    n: int
    p: int
    rho: float
    beta_pattern: str  # "sparse8" | "dense"
    noise: str = "gaussian"  # gaussian | mixednormal | t | cauchy
    seed: int = 0
    t_df: float = 2.5

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ArgumentError(f"need n, p >= 1, got n={self.n}, p={self.p}")
        if not 0.0 <= self.rho < 1.0:
            raise ArgumentError(f"need 0 <= rho < 1, got {self.rho}")
        pattern = self.beta_pattern.lower()
        if pattern not in ("sparse8", "dense"):
            raise ArgumentError(f"unknown beta pattern {self.beta_pattern!r}")
        if pattern == "sparse8" and self.p < 8:
            raise ArgumentError(f"sparse8 needs p >= 8, got p={self.p}")
        if pattern == "dense" and (self.p % 2560 != 0 or self.p < 2560):
            raise ArgumentError(f"dense pattern needs p = 2560s for integer s >= 1, got p={self.p}")
        noise = self.noise.lower()
        if noise not in ("gaussian", "mixednormal", "t", "cauchy"):
            raise ArgumentError(f"unknown noise kind {self.noise!r}")
        object.__setattr__(self, "beta_pattern", pattern)
        object.__setattr__(self, "noise", noise)


def gen_ar1_design(n: int, p: int, rho: float, seed: int) -> np.ndarray:
    """n x p matrix, rows i.i.d. N(0, Sigma) with Sigma_jj' = rho^|j-j'|."""
    if not 0.0 <= rho < 1.0:
        raise ArgumentError(f"need 0 <= rho < 1, got {rho}")
    z = _rng(seed, _ROLE_DESIGN).standard_normal((n, p))
    if rho == 0.0:
        return z
    X = np.empty((n, p))
    X[:, 0] = z[:, 0]
    scale = math.sqrt(1.0 - rho * rho)
    for j in range(1, p):
        X[:, j] = rho * X[:, j - 1] + scale * z[:, j]
    return X


def gen_sparse_beta(p: int, seed: int) -> np.ndarray:
    """The eight fixed values on a random size-8 support, zero elsewhere."""
    if p < 8:
        raise ArgumentError(f"need p >= 8, got {p}")
    rng = _rng(seed, _ROLE_BETA)
    support = rng.choice(p, size=8, replace=False)
    beta = np.zeros(p)
    beta[support] = SPARSE8_VALUES
    return beta


def gen_dense_beta(s: int, seed: int) -> np.ndarray:
    """Dense pattern on p = 2560s: 10 of 80 segments active, beta = xi(1+|a|)."""
    if s < 1:
        raise ArgumentError(f"need s >= 1, got {s}")
    p = 2560 * s
    seg_len = p // 80
    rng = _rng(seed, _ROLE_BETA)
    segments = np.sort(rng.choice(80, size=10, replace=False))
    beta = np.zeros(p)
    for seg in segments:
        sl = slice(seg * seg_len, (seg + 1) * seg_len)
        signs = rng.choice([-1.0, 1.0], size=seg_len)
        beta[sl] = signs * (1.0 + np.abs(rng.standard_normal(seg_len)))
    return beta


def gen_noise(n: int, kind: str, seed: int, t_df: float = 2.5) -> np.ndarray:
    """i.i.d. noise draws: gaussian, mixednormal, t, or cauchy."""
    kind = kind.lower()
    rng = _rng(seed, _ROLE_NOISE)
    if kind == "gaussian":
        return rng.standard_normal(n)
    if kind == "mixednormal":
        # 0.4 N(-3, 4) + 0.6 N(2, 1); variance arguments above, sd below
        comp = rng.random(n) < 0.4
        draws = rng.standard_normal(n)
        return np.where(comp, -3.0 + 2.0 * draws, 2.0 + draws)
    if kind == "t":
        # N(0,1) / sqrt(chi2_df / df)
        return rng.standard_normal(n) / np.sqrt(rng.chisquare(t_df, n) / t_df)
    if kind == "cauchy":
        # tan of a uniform angle
        return np.tan(np.pi * (rng.random(n) - 0.5))
    raise ArgumentError(f"unknown noise kind {kind!r}")


def gen_dataset(spec: ScenarioSpec, noise_scale: float = 1.0) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """(X, y, beta_star, rho) with y = X beta_star + noise.

    The returned rho is the AR(1) descriptor for closed-form model error.
    noise_scale=0 gives the exact noiseless response (test use).
    """
    X = gen_ar1_design(spec.n, spec.p, spec.rho, spec.seed)
    if spec.beta_pattern == "sparse8":
        beta_star = gen_sparse_beta(spec.p, spec.seed)
    else:
        beta_star = gen_dense_beta(spec.p // 2560, spec.seed)
    eps = gen_noise(spec.n, spec.noise, spec.seed, t_df=spec.t_df)
    y = X @ beta_star + noise_scale * eps
    return X, y, beta_star, spec.rho
