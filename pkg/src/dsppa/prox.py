"""Closed-form proximal operators and folded-concave penalty derivatives."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dsppa.errors import ArgumentError, DimensionError

# Field-standard shape defaults for the folded-concave penalties.
SCAD_DEFAULT_A = 3.7
MCP_DEFAULT_A = 3.0


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty choice: 'l1', 'scad' (a > 2) or 'mcp' (a > 1), with level lambda."""

    kind: str
    lam: float
    a: float | None = None

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in ("l1", "scad", "mcp"):
            raise ArgumentError(f"unknown penalty kind {self.kind!r}")
        if self.lam <= 0:
            raise ArgumentError(f"lambda must be > 0, got {self.lam}")
        a = self.a
        if kind == "scad":
            a = SCAD_DEFAULT_A if a is None else float(a)
            if a <= 2:
                raise ArgumentError(f"SCAD requires a > 2, got {a}")
        elif kind == "mcp":
            a = MCP_DEFAULT_A if a is None else float(a)
            if a <= 1:
                raise ArgumentError(f"MCP requires a > 1, got {a}")
        else:
            a = None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "a", a)


def soft_threshold(v: np.ndarray, tau: float) -> np.ndarray:
    """sign(v) * max(|v| - tau, 0), with sign(0) = 0."""
    if tau < 0:
        raise ArgumentError(f"threshold must be >= 0, got {tau}")
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def weighted_soft_threshold(v: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Elementwise sign(v_j) * max(|v_j| - tau_j, 0)."""
    v = np.asarray(v, dtype=np.float64)
    tau = np.asarray(tau, dtype=np.float64)
    if tau.shape != v.shape:
        raise DimensionError(f"threshold shape {tau.shape} != value shape {v.shape}")
    if np.any(tau < 0):
        raise ArgumentError("thresholds must be elementwise >= 0")
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def project_linf_box(v: np.ndarray, bound: np.ndarray | float) -> np.ndarray:
    """Clamp each coordinate to [-bound_j, bound_j]."""
    v = np.asarray(v, dtype=np.float64)
    bound = np.broadcast_to(np.asarray(bound, dtype=np.float64), v.shape)
    if np.any(bound < 0):
        raise ArgumentError("box bounds must be elementwise >= 0")
    return np.minimum(np.maximum(v, -bound), bound)


def penalty_derivative(spec: PenaltySpec, beta_abs: np.ndarray) -> np.ndarray:
    """Derivative of the penalty at |beta|.

    SCAD: lambda on [0, lambda]; (a*lambda - |b|)/(a - 1) on (lambda, a*lambda);
    0 from a*lambda on.  MCP: lambda - |b|/a up to a*lambda (inclusive), 0 above.
    L1: constant lambda.  Boundary membership follows the defining
    inequalities, so both are continuous on [0, inf).
    """
    beta_abs = np.asarray(beta_abs, dtype=np.float64)
    if np.any(beta_abs < 0):
        raise ArgumentError("beta_abs must be elementwise >= 0")
    lam = spec.lam
    if spec.kind == "l1":
        return np.full_like(beta_abs, lam)
    a = spec.a
    if spec.kind == "scad":
        mid = (a * lam - beta_abs) / (a - 1.0)
        return np.where(beta_abs <= lam, lam, np.where(beta_abs < a * lam, mid, 0.0))
    # mcp
    return np.where(beta_abs <= a * lam, lam - beta_abs / a, 0.0)
