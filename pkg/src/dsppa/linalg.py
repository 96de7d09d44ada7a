"""Blocked Gram computation, deterministic block reductions, power method.

The Gram matrix A = X^T X is held as column blocks A_i = X^T X_i so the
parallel solvers never need the assembled p x p matrix.  All reductions
over blocks run in ascending block index with left-to-right accumulation,
which makes results independent of the worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from dsppa.errors import ArgumentError, DimensionError, NumericError


@dataclass(frozen=True)
class Partition:
    """Column-block boundaries of a p-dimensional coefficient vector."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if len(sizes) < 1 or any(s < 1 for s in sizes):
            raise ArgumentError(f"every block size must be >= 1, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def even(cls, p: int, k: int) -> "Partition":
        """Split p columns into k nearly equal blocks (first blocks get the remainder)."""
        if not 1 <= k <= p:
            raise ArgumentError(f"need 1 <= K <= p, got K={k}, p={p}")
        base, extra = divmod(p, k)
        return cls(tuple(base + (1 if i < extra else 0) for i in range(k)))

    @property
    def block_count(self) -> int:
        return len(self.sizes)

    @property
    def total(self) -> int:
        return sum(self.sizes)

    @property
    def offsets(self) -> tuple[int, ...]:
        """Prefix sums: offsets[i] is the first column of block i."""
        out, acc = [], 0
        for s in self.sizes:
            out.append(acc)
            acc += s
        return tuple(out)

    def slices(self) -> list[slice]:
        return [slice(o, o + s) for o, s in zip(self.offsets, self.sizes)]

    def split(self, v: np.ndarray) -> list[np.ndarray]:
        if v.shape[0] != self.total:
            raise DimensionError(f"vector length {v.shape[0]} != partition total {self.total}")
        return [v[sl] for sl in self.slices()]


@dataclass(frozen=True)
class GramBlocks:
    """Column blocks A_i = X^T X_i of the Gram matrix A = X^T X."""

    blocks: tuple[np.ndarray, ...]
    partition: Partition

    def __post_init__(self):
        p = self.blocks[0].shape[0]
        for b, s in zip(self.blocks, self.partition.sizes):
            if b.shape != (p, s):
                raise DimensionError(f"block shape {b.shape} inconsistent with partition size {s} (p={p})")

    @property
    def p(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    def assemble(self) -> np.ndarray:
        """Concatenate blocks back into the full p x p Gram matrix."""
        return np.hstack(self.blocks)


def _map_blocks(
    fn: Callable[[int], np.ndarray],
    k: int,
    workers: int,
    pool: ThreadPoolExecutor | None = None,
) -> list[np.ndarray]:
    """Apply fn to block indices 0..k-1, collecting results in index order.

    The collection order (not the execution order) fixes the reduction
    order, so the output is identical for any worker count.
    """
    if pool is not None and k > 1:
        return list(pool.map(fn, range(k)))
    if workers <= 1 or k == 1:
        return [fn(i) for i in range(k)]
    with ThreadPoolExecutor(max_workers=min(workers, k)) as tmp:
        return list(tmp.map(fn, range(k)))


def gram_blocks(X: np.ndarray, partition: Partition, workers: int = 1) -> GramBlocks:
    """Compute A_i = X^T X_i for each column block X_i of X."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"design matrix must be 2-D, got shape {X.shape}")
    if partition.total != X.shape[1]:
        raise DimensionError(f"partition total {partition.total} != column count {X.shape[1]}")
    slices = partition.slices()
    blocks = _map_blocks(lambda i: X.T @ X[:, slices[i]], partition.block_count, workers)
    return GramBlocks(tuple(blocks), partition)


def blocked_matvec(
    gram: GramBlocks,
    beta_blocks: Sequence[np.ndarray],
    workers: int = 1,
    pool: ThreadPoolExecutor | None = None,
) -> np.ndarray:
    """Return sum_i A_i beta_i, accumulated in ascending block order."""
    if len(beta_blocks) != gram.block_count:
        raise DimensionError(f"{len(beta_blocks)} beta blocks for {gram.block_count} Gram blocks")
    for b, s in zip(beta_blocks, gram.partition.sizes):
        if b.shape != (s,):
            raise DimensionError(f"beta block shape {b.shape} != ({s},)")
    parts = _map_blocks(lambda i: gram.blocks[i] @ beta_blocks[i], gram.block_count, workers, pool)
    out = parts[0].copy()
    for part in parts[1:]:
        out += part
    return out


def gram_quad_operator(
    gram: GramBlocks,
    mu: float,
    workers: int = 1,
    pool: ThreadPoolExecutor | None = None,
) -> Callable[[np.ndarray], np.ndarray]:
    """Operator v -> mu * A^T (A v) built from the blocks, never assembling A."""
    part = gram.partition

    def apply(v: np.ndarray) -> np.ndarray:
        w = blocked_matvec(gram, part.split(v), workers=workers, pool=pool)
        cols = _map_blocks(lambda i: gram.blocks[i].T @ w, gram.block_count, workers, pool)
        return mu * np.concatenate(cols)

    return apply


def block_quad_operator(block: np.ndarray, mu: float) -> Callable[[np.ndarray], np.ndarray]:
    """Operator v -> mu * A_i^T (A_i v) for a single Gram block."""

    def apply(v: np.ndarray) -> np.ndarray:
        return mu * (block.T @ (block @ v))

    return apply


def power_method_max_eigen(
    apply: Callable[[np.ndarray], np.ndarray],
    dim: int,
    tol: float = 1e-4,
    max_iter: int = 200,
) -> float:
    """Largest eigenvalue of a symmetric PSD operator by power iteration.

    Starts from the normalized all-ones vector (deterministic; orthogonal
    to the top eigenvector only on a measure-zero set for Gram-of-Gram
    operators).  If the Rayleigh quotient stagnates at zero for 5
    iterations, restarts from a seeded random vector.  The returned
    estimate is a Rayleigh quotient, hence never above the true maximum.
    """
    if tol <= 0:
        raise ArgumentError(f"tol must be > 0, got {tol}")
    v = np.full(dim, 1.0 / np.sqrt(dim))
    lam = np.inf
    zero_streak = 0
    restarted = False
    for _ in range(max_iter):
        w = apply(v)
        if not np.all(np.isfinite(w)):
            raise NumericError("power method operator returned non-finite values")
        lam_new = float(v @ w)
        if lam_new == 0.0:
            # start vector may sit in the null space; restart once from a
            # seeded random direction after 5 dead iterations
            zero_streak += 1
            if zero_streak >= 5:
                if restarted:
                    return 0.0
                rng = np.random.default_rng(0)
                v = rng.standard_normal(dim)
                v /= np.linalg.norm(v)
                restarted = True
                zero_streak = 0
                lam = np.inf
            continue
        zero_streak = 0
        v = w / np.linalg.norm(w)
        if np.isfinite(lam) and abs(lam_new - lam) <= tol * abs(lam_new):
            return lam_new
        lam = lam_new
    return lam if np.isfinite(lam) else 0.0
