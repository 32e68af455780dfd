"""Ergodic unitarily invariant measures on Hermitian matrices.

A measure is fixed by ``(gamma1, gamma2, lambdas)`` and has characteristic
function

    chi(A) = exp(-gamma1/2 tr A^2 + i gamma2 tr A)
             * prod_k exp(-i lambda_k tr A) / det(1 - i lambda_k A).

At a finite truncation ``n`` it is the law of

    X = G + gamma2 I + sum_k lambda_k (u_k^* u_k - I)

with ``G`` Gaussian Hermitian (``Var tr(AG) = gamma1 tr A^2``) and ``u_k``
independent rows of standard complex Gaussians.  Dropping the tail of an
infinite ``lambda`` sequence past index ``K`` changes ``chi(A)`` by
``O(sum_{k>K} lambda_k^2 ||A||^2)``; the list given here is used as is.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .linalg import DimensionError, as_hermitian, determinant, pad

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class PickrellParams:
    gamma1: float = 0.0
    gamma2: float = 0.0
    lambdas: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        lambdas = tuple(float(x) for x in self.lambdas)
        if not (self.gamma1 >= 0 and np.isfinite(self.gamma1)):
            raise ValueError(f"gamma1 must be finite and nonnegative, got {self.gamma1}")
        if not np.isfinite(self.gamma2):
            raise ValueError("gamma2 must be finite")
        if any(x == 0 or not np.isfinite(x) for x in lambdas):
            raise ValueError("every lambda must be finite and nonzero")
        object.__setattr__(self, "gamma1", float(self.gamma1))
        object.__setattr__(self, "gamma2", float(self.gamma2))
        object.__setattr__(self, "lambdas", lambdas)


@dataclass(frozen=True)
class SampleConfig:
    dim: int
    seed: int
    count: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if not 0 <= self.seed <= MAX_SEED:
            raise ValueError("seed must be an unsigned 64-bit integer")


def ergodic_cf(params: PickrellParams, A) -> complex:
    """Closed-form characteristic function ``chi(A)``."""
    A = as_hermitian(A)
    n = A.shape[0]
    trA = np.trace(A).real
    log_gauss = -0.5 * params.gamma1 * np.trace(A @ A).real + 1j * params.gamma2 * trA
    value = np.exp(log_gauss)
    eye = np.eye(n)
    for lam in params.lambdas:
        value *= np.exp(-1j * lam * trA) / determinant(eye - 1j * lam * A)
    return complex(value)


def ergodic_cf_summable(params: PickrellParams, A) -> complex:
    """Same function with the centering phases gathered into one exponent:
    ``exp(-gamma1/2 tr A^2 + i(gamma2 - sum lambda) tr A) / prod det(1 - i lambda A)``."""
    A = as_hermitian(A)
    trA = np.trace(A).real
    shift = params.gamma2 - sum(params.lambdas)
    dets = [determinant(np.eye(A.shape[0]) - 1j * lam * A) for lam in params.lambdas]
    return complex(
        np.exp(-0.5 * params.gamma1 * np.trace(A @ A).real + 1j * shift * trA) / np.prod(dets)
    )


def draw_samples(params: PickrellParams, n: int, seed: int, first: int, count: int) -> np.ndarray:
    """Samples with indices ``first .. first+count-1``; shape ``(count, n, n)``."""
    return _backend.assemble_samples(
        seed, params.gamma1, params.gamma2, np.asarray(params.lambdas, dtype=float), n, first, count
    )


def sample_truncated(params: PickrellParams, cfg: SampleConfig) -> np.ndarray:
    """``cfg.count`` Hermitian samples of size ``cfg.dim`` as one array.

    The random draw feeding entry ``(i, j)`` depends on the seed, the sample
    index, the component and ``(i, j)`` only, never on ``n``.  So the
    top-left ``k x k`` corner of a size-``n`` sample is the size-``k``
    sample with the same seed.
    """
    return draw_samples(params, cfg.dim, cfg.seed, 0, cfg.count)


def cf_estimate(phases: np.ndarray) -> tuple[complex, float]:
    """Mean of ``exp(i * phases)`` and the standard error of that complex mean."""
    c, s = np.cos(phases), np.sin(phases)
    N = phases.size
    est = complex(c.mean(), s.mean())
    if N < 2:
        return est, float("inf")
    se = np.sqrt((c.var(ddof=1) + s.var(ddof=1)) / N)
    return est, float(se)


def mc_cf(params: PickrellParams, A, cfg: SampleConfig) -> tuple[complex, float]:
    """Monte Carlo estimate of ``chi(A)`` over ``cfg.count`` samples."""
    A = as_hermitian(A)
    if A.shape[0] > cfg.dim:
        raise DimensionError(f"matrix of size {A.shape[0]} exceeds truncation dim {cfg.dim}")
    A = pad(A, cfg.dim)
    phases = _backend.trace_phases(
        A, cfg.seed, params.gamma1, params.gamma2,
        np.asarray(params.lambdas, dtype=float), cfg.dim, 0, cfg.count,
    )
    return cf_estimate(phases)
