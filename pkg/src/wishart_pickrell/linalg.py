"""Dense complex matrix helpers: Hermitian checks, determinants, norms,
PSD square roots, and the unitary dilations used by the polymorphism code.

Matrices are plain ``numpy`` complex arrays.  Hermitian inputs are
symmetrized on construction with :func:`as_hermitian` so the invariant
``H == H^*`` holds exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EIG_CLAMP = 1e-10
NORM_SLACK = 1e-10
UNITARY_TOL = 1e-12
SNAP_TO_ONE = 1e-13


class DimensionError(ValueError):
    """Raised when matrix sizes are incompatible with an operation."""


def as_matrix(M) -> np.ndarray:
    """Return ``M`` as a finite, square complex128 array."""
    M = np.array(M, dtype=np.complex128, copy=True)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def as_hermitian(M) -> np.ndarray:
    M = as_matrix(M)
    return (M + M.conj().T) / 2


def is_hermitian(M, tol: float = 0.0) -> bool:
    M = as_matrix(M)
    return bool(np.max(np.abs(M - M.conj().T), initial=0.0) <= tol)


def determinant(M) -> complex:
    # LAPACK getrf: LU with partial pivoting
    return complex(np.linalg.det(as_matrix(M)))


def operator_norm(M) -> float:
    M = as_matrix(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def pad(M, n: int) -> np.ndarray:
    """Zero-extend a square matrix to size ``n``."""
    M = as_matrix(M)
    k = M.shape[0]
    if k > n:
        raise DimensionError(f"cannot pad a {k}x{k} matrix down to {n}")
    out = np.zeros((n, n), dtype=np.complex128)
    out[:k, :k] = M
    return out


def support_size(M, tol: float = 1e-14) -> int:
    """Smallest ``k`` such that every entry outside the top-left ``k x k``
    block has modulus below ``tol``."""
    M = as_matrix(M)
    rows, cols = np.nonzero(np.abs(M) >= tol)
    if rows.size == 0:
        return 0
    return int(max(rows.max(), cols.max())) + 1


def psd_sqrt(H) -> np.ndarray:
    """Hermitian PSD square root via ``eigh``.

    Eigenvalues down to ``-EIG_CLAMP`` are treated as rounding noise and
    clamped to zero; anything more negative raises ``ValueError``.
    """
    H = as_hermitian(H)
    w, V = np.linalg.eigh(H)
    if w.size and w.min() < -EIG_CLAMP:
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w.min():.3e})")
    R = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T
    return (R + R.conj().T) / 2


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with phase correction."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


@dataclass(frozen=True)
class BlockUnitary:
    """A unitary matrix together with the block sizes it was assembled from."""

    matrix: np.ndarray
    layout: tuple[int, ...]

    def __post_init__(self):
        M = as_matrix(self.matrix)
        if sum(self.layout) != M.shape[0]:
            raise DimensionError(f"block layout {self.layout} does not sum to {M.shape[0]}")
        err = unitarity_error(M)
        if err > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (error {err:.3e})")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "layout", tuple(int(b) for b in self.layout))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def unitarity_error(U) -> float:
    """max(||U*U - I||, ||UU* - I||) in operator norm."""
    U = np.asarray(U)
    eye = np.eye(U.shape[0])
    return max(
        operator_norm(U.conj().T @ U - eye),
        operator_norm(U @ U.conj().T - eye),
    )


def unitary_dilation(u) -> BlockUnitary:
    """Halmos dilation ``[[u, v], [w, -u*]]`` of a contraction ``u``.

    ``v = sqrt(I - u u*)`` and ``w = sqrt(I - u* u)``, so the top-left block
    is ``u`` itself.  Both roots are taken from one SVD ``u = P diag(s) Q*``
    so that ``u* v = w u*`` holds to rounding even when ``||u|| = 1``;
    separate eigendecompositions lose about half the digits there.

    Singular values within ``SNAP_TO_ONE`` of 1 are set to exactly 1: a
    unitary ``u`` carries rounding of order 1e-16 in ``s``, which the square
    root would inflate to 1e-8 in the off-diagonal blocks.
    """
    u = as_matrix(u)
    a = u.shape[0]
    P, s, Qh = np.linalg.svd(u)
    if s.size and s[0] > 1 + NORM_SLACK:
        raise ValueError(f"not a contraction: operator norm {s[0]:.12g} > 1")
    s = np.clip(s, 0.0, 1.0)
    s[s > 1.0 - SNAP_TO_ONE] = 1.0
    d = np.sqrt((1.0 - s) * (1.0 + s))
    v = (P * d) @ P.conj().T
    w = (Qh.conj().T * d) @ Qh
    U = np.block([[u, (v + v.conj().T) / 2], [(w + w.conj().T) / 2, -u.conj().T]])
    return BlockUnitary(U, (a, a))


def embed_dilation(u, m: int, n: int, aux_start: int | None = None) -> np.ndarray:
    """Place the dilation of ``u`` inside an ``n x n`` unitary.

    Coordinates ``0..a-1`` carry ``u``; coordinates ``a..a+m-1`` are swapped
    with ``aux_start..aux_start+m-1``; the dilation partner block occupies
    ``aux_start+m..aux_start+m+a-1``.  Everything else is fixed.  With the
    default ``aux_start = a + m`` this is exactly :func:`build_Um`.
    """
    u = as_matrix(u)
    a = u.shape[0]
    if m < 0:
        raise ValueError("m must be nonnegative")
    if aux_start is None:
        aux_start = a + m
    if aux_start < a + m:
        raise ValueError("auxiliary block overlaps the swapped coordinates")
    need = aux_start + m + a
    if n < need:
        raise DimensionError(f"working size {n} too small, need at least {need}")
    D = unitary_dilation(u).matrix
    U = np.eye(n, dtype=np.complex128)
    main = np.arange(a)
    partner = np.arange(aux_start + m, aux_start + m + a)
    idx = np.concatenate([main, partner])
    U[np.ix_(idx, idx)] = D
    lo = np.arange(a, a + m)
    hi = np.arange(aux_start, aux_start + m)
    U[lo, lo] = 0
    U[hi, hi] = 0
    U[lo, hi] = 1
    U[hi, lo] = 1
    return U


def build_Um(u, m: int, n: int) -> BlockUnitary:
    """The block unitary with layout ``(a, m, m, a, n - 2a - 2m)``::

        [[u, 0, 0, v, 0],
         [0, 0, 1, 0, 0],
         [0, 1, 0, 0, 0],
         [w, 0, 0, z, 0],
         [0, 0, 0, 0, 1]]

    which converges weakly to ``u`` (extended by zeros) as ``m`` grows.
    """
    a = as_matrix(u).shape[0]
    if n < 2 * a + 2 * m:
        raise DimensionError(f"n={n} must be at least 2*alpha + 2*m = {2 * a + 2 * m}")
    U = embed_dilation(u, m, n)
    return BlockUnitary(U, (a, m, m, a, n - 2 * a - 2 * m))
