"""Polymorphisms of an ergodic measure indexed by contractions.

For a unitary ``U`` the measure-preserving map ``X -> U* X U`` gives a
coupling of the measure with itself whose joint characteristic function is
``chi(A + U B U*)``.  These couplings extend continuously to contractions
``S`` (``||S|| <= 1``) with

    F(S | A, B) = exp(-gamma1/2 tr M^2 + i gamma2 (tr A + tr B))
                  * prod_k exp(-i lambda_k (tr A + tr B)) / det(1 - i lambda_k M),
    M = diag(A, B) @ [[1, S], [S*, 1]].

The unitaries ``U_m`` from :func:`~wishart_pickrell.linalg.build_Um` converge
weakly to ``S`` and ``F(U_m | A, B)`` equals ``F(S | A, B)`` exactly once ``m``
covers the support of ``A`` and ``B``.

Composition convention: pushing ``X`` through ``S`` and then through ``T``
(``Y = U_S* X U_S``, ``Z = V_T* Y V_T``) yields the coupling of the product
``S @ T``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import _backend
from ._kernels_py import rank_one
from .linalg import (
    NORM_SLACK,
    BlockUnitary,
    DimensionError,
    as_hermitian,
    as_matrix,
    build_Um,
    determinant,
    embed_dilation,
    operator_norm,
    pad,
    psd_sqrt,
    support_size,
    unitarity_error,
    unitary_dilation,
)
from .measure import PickrellParams, SampleConfig, cf_estimate, draw_samples, ergodic_cf

EXACT_TOL = 1e-10
Z_MAX = 4.0
CHUNK = 4096
NU_STREAM = 1 << 31


@dataclass(frozen=True)
class Contraction:
    """Finite upper-left corner of an operator on l^2 with norm <= 1."""

    matrix: np.ndarray
    check: bool = True

    def __post_init__(self):
        M = as_matrix(self.matrix)
        if self.check:
            nrm = operator_norm(M)
            if nrm > 1 + NORM_SLACK:
                raise ValueError(f"not a contraction: operator norm {nrm:.12g} > 1")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def _mat(S) -> np.ndarray:
    if isinstance(S, Contraction):
        return S.matrix
    if isinstance(S, BlockUnitary):
        return S.matrix
    return as_matrix(S)


@dataclass
class VerificationReport:
    label: str
    values: list = field(default_factory=list)
    tolerance: float = EXACT_TOL
    seed: int | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(dev <= self.tolerance for _, _, _, dev in self.values)

    @property
    def max_deviation(self) -> float:
        return max((dev for _, _, _, dev in self.values), default=0.0)

    def add(self, index, computed, reference, deviation):
        self.values.append((index, computed, reference, float(deviation)))

    def to_dict(self) -> dict:
        def num(z):
            if isinstance(z, complex):
                return [z.real, z.imag]
            return z

        return {
            "label": self.label,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "max_deviation": self.max_deviation,
            "seed": self.seed,
            "values": [
                {"index": i, "computed": num(c), "reference": num(r), "deviation": d}
                for i, c, r, d in self.values
            ],
            "details": self.details,
        }


def gram_matrix(S) -> np.ndarray:
    """``[[I, S], [S*, I]]``; PSD exactly when ``||S|| <= 1``."""
    S = _mat(S)
    eye = np.eye(S.shape[0])
    return np.block([[eye, S], [S.conj().T, eye]])


def _common(A, B, S=None):
    A = as_hermitian(A)
    B = as_hermitian(B)
    dims = [A.shape[0], B.shape[0]]
    if S is not None:
        dims.append(S.shape[0])
    n = max(dims)
    out = [pad(A, n), pad(B, n)]
    if S is not None:
        out.append(pad(S, n))
    return out


def joint_cf_unitary(params: PickrellParams, U, A, B) -> complex:
    """``F(U | A, B) = chi(A + U B U*)`` with ``A``, ``B`` zero-padded to ``dim U``."""
    U = _mat(U)
    n = U.shape[0]
    A, B = as_hermitian(A), as_hermitian(B)
    if max(A.shape[0], B.shape[0]) > n:
        raise DimensionError(f"A, B of sizes {A.shape[0]}, {B.shape[0]} do not fit a {n}x{n} unitary")
    A, B = pad(A, n), pad(B, n)
    return ergodic_cf(params, A + U @ B @ U.conj().T)


def joint_cf_contraction(params: PickrellParams, S, A, B) -> complex:
    """Closed-form joint characteristic function ``F(S | A, B)``."""
    A, B, S = _common(A, B, _mat(S))
    n = A.shape[0]
    M = np.block([[A, A @ S], [B @ S.conj().T, B]])
    tr = np.trace(A).real + np.trace(B).real
    value = np.exp(-0.5 * params.gamma1 * np.trace(M @ M).real + 1j * params.gamma2 * tr)
    eye = np.eye(2 * n)
    for lam in params.lambdas:
        value *= np.exp(-1j * lam * tr) / determinant(eye - 1j * lam * M)
    return complex(value)


def _pair_phases(A, B, X, Y) -> np.ndarray:
    return (np.einsum("ij,sji->s", A, X) + np.einsum("ij,sji->s", B, Y)).real


def iter_coupled(params: PickrellParams, U: np.ndarray, seed: int, count: int,
                 chunk: int = CHUNK) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Chunks of pairs ``(X, U* X U)`` with ``X`` from the truncated measure."""
    n = U.shape[0]
    Uh = U.conj().T
    for first in range(0, count, chunk):
        c = min(chunk, count - first)
        X = draw_samples(params, n, seed, first, c)
        yield X, Uh @ X @ U


def coupled_sample(params: PickrellParams, S, m: int, cfg: SampleConfig):
    """Pairs ``(X, Y)`` with ``Y = U_m* X U_m``; arrays of shape ``(count, n, n)``."""
    S = _mat(S)
    U = build_Um(S, m, cfg.dim).matrix
    parts = list(iter_coupled(params, U, cfg.seed, cfg.count))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def mc_joint_cf(params: PickrellParams, S, m: int, A, B, cfg: SampleConfig):
    """Empirical ``E exp(i tr AX + i tr BY)`` over :func:`coupled_sample` pairs."""
    S = _mat(S)
    A, B = as_hermitian(A), as_hermitian(B)
    n = cfg.dim
    if max(A.shape[0], B.shape[0]) > n:
        raise DimensionError("A, B exceed the working size")
    U = build_Um(S, m, n).matrix
    A, B = pad(A, n), pad(B, n)
    phases = np.concatenate([_pair_phases(A, B, X, Y) for X, Y in iter_coupled(params, U, cfg.seed, cfg.count)])
    return cf_estimate(phases)


def nu_s_cf(S, lam: float, A, B) -> complex:
    """``1 / det(1 - i lam diag(A, B) [[1, S], [S*, 1]])``."""
    A, B, S = _common(A, B, _mat(S))
    D = np.block([[A, np.zeros_like(A)], [np.zeros_like(B), B]])
    return complex(1.0 / determinant(np.eye(2 * A.shape[0]) - 1j * lam * D @ gram_matrix(S)))


def _nu_s_chunks(S, lam, cfg: SampleConfig, chunk: int = CHUNK):
    n = cfg.dim
    S = _mat(S)
    if S.shape[0] > n:
        raise DimensionError(f"S of size {S.shape[0]} exceeds working size {n}")
    R = psd_sqrt(gram_matrix(pad(S, n)))
    for first in range(0, cfg.count, chunk):
        c = min(chunk, cfg.count - first)
        w = _backend.complex_normals(cfg.seed, NU_STREAM, first, c, 2 * n) @ R
        u, v = w[:, :n], w[:, n:]
        yield lam * rank_one(u), lam * rank_one(v)


def nu_s_pair_sample(S, lam: float, cfg: SampleConfig):
    """Pairs ``(lam u*u, lam v*v)`` where the row ``(u, v)`` is complex
    Gaussian with covariance ``gram_matrix(S)`` (no centering)."""
    parts = list(_nu_s_chunks(S, lam, cfg))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def mc_nu_s_cf(S, lam: float, A, B, cfg: SampleConfig):
    A, B = as_hermitian(A), as_hermitian(B)
    n = cfg.dim
    if max(A.shape[0], B.shape[0]) > n:
        raise DimensionError("A, B exceed the working size")
    A, B = pad(A, n), pad(B, n)
    phases = np.concatenate([_pair_phases(A, B, X, Y) for X, Y in _nu_s_chunks(S, lam, cfg)])
    return cf_estimate(phases)


def _overhang(S: np.ndarray, A, B) -> tuple[int, int]:
    alpha = S.shape[0]
    k = max(support_size(A), support_size(B))
    return alpha, max(0, k - alpha)


def _trim(M, k):
    M = as_hermitian(M)
    if M.shape[0] > k:
        return M[:k, :k]
    return pad(M, k)


def verify_eventual_constancy(params: PickrellParams, S, A, B, m_values,
                              tol: float = EXACT_TOL) -> VerificationReport:
    """Compare ``F(U_m | A, B)`` against ``F(S | A, B)`` for each ``m``.

    ``A`` and ``B`` live on the first ``alpha + beta`` coordinates
    (``alpha = size(S)``); each ``m`` must be at least ``beta``.
    """
    S = _mat(S)
    alpha, beta = _overhang(S, A, B)
    A, B = _trim(A, alpha + beta), _trim(B, alpha + beta)
    ref = joint_cf_contraction(params, S, A, B)
    report = VerificationReport("limit", tolerance=tol, details={"alpha": alpha, "beta": beta})
    for m in m_values:
        if m < beta:
            raise ValueError(f"m={m} is below the support overhang beta={beta}")
        n = 2 * alpha + 2 * m + beta
        val = joint_cf_unitary(params, build_Um(S, m, n), A, B)
        report.add(int(m), val, ref, abs(val - ref))
    return report


def corner_approx(S, m: int) -> Contraction:
    """Top-left ``m x m`` corner of ``S``, zero-extended back to ``size(S)``."""
    S = _mat(S)
    if not 0 <= m <= S.shape[0]:
        raise ValueError(f"corner size {m} out of range for a {S.shape[0]}x{S.shape[0]} contraction")
    out = np.zeros_like(S)
    out[:m, :m] = S[:m, :m]
    return Contraction(out)


def verify_corner(params: PickrellParams, S, A, B, tol: float = EXACT_TOL) -> VerificationReport:
    S = _mat(S)
    size = S.shape[0]
    k = max(support_size(A), support_size(B))
    ref = joint_cf_contraction(params, S, A, B)
    report = VerificationReport("corner", tolerance=tol, details={"support": k})
    for m in range(min(k, size), size + 1):
        val = joint_cf_contraction(params, corner_approx(S, m), A, B)
        report.add(m, val, ref, abs(val - ref))
    return report


def _rel(a: complex, b: complex) -> float:
    d = abs(a - b)
    return d / abs(b) if abs(b) > 0 else d


def verify_marginals(params: PickrellParams, S, A, B, tol: float = 1e-12) -> VerificationReport:
    """Both pushforwards of the coupling must reproduce the measure."""
    S = _mat(S)
    report = VerificationReport("marginals", tolerance=tol)
    zA = np.zeros_like(as_hermitian(A))
    zB = np.zeros_like(as_hermitian(B))
    left, chiA = joint_cf_contraction(params, S, A, zB), ergodic_cf(params, A)
    right, chiB = joint_cf_contraction(params, S, zA, B), ergodic_cf(params, B)
    report.add(0, left, chiA, _rel(left, chiA))
    report.add(1, right, chiB, _rel(right, chiB))
    return report


def verify_gram(S, tol: float = EXACT_TOL) -> VerificationReport:
    """Smallest eigenvalue of the gram matrix; fails when it is negative."""
    S = _mat(S)
    lo = float(np.linalg.eigvalsh(as_hermitian(gram_matrix(S))).min())
    nrm = operator_norm(S)
    report = VerificationReport("gram", tolerance=tol, details={
        "min_eigenvalue": lo,
        "operator_norm": nrm,
        "is_contraction": nrm <= 1 + NORM_SLACK,
        "is_psd": lo >= -tol,
    })
    report.add(0, lo, 0.0, max(0.0, -lo))
    return report


def verify_dilation(S, m_values=(), tol: float = 1e-12) -> VerificationReport:
    S = _mat(S)
    alpha = S.shape[0]
    report = VerificationReport("dilation", tolerance=tol)
    nrm = operator_norm(S)
    if nrm > 1 + NORM_SLACK:
        report.details["error"] = f"not a contraction: operator norm {nrm:.17g}"
        report.add(0, nrm, 1.0, nrm - 1.0)
        return report
    D = unitary_dilation(S).matrix
    u, w = D[:alpha, :alpha], D[alpha:, :alpha]
    report.add("dilation", unitarity_error(D), 0.0, unitarity_error(D))
    defect = operator_norm(u.conj().T @ u + w.conj().T @ w - np.eye(alpha))
    report.add("column_defect", defect, 0.0, defect)
    report.add("corner", float(np.max(np.abs(u - S))), 0.0, float(np.max(np.abs(u - S))))
    for m in m_values:
        U = embed_dilation(S, m, 2 * alpha + 2 * m)
        err = unitarity_error(U)
        report.add(f"U_{m}", err, 0.0, err)
    return report


def composition_factors(S, T, m: int, m2: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Unitaries ``U = U_m(S)`` and ``V`` embedding ``T`` whose auxiliary
    coordinates start after those used by ``U``.  The corner of ``U @ V``
    is then ``S @ T`` with zeros around it."""
    S, T = _mat(S), _mat(T)
    alpha = max(S.shape[0], T.shape[0])
    S, T = pad(S, alpha), pad(T, alpha)
    need = 3 * alpha + 2 * m + m2
    if n < need:
        raise DimensionError(f"working size {n} too small for composition, need {need}")
    U = embed_dilation(S, m, n)
    V = embed_dilation(T, m2, n, aux_start=2 * alpha + 2 * m)
    return U, V


def compose_check(params: PickrellParams, S, T, A, B, cfg: SampleConfig, m: int, m2: int,
                  tol: float | None = None) -> VerificationReport:
    """Push samples through ``S`` then ``T`` and compare with ``F(S @ T | A, B)``.

    When ``S`` and ``T`` are both unitary the composition is deterministic:
    every sample satisfies ``tr AX + tr BZ = tr (A + P B P*) X`` with
    ``P = S @ T``, checked to ``tol`` (default 1e-10).  Otherwise the
    empirical joint characteristic function of ``(X, Z)`` is compared with the
    closed form in standard errors (``tol`` defaults to 4).
    """
    S, T = _mat(S), _mat(T)
    alpha = max(S.shape[0], T.shape[0])
    S, T = pad(S, alpha), pad(T, alpha)
    _, beta = _overhang(S, A, B)
    if min(m, m2) < beta:
        raise ValueError(f"m={m}, m2={m2} must both be at least beta={beta}")
    n = cfg.dim
    A, B = as_hermitian(A), as_hermitian(B)
    if max(A.shape[0], B.shape[0]) > n:
        raise DimensionError("A, B exceed the working size")
    A, B = pad(A, n), pad(B, n)
    U, V = composition_factors(S, T, m, m2, n)
    W = U @ V
    P = S @ T
    closed = joint_cf_contraction(params, P, A, B)
    algebraic = joint_cf_unitary(params, W, A, B)
    details = {
        "order": "ST",
        "working_size": n,
        "composed_unitary_cf": [algebraic.real, algebraic.imag],
        "algebraic_deviation": abs(algebraic - closed),
        "reversed_order_deviation": abs(algebraic - joint_cf_contraction(params, T @ S, A, B)),
    }
    unitary = unitarity_error(S) <= EXACT_TOL and unitarity_error(T) <= EXACT_TOL
    if unitary:
        report = VerificationReport("compose", tolerance=EXACT_TOL if tol is None else tol,
                                    seed=cfg.seed, details={**details, "mode": "exact"})
        report.add("closed_form", algebraic, closed, abs(algebraic - closed))
        Pn = pad(P, n)
        target = A + Pn @ B @ Pn.conj().T
        worst = 0.0
        for X, Y in iter_coupled(params, U, cfg.seed, cfg.count):
            Z = V.conj().T @ Y @ V
            got = _pair_phases(A, B, X, Z)
            want = np.einsum("ij,sji->s", target, X).real
            worst = max(worst, float(np.max(np.abs(got - want))))
        report.add("samples", worst, 0.0, worst)
        return report

    report = VerificationReport("compose", tolerance=Z_MAX if tol is None else tol,
                                seed=cfg.seed, details={**details, "mode": "statistical"})
    phases = []
    for X, Y in iter_coupled(params, U, cfg.seed, cfg.count):
        Z = V.conj().T @ Y @ V
        phases.append(_pair_phases(A, B, X, Z))
    est, se = cf_estimate(np.concatenate(phases))
    z = abs(est - closed) / se if se > 0 else (0.0 if est == closed else np.inf)
    report.details["stderr"] = se
    report.add("mc", est, closed, z)
    return report
