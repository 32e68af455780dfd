import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wishart_pickrell.linalg import (
    BlockUnitary,
    DimensionError,
    as_hermitian,
    build_Um,
    determinant,
    embed_dilation,
    is_hermitian,
    operator_norm,
    pad,
    psd_sqrt,
    random_unitary,
    support_size,
    unitarity_error,
    unitary_dilation,
)

from _helpers import random_contraction, random_matrix


def leibniz_det(M):
    n = M.shape[0]
    total = 0j
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        total += (-1) ** inversions * np.prod([M[i, perm[i]] for i in range(n)])
    return total


class TestIsHermitian:
    def test_identity(self):
        assert is_hermitian(np.eye(3), 0.0)

    def test_symmetric_imaginary_is_not_hermitian(self):
        assert not is_hermitian([[0, 1j], [1j, 0]], 1e-12)

    def test_conjugate_symmetric(self):
        assert is_hermitian([[1, 2 + 1j], [2 - 1j, 3]], 0.0)

    def test_symmetrization_is_exact(self, rng):
        H = as_hermitian(random_matrix(rng, 5))
        assert np.array_equal(H, H.conj().T)


class TestDeterminant:
    def test_identity(self):
        assert determinant(np.eye(3)) == pytest.approx(1.0)

    def test_diagonal(self):
        assert determinant(np.diag([1 + 1j, 2])) == pytest.approx(2 + 2j)

    def test_matches_permutation_expansion(self, rng):
        M = random_matrix(rng, 5)
        ref = leibniz_det(M)
        assert abs(determinant(M) - ref) <= 1e-12 * abs(ref)

    def test_singular(self):
        assert abs(determinant([[1, 2], [2, 4]])) < 1e-14

    @pytest.mark.parametrize("n,k", [(5, 3), (5, 7), (4, 1)])
    def test_sylvester_identity(self, rng, n, k):
        X = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
        Y = rng.normal(size=(k, n)) + 1j * rng.normal(size=(k, n))
        X, Y = 0.3 * X, 0.3 * Y
        left = determinant(np.eye(n) - X @ Y)
        right = determinant(np.eye(k) - Y @ X)
        assert abs(left - right) <= 1e-10 * abs(left)


class TestOperatorNorm:
    def test_zero(self):
        assert operator_norm(np.zeros((3, 3))) == 0.0

    def test_unitary(self, rng):
        assert operator_norm(random_unitary(4, rng)) == pytest.approx(1.0, abs=1e-10)

    def test_diagonal(self):
        assert operator_norm(np.diag([0.3, -0.9])) == pytest.approx(0.9, rel=1e-10)


class TestPsdSqrt:
    def test_identity(self):
        assert np.allclose(psd_sqrt(np.eye(3)), np.eye(3), atol=1e-14)

    def test_diagonal(self):
        assert np.allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)

    def test_square_recovers_input(self, rng):
        G = random_matrix(rng, 6)
        H = G.conj().T @ G
        R = psd_sqrt(H)
        assert is_hermitian(R, 0.0)
        assert np.linalg.eigvalsh(R).min() >= -1e-12
        assert operator_norm(R @ R - H) <= 1e-10 * (1 + operator_norm(H))
        assert operator_norm(R @ H - H @ R) <= 1e-9 * operator_norm(H)

    def test_tiny_negative_eigenvalue_is_clamped(self):
        R = psd_sqrt(np.diag([1.0, -1e-12]))
        assert np.allclose(R, np.diag([1.0, 0.0]))

    def test_indefinite_fails(self):
        with pytest.raises(ValueError):
            psd_sqrt(np.diag([1.0, -1e-3]))


class TestUnitaryDilation:
    def test_scalar(self):
        U = unitary_dilation([[0.6]])
        assert np.allclose(U.matrix, [[0.6, 0.8], [0.8, -0.6]], atol=1e-15)
        assert U.layout == (1, 1)

    def test_identity(self):
        U = unitary_dilation(np.eye(2)).matrix
        expected = np.block([[np.eye(2), np.zeros((2, 2))], [np.zeros((2, 2)), -np.eye(2)]])
        assert np.allclose(U, expected, atol=1e-15)

    @pytest.mark.parametrize("norm", [0.3, 0.9, 1.0])
    def test_random_contraction(self, rng, norm):
        u = random_contraction(rng, 3, norm)
        U = unitary_dilation(u).matrix
        assert unitarity_error(U) <= 1e-12
        assert np.array_equal(U[:3, :3], u)
        w = U[3:, :3]
        assert operator_norm(u.conj().T @ u + w.conj().T @ w - np.eye(3)) <= 1e-10

    def test_blocks_are_defect_roots(self, rng):
        u = random_contraction(rng, 3, 0.7)
        U = unitary_dilation(u).matrix
        assert np.allclose(U[:3, 3:], psd_sqrt(np.eye(3) - u @ u.conj().T), atol=1e-12)
        assert np.allclose(U[3:, :3], psd_sqrt(np.eye(3) - u.conj().T @ u), atol=1e-12)
        assert np.array_equal(U[3:, 3:], -u.conj().T)

    def test_rejects_non_contraction(self):
        with pytest.raises(ValueError):
            unitary_dilation([[1.2]])


class TestBuildUm:
    def test_dilation_of_one(self):
        U = build_Um([[1.0]], 1, 4)
        expected = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, -1]], dtype=complex)
        assert np.allclose(U.matrix, expected, atol=1e-15)
        assert U.layout == (1, 1, 1, 1, 0)

    def test_m_zero_is_dilation(self):
        assert np.allclose(build_Um([[0.6]], 0, 2).matrix, unitary_dilation([[0.6]]).matrix)

    def test_block_positions(self, rng):
        a, m, n = 2, 3, 12
        u = random_contraction(rng, a, 0.8)
        U = build_Um(u, m, n).matrix
        D = unitary_dilation(u).matrix
        z = slice(a + 2 * m, 2 * a + 2 * m)
        assert np.array_equal(U[:a, :a], u)
        assert np.array_equal(U[:a, z], D[:a, a:])
        assert np.array_equal(U[z, :a], D[a:, :a])
        assert np.array_equal(U[z, z], D[a:, a:])
        assert np.array_equal(U[a:a + m, a + m:a + 2 * m], np.eye(m))
        assert np.array_equal(U[a + m:a + 2 * m, a:a + m], np.eye(m))
        assert np.array_equal(U[2 * a + 2 * m:, 2 * a + 2 * m:], np.eye(n - 2 * a - 2 * m))

    def test_random_unitary(self, rng):
        u = random_contraction(rng, 2, 0.9)
        U = build_Um(u, 3, 10)
        assert unitarity_error(U.matrix) <= 1e-12
        assert np.array_equal(U.matrix[:2, :2], u)

    def test_too_small(self):
        with pytest.raises(DimensionError):
            build_Um([[0.5]], 2, 5)

    def test_embedding_with_shifted_auxiliary_block(self, rng):
        u = random_contraction(rng, 2, 0.9)
        U = embed_dilation(u, 2, 14, aux_start=8)
        assert unitarity_error(U) <= 1e-12
        assert np.array_equal(U[2:4, 8:10], np.eye(2))
        assert np.all(U[2:4, 4:8] == 0)


def test_block_unitary_rejects_non_unitary():
    with pytest.raises(ValueError):
        BlockUnitary(np.diag([1.0, 0.5]), (1, 1))


def test_pad_and_support():
    M = np.zeros((5, 5))
    M[2, 1] = 1.0
    assert support_size(M) == 3
    assert support_size(np.zeros((4, 4))) == 0
    P = pad([[1, 2], [3, 4]], 4)
    assert P.shape == (4, 4) and P[3, 3] == 0 and P[1, 0] == 3
    with pytest.raises(DimensionError):
        pad(np.eye(3), 2)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5), norm=st.sampled_from([0.0, 0.3, 0.9, 1.0]))
def test_dilation_unitarity_property(seed, n, norm):
    rng = np.random.default_rng(seed)
    u = random_contraction(rng, n, norm) if norm > 0 else np.zeros((n, n))
    U = unitary_dilation(u).matrix
    assert unitarity_error(U) <= 1e-12
    w = U[n:, :n]
    assert operator_norm(u.conj().T @ u + w.conj().T @ w - np.eye(n)) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6), k=st.integers(1, 6))
def test_sylvester_property(seed, n, k):
    rng = np.random.default_rng(seed)
    X = 0.4 * (rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k)))
    Y = 0.4 * (rng.normal(size=(k, n)) + 1j * rng.normal(size=(k, n)))
    left = determinant(np.eye(n) - X @ Y)
    right = determinant(np.eye(k) - Y @ X)
    assert abs(left - right) <= 1e-10 * max(abs(left), 1e-300)


def test_dilation_of_unitary_is_block_diagonal(rng):
    u = random_unitary(3, rng)
    D = unitary_dilation(u).matrix
    assert np.max(np.abs(D[:3, 3:])) == 0 and np.max(np.abs(D[3:, :3])) == 0
