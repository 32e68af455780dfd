import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from wishart_pickrell import DimensionError
from wishart_pickrell.linalg import pad, random_unitary
from wishart_pickrell.measure import (
    PickrellParams,
    SampleConfig,
    ergodic_cf,
    ergodic_cf_summable,
    mc_cf,
    sample_truncated,
)

from _helpers import cf_by_eigenvalues, random_hermitian


def wishart_cf_by_quadrature(lam, a):
    """E exp(i lam a (|g|^2 - 1)) with |g|^2 ~ Exp(1), integrated numerically."""
    f = lambda t, part: part(np.exp(-t) * np.exp(1j * lam * a * (t - 1)))
    re = integrate.quad(f, 0, np.inf, args=(np.real,), limit=200, epsabs=1e-13)[0]
    im = integrate.quad(f, 0, np.inf, args=(np.imag,), limit=200, epsabs=1e-13)[0]
    return complex(re, im)


params_strategy = st.builds(
    PickrellParams,
    gamma1=st.floats(0, 2),
    gamma2=st.floats(-1, 1),
    lambdas=st.lists(st.floats(-2, 2).filter(lambda x: abs(x) > 1e-3), max_size=5).map(tuple),
)


class TestParams:
    def test_defaults(self):
        p = PickrellParams()
        assert p.gamma1 == 0 and p.gamma2 == 0 and p.lambdas == ()

    @pytest.mark.parametrize("kwargs", [{"gamma1": -1.0}, {"lambdas": (0.5, 0.0)}, {"gamma2": np.inf}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            PickrellParams(**kwargs)

    def test_sample_config_bounds(self):
        with pytest.raises(ValueError):
            SampleConfig(dim=0, seed=1, count=1)
        with pytest.raises(ValueError):
            SampleConfig(dim=1, seed=2**64, count=1)


class TestErgodicCF:
    def test_zero_argument(self):
        assert ergodic_cf(PickrellParams(1.3, -0.2, (0.5, 2.0)), np.zeros((3, 3))) == 1

    def test_gaussian_factor(self):
        A = np.diag([1.0, 0.0, 0.0])
        assert ergodic_cf(PickrellParams(gamma1=1.0), A) == pytest.approx(np.exp(-0.5), abs=1e-15)

    def test_single_wishart_factor_against_quadrature(self):
        value = ergodic_cf(PickrellParams(lambdas=(1.0,)), [[0.5]])
        assert value == pytest.approx(np.exp(-0.5j) / (1 - 0.5j), abs=1e-15)
        assert abs(value - wishart_cf_by_quadrature(1.0, 0.5)) < 1e-9

    def test_matches_eigenvalue_form(self, rng):
        params = PickrellParams(0.7, 0.4, (0.5, -1.5, 0.2))
        for n in (1, 3, 6):
            A = random_hermitian(rng, n)
            ref = cf_by_eigenvalues(params, A)
            assert abs(ergodic_cf(params, A) - ref) <= 1e-12 * max(abs(ref), 1e-300)

    def test_summable_form(self, rng):
        params = PickrellParams(0.0, 0.0, (1.0, -2.0))
        A = random_hermitian(rng, 3)
        a, b = ergodic_cf(params, A), ergodic_cf_summable(params, A)
        assert abs(a - b) <= 1e-12 * abs(a)
        assert ergodic_cf_summable(params, np.zeros((2, 2))) == 1

    def test_summable_form_without_lambdas(self, rng):
        params = PickrellParams(0.8, 0.3)
        A = random_hermitian(rng, 4)
        assert ergodic_cf_summable(params, A) == ergodic_cf(params, A)


@settings(max_examples=80, deadline=None)
@given(params=params_strategy, seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5))
def test_cf_properties(params, seed, n):
    rng = np.random.default_rng(seed)
    A = random_hermitian(rng, n)
    chi = ergodic_cf(params, A)
    assert abs(chi) <= 1 + 1e-12
    assert abs(np.conj(chi) - ergodic_cf(params, -A)) <= 1e-14
    g = random_unitary(n, rng)
    rotated = ergodic_cf(params, g @ A @ g.conj().T)
    assert abs(rotated - chi) <= 1e-10 * max(abs(chi), 1e-300)
    # zero blocks change only the summation order inside tr
    assert abs(ergodic_cf(params, pad(A, n + 3)) - chi) <= 1e-15
    summable = ergodic_cf_summable(params, A)
    assert abs(summable - chi) <= 1e-12 * max(abs(chi), 1e-300)


class TestSampler:
    def test_point_mass(self):
        X = sample_truncated(PickrellParams(0.0, 5.0), SampleConfig(dim=3, seed=1, count=4))
        assert np.array_equal(X, np.broadcast_to(5 * np.eye(3), X.shape))

    def test_deterministic_per_seed(self):
        p = PickrellParams(1.0, 0.1, (0.5,))
        a = sample_truncated(p, SampleConfig(4, 99, 50))
        b = sample_truncated(p, SampleConfig(4, 99, 50))
        c = sample_truncated(p, SampleConfig(4, 100, 50))
        assert np.array_equal(a, b) and not np.allclose(a, c)

    def test_centered_rank_one(self):
        N = 100_000
        X = sample_truncated(PickrellParams(lambdas=(1.0,)), SampleConfig(1, 3, N))[:, 0, 0]
        assert np.max(np.abs(X.imag)) == 0
        # |g|^2 - 1 with |g|^2 ~ Exp(1): mean 0, variance 1
        assert abs(X.real.mean()) < 3 / np.sqrt(N)
        assert np.all(X.real >= -1)

    def test_mean_trace(self):
        N = 100_000
        X = sample_truncated(PickrellParams(1.0, 0.3, (0.5, -0.25)), SampleConfig(4, 5, N))
        t = np.trace(X, axis1=1, axis2=2).real
        assert abs(t.mean() - 1.2) < 3 * t.std(ddof=1) / np.sqrt(N)

    def test_gaussian_normalization(self, rng):
        N = 100_000
        A = random_hermitian(rng, 3)
        X = sample_truncated(PickrellParams(gamma1=0.7), SampleConfig(3, 8, N))
        t = np.einsum("ij,sji->s", A, X).real
        expected = 0.7 * np.trace(A @ A).real
        # sample variance of a Gaussian has relative sd sqrt(2/N)
        assert abs(t.var(ddof=1) / expected - 1) < 4 * np.sqrt(2 / N)

    def test_corner_consistency(self):
        p = PickrellParams(0.5, 0.1, (0.5, 0.25))
        big = sample_truncated(p, SampleConfig(6, 21, 200))
        small = sample_truncated(p, SampleConfig(2, 21, 200))
        assert np.max(np.abs(big[:, :2, :2] - small)) < 1e-15


class TestMonteCarlo:
    def test_zero_argument(self):
        est, se = mc_cf(PickrellParams(1.0, 0.5, (0.5,)), np.zeros((2, 2)), SampleConfig(3, 1, 1000))
        assert est == 1 and se == 0

    def test_gaussian(self):
        est, se = mc_cf(PickrellParams(gamma1=1.0), [[1.0]], SampleConfig(1, 2, 100_000))
        assert abs(est - np.exp(-0.5)) < 3 * se

    def test_single_wishart(self):
        params = PickrellParams(lambdas=(1.0,))
        est, se = mc_cf(params, [[0.5]], SampleConfig(1, 4, 100_000))
        assert abs(est - ergodic_cf(params, [[0.5]])) < 3 * se

    def test_mixed(self, rng):
        params = PickrellParams(0.5, 0.1, (0.5, 0.25, 0.125))
        A = random_hermitian(rng, 3)
        est, se = mc_cf(params, A, SampleConfig(5, 6, 100_000))
        assert abs(est - ergodic_cf(params, A)) < 4 * se

    def test_corner_supported_argument(self, rng):
        params = PickrellParams(0.5, 0.1, (0.5, 0.25))
        A = random_hermitian(rng, 2)
        small = mc_cf(params, A, SampleConfig(2, 6, 5000))
        big = mc_cf(params, A, SampleConfig(7, 6, 5000))
        assert abs(small[0] - big[0]) < 1e-12 and abs(small[1] - big[1]) < 1e-12

    def test_dimension_too_small(self):
        with pytest.raises(DimensionError):
            mc_cf(PickrellParams(), np.eye(3), SampleConfig(2, 1, 10))

    def test_reproducible(self, rng):
        params = PickrellParams(0.5, 0.0, (0.5,))
        A = random_hermitian(rng, 2)
        assert mc_cf(params, A, SampleConfig(3, 9, 2000)) == mc_cf(params, A, SampleConfig(3, 9, 2000))
