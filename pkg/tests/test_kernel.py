from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperwalk.core import HyperState, TransitionCounts, all_states, validate_params
from hyperwalk.exceptions import InvalidCounts, KappaOutOfRange, NonStochastic, NotRealizable, TooLarge
from hyperwalk.kernel import (KernelSpectrum, coordinate_chain_matrix, coordinate_stationary_param, full_kernel,
                              hamming_kernel, kernel_entry_exchangeable, product_bernoulli, r_coefficients,
                              single_coordinate_kernel, spectrum_from_latent, z_law_from_kernel)
from hyperwalk.latent import DeFinetti, ExplicitPmf, ExtremePoint, IidTheta
from hyperwalk.oracle import oracle_kernel, oracle_lump_hamming


def kernel_of(model, phi, gamma, n):
    p = validate_params(phi, gamma, n)
    return full_kernel(spectrum_from_latent(model, p)), p


def test_iid_at_alpha_gives_independence_kernel():
    # latent frequency equal to alpha makes every nontrivial eigenvalue vanish
    k, p = kernel_of(IidTheta(0.6), 0.7, 0.6, 4)
    assert np.allclose(k.matrix, product_bernoulli(4, 0.7)[None, :], atol=1e-14)


def test_no_resampling_at_equal_parameters_is_identity():
    k, _ = kernel_of(ExplicitPmf.point_mass("000", exact=False), 0.6, 0.6, 3)
    assert np.allclose(k.matrix, np.eye(8), atol=1e-14)
    exact, _ = kernel_of(ExplicitPmf.point_mass("0"), Fraction(3, 5), Fraction(3, 5), 1)
    assert exact.matrix[0, 0] == 1


@pytest.mark.parametrize("phi,gamma", [(0.7, 0.6), (0.6, 0.7), (0.8, 0.3)])
def test_matches_oracle_small_battery(phi, gamma):
    rng = np.random.default_rng(5)
    for model in (IidTheta(0.3), DeFinetti.beta(2, 3), ExtremePoint(2), ExplicitPmf(rng.dirichlet(np.ones(8)))):
        k, p = kernel_of(model, phi, gamma, 3)
        assert np.abs(k.matrix - oracle_kernel(model, p).matrix).max() < 1e-12
        assert np.allclose(k.matrix.sum(1), 1, atol=1e-14)


def test_exact_mode_is_exact():
    p = validate_params(Fraction(7, 10), Fraction(3, 5), 3)
    model = ExplicitPmf.from_mapping(3, {"011": Fraction(1, 3), "100": Fraction(1, 6), "111": Fraction(1, 2)})
    k = full_kernel(spectrum_from_latent(model, p))
    assert k.exact
    assert all(v == w for v, w in zip(k.matrix.reshape(-1), oracle_kernel(model, p).matrix.reshape(-1)))
    assert all(s == 1 for s in k.matrix.sum(1))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.floats(0.3, 0.95), st.floats(0.3, 0.95), st.integers(0, 10**6))
def test_random_explicit_laws_match_oracle(n, phi, gamma, seed):
    if phi + gamma < 1:
        phi, gamma = 1 - phi + 0.05 * (1 - phi), 1 - gamma + 0.05 * (1 - gamma)
    p = validate_params(min(phi, 0.99), min(gamma, 0.99), n)
    model = ExplicitPmf(np.random.default_rng(seed).dirichlet(np.ones(2**n)))
    k = full_kernel(spectrum_from_latent(model, p))
    assert np.abs(k.matrix - oracle_kernel(model, p).matrix).max() < 1e-12
    assert np.min(k.matrix) >= 0


def test_exchangeable_entry_matches_dense_kernel():
    model = DeFinetti.beta(2, 3)
    k, p = kernel_of(model, 0.7, 0.6, 5)
    spectrum = spectrum_from_latent(model, p)
    states = all_states(5)
    for i in (0, 7, 19, 31):
        for j in (0, 5, 22, 30):
            x, y = HyperState(states[i]), HyperState(states[j])
            stats = (x.hamming, y.hamming, x.inner(y))
            assert kernel_entry_exchangeable(stats, spectrum) == pytest.approx(k.matrix[i, j], abs=1e-14)


def test_exchangeable_entry_exact():
    p = validate_params(Fraction(3, 5), Fraction(7, 10), 4)
    model = IidTheta(Fraction(1, 4))
    spectrum = spectrum_from_latent(model, p)
    dense = oracle_kernel(model, p).matrix
    x, y = HyperState.from_string("1100"), HyperState.from_string("1010")
    assert kernel_entry_exchangeable(TransitionCounts(1, 1, 1, 1), spectrum) == dense[x.index, y.index]


def test_r_coefficients_and_invalid_counts():
    p = validate_params(0.7, 0.6, 4)
    r = r_coefficients((2, 2, 1), p)
    assert r[0] == pytest.approx(1.0)
    with pytest.raises(InvalidCounts):
        r_coefficients((3, 3, 4), p)


def test_hamming_kernel_matches_lumped_oracle():
    model = DeFinetti.beta(2, 3)
    p = validate_params(0.7, 0.6, 6)
    h = hamming_kernel(spectrum_from_latent(model, p))
    assert np.abs(h - oracle_lump_hamming(oracle_kernel(model, p)).matrix).max() < 1e-12


@pytest.mark.parametrize("phi,gamma", [(Fraction(7, 10), Fraction(3, 5)), (Fraction(3, 5), Fraction(7, 10))])
def test_hamming_kernel_float_precision_at_moderate_n(phi, gamma):
    n = 40
    model = DeFinetti.from_grid([Fraction(1, 5), Fraction(2, 3)])
    exact = hamming_kernel(spectrum_from_latent(model, validate_params(phi, gamma, n))).astype(float)
    approx = hamming_kernel(spectrum_from_latent(DeFinetti.from_grid([0.2, 2 / 3]),
                                                 validate_params(float(phi), float(gamma), n)))
    assert np.abs(exact - approx).max() < 1e-12
    assert np.allclose(approx.sum(1), 1, atol=1e-13) and approx.min() >= 0


def test_large_hamming_kernel_is_stochastic():
    h = hamming_kernel(spectrum_from_latent(DeFinetti.beta(2, 2), validate_params(0.7, 0.6, 120)))
    assert np.allclose(h.sum(1), 1, atol=1e-12) and h.min() >= 0


def test_dense_size_cap():
    with pytest.raises(TooLarge):
        kernel_of(IidTheta(0.3), 0.7, 0.6, 13)


def test_spectrum_round_trip_and_realizability():
    p = validate_params(0.7, 0.6, 3)
    spectrum = spectrum_from_latent(IidTheta(0.3), p)
    again = KernelSpectrum.from_dict(spectrum.to_dict())
    assert np.allclose(again.values.astype(float), spectrum.values.astype(float))
    with pytest.raises(NotRealizable):
        KernelSpectrum.from_values(p, "exchangeable", [0.5, 0.1, 0.0, 0.0])
    with pytest.raises(NotRealizable):
        KernelSpectrum.from_values(p, "exchangeable", [1.0, 5.0, 5.0, 5.0])


def test_non_stochastic_eigenvalues():
    p = validate_params(0.7, 0.6, 2)
    spectrum = KernelSpectrum.from_values(p, "subset", [1.0, 8.0, 8.0, 8.0], check=False)
    with pytest.raises(NonStochastic):
        full_kernel(spectrum)


def test_single_coordinate_kernel():
    p = validate_params(0.7, 0.6, 1)
    k = single_coordinate_kernel(0.4, p)
    assert np.allclose(k.matrix.sum(1), 1)
    pi = k.stationary_param()
    assert np.allclose(np.array([1 - pi, pi]) @ k.matrix, [1 - pi, pi])
    # at kappa = 0 the coordinate is redrawn from Bernoulli(phi)
    assert single_coordinate_kernel(0.0, p).stationary_param() == pytest.approx(0.7)
    with pytest.raises(KappaOutOfRange):
        single_coordinate_kernel(2.0, p)


def test_coordinate_chain_is_the_marginal_of_the_dense_kernel():
    model = ExplicitPmf(np.random.default_rng(2).dirichlet(np.ones(8)))
    k, p = kernel_of(model, 0.8, 0.3, 3)
    chain = coordinate_chain_matrix(model, 0, p)
    states = all_states(3)
    pi = product_bernoulli(3, 0.3)
    # marginal transition of coordinate 1 from a product start is the coordinate chain
    for x in (0, 1):
        rows = states[:, 0] == x
        w = pi[rows] / pi[rows].sum()
        moved = w @ k.matrix[rows][:, states[:, 0] == 1].sum(1)
        assert moved == pytest.approx(chain[x, 1], abs=1e-12)
    m = float(model.coordinate_means(3)[0])
    q = float(coordinate_stationary_param(m, p))
    assert np.allclose(np.array([1 - q, q]) @ chain.astype(float), [1 - q, q])


@pytest.mark.parametrize("phi,gamma", [(0.7, 0.6), (0.6, 0.7), (0.55, 0.5)])
def test_z_law_round_trip(phi, gamma):
    model = ExplicitPmf(np.random.default_rng(8).dirichlet(np.ones(16)))
    k, p = kernel_of(model, phi, gamma, 4)
    assert np.abs(z_law_from_kernel(k, p) - model.probs).max() < 1e-12


def test_z_law_round_trip_exact():
    model = ExplicitPmf.from_mapping(2, {"00": Fraction(1, 5), "01": Fraction(2, 5), "11": Fraction(2, 5)})
    for phi, gamma in ((Fraction(4, 5), Fraction(1, 2)), (Fraction(1, 2), Fraction(4, 5))):
        k, p = kernel_of(model, phi, gamma, 2)
        assert list(z_law_from_kernel(k, p)) == list(model.probs)
