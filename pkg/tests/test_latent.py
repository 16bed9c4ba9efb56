from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from hyperwalk.core import all_states, popcounts
from hyperwalk.exceptions import ConfigError, LengthMismatch
from hyperwalk.latent import DeFinetti, ExplicitPmf, ExtremePoint, IidTheta, from_config, hamming_pmf, sample_z


def test_iid_hamming_is_binomial():
    assert np.allclose(hamming_pmf(IidTheta(0.3), 6), stats.binom.pmf(range(7), 6, 0.3))
    exact = IidTheta(Fraction(1, 3)).hamming_pmf(3)
    assert list(exact) == [Fraction(8, 27), Fraction(12, 27), Fraction(6, 27), Fraction(1, 27)]


def test_beta_mixture_is_beta_binomial_and_exact_agrees():
    h = DeFinetti.beta(2, 3).hamming_pmf(5)
    assert np.allclose(h, stats.betabinom.pmf(range(6), 5, 2, 3))
    exact = DeFinetti.beta(2, 3).hamming_pmf(5)
    assert np.isclose(float(sum(exact)), 1.0)


def test_beta_one_one_is_uniform_on_weights():
    # Beta(1,1) mixing gives a uniform Hamming-weight law
    assert np.allclose(DeFinetti.beta(1, 1).hamming_pmf(7), 1 / 8)


def test_grid_mixture_moments():
    m = DeFinetti.from_grid([0.2, 0.7], [0.4, 0.6])
    assert m.theta_moment(1) == pytest.approx(0.5)
    assert m.theta_moment(2) == pytest.approx(0.4 * 0.04 + 0.6 * 0.49)
    cov = m.covariance(3)
    assert cov[0, 1] == pytest.approx(m.theta_moment(2) - 0.25)


def test_extreme_point_samples_have_exactly_m_ones():
    rng = np.random.default_rng(3)
    z, theta = ExtremePoint(2).sample(rng, 4, 500)
    assert theta is None and np.all(z.sum(1) == 2)
    # uniform placement: every coordinate is used about half the time
    assert np.allclose(z.mean(0), 0.5, atol=0.07)
    assert list(ExtremePoint(3).hamming_pmf(5)) == [0, 0, 0, 1, 0, 0]


def test_extreme_point_too_many_ones():
    with pytest.raises(LengthMismatch):
        ExtremePoint(5).sample(np.random.default_rng(0), 4)


def test_explicit_pmf_validation():
    with pytest.raises(ConfigError):
        ExplicitPmf(np.array([0.5, 0.6]))
    with pytest.raises(ConfigError):
        ExplicitPmf(np.array([1.2, -0.2]))


def test_explicit_pmf_from_mapping_and_point_mass():
    m = ExplicitPmf.from_mapping(2, {"01": Fraction(1, 2), "10": Fraction(1, 2)})
    assert not m.exchangeable and m.exact
    assert list(m.hamming_pmf(2)) == [0, 1, 0]
    assert list(m.coordinate_means(2)) == [Fraction(1, 2), Fraction(1, 2)]
    assert m.covariance(2)[0, 1] == Fraction(-1, 4)
    pm = ExplicitPmf.point_mass("101")
    assert pm.probs[5] == 1


def test_subset_pmf_spreads_weight_mass_evenly():
    m = DeFinetti.beta(2, 2)
    pmf = m.subset_pmf(4).astype(float)
    h = m.hamming_pmf(4).astype(float)
    for k in range(5):
        block = pmf[popcounts(4) == k]
        assert np.allclose(block, block[0]) and np.isclose(block.sum(), h[k])


@pytest.mark.parametrize("model", [IidTheta(0.3), DeFinetti.beta(2, 5), ExtremePoint(2),
                                   ExplicitPmf(np.random.default_rng(1).dirichlet(np.ones(16)))])
def test_moments_agree_with_subset_table(model):
    n = 4
    pmf = np.asarray(model.subset_pmf(n), dtype=float)
    s = all_states(n).astype(float)
    mean = s.T @ pmf
    cov = (s * pmf[:, None]).T @ s - np.outer(mean, mean)
    assert np.allclose(np.asarray(model.coordinate_means(n), dtype=float), mean)
    assert np.allclose(np.asarray(model.covariance(n), dtype=float), cov)


@pytest.mark.parametrize("model", [IidTheta(0.3), DeFinetti.beta(2, 5), ExtremePoint(2),
                                   DeFinetti.from_grid([0.1, 0.8])])
def test_sampled_hamming_law(model):
    rng = np.random.default_rng(7)
    z, _ = model.sample(rng, 6, 20000)
    counts = np.bincount(z.sum(1), minlength=7)
    expected = np.asarray(model.hamming_pmf(6), dtype=float) * 20000
    keep = expected > 5
    stat = np.sum((counts[keep] - expected[keep]) ** 2 / expected[keep])
    assert stats.chi2.sf(stat, max(keep.sum() - 1, 1)) > 1e-3


def test_sample_z_reports_theta():
    state, draw = sample_z(DeFinetti.beta(2, 2), 10, np.random.default_rng(0))
    assert state.n == 10 and 0 < draw.theta < 1
    state, draw = sample_z(ExtremePoint(1), 10, np.random.default_rng(0))
    assert draw is None and state.hamming == 1


@pytest.mark.parametrize("config,kind", [
    ({"variant": "iid", "theta": 0.2}, IidTheta),
    ({"variant": "definetti", "a": 2, "b": 3}, DeFinetti),
    ({"variant": "definetti", "grid": [0.2, 0.8], "weights": [0.5, 0.5]}, DeFinetti),
    ({"variant": "extreme", "M": 3}, ExtremePoint),
    ({"variant": "explicit", "n": 2, "states": {"01": 0.25, "11": 0.75}}, ExplicitPmf),
])
def test_from_config_round_trip(config, kind):
    model = from_config(config)
    assert isinstance(model, kind)
    again = from_config(model.to_config())
    n = 2 if kind is ExplicitPmf else 4
    assert np.allclose(np.asarray(again.hamming_pmf(n), dtype=float), np.asarray(model.hamming_pmf(n), dtype=float))


def test_from_config_errors():
    with pytest.raises(ConfigError):
        from_config({"theta": 0.2})
    with pytest.raises(ConfigError):
        from_config({"variant": "nope"})
