import numpy as np
import pytest

from src.adapter.driven.model.quadrature_resource import mmse_point, prior_key
from src.core.domain.entities.model_spec import (
    BernoulliGaussianPrior,
    DiscreteMassPrior,
)
from src.core.domain.exceptions import PriorUnsupportedError


def test_gaussian_expectation(quadrature):
    """Test E[X^2] for X ~ N(1, 4)."""
    value = quadrature.gaussian_expectation(lambda x: x**2, np.array(1.0), np.array(2.0))

    assert float(value) == pytest.approx(5.0, rel=1e-12)


def test_tanh_transfer_is_decreasing(quadrature):
    # Execute
    values = quadrature.tanh_transfer(np.array([0.0, 0.5, 2.0, 10.0, 29.0, 31.0, 40.0]))

    # Assert
    assert values[0] == pytest.approx(1.0)
    assert np.all(np.diff(values) < 0.0)
    assert values[-1] > 0.0


def test_error_to_mean_inverts_sign_error(quadrature):
    from scipy.stats import norm

    m = quadrature.error_to_mean(np.array([0.01, 0.1, 0.3]))

    np.testing.assert_allclose(norm.sf(np.sqrt(m / 2.0)), [0.01, 0.1, 0.3], rtol=1e-10)


@pytest.mark.parametrize("error, inputs", [(0.1, 5), (0.02, 3), (0.3, 7)])
def test_sign_error_matches_parity_rule(quadrature, error, inputs):
    """Test the sign product of consistent Gaussian messages follows the parity rule."""
    # Execute
    value = quadrature.sign_error_quadrature(error, inputs)

    # Assert
    assert value == pytest.approx(0.5 * (1.0 - (1.0 - 2.0 * error) ** inputs), abs=1e-7)


def test_sign_error_edge_cases(quadrature):
    assert quadrature.sign_error_quadrature(0.0, 5) == 0.0
    assert quadrature.sign_error_quadrature(0.5, 5) == 0.5
    with pytest.raises(ValueError):
        quadrature.sign_error_quadrature(0.1, 0)


def test_sign_error_monte_carlo_cross_check(quadrature):
    """Test the seeded Monte Carlo estimate is reproducible and close to quadrature."""
    # Execute
    first = quadrature.sign_error_monte_carlo(0.1, 5)
    second = quadrature.sign_error_monte_carlo(0.1, 5)

    # Assert
    assert first == second
    assert first == pytest.approx(quadrature.sign_error_quadrature(0.1, 5), abs=5e-3)


def test_mmse_at_zero_snr_is_variance():
    bernoulli = prior_key(BernoulliGaussianPrior(sparsity=0.2, variance=2.0))
    ternary = prior_key(DiscreteMassPrior(atoms=(-1.0, 0.0, 1.0), probabilities=(0.25, 0.5, 0.25)))

    assert mmse_point(bernoulli, 0.0) == pytest.approx(0.4)
    assert mmse_point(ternary, 0.0) == pytest.approx(0.5)


def test_mmse_of_gaussian_prior():
    """Test a spike with probability one has the linear estimator's error 1 / (1 + s)."""
    key = prior_key(BernoulliGaussianPrior(sparsity=1.0, variance=1.0))

    for s in (0.5, 2.0, 10.0):
        assert mmse_point(key, s) == pytest.approx(1.0 / (1.0 + s), abs=1e-8)


def test_unknown_prior_is_rejected():
    with pytest.raises(PriorUnsupportedError):
        prior_key(object())


@pytest.mark.slow
def test_psi_table(quadrature):
    """Test psi starts at one, decreases, and its tabulated inverse undoes it."""
    # Setup
    m = np.array([0.1, 1.0, 5.0, 20.0])

    # Execute
    values = quadrature.psi(m)
    restored = quadrature.psi_inverse(values)

    # Assert
    assert float(quadrature.psi(np.array(0.0))) == pytest.approx(1.0)
    assert np.all(np.diff(values) < 0.0)
    np.testing.assert_allclose(restored, m, rtol=1e-4)
    assert float(quadrature.psi_inverse(np.array(1.0))) == pytest.approx(0.0)
