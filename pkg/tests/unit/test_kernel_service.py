import numpy as np
import pytest

from src.core.domain.entities.kernel import (
    BoxcarGaussianKernel,
    BoxcarKernel,
    DiscreteKernel,
    GaussianKernel,
    KernelDocument,
    TableKernel,
)
from src.core.domain.entities.spatial_profile import SpatialProfile
from src.core.domain.exceptions import PitchMismatchError


def test_boxcar_discretization(kernel_service, boxcar):
    """Test cell integrals of the unit boxcar at pitch 1/2."""
    # Execute
    discrete = kernel_service.discretize(boxcar, 0.5)

    # Assert
    assert discrete.taps == pytest.approx((0.125, 0.25, 0.25, 0.25, 0.125))
    assert discrete.half_length == 2
    assert list(discrete.offsets) == [-2, -1, 0, 1, 2]


def test_gaussian_discretization_is_even_and_normalized(kernel_service):
    # Execute
    discrete = kernel_service.discretize(GaussianKernel(sigma=0.7), 0.05)

    # Assert
    taps = discrete.array
    assert taps.sum() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(taps, taps[::-1], atol=1e-15)
    assert taps[discrete.half_length] == taps.max()


def test_discretize_rejects_non_positive_pitch(kernel_service, boxcar):
    with pytest.raises(ValueError):
        kernel_service.discretize(boxcar, 0.0)


def test_discrete_kernel_validation():
    with pytest.raises(ValueError):
        DiscreteKernel(pitch=0.1, taps=(0.5, 0.5))
    with pytest.raises(ValueError):
        DiscreteKernel(pitch=0.1, taps=(0.2, 0.5, 0.3))


def test_convolve_keeps_constants(kernel_service, boxcar):
    """Test smoothing a constant profile with matching limits changes nothing."""
    # Setup
    kernel = kernel_service.discretize(boxcar, 0.1)
    profile = SpatialProfile(
        pitch=0.1, i_min=0, values=np.full(30, 0.4), left_limit=0.4, right_limit=0.4
    )

    # Execute
    smoothed = kernel_service.convolve(profile, kernel)

    # Assert
    np.testing.assert_allclose(smoothed.values, 0.4, atol=1e-14)
    assert smoothed.i_min == 0


def test_convolve_pads_with_limits(kernel_service, boxcar, ramp_profile):
    """Test the left end sees the left limit and the right end the right limit."""
    # Setup
    kernel = kernel_service.discretize(boxcar, 0.1)

    # Execute
    smoothed = kernel_service.convolve(ramp_profile, kernel)

    # Assert
    assert smoothed.values.size == ramp_profile.values.size
    assert np.all(np.diff(smoothed.values) >= -1e-14)
    # Taps of 1/20 up to offset 9 and 1/40 at offset 10 against values k/10
    assert smoothed.values[0] == pytest.approx(0.25)
    assert smoothed.values[-1] == pytest.approx(0.75)


def test_convolve_rejects_pitch_mismatch(kernel_service, boxcar, ramp_profile):
    kernel = kernel_service.discretize(boxcar, 0.05)

    with pytest.raises(PitchMismatchError):
        kernel_service.convolve(ramp_profile, kernel)


def test_smooth_continuum_matches_grid_convolution(kernel_service, boxcar, ramp_profile):
    """Test the continuous smoothing agrees with the discrete one at grid points."""
    # Setup
    kernel = kernel_service.discretize(boxcar, 0.1)

    # Execute
    discrete = kernel_service.convolve(ramp_profile, kernel).values
    continuum = kernel_service.smooth_continuum(ramp_profile, boxcar, ramp_profile.positions)

    # Assert
    np.testing.assert_allclose(continuum, discrete, atol=1e-10)


def test_boxcar_properties(boxcar):
    assert boxcar.half_width == 1.0
    assert boxcar.sup_norm == 0.5
    assert boxcar.cdf(0.0) == pytest.approx(0.5)
    assert boxcar.quantile(0.75) == pytest.approx(0.5)
    assert not boxcar.strictly_positive


def test_kernel_document_uses_alias():
    """Test a boxcar is parsed from its JSON form with the W key."""
    # Execute
    document = KernelDocument.model_validate({"kernel": {"shape": "boxcar", "W": 0.5}})

    # Assert
    assert isinstance(document.kernel, BoxcarKernel)
    assert document.kernel.half_width == 0.5
    assert document.kernel.model_dump(by_alias=True) == {"shape": "boxcar", "W": 0.5}


def test_gaussian_quantile_and_sup_norm():
    kernel = GaussianKernel(sigma=2.0)

    assert kernel.quantile(0.5) == pytest.approx(0.0, abs=1e-12)
    assert kernel.sup_norm == pytest.approx(1.0 / (2.0 * np.sqrt(2.0 * np.pi)), rel=1e-9)
    assert kernel.strictly_positive


def test_boxcar_gaussian_mollifies_boxcar():
    """Test the mollified boxcar is centered, below the boxcar peak and close to it."""
    kernel = BoxcarGaussianKernel(W=1.0, sigma=0.25)

    assert kernel.cdf(0.0) == pytest.approx(0.5)
    assert kernel.sup_norm < 0.5
    assert kernel.sup_norm == pytest.approx(0.5, abs=1e-4)
    assert kernel.pdf(1.0) == pytest.approx(0.25, abs=1e-12)


def test_table_kernel_matches_boxcar():
    """Test a two-bin flat table is the unit boxcar."""
    kernel = TableKernel(bin_width=0.5, values=(1.0, 1.0))

    assert kernel.cdf(0.5) == pytest.approx(0.75)
    assert kernel.pdf(0.2) == pytest.approx(0.5)
    assert kernel.sup_norm == pytest.approx(0.5)
    assert kernel.regular


def test_table_kernel_with_gap_is_not_regular():
    kernel = TableKernel(bin_width=0.5, values=(1.0, 0.0, 1.0))

    assert not kernel.regular
    assert kernel.cdf(-1.5) == pytest.approx(0.0)
