"""Integration tests reproducing the threshold tables of the worked examples."""
import numpy as np
import pytest

from src.adapter.driven.model.precision_adapter import CdmaAdapter
from src.core.domain.entities.model_spec import (
    BawgnExitSpec,
    BecLdpcSpec,
    DecoderStart,
    GallagerASpec,
    GallagerBSpec,
    MinSumExitSpec,
)
from src.core.domain.entities.potential_report import BoxRule, GapVerdict
from src.core.domain.exceptions import NoSaturationError


def irregular_spec(**kwargs) -> BecLdpcSpec:
    """lambda(x) = (3x + 3x^2 + 14x^50) / 20, rho(x) = x^15."""
    lam = [0.0] * 51
    lam[1], lam[2], lam[50] = 0.15, 0.15, 0.7
    rho = [0.0] * 16
    rho[15] = 1.0
    return BecLdpcSpec(lam=lam, rho=rho, **kwargs)


@pytest.mark.integration
def test_bec_uncoupled_thresholds(model_factory, threshold_service, bec_3_6):
    """Test BP thresholds of the regular and the irregular ensemble."""
    regular = threshold_service.uncoupled_threshold(model_factory.create(bec_3_6))
    irregular = threshold_service.uncoupled_threshold(model_factory.create(irregular_spec()))

    assert regular == pytest.approx(0.4294, abs=1e-3)
    assert irregular == pytest.approx(0.3531, abs=1e-3)


@pytest.mark.integration
@pytest.mark.parametrize(
    "dl, dr, expected",
    [(3, 6, 0.48814), (4, 8, 0.497741), (5, 10, 0.499486)],
)
def test_bec_coupled_thresholds(model_factory, threshold_service, dl, dr, expected):
    model = model_factory.create(BecLdpcSpec.regular(dl, dr))

    assert threshold_service.coupled_threshold(model) == pytest.approx(expected, abs=2e-4)


@pytest.mark.integration
def test_bec_coupled_threshold_by_area_bisection(model_factory, threshold_service, bec_3_6):
    """Test bisection on the box area agrees with the closed form."""
    model = model_factory.create(bec_3_6)

    bisected = threshold_service.coupled_threshold(model, bracket=(0.45, 0.53))

    assert bisected == pytest.approx(0.48814, abs=2e-4)


@pytest.mark.integration
@pytest.mark.parametrize(
    "parameter, raw, expected", [(0.45, 0.0166667, 0.03125), (0.53, -0.01, -0.0253749)]
)
def test_bec_area_gap(model_factory, potential_service, threshold_service, bec_3_6, parameter,
                      raw, expected):
    """Test the raw area gap and the area on the reached crossing box."""
    model = model_factory.create(bec_3_6)
    hf, hg = model.pair(parameter)

    assert potential_service.area_gap(hf, hg) == pytest.approx(raw, abs=1e-6)
    assert threshold_service.area_sample(model, parameter).area_gap == pytest.approx(
        expected, abs=1e-5
    )


@pytest.mark.integration
def test_irregular_ensemble_crossings(model_factory, potential_service):
    """Test the four nontrivial-or-origin crossings of the irregular ensemble."""
    # Setup
    hf, hg = model_factory.create(irregular_spec()).pair(0.4855)

    # Execute
    crossings = potential_service.crossings(hf, hg)

    # Assert
    u = [c.u for c in crossings]
    assert u[0] == 0.0 and u[-1] == 1.0
    assert u[1:-1] == pytest.approx([0.824784, 0.967733, 0.999952], abs=1e-4)
    assert all(c.v > 1.0 - 1e-7 for c in crossings if c.u > 1.0 - 1e-7)


@pytest.mark.integration
def test_irregular_ensemble_two_jump_thresholds(model_factory, threshold_service):
    """Test the lowest and highest crossing boxes balance at two different parameters."""
    model = model_factory.create(irregular_spec())

    lowest = threshold_service.coupled_threshold(model, BoxRule.LOWEST, bracket=(0.39, 0.42))
    highest = threshold_service.coupled_threshold(model, BoxRule.HIGHEST, bracket=(0.48, 0.49))

    assert lowest == pytest.approx(0.403174, abs=5e-4)
    assert highest == pytest.approx(0.4855, abs=5e-4)


@pytest.mark.integration
@pytest.mark.parametrize("dl, dr, uncoupled", [(4, 8, 0.0476), (3, 6, 0.0395)])
def test_gallager_a_does_not_saturate(model_factory, threshold_service, dl, dr, uncoupled):
    """Test Gallager A keeps its uncoupled threshold under coupling."""
    # Setup
    model = model_factory.create(GallagerASpec(dl=dl, dr=dr))

    # Execute
    found = threshold_service.uncoupled_threshold(model)
    report = threshold_service.threshold_report(model, trace_points=5)

    # Assert
    assert found == pytest.approx(uncoupled, abs=5e-4)
    assert not report.saturated
    assert report.coupled is None
    with pytest.raises(NoSaturationError):
        threshold_service.coupled_threshold(model)


@pytest.mark.integration
@pytest.mark.parametrize("parameter", [0.03, 0.045])
def test_gallager_a_below_threshold_passes_vacuously(model_factory, threshold_service, parameter):
    """Test a sample where DE reaches zero carries a passing verdict with its infinite area."""
    model = model_factory.create(GallagerASpec(dl=4, dr=8))

    sample = threshold_service.area_sample(model, parameter)

    assert sample.area_gap == float("inf")
    assert sample.verdict == GapVerdict.STRICT_GAP


@pytest.mark.integration
@pytest.mark.parametrize(
    "spec, uncoupled, coupled, tolerance",
    [
        (GallagerBSpec(dl=4, dr=10, b=3), 0.02454, 0.0333, 5e-4),
        (GallagerBSpec(dl=6, dr=12), 0.0404, 0.0555, 1e-3),
    ],
)
def test_gallager_b_thresholds(model_factory, threshold_service, spec, uncoupled, coupled,
                               tolerance):
    """Test thresholds with the recursion started from the top of the square."""
    model = model_factory.create(spec)

    assert threshold_service.uncoupled_threshold(model) == pytest.approx(uncoupled, abs=tolerance)
    assert threshold_service.coupled_threshold(model) == pytest.approx(coupled, abs=tolerance)


@pytest.mark.integration
@pytest.mark.parametrize(
    "spec, uncoupled",
    [
        (GallagerBSpec(dl=6, dr=12, b=4, start=DecoderStart.CHANNEL), 0.0341),
        (GallagerBSpec(dl=6, dr=12, start=DecoderStart.CHANNEL), 0.0396),
    ],
)
def test_gallager_b_channel_start_thresholds(model_factory, threshold_service, spec, uncoupled):
    """Test the uncoupled thresholds of the decoder started from the received bits."""
    model = model_factory.create(spec)

    assert threshold_service.uncoupled_threshold(model) == pytest.approx(uncoupled, abs=5e-4)


@pytest.mark.integration
def test_gallager_b_channel_start_never_beats_top_start(model_factory, threshold_service):
    channel = model_factory.create(GallagerBSpec(dl=6, dr=12, start=DecoderStart.CHANNEL))
    top = model_factory.create(GallagerBSpec(dl=6, dr=12))

    assert threshold_service.uncoupled_threshold(top) >= threshold_service.uncoupled_threshold(
        channel
    )


@pytest.mark.integration
@pytest.mark.slow
@pytest.mark.parametrize(
    "spec, uncoupled, coupled, tolerance",
    [
        (BawgnExitSpec.regular(3, 6), 0.42915, 0.4758, 2e-3),
        (MinSumExitSpec(dl=3, dr=6), 0.401, 0.436, 3e-3),
    ],
)
def test_gaussian_approximation_thresholds(model_factory, threshold_service, spec, uncoupled,
                                           coupled, tolerance):
    """Test the EXIT-chart tangency and balance points in entropy units."""
    model = model_factory.create(spec)

    assert threshold_service.uncoupled_threshold(model) == pytest.approx(uncoupled, abs=tolerance)
    assert threshold_service.coupled_threshold(model) == pytest.approx(coupled, abs=tolerance)


@pytest.mark.integration
@pytest.mark.slow
def test_cdma_critical_load(quadrature):
    assert CdmaAdapter.critical_load(quadrature) == pytest.approx(1.49, abs=0.02)


@pytest.mark.integration
@pytest.mark.parametrize(
    "spec, parameter",
    [
        (BecLdpcSpec.regular(3, 6), 0.45),
        (irregular_spec(), 0.4),
        (GallagerASpec(dl=4, dr=8), 0.04),
        (GallagerBSpec(dl=4, dr=10, b=3), 0.03),
        (BawgnExitSpec.regular(3, 6), 0.45),
    ],
)
def test_potential_descends_along_component_recursion(model_factory, potential_service, spec,
                                                      parameter):
    """Test phi never increases under u = hg(v), v = hf(u) from random starts."""
    # Setup
    hf, hg = model_factory.create(spec).pair(parameter)
    rng = np.random.default_rng(7)
    v = rng.uniform(0.0, 1.0, 100)
    u = np.asarray(hg.eval(v), dtype=float)
    previous = np.asarray(potential_service.phi(hf, hg, u, v), dtype=float)

    # Execute / Assert
    for _ in range(10):
        v = np.asarray(hf.eval(u), dtype=float)
        half = np.asarray(potential_service.phi(hf, hg, u, v), dtype=float)
        u = np.asarray(hg.eval(v), dtype=float)
        current = np.asarray(potential_service.phi(hf, hg, u, v), dtype=float)
        assert np.all(half <= previous + 1e-9)
        assert np.all(current <= half + 1e-9)
        previous = current
