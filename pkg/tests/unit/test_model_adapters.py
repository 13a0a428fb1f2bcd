import math

import numpy as np
import pytest

from src.adapter.driven.model.bec_adapter import BecLdpcAdapter
from src.adapter.driven.model.gallager_adapter import (
    HALF_BOX,
    GallagerAAdapter,
    GallagerBAdapter,
    admissible_thresholds,
    majority_threshold,
    variable_error,
)
from src.adapter.driven.model.gaussian_exit_adapter import BawgnExitAdapter, MinSumExitAdapter
from src.adapter.driven.model.precision_adapter import CdmaAdapter, CompressedSensingAdapter
from src.core.domain.entities.model_spec import (
    BawgnExitSpec,
    BecLdpcSpec,
    CdmaSpec,
    CompressedSensingSpec,
    DecoderStart,
    DiscreteMassPrior,
    GallagerASpec,
    GallagerBSpec,
    MinSumExitSpec,
    ModelDocument,
    ModelSpecBase,
)
from src.core.domain.exceptions import BadPolynomialError, BadThresholdBError, ConfigurationError


@pytest.mark.parametrize(
    "spec, adapter",
    [
        (BecLdpcSpec.regular(3, 6), BecLdpcAdapter),
        (GallagerASpec(dl=4, dr=8), GallagerAAdapter),
        (GallagerBSpec(dl=4, dr=10, b=3), GallagerBAdapter),
        (BawgnExitSpec.regular(3, 6), BawgnExitAdapter),
        (MinSumExitSpec(dl=3, dr=6), MinSumExitAdapter),
        (CdmaSpec(load=2.0), CdmaAdapter),
        (CompressedSensingSpec(delta=0.5), CompressedSensingAdapter),
    ],
)
def test_factory_selects_adapter(model_factory, spec, adapter):
    model = model_factory.create(spec)

    assert isinstance(model, adapter)
    assert model.family == spec.family


def test_factory_rejects_unknown_spec(model_factory):
    with pytest.raises(ConfigurationError):
        model_factory.create(ModelSpecBase())


def test_model_document_discriminates_family():
    """Test a JSON model is parsed into the spec named by its family."""
    document = ModelDocument.model_validate(
        {"model": {"family": "gallager_b", "dl": 4, "dr": 10, "b": 3}}
    )

    assert isinstance(document.model, GallagerBSpec)
    assert document.model.b == 3


def test_degree_distribution_validation():
    with pytest.raises(BadPolynomialError):
        BecLdpcSpec(lam=[0.0, 0.5, 0.4], rho=[0.0, 0.0, 1.0])
    with pytest.raises(BadPolynomialError):
        BecLdpcSpec(lam=[0.1, 0.0, 0.9], rho=[0.0, 0.0, 1.0])
    with pytest.raises(BadPolynomialError):
        BecLdpcSpec(lam=[1.0], rho=[0.0, 0.0, 1.0])


def test_gallager_b_threshold_range():
    with pytest.raises(BadThresholdBError):
        GallagerBSpec(dl=4, dr=8, b=4)
    with pytest.raises(BadThresholdBError):
        GallagerBSpec(dl=4, dr=8, b=0)


def test_bracket_must_be_ordered():
    with pytest.raises(ValueError):
        GallagerASpec(dl=4, dr=8, bracket=(0.05, 0.01))


def test_bec_pair(model_factory, bec_3_6):
    """Test h_f(1) is the erasure probability and pairs are cached per parameter."""
    # Setup
    model = model_factory.create(bec_3_6)

    # Execute
    hf, hg = model.pair(0.5)

    # Assert
    assert hf(1.0) == pytest.approx(0.5)
    assert hg(0.5) == pytest.approx(1.0 - 0.5**5)
    assert model.pair(0.5)[0] is hf
    assert model.initial_state(0.5) == pytest.approx(0.5)
    assert model.domain_map(0.5).is_identity
    with pytest.raises(ValueError):
        model.pair(1.5)


def test_variable_error_matches_gallager_a_rule():
    """Test b = dl - 1 reproduces eps(1 - (1 - y)^(dl-1)) + (1 - eps) y^(dl-1)."""
    y = np.linspace(0.0, 0.5, 11)
    eps = 0.04

    value = variable_error(y, eps, 4, 3)

    np.testing.assert_allclose(value, eps * (1.0 - (1.0 - y) ** 3) + (1.0 - eps) * y**3)


def test_gallager_b_with_top_threshold_is_gallager_a():
    # Setup
    a = GallagerAAdapter(GallagerASpec(dl=4, dr=8))
    b = GallagerBAdapter(GallagerBSpec(dl=4, dr=8, b=3))
    u = np.linspace(0.0, 1.0, 21)

    # Execute
    hf_a, hg_a = a.pair(0.03)
    hf_b, hg_b = b.pair(0.03)

    # Assert
    np.testing.assert_allclose(hf_a.eval(u), hf_b.eval(u))
    np.testing.assert_allclose(hg_a.eval(u), hg_b.eval(u))


def test_gallager_doubled_coordinates():
    """Test the pair lives on the doubled square and starts from the received bits."""
    model = GallagerAAdapter(GallagerASpec(dl=4, dr=8))
    hf, hg = model.pair(0.03)

    assert model.domain_map(0.03) == HALF_BOX
    assert model.initial_state(0.03) == pytest.approx(0.06)
    assert hg(1.0) == pytest.approx(1.0)
    assert hg(0.2) == pytest.approx(1.0 - 0.8**7)
    with pytest.raises(ValueError):
        model.pair(0.6)


def test_variable_error_counts_agreeing_messages():
    """Test the fixed-b rule against a direct sum over the number of wrong messages."""
    # Setup
    dl, b, eps = 6, 4, 0.03
    n = dl - 1
    y = np.array([0.0, 0.01, 0.1, 0.3, 0.5])

    # Execute
    value = variable_error(y, eps, dl, b)

    # Assert
    expected = np.zeros_like(y)
    for k in range(n + 1):
        weight = math.comb(n, k) * y**k * (1.0 - y) ** (n - k)
        if k >= b:
            expected += (1.0 - eps) * weight
        if n - k < b:
            expected += eps * weight
    np.testing.assert_allclose(value, expected, atol=1e-14)
    assert value[0] == 0.0


def test_gallager_b_start_state():
    """Test Gallager B starts from the top unless told to start from the received bits."""
    top = GallagerBAdapter(GallagerBSpec(dl=6, dr=12))
    channel = GallagerBAdapter(GallagerBSpec(dl=6, dr=12, b=4, start=DecoderStart.CHANNEL))

    assert GallagerBSpec(dl=6, dr=12).start == DecoderStart.TOP
    assert top.initial_state(0.03) == 1.0
    assert channel.initial_state(0.03) == pytest.approx(0.06)


def test_majority_threshold_stays_admissible():
    assert admissible_thresholds(4) == [2, 3]
    assert admissible_thresholds(6) == [3, 4, 5]
    for y in (1e-4, 0.01, 0.1, 0.4):
        assert majority_threshold(0.03, y, 6) in (3, 4, 5)


def test_optimal_gallager_b_is_pointwise_minimum():
    """Test the optimal rule never exceeds any fixed admissible threshold."""
    # Setup
    optimal = GallagerBAdapter(GallagerBSpec(dl=6, dr=12))
    u = np.linspace(0.0, 1.0, 41)

    # Execute
    hf_opt, _ = optimal.pair(0.04)

    # Assert
    assert optimal.parameter_bracket() == (0.005, 0.09)
    for b in (3, 4, 5):
        hf_b, _ = GallagerBAdapter(GallagerBSpec(dl=6, dr=12, b=b)).pair(0.04)
        assert np.all(np.asarray(hf_opt.eval(u)) <= np.asarray(hf_b.eval(u)) + 1e-15)


def test_cdma_multistable_window(quadrature):
    """Test a low load has a single crossing for every noise level and a high load has three."""
    assert CdmaAdapter.multistable_window(1.0, quadrature) is None
    window = CdmaAdapter.multistable_window(2.0, quadrature)
    assert window is not None
    assert 0.0 <= window[0] < window[1]


def test_cdma_without_multistability_needs_bracket(model_factory):
    model = model_factory.create(CdmaSpec(load=1.0))

    with pytest.raises(ConfigurationError):
        model.parameter_bracket()


def test_cdma_canonical_box(model_factory):
    """Test the canonical box spans the lowest crossing and the starting variance."""
    # Setup
    model = model_factory.create(CdmaSpec(load=2.0))
    noise = float(np.mean(model.parameter_bracket()))

    # Execute
    box = model.domain_map(noise)
    low = model.lowest_crossing(noise)

    # Assert
    assert box.origin_v == pytest.approx(low)
    assert box.origin_v + box.scale_v == pytest.approx(model.top(noise))
    assert float(model.raw_step(noise, np.array(low))) == pytest.approx(low, rel=1e-9)
    assert model.initial_state(noise) == 1.0


def test_information_dimension_gap():
    sparse = CompressedSensingAdapter(CompressedSensingSpec(delta=0.5), quadrature=None)
    discrete = CompressedSensingAdapter(
        CompressedSensingSpec(
            delta=0.3, prior=DiscreteMassPrior(atoms=(0.0, 1.0), probabilities=(0.5, 0.5))
        ),
        quadrature=None,
    )

    assert sparse.information_dimension_gap() == pytest.approx(0.4)
    assert discrete.information_dimension_gap() == pytest.approx(0.3)


@pytest.mark.slow
def test_min_sum_check_matches_sign_error(model_factory, quadrature):
    """Test the doubled check rule equals twice the sign-product error of dr - 1 messages."""
    # Setup
    model = model_factory.create(MinSumExitSpec(dl=3, dr=6))
    _, hg = model.pair(0.5)

    # Execute
    expected = [2.0 * quadrature.sign_error_quadrature(x, 5) for x in (0.05, 0.1, 0.2)]

    # Assert
    assert [hg(2.0 * x) for x in (0.05, 0.1, 0.2)] == pytest.approx(expected, abs=1e-7)
