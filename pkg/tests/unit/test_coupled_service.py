import numpy as np
import pytest

from src.core.domain.entities.exit_function import identity_function
from src.core.domain.entities.kernel import DiscreteKernel
from src.core.domain.entities.spatial_profile import (
    InitialCondition,
    LimitClass,
    RunDiagnostics,
    SpatialProfile,
    Termination,
    TerminationKind,
)
from src.core.domain.exceptions import NoFrontError, NotAFixedPointError


@pytest.fixture
def bec_model(model_factory, bec_3_6):
    return model_factory.create(bec_3_6)


def _diagnostics(fronts, profile):
    return RunDiagnostics(
        iterations=len(fronts),
        fronts=fronts,
        shifts=[None] * len(fronts),
        f=profile,
        g=profile,
        converged=False,
        monotone=True,
        classification=LimitClass.STALLED,
        front_level=0.5,
        top_value=1.0,
    )


def test_step_applies_termination(coupled_service, kernel_service, boxcar):
    """Test f is forced to zero left of the boundary after one iteration."""
    # Setup
    kernel = kernel_service.discretize(boxcar, 0.5)
    f = SpatialProfile(pitch=0.5, i_min=-5, values=np.ones(11), left_limit=1.0)
    termination = Termination(kind=TerminationKind.ONE_SIDED_LEFT, boundary_index=0)
    h = identity_function()

    # Execute
    g, f_next = coupled_service.step(f, h, h, kernel, termination)

    # Assert
    np.testing.assert_allclose(g.values, 1.0)
    np.testing.assert_allclose(f_next.values[:5], 0.0)
    np.testing.assert_allclose(f_next.values[5:], 1.0)
    assert f_next.left_limit == 0.0
    assert f_next.right_limit == 1.0


def test_two_sided_termination_mask():
    termination = Termination(kind=TerminationKind.TWO_SIDED, boundary_index=0, length_index=3)

    mask = termination.allowed(np.arange(-1, 6))

    assert list(mask) == [False, True, True, True, True, False, False]
    assert termination.zeroes_right


def test_front_interpolates(coupled_service, ramp_profile):
    assert coupled_service.front(ramp_profile, 0.25) == pytest.approx(-0.25)
    assert coupled_service.front(ramp_profile, 0.5) == pytest.approx(0.0)
    assert coupled_service.front(ramp_profile, 2.0) is None


def test_window_and_padding(coupled_service, kernel_service, boxcar):
    kernel = kernel_service.discretize(boxcar, 0.5)

    assert coupled_service.window_for(1.0, 0.1) == 10
    assert coupled_service.window_for(1.05, 0.1) == 11
    assert coupled_service.padding(kernel) == 8


def test_run_below_threshold_goes_to_zero(coupled_service, kernel_service, boxcar, bec_model):
    """Test the all-ones start dies out below the uncoupled threshold."""
    # Setup
    hf, hg = bec_model.pair(0.3)
    kernel = kernel_service.discretize(boxcar, 0.5)

    # Execute
    diagnostics = coupled_service.run(
        hf, hg, kernel, window=10, termination=Termination(), init=InitialCondition(),
        max_iters=500, tol=1e-12,
    )

    # Assert
    assert diagnostics.classification == LimitClass.TO_ZERO
    assert diagnostics.converged
    assert diagnostics.f.i_min == -8
    assert diagnostics.f.i_max == 18


def test_run_above_coupled_threshold_stays_up(coupled_service, kernel_service, boxcar,
                                              bec_model):
    """Test an unterminated chain keeps the uncoupled fixed point above the coupled threshold."""
    # Setup
    hf, hg = bec_model.pair(0.6)
    kernel = kernel_service.discretize(boxcar, 0.5)

    # Execute
    diagnostics = coupled_service.run(
        hf, hg, kernel, window=10, termination=Termination(), init=InitialCondition(),
        max_iters=2000, tol=1e-12, record_every=5,
    )

    # Assert
    assert diagnostics.classification == LimitClass.TO_ONE
    assert diagnostics.top_value == pytest.approx(float(diagnostics.f.values[0]), abs=1e-9)
    assert diagnostics.snapshots[0].iteration == 5


def test_run_rejects_bad_arguments(coupled_service, kernel_service, boxcar):
    kernel = kernel_service.discretize(boxcar, 0.5)
    h = identity_function()

    with pytest.raises(ValueError):
        coupled_service.run(h, h, kernel, 0, Termination(), InitialCondition(), 10, 1e-9)


def test_wave_speed_fits_slope(coupled_service, ramp_profile):
    """Test the least-squares speed of fronts moving 0.1 per iteration."""
    # Setup
    fronts = [None, None] + [2.0 + 0.1 * t for t in range(3, 31)]
    diagnostics = _diagnostics(fronts, ramp_profile)

    # Execute
    estimate = coupled_service.wave_speed(diagnostics, burn_in=5)

    # Assert
    assert estimate.speed == pytest.approx(0.1)
    assert estimate.stderr == pytest.approx(0.0, abs=1e-12)
    assert estimate.samples == 25


def test_wave_speed_without_fronts(coupled_service, ramp_profile):
    diagnostics = _diagnostics([None] * 20 + [0.1] * 5, ramp_profile)

    with pytest.raises(NoFrontError):
        coupled_service.wave_speed(diagnostics)


def test_xi_single_tap_value(coupled_service):
    """Test the functional with a point-mass kernel against the hand-computed product."""
    # Setup
    kernel = DiscreteKernel(pitch=1.0, taps=(1.0,))
    f = SpatialProfile(pitch=1.0, i_min=0, values=[0.0, 0.4, 1.0])
    g = SpatialProfile(pitch=1.0, i_min=0, values=[0.0, 0.6, 1.0])

    # Execute
    by_g, by_f = coupled_service.xi_discrete_forms(f, g, kernel, 0, 1)

    # Assert
    assert by_g == pytest.approx(0.5 * 0.4 * 0.6)
    assert by_f == pytest.approx(by_g)
    assert coupled_service.xi_discrete(f, g, kernel, 1, 1) == pytest.approx(0.0)


def test_xi_forms_agree(coupled_service, kernel_service, boxcar):
    """Test summing against increments of g or of f gives the same functional."""
    # Setup
    rng = np.random.default_rng(7)
    kernel = kernel_service.discretize(boxcar, 0.25)
    f = SpatialProfile(pitch=0.25, i_min=-10, values=np.sort(rng.uniform(0.0, 0.9, 30)))
    g = SpatialProfile(pitch=0.25, i_min=-10, values=np.sort(rng.uniform(0.1, 1.0, 30)))

    # Execute
    forms = [coupled_service.xi_discrete_forms(f, g, kernel, i1, i2)
             for i1, i2 in [(-12, 25), (3, 7), (15, -4)]]

    # Assert
    for by_g, by_f in forms:
        assert by_g == pytest.approx(by_f, abs=1e-12)


def test_reconstruct_builds_monotone_function(coupled_service):
    h = coupled_service.reconstruct(np.array([0.5, 0.2]), np.array([0.6, 0.3]))

    assert h.knots_u == pytest.approx((0.0, 0.3, 0.6, 0.6, 1.0))
    assert h.knots_v == pytest.approx((0.0, 0.2, 0.5, 1.0, 1.0))


def test_identity_check_rejects_moving_pair(coupled_service, kernel_service, boxcar,
                                            ramp_profile):
    """Test a profile that one more iteration moves is not accepted as a fixed point."""
    kernel = kernel_service.discretize(boxcar, 0.1)
    h = identity_function()

    with pytest.raises(NotAFixedPointError):
        coupled_service.fixed_point_identity_check(
            ramp_profile, ramp_profile, kernel, -5, 5, hf=h, hg=h
        )


def _random_taps(rng, size):
    half = rng.uniform(0.1, 1.0, size // 2 + 1)
    taps = np.concatenate([half[:0:-1], half])
    return tuple(float(x) for x in taps / taps.sum())


def _random_profile(rng, i_min, size):
    values = np.sort(rng.uniform(0.0, 1.0, size))
    return SpatialProfile(
        pitch=1.0,
        i_min=i_min,
        values=values,
        left_limit=float(rng.uniform(0.0, values[0])),
        right_limit=float(rng.uniform(values[-1], 1.0)),
    )


def _xi_double_sum(f, g, kernel, i1, i2):
    """Term-by-term evaluation with orientation-signed index ranges."""
    total = 0.0
    anchor = float(f.at(np.array([i2]))[0])
    for j, w in zip(kernel.offsets, kernel.array):
        lo, hi, sign = (i1 - j, i2, 1.0) if i1 - j <= i2 else (i2, i1 - j, -1.0)
        for i in range(int(lo) + 1, int(hi) + 1):
            fi, fp = f.at(np.array([i, i - 1]))
            gi, gp = g.at(np.array([i + j, i + j - 1]))
            total += sign * w * (2.0 * anchor - fi - fp) * (gi - gp)
    return 0.5 * total


def _xi_by_parts(f, g, kernel, i1, i2):
    """The functional from the summation-by-parts identity on smoothed profiles."""

    def smoothed(profile, idx):
        return sum(w * profile.at(idx - j) for j, w in zip(kernel.offsets, kernel.array))

    start = min(f.i_min, g.i_min, i1, i2) - kernel.half_length - 2
    i = np.arange(start, i2 + 1)
    s_f = np.sum((f.at(i) + f.at(i - 1)) * (smoothed(g, i) - smoothed(g, i - 1)))
    i = np.arange(start, i1 + 1)
    s_g = np.sum((g.at(i) + g.at(i - 1)) * (smoothed(f, i) - smoothed(f, i - 1)))
    fs1 = float(smoothed(f, np.array([i1]))[0])
    gs2 = float(smoothed(g, np.array([i2]))[0])
    f2 = float(f.at(np.array([i2]))[0])
    g1 = float(g.at(np.array([i1]))[0])
    return (
        fs1 * gs2
        - f.left_limit * g.left_limit
        - 0.5 * (s_f + s_g)
        - (fs1 - f2) * (gs2 - g1)
    )


@pytest.mark.parametrize("size", [3, 7])
def test_xi_forms_match_direct_sums(coupled_service, size):
    """Test both forms against a term-by-term double sum and the summation-by-parts identity."""
    rng = np.random.default_rng(size)

    for _ in range(50):
        # Setup
        kernel = DiscreteKernel(pitch=1.0, taps=_random_taps(rng, size))
        f = _random_profile(rng, int(rng.integers(-6, 2)), int(rng.integers(2, 12)))
        g = _random_profile(rng, int(rng.integers(-6, 2)), int(rng.integers(2, 12)))
        i1, i2 = (int(x) for x in rng.integers(-10, 14, 2))

        # Execute
        by_g, by_f = coupled_service.xi_discrete_forms(f, g, kernel, i1, i2)

        # Assert
        direct = _xi_double_sum(f, g, kernel, i1, i2)
        assert by_g == pytest.approx(direct, abs=1e-12)
        assert by_f == pytest.approx(direct, abs=1e-12)
        assert by_g == pytest.approx(_xi_by_parts(f, g, kernel, i1, i2), abs=1e-12)
        assert by_g >= -1e-12


def test_terminated_chain_is_classified_on_its_window(coupled_service):
    """Test padding held up by a free end does not decide the limit class."""
    # Setup
    values = np.concatenate([np.zeros(4), np.full(11, 1e-9), np.linspace(0.1, 0.4, 4)])
    f = SpatialProfile(pitch=0.5, i_min=-4, values=values, right_limit=0.4)
    left = Termination(kind=TerminationKind.ONE_SIDED_LEFT, boundary_index=0)

    # Execute
    terminated = coupled_service._classification_peak(f, 10, left)
    free = coupled_service._classification_peak(f, 10, Termination())

    # Assert
    assert terminated == pytest.approx(1e-9)
    assert free == pytest.approx(0.4)
