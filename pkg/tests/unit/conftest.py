"""Shared test fixtures."""
import numpy as np
import pytest

from src.core.domain.entities.exit_function import PiecewiseConstant, PiecewiseLinear
from src.core.domain.entities.spatial_profile import SpatialProfile


@pytest.fixture
def two_step():
    """Jumps of 1/2 at 0.3 and 0.6."""
    return PiecewiseConstant(positions=(0.3, 0.6), heights=(0.5, 0.5))


@pytest.fixture
def vertical_segment():
    """Linear pieces with a vertical jump from 0.2 to 0.8 at u = 1/2."""
    return PiecewiseLinear(knots_u=(0.0, 0.5, 0.5, 1.0), knots_v=(0.0, 0.2, 0.8, 1.0))


@pytest.fixture
def failing_pair():
    """Self-inverse staircase pair whose middle crossing has negative potential."""
    h = PiecewiseConstant(positions=(0.2, 0.8), heights=(0.5, 0.5))
    return h, h


@pytest.fixture
def ramp_profile():
    """Increasing profile on indices -5..5 with pitch 0.1."""
    values = np.linspace(0.0, 1.0, 11)
    return SpatialProfile(pitch=0.1, i_min=-5, values=values, left_limit=0.0, right_limit=1.0)
