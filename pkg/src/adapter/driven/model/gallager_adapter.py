"""Gallager A and B decoding of regular ensembles on the BSC.

Error probabilities live in [0, 1/2]; the pairs are built in doubled
coordinates so that the state space is the unit square.
"""
import logging
import math
from typing import List, Tuple

import numpy as np
from scipy.stats import binom

from src.adapter.driven.model.base_adapter import ModelAdapterBase, Pair
from src.core.domain.entities.closures import VectorFunction, register_closure
from src.core.domain.entities.exit_function import Analytic
from src.core.domain.entities.model_spec import DecoderStart, GallagerASpec, GallagerBSpec
from src.core.domain.entities.rescale_map import RescaleMap

logger = logging.getLogger(__name__)

HALF_BOX = RescaleMap(scale_u=0.5, scale_v=0.5)


def variable_error(y: np.ndarray, eps: float, dl: int, b: int) -> np.ndarray:
    """Outgoing error probability when b of the dl - 1 incoming messages must agree.

    With K ~ Bin(dl - 1, y) wrong incoming messages, a correct received bit is
    overruled if K >= b and a wrong one is kept unless dl - 1 - K >= b.
    """
    n = dl - 1
    overruled = binom.sf(b - 1, n, y)
    kept = binom.sf(n - b, n, y)
    return (1.0 - eps) * overruled + eps * kept


def admissible_thresholds(dl: int) -> List[int]:
    return list(range(math.ceil((dl - 1) / 2), dl))


def majority_threshold(eps: float, y: float, dl: int) -> int:
    """Gallager's optimal b for channel eps and incoming error y < 1/2, clipped to range."""
    ratio = math.log((1.0 - eps) / eps) / math.log((1.0 - y) / y)
    b = math.ceil((ratio + (dl - 1)) / 2.0)
    allowed = admissible_thresholds(dl)
    return int(min(max(b, allowed[0]), allowed[-1]))


@register_closure("gallager.check")
def _check(dr: float) -> VectorFunction:
    """Doubled check rule: v -> 1 - (1 - v)^(dr - 1)."""
    power = int(dr) - 1

    def fn(v: np.ndarray) -> np.ndarray:
        return 1.0 - (1.0 - np.asarray(v, dtype=float)) ** power

    return fn


@register_closure("gallager.variable")
def _variable(eps: float, dl: float, b: float) -> VectorFunction:
    def fn(u: np.ndarray) -> np.ndarray:
        y = 0.5 * np.asarray(u, dtype=float)
        return 2.0 * variable_error(y, eps, int(dl), int(b))

    return fn


@register_closure("gallager.variable_optimal")
def _variable_optimal(eps: float, dl: float) -> VectorFunction:
    thresholds = admissible_thresholds(int(dl))

    def fn(u: np.ndarray) -> np.ndarray:
        y = 0.5 * np.asarray(u, dtype=float)
        stacked = np.stack([variable_error(y, eps, int(dl), b) for b in thresholds])
        return 2.0 * stacked.min(axis=0)

    return fn


class GallagerAdapterBase(ModelAdapterBase):
    """Shared doubled-coordinate handling."""

    def _degrees(self) -> Tuple[int, int]:
        return int(getattr(self.spec, "dl")), int(getattr(self.spec, "dr"))

    def _check_parameter(self, parameter: float) -> None:
        if not 0.0 <= parameter <= 0.5:
            raise ValueError(f"Crossover probability must lie in [0, 1/2], got {parameter}")

    def domain_map(self, parameter: float) -> RescaleMap:
        return HALF_BOX

    def initial_state(self, parameter: float) -> float:
        """The decoder starts from the received bits, x = eps."""
        return 2.0 * parameter


class GallagerAAdapter(GallagerAdapterBase):
    """h_g(x) = (1 - (1 - 2x)^(dr-1)) / 2, h_f(y) = eps(1 - (1 - y)^(dl-1)) + (1 - eps) y^(dl-1)."""

    default_bracket = (0.001, 0.1)

    def __init__(self, spec: GallagerASpec):
        super().__init__(spec)

    def _build_pair(self, parameter: float) -> Pair:
        self._check_parameter(parameter)
        dl, dr = self._degrees()
        hf = Analytic(closure_id="gallager.variable", params=(parameter, float(dl), float(dl - 1)))
        hg = Analytic(closure_id="gallager.check", params=(float(dr),))
        return hf, hg


class GallagerBAdapter(GallagerAdapterBase):
    """Majority threshold b, fixed or chosen pointwise to minimize the outgoing error.

    The recursion starts from the top of the square unless start is CHANNEL.
    """

    default_bracket = (0.005, 0.06)

    def __init__(self, spec: GallagerBSpec):
        super().__init__(spec)
        self.b = spec.b
        self.start = spec.start
        if self.b is None:
            self.default_bracket = (0.005, 0.09)

    def _build_pair(self, parameter: float) -> Pair:
        self._check_parameter(parameter)
        dl, dr = self._degrees()
        if self.b is None:
            hf = Analytic(closure_id="gallager.variable_optimal", params=(parameter, float(dl)))
        else:
            hf = Analytic(
                closure_id="gallager.variable", params=(parameter, float(dl), float(self.b))
            )
        hg = Analytic(closure_id="gallager.check", params=(float(dr),))
        return hf, hg

    def initial_state(self, parameter: float) -> float:
        if self.start == DecoderStart.TOP:
            return 1.0
        return super().initial_state(parameter)
