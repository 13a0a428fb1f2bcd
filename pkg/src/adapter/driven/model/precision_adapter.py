"""Precision-variance recursions: CDMA multiuser detection and compressed sensing.

Both iterate v = sigma2 + load T(u), u = 1/v with a decreasing transfer T, so the
raw EXIT functions decrease. The canonical box reverses the u axis: its origin is
the smallest raw crossing (1/v*, v*) and its far corner is (1/v_top, v_top) with
v_top = sigma2 + load T(0), the state before the first iteration.
"""
import logging
from typing import Optional, Tuple

import numpy as np
from scipy import integrate, optimize

from src.adapter.driven.model.base_adapter import ModelAdapterBase, Pair
from src.adapter.driven.model.quadrature_resource import (
    QuadratureResource,
    mmse,
    prior_key,
    tanh_transfer,
)
from src.core.domain.entities.closures import VectorFunction, register_closure
from src.core.domain.entities.exit_function import Analytic
from src.core.domain.entities.model_spec import CdmaSpec, CompressedSensingSpec, ModelSpecBase
from src.core.domain.entities.rescale_map import RescaleMap
from src.core.domain.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

# Smallest variance kept; a noiseless recursion is truncated here
VARIANCE_FLOOR = 1e-8
CROSSING_GRID = 4000
LOAD_TOL = 1e-3


def _box_closures(
    ou: float, su: float, ov: float, sv: float
) -> Tuple[VectorFunction, VectorFunction]:
    def to_raw_u(u: np.ndarray) -> np.ndarray:
        return ou + su * np.asarray(u, dtype=float)

    def to_box_v(v: np.ndarray) -> np.ndarray:
        return (np.asarray(v, dtype=float) - ov) / sv

    return to_raw_u, to_box_v


@register_closure("precision.check")
def _precision_check(ou: float, su: float, ov: float, sv: float) -> VectorFunction:
    """Canonical form of u = 1/v."""

    def fn(v: np.ndarray) -> np.ndarray:
        raw_v = ov + sv * np.asarray(v, dtype=float)
        return (1.0 / raw_v - ou) / su

    return fn


@register_closure("cdma.variable")
def _cdma_variable(
    order: float, load: float, sigma2: float, ou: float, su: float, ov: float, sv: float
) -> VectorFunction:
    to_raw_u, to_box_v = _box_closures(ou, su, ov, sv)

    def fn(u: np.ndarray) -> np.ndarray:
        return to_box_v(sigma2 + load * tanh_transfer(to_raw_u(u), int(order)))

    return fn


@register_closure("cs.variable")
def _cs_variable(
    tol: float,
    load: float,
    sigma2: float,
    ou: float,
    su: float,
    ov: float,
    sv: float,
    *prior: float,
) -> VectorFunction:
    to_raw_u, to_box_v = _box_closures(ou, su, ov, sv)
    key = tuple(prior)

    def fn(u: np.ndarray) -> np.ndarray:
        return to_box_v(sigma2 + load * mmse(key, to_raw_u(u), tol))

    return fn


class PrecisionAdapterBase(ModelAdapterBase):
    """Canonical boxes for recursions v = sigma2 + load T(1/v); the parameter is sigma2."""

    def __init__(self, spec: ModelSpecBase, quadrature: QuadratureResource):
        super().__init__(spec)
        self.quadrature = quadrature

    @property
    def load(self) -> float:
        raise NotImplementedError

    def transfer(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _variable_closure(self, parameter: float, box: RescaleMap) -> Analytic:
        raise NotImplementedError

    def raw_step(self, parameter: float, v: np.ndarray) -> np.ndarray:
        """One raw iteration v -> sigma2 + load T(1/v)."""
        return parameter + self.load * self.transfer(1.0 / np.asarray(v, dtype=float))

    def top(self, parameter: float) -> float:
        return float(parameter + self.load * self.transfer(np.array(0.0)))

    def lowest_crossing(self, parameter: float) -> float:
        """Smallest v* >= VARIANCE_FLOOR with v* = sigma2 + load T(1/v*)."""
        v_top = self.top(parameter)
        v = np.geomspace(VARIANCE_FLOOR, v_top, CROSSING_GRID)
        excess = self.raw_step(parameter, v) - v
        if excess[0] <= 0.0:
            return VARIANCE_FLOOR
        changes = np.flatnonzero((excess[:-1] > 0.0) & (excess[1:] <= 0.0))
        if changes.size == 0:
            return v_top
        i = int(changes[0])
        return float(
            optimize.brentq(
                lambda x: float(self.raw_step(parameter, np.array(x)) - x),
                v[i],
                v[i + 1],
                xtol=1e-15,
            )
        )

    def domain_map(self, parameter: float) -> RescaleMap:
        if parameter < 0.0:
            raise ValueError(f"Noise variance must be non-negative, got {parameter}")
        v_low = self.lowest_crossing(parameter)
        v_top = self.top(parameter)
        if v_top - v_low < 1e-12:
            # A single crossing at the top: shrink the box onto a tiny neighbourhood
            v_low = v_top * (1.0 - 1e-9)
        return RescaleMap(
            origin_u=1.0 / v_low,
            origin_v=v_low,
            scale_u=1.0 / v_top - 1.0 / v_low,
            scale_v=v_top - v_low,
        )

    def _build_pair(self, parameter: float) -> Pair:
        box = self.domain_map(parameter)
        hf = self._variable_closure(parameter, box)
        hg = Analytic(
            closure_id="precision.check",
            params=(box.origin_u, box.scale_u, box.origin_v, box.scale_v),
        )
        return hf, hg

    def initial_state(self, parameter: float) -> float:
        """The recursion starts from v_top, the far corner of the box."""
        return 1.0

    def raw_area(self, parameter: float) -> float:
        """Integral of h_f(z) - 1/z over the raw u-range of the canonical box.

        The canonical area gap equals this integral divided by scale_u * scale_v.
        """
        box = self.domain_map(parameter)
        lo, hi = box.origin_u + box.scale_u, box.origin_u

        def integrand(z: float) -> float:
            return float(parameter + self.load * self.transfer(np.array(z))) - 1.0 / z

        value, _ = integrate.quad(integrand, lo, hi, limit=400)
        return float(value)


class CdmaAdapter(PrecisionAdapterBase):
    """h_f(u) = load g(u) + sigma2, h_g(v) = 1/v with g(x) = E(1 - tanh(x + sqrt(x) xi))^2."""

    def __init__(self, spec: CdmaSpec, quadrature: QuadratureResource):
        super().__init__(spec, quadrature)

    @property
    def load(self) -> float:
        return float(self.spec.load)  # type: ignore[attr-defined]

    def transfer(self, u: np.ndarray) -> np.ndarray:
        return self.quadrature.tanh_transfer(u)

    def _variable_closure(self, parameter: float, box: RescaleMap) -> Analytic:
        return Analytic(
            closure_id="cdma.variable",
            params=(
                float(self.quadrature.order),
                self.load,
                parameter,
                box.origin_u,
                box.scale_u,
                box.origin_v,
                box.scale_v,
            ),
        )

    @staticmethod
    def multistable_window(
        load: float, quadrature: QuadratureResource
    ) -> Optional[Tuple[float, float]]:
        """Range of sigma2 >= 0 with three raw crossings, or None."""
        v = np.geomspace(1e-4, load + 5.0, CROSSING_GRID)
        noise = v - load * quadrature.tanh_transfer(1.0 / v)
        falling = np.flatnonzero(np.diff(noise) < 0.0)
        if falling.size == 0:
            return None
        start, end = int(falling[0]), int(falling[-1]) + 1
        high = float(noise[: end + 1].max())
        low = float(noise[start:].min())
        if high <= 0.0 or high <= low:
            return None
        return max(low, 0.0), high

    @classmethod
    def critical_load(
        cls, quadrature: QuadratureResource, bracket: Tuple[float, float] = (1.0, 2.5)
    ) -> float:
        """Smallest load with a noise level giving three crossings.

        Raises:
            ConfigurationError: If the bracket does not contain the transition
        """
        lo, hi = bracket
        if cls.multistable_window(lo, quadrature) is not None:
            raise ConfigurationError(
                "Lower load already multistable", details={"bracket": list(bracket)}
            )
        if cls.multistable_window(hi, quadrature) is None:
            raise ConfigurationError(
                "Upper load is not multistable", details={"bracket": list(bracket)}
            )
        while hi - lo > LOAD_TOL:
            mid = 0.5 * (lo + hi)
            if cls.multistable_window(mid, quadrature) is None:
                lo = mid
            else:
                hi = mid
        critical = 0.5 * (lo + hi)
        logger.info(f"Critical CDMA load: {critical:.4f}")
        return critical

    def parameter_bracket(self) -> Tuple[float, float]:
        if self.spec.bracket is not None:
            return self.spec.bracket
        window = self.multistable_window(self.load, self.quadrature)
        if window is None:
            raise ConfigurationError(
                f"Load {self.load} has no multistable noise range; pass an explicit bracket",
                details={"load": self.load},
            )
        low, high = window
        return (max(0.5 * low, VARIANCE_FLOOR), high)


class CompressedSensingAdapter(PrecisionAdapterBase):
    """h_f(u) = sigma2 + mmse(u) / delta, h_g(v) = 1/v."""

    default_bracket = (1e-6, 0.05)

    def __init__(self, spec: CompressedSensingSpec, quadrature: QuadratureResource):
        super().__init__(spec, quadrature)
        self.prior = prior_key(spec.prior)

    @property
    def load(self) -> float:
        return 1.0 / float(self.spec.delta)  # type: ignore[attr-defined]

    def transfer(self, u: np.ndarray) -> np.ndarray:
        return mmse(self.prior, u, self.quadrature.tolerance)

    def _variable_closure(self, parameter: float, box: RescaleMap) -> Analytic:
        return Analytic(
            closure_id="cs.variable",
            params=(
                self.quadrature.tolerance,
                self.load,
                parameter,
                box.origin_u,
                box.scale_u,
                box.origin_v,
                box.scale_v,
                *self.prior,
            ),
        )

    def information_dimension_gap(self) -> float:
        """delta minus the Renyi information dimension of the prior; positive allows recovery."""
        spec: CompressedSensingSpec = self.spec  # type: ignore[assignment]
        sparsity = getattr(spec.prior, "sparsity", 0.0)
        return float(spec.delta - sparsity)

