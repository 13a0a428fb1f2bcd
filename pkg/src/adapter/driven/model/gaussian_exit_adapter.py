"""Gaussian-approximation EXIT charts on the BAWGN channel.

Belief propagation is tracked in entropy; min-sum is tracked in error
probability, with the channel still parametrized by its entropy.
"""
import logging

import numpy as np
from scipy.stats import norm

from src.adapter.driven.model.base_adapter import ModelAdapterBase, Pair
from src.adapter.driven.model.quadrature_resource import QuadratureResource, psi, psi_inverse
from src.core.domain.entities.closures import VectorFunction, register_closure
from src.core.domain.entities.exit_function import Analytic
from src.core.domain.entities.model_spec import BawgnExitSpec, MinSumExitSpec
from src.core.domain.entities.rescale_map import RescaleMap

logger = logging.getLogger(__name__)

HALF_BOX = RescaleMap(scale_u=0.5, scale_v=0.5)


@register_closure("bawgn.variable")
def _bawgn_variable(tol: float, channel: float, *lam: float) -> VectorFunction:
    """y -> sum_k lam_k psi(k psi^-1(y) + psi^-1(c))."""
    coeffs = np.asarray(lam, dtype=float)
    powers = np.flatnonzero(coeffs)
    channel_mean = float(psi_inverse(np.array(channel), tol))

    def fn(y: np.ndarray) -> np.ndarray:
        m = np.asarray(psi_inverse(y, tol), dtype=float)[..., None]
        return psi(powers * m + channel_mean, tol) @ coeffs[powers]

    return fn


@register_closure("bawgn.check")
def _bawgn_check(tol: float, *rho: float) -> VectorFunction:
    """x -> 1 - sum_k rho_k psi(k psi^-1(1 - x))."""
    coeffs = np.asarray(rho, dtype=float)
    powers = np.flatnonzero(coeffs)

    def fn(x: np.ndarray) -> np.ndarray:
        m = np.asarray(psi_inverse(1.0 - np.asarray(x, dtype=float), tol), dtype=float)[..., None]
        return 1.0 - psi(powers * m, tol) @ coeffs[powers]

    return fn


@register_closure("minsum.variable")
def _minsum_variable(channel_error: float, dl: float) -> VectorFunction:
    """Doubled error rule: the dl - 1 incoming means add to the channel mean."""
    channel_mean = 2.0 * float(norm.isf(channel_error)) ** 2

    def fn(u: np.ndarray) -> np.ndarray:
        y = np.clip(0.5 * np.asarray(u, dtype=float), 0.0, 0.5)
        with np.errstate(invalid="ignore"):
            mean = (int(dl) - 1) * 2.0 * norm.isf(y) ** 2 + channel_mean
        return 2.0 * norm.sf(np.sqrt(np.nan_to_num(mean, nan=np.inf) / 2.0))

    return fn


class BawgnExitAdapter(ModelAdapterBase):
    """Entropy EXIT chart of BP; the parameter is the channel entropy."""

    default_bracket = (0.30, 0.60)

    def __init__(self, spec: BawgnExitSpec, quadrature: QuadratureResource):
        super().__init__(spec)
        self.quadrature = quadrature

    def _build_pair(self, parameter: float) -> Pair:
        if not 0.0 < parameter < 1.0:
            raise ValueError(f"Channel entropy must lie in (0, 1), got {parameter}")
        tol = self.quadrature.tolerance
        hf = Analytic(closure_id="bawgn.variable", params=(tol, parameter, *self.spec.lam))
        hg = Analytic(closure_id="bawgn.check", params=(tol, *self.spec.rho))
        return hf, hg


class MinSumExitAdapter(ModelAdapterBase):
    """Error-probability EXIT chart of min-sum; the parameter is the channel entropy.

    The check node forwards the sign product of dr - 1 messages. For consistent
    Gaussian messages its error probability is the parity rule
    (1 - (1 - 2x)^(dr-1)) / 2, which QuadratureResource.sign_error_quadrature
    reproduces from the magnitude density.
    """

    default_bracket = (0.30, 0.60)

    def __init__(self, spec: MinSumExitSpec, quadrature: QuadratureResource):
        super().__init__(spec)
        self.quadrature = quadrature

    def channel_error(self, entropy: float) -> float:
        """Error probability of the BAWGN channel with the given entropy."""
        mean = float(self.quadrature.psi_inverse(np.array(entropy)))
        return float(norm.sf(np.sqrt(mean / 2.0)))

    def _build_pair(self, parameter: float) -> Pair:
        if not 0.0 < parameter < 1.0:
            raise ValueError(f"Channel entropy must lie in (0, 1), got {parameter}")
        error = self.channel_error(parameter)
        hf = Analytic(closure_id="minsum.variable", params=(error, float(self.spec.dl)))
        hg = Analytic(closure_id="gallager.check", params=(float(self.spec.dr),))
        return hf, hg

    def domain_map(self, parameter: float) -> RescaleMap:
        return HALF_BOX
