"""Shared quadrature and tabulation resource for the model adapters.

Tables are module-level and cached per configuration so that analytic closures,
which only carry float parameters, can reach them.
"""
import logging
import math
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator
from scipy.stats import norm

from src.core.domain.entities.model_spec import (
    BernoulliGaussianPrior,
    DiscreteMassPrior,
    QuadratureConfig,
)
from src.core.domain.exceptions import PriorUnsupportedError, QuadratureFailureError

logger = logging.getLogger(__name__)

PSI_KNOTS = 10_000
PSI_RANGE = (1e-6, 1e3)
MMSE_KNOTS = 801
MMSE_RANGE = (1e-6, 1e8)
TANH_TAIL = 30.0
QUAD_ERROR_LIMIT = 1e-8

PriorKey = Tuple[float, ...]


@lru_cache(maxsize=8)
def gauss_hermite(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for E[f(xi)] with xi ~ N(0, 1)."""
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    return nodes, weights / math.sqrt(2.0 * math.pi)


def _checked_quad(fn: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    value, abserr = integrate.quad(fn, lo, hi, epsabs=tol, epsrel=tol, limit=400)
    if abserr > QUAD_ERROR_LIMIT:
        raise QuadratureFailureError(
            f"Quadrature on [{lo}, {hi}] has error {abserr:.2e}",
            details={"abserr": abserr, "tolerance": tol},
        )
    return float(value)


# psi(m): entropy of a symmetric Gaussian LLR density N(m, 2m)


def _psi_point(m: float, tol: float) -> float:
    if m <= 0.0:
        return 1.0
    s = math.sqrt(2.0 * m)

    def integrand(t: float) -> float:
        llr = m + s * t
        softplus = max(-llr, 0.0) + math.log1p(math.exp(-abs(llr)))
        return math.exp(-0.5 * t * t) * softplus

    # The integrand is negligible beyond 40 standard deviations
    total = _checked_quad(integrand, -40.0, -math.sqrt(m / 2.0), tol)
    total += _checked_quad(integrand, -math.sqrt(m / 2.0), 40.0, tol)
    return total / (math.sqrt(2.0 * math.pi) * math.log(2.0))


@lru_cache(maxsize=4)
def psi_table(tol: float) -> Tuple[PchipInterpolator, PchipInterpolator, float]:
    """Monotone splines for psi over log m and for log m over psi, plus psi at the first knot."""
    logger.info(f"Tabulating psi on {PSI_KNOTS} knots")
    m = np.geomspace(PSI_RANGE[0], PSI_RANGE[1], PSI_KNOTS)
    values = np.array([_psi_point(float(x), tol) for x in m])
    values = np.minimum.accumulate(values)
    forward = PchipInterpolator(np.log(m), values, extrapolate=False)
    # Drop the flat underflow tail so the inverse has strictly increasing abscissae
    keep = np.concatenate([[True], np.diff(values) < 0.0])
    inverse = PchipInterpolator(values[keep][::-1], np.log(m[keep])[::-1], extrapolate=False)
    return forward, inverse, float(values[0])


def psi(m: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """psi(m), strictly decreasing from psi(0) = 1 to 0."""
    forward, _, first = psi_table(tol)
    x = np.asarray(m, dtype=float)
    lo, hi = PSI_RANGE
    with np.errstate(divide="ignore"):
        inside = forward(np.log(np.clip(x, lo, hi)))
    # Linear between (0, 1) and the first knot
    near_zero = 1.0 - (1.0 - first) * np.clip(x, 0.0, lo) / lo
    return np.where(x <= lo, near_zero, np.where(x >= hi, 0.0, inside))


def psi_inverse(y: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Mean m with psi(m) = y; y = 1 gives 0 and y = 0 gives the table end."""
    _, inverse, first = psi_table(tol)
    target = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
    lo, hi = PSI_RANGE
    lowest = float(inverse.x[0])
    tabulated = np.exp(inverse(np.clip(target, lowest, first)))
    near_one = lo * (1.0 - target) / (1.0 - first)
    return np.where(target >= first, near_one, np.where(target <= lowest, hi, tabulated))


# g(x) = E(1 - tanh(x + sqrt(x) xi))^2


def tanh_transfer(x: np.ndarray, order: int = 61) -> np.ndarray:
    """g(x) by Gauss-Hermite quadrature; exponential decay beyond x = 30."""
    nodes, weights = gauss_hermite(order)
    arr = np.asarray(x, dtype=float)

    def direct(points: np.ndarray) -> np.ndarray:
        pts = np.maximum(points, 0.0)
        z = pts[..., None] + np.sqrt(pts)[..., None] * nodes
        return ((1.0 - np.tanh(z)) ** 2) @ weights

    edge = direct(np.array([TANH_TAIL - 1.0, TANH_TAIL]))
    rate = math.log(edge[0] / edge[1])
    tail = edge[1] * np.exp(-rate * (np.maximum(arr, TANH_TAIL) - TANH_TAIL))
    return np.where(arr <= TANH_TAIL, direct(np.minimum(arr, TANH_TAIL)), tail)


# mmse(s) of X from sqrt(s) X + Z


def prior_key(prior: object) -> PriorKey:
    """Float encoding of a prior, usable as a closure parameter.

    Raises:
        PriorUnsupportedError: For priors without an mmse routine
    """
    if isinstance(prior, BernoulliGaussianPrior):
        return (0.0, prior.sparsity, prior.variance)
    if isinstance(prior, DiscreteMassPrior):
        return (1.0, float(len(prior.atoms)), *prior.atoms, *prior.probabilities)
    raise PriorUnsupportedError(
        f"No mmse routine for prior {type(prior).__name__}",
        details={"prior": type(prior).__name__},
    )


def _components(key: PriorKey, s: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray, Callable]:
    """Mixture components of Y as (weights, means, scales) and the posterior mean."""
    root = math.sqrt(s)
    if key[0] == 0.0:
        p, var = key[1], key[2]
        spread = math.sqrt(1.0 + s * var)
        gain = root * var / (1.0 + s * var)

        def posterior_mean(y: float) -> float:
            log_on = math.log(p) - 0.5 * (y / spread) ** 2 - math.log(spread)
            log_off = math.log1p(-p) - 0.5 * y * y if p < 1.0 else -math.inf
            top = max(log_on, log_off)
            on = math.exp(log_on - top) / (math.exp(log_on - top) + math.exp(log_off - top))
            return on * gain * y

        return (
            np.array([1.0 - p, p]),
            np.zeros(2),
            np.array([1.0, spread]),
            posterior_mean,
        )
    if key[0] == 1.0:
        n = int(key[1])
        atoms = np.asarray(key[2 : 2 + n], dtype=float)
        probs = np.asarray(key[2 + n : 2 + 2 * n], dtype=float)
        log_probs = np.log(np.where(probs > 0.0, probs, 1e-300))

        def posterior_mean(y: float) -> float:
            logits = log_probs - 0.5 * (y - root * atoms) ** 2
            weights = np.exp(logits - logits.max())
            return float(weights @ atoms / weights.sum())

        return probs, root * atoms, np.ones(n), posterior_mean
    raise PriorUnsupportedError(f"Unknown prior code {key[0]}", details={"key": list(key)})


def _second_moment(key: PriorKey) -> float:
    if key[0] == 0.0:
        return key[1] * key[2]
    n = int(key[1])
    atoms = np.asarray(key[2 : 2 + n], dtype=float)
    probs = np.asarray(key[2 + n : 2 + 2 * n], dtype=float)
    return float(probs @ atoms**2)


def _variance(key: PriorKey) -> float:
    if key[0] == 0.0:
        return key[1] * key[2]
    n = int(key[1])
    atoms = np.asarray(key[2 : 2 + n], dtype=float)
    probs = np.asarray(key[2 + n : 2 + 2 * n], dtype=float)
    return float(probs @ atoms**2 - (probs @ atoms) ** 2)


def mmse_point(key: PriorKey, s: float, tol: float = 1e-10) -> float:
    """mmse(s) = E[X^2] - E[E[X|Y]^2] by adaptive quadrature per mixture component."""
    if s <= 0.0:
        return _variance(key)
    weights, means, scales, posterior_mean = _components(key, s)
    explained = 0.0
    for w, mu, sd in zip(weights, means, scales):
        if w <= 0.0:
            continue

        def integrand(t: float, mu: float = float(mu), sd: float = float(sd)) -> float:
            return math.exp(-0.5 * t * t) * posterior_mean(mu + sd * t) ** 2

        explained += w * _checked_quad(integrand, -40.0, 40.0, tol) / math.sqrt(2.0 * math.pi)
    return max(_second_moment(key) - explained, 0.0)


@lru_cache(maxsize=16)
def mmse_table(key: PriorKey, tol: float) -> Tuple[PchipInterpolator, float, float]:
    """Spline of mmse over log s, with the values at the two table ends."""
    logger.info(f"Tabulating mmse on {MMSE_KNOTS} knots")
    s = np.geomspace(MMSE_RANGE[0], MMSE_RANGE[1], MMSE_KNOTS)
    values = np.minimum.accumulate(np.array([mmse_point(key, float(x), tol) for x in s]))
    spline = PchipInterpolator(np.log(s), values, extrapolate=False)
    return spline, float(values[0]), float(values[-1])


def mmse(key: PriorKey, s: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Tabulated mmse; s * mmse(s) is held constant beyond the table."""
    spline, first, last = mmse_table(key, tol)
    x = np.asarray(s, dtype=float)
    lo, hi = MMSE_RANGE
    variance = _variance(key)
    inside = spline(np.log(np.clip(x, lo, hi)))
    near_zero = variance - (variance - first) * np.clip(x, 0.0, lo) / lo
    tail = last * hi / np.maximum(x, hi)
    return np.where(x <= lo, near_zero, np.where(x >= hi, tail, inside))


class QuadratureResource:
    """Quadrature settings and tabulated special functions used by the model adapters."""

    def __init__(self, config: QuadratureConfig):
        """Initialize the resource.

        Args:
            config: Gauss-Hermite order, adaptive tolerance and Monte Carlo settings
        """
        self.config = config
        logger.info(f"QuadratureResource initialized with order {config.gauss_hermite_order}")

    @property
    def order(self) -> int:
        return self.config.gauss_hermite_order

    @property
    def tolerance(self) -> float:
        return self.config.adaptive_tolerance

    def gaussian_expectation(
        self, fn: Callable[[np.ndarray], np.ndarray], mean: np.ndarray, std: np.ndarray
    ) -> np.ndarray:
        """E[fn(mean + std xi)] for xi ~ N(0, 1), vectorized over mean and std."""
        nodes, weights = gauss_hermite(self.order)
        mu = np.asarray(mean, dtype=float)[..., None]
        sd = np.asarray(std, dtype=float)[..., None]
        return np.asarray(fn(mu + sd * nodes)) @ weights

    def psi(self, m: np.ndarray) -> np.ndarray:
        return psi(m, self.tolerance)

    def psi_inverse(self, y: np.ndarray) -> np.ndarray:
        return psi_inverse(y, self.tolerance)

    def tanh_transfer(self, x: np.ndarray) -> np.ndarray:
        return tanh_transfer(x, self.order)

    def mmse(self, prior: object, s: np.ndarray) -> np.ndarray:
        return mmse(prior_key(prior), s, self.tolerance)

    def error_to_mean(self, error: np.ndarray) -> np.ndarray:
        """Mean m of N(m, 2m) with sign-error probability Q(sqrt(m / 2)) = error."""
        return 2.0 * norm.isf(np.clip(error, 0.0, 0.5)) ** 2

    def sign_error_quadrature(self, error: float, inputs: int) -> float:
        """Error probability of the sign product of i.i.d. symmetric Gaussian messages.

        Given |L| = a the sign of a consistent message agrees with the truth with
        bias tanh(a / 2); the output bias is the product of the biases, integrated
        over the magnitude density.
        """
        if inputs < 1:
            raise ValueError("At least one input message is required")
        if error <= 0.0:
            return 0.0
        if error >= 0.5:
            return 0.5
        m = float(self.error_to_mean(error))
        sd = math.sqrt(2.0 * m)

        def magnitude_bias(a: float) -> float:
            density = (
                math.exp(-0.5 * ((a - m) / sd) ** 2) + math.exp(-0.5 * ((a + m) / sd) ** 2)
            ) / (sd * math.sqrt(2.0 * math.pi))
            return math.tanh(a / 2.0) * density

        bias = _checked_quad(magnitude_bias, 0.0, m + 40.0 * sd, self.tolerance)
        return 0.5 * (1.0 - bias**inputs)

    def sign_error_monte_carlo(self, error: float, inputs: int) -> float:
        """Seeded Monte Carlo estimate of the same sign-product error."""
        m = float(self.error_to_mean(error))
        rng = np.random.default_rng(self.config.monte_carlo_seed)
        samples = rng.normal(m, math.sqrt(2.0 * m), size=(self.config.monte_carlo_samples, inputs))
        return float(np.mean(np.prod(np.sign(samples), axis=1) < 0.0))
