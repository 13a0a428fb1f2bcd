"""Monotone EXIT-like functions on the unit square.

Every variant is a non-decreasing map [0,1] -> [0,1] with the conventions
h(u) = 0 for u < 0 and h(u) = 1 for u > 1. Left and right limits are exact; the
point value at a jump is the midpoint of the two limits.
"""
from __future__ import annotations

from enum import Enum
from typing import Annotated, Any, Literal, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator
from scipy import integrate

from src.core.domain.entities.closures import VectorFunction, resolve_closure
from src.core.domain.exceptions import MonotonicityError, QuadratureFailureError
from src.core.domain.numerics import bisect_predicate

ArrayLike = Union[float, np.ndarray]

MONOTONICITY_GRID = 10_000
MONOTONICITY_SLACK = 1e-12
QUAD_TOLERANCE = 1e-11
QUAD_ERROR_LIMIT = 1e-8


class Side(str, Enum):
    """Which representative of h at u to return."""

    LEFT = "left"
    RIGHT = "right"
    POINT = "point"


def _as_array(u: ArrayLike) -> np.ndarray:
    return np.asarray(u, dtype=float)


def _restore(values: np.ndarray, like: ArrayLike) -> Any:
    if np.ndim(like) == 0:
        return float(values)
    return values


class ExitFunctionBase(BaseModel):
    """Behaviour shared by all EXIT function representations."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    # Variant hooks; u and a are already clipped to [0, 1]

    def _core_limits(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _core_integral(self, a: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse(self) -> "ExitFunction":
        """Return a representative of the inverse function."""
        raise NotImplementedError

    def jumps(self) -> np.ndarray:
        """Return the sorted jump positions inside [0, 1]."""
        return np.empty(0)

    # Public API

    def limits(self, u: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
        """Left and right limits h(u-), h(u+) with the boundary conventions applied."""
        x = np.atleast_1d(_as_array(u))
        left_c, right_c = self._core_limits(np.clip(x, 0.0, 1.0))
        left = np.where(x <= 0.0, 0.0, np.where(x > 1.0, 1.0, left_c))
        right = np.where(x >= 1.0, 1.0, np.where(x < 0.0, 0.0, right_c))
        return np.clip(left, 0.0, 1.0), np.clip(right, 0.0, 1.0)

    def eval(self, u: ArrayLike, side: Side = Side.POINT) -> Any:
        """Evaluate h(u-), h(u+) or the stored point value.

        The point value is the midpoint of the limits of the restriction to [0, 1],
        so a BEC variable-node function keeps h(1) = epsilon.
        """
        x = np.atleast_1d(_as_array(u))
        if side == Side.LEFT:
            values = self.limits(x)[0]
        elif side == Side.RIGHT:
            values = self.limits(x)[1]
        else:
            left_c, right_c = self._core_limits(np.clip(x, 0.0, 1.0))
            mid = 0.5 * (left_c + right_c)
            values = np.where(x < 0.0, 0.0, np.where(x > 1.0, 1.0, mid))
            values = np.clip(values, 0.0, 1.0)
        return _restore(values.reshape(np.shape(u)), u)

    def __call__(self, u: ArrayLike) -> Any:
        return self.eval(u)

    def integral(self, a: ArrayLike) -> Any:
        """Integral of h over [0, a], extended by 0 below 0 and by 1 above 1."""
        x = np.atleast_1d(_as_array(a))
        core = self._core_integral(np.clip(x, 0.0, 1.0))
        values = np.where(x < 0.0, 0.0, core + np.maximum(x - 1.0, 0.0))
        return _restore(values.reshape(np.shape(a)), a)

    def b_integral(self) -> float:
        """B_h = 1 - int_0^1 h, the mean of the inverse over [0, 1]."""
        return 1.0 - float(self.integral(1.0))

    def check_monotone(self, grid: int = MONOTONICITY_GRID) -> None:
        """Raise MonotonicityError if h decreases on a uniform grid."""
        u = np.linspace(0.0, 1.0, grid)
        values = self.eval(u)
        drops = np.diff(values)
        worst = float(drops.min()) if drops.size else 0.0
        if worst < -MONOTONICITY_SLACK:
            at = float(u[int(np.argmin(drops))])
            raise MonotonicityError(
                f"{type(self).__name__} decreases by {-worst:.3e} near u={at:.6f}",
                details={"drop": -worst, "u": at},
            )


class PiecewiseConstant(ExitFunctionBase):
    """Sum of upward jumps: h(u) = sum_j heights_j 1{u >= positions_j}."""

    kind: Literal["piecewise_constant"] = "piecewise_constant"
    positions: Tuple[float, ...] = Field(description="Sorted jump positions in [0, 1]")
    heights: Tuple[float, ...] = Field(description="Positive jump heights summing to at most 1")

    _positions: np.ndarray = PrivateAttr()
    _cumulative: np.ndarray = PrivateAttr()
    _heights: np.ndarray = PrivateAttr()

    @field_validator("positions")
    @classmethod
    def validate_positions(cls, v):
        """Validate positions are sorted and inside the unit interval."""
        arr = np.asarray(v, dtype=float)
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("Jump positions must lie in [0, 1]")
        if np.any(np.diff(arr) < 0.0):
            raise ValueError("Jump positions must be sorted")
        return v

    @field_validator("heights")
    @classmethod
    def validate_heights(cls, v):
        """Validate heights are positive and sum to at most one."""
        arr = np.asarray(v, dtype=float)
        if np.any(arr <= 0.0):
            raise ValueError("Jump heights must be positive")
        if arr.sum() > 1.0 + 1e-12:
            raise ValueError("Jump heights must sum to at most 1")
        return v

    def model_post_init(self, __context: Any) -> None:
        if len(self.positions) != len(self.heights):
            raise ValueError("positions and heights must have the same length")
        self._positions = np.asarray(self.positions, dtype=float)
        self._heights = np.asarray(self.heights, dtype=float)
        self._cumulative = np.concatenate([[0.0], np.cumsum(self._heights)])

    @property
    def total(self) -> float:
        return float(self._cumulative[-1])

    def _core_limits(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        left = self._cumulative[np.searchsorted(self._positions, u, side="left")]
        right = self._cumulative[np.searchsorted(self._positions, u, side="right")]
        return left, right

    def _core_integral(self, a: np.ndarray) -> np.ndarray:
        gaps = np.maximum(a[:, None] - self._positions[None, :], 0.0)
        return gaps @ self._heights

    def jumps(self) -> np.ndarray:
        return np.unique(self._positions)

    def inverse(self) -> "ExitFunction":
        # Flat levels of h become jumps of the inverse and vice versa
        positions = self._cumulative.copy()
        heights = np.diff(np.concatenate([[0.0], self._positions, [1.0]]))
        keep = heights > 0.0
        if positions[-1] >= 1.0:
            keep[-1] = False
        return PiecewiseConstant(
            positions=tuple(float(p) for p in np.clip(positions[keep], 0.0, 1.0)),
            heights=tuple(float(h) for h in heights[keep]),
        )


class PiecewiseLinear(ExitFunctionBase):
    """Linear interpolation between knots; a repeated abscissa is a vertical jump."""

    kind: Literal["piecewise_linear"] = "piecewise_linear"
    knots_u: Tuple[float, ...] = Field(description="Non-decreasing abscissae from 0 to 1")
    knots_v: Tuple[float, ...] = Field(description="Non-decreasing ordinates in [0, 1]")

    _u: np.ndarray = PrivateAttr()
    _v: np.ndarray = PrivateAttr()
    _cumulative: np.ndarray = PrivateAttr()

    @field_validator("knots_u")
    @classmethod
    def validate_knots_u(cls, v):
        """Validate abscissae span [0, 1] in order."""
        arr = np.asarray(v, dtype=float)
        if arr.size < 2:
            raise ValueError("At least two knots are required")
        if arr[0] != 0.0 or arr[-1] != 1.0:
            raise ValueError("Knots must start at 0 and end at 1")
        if np.any(np.diff(arr) < 0.0):
            raise ValueError("Knot abscissae must be non-decreasing")
        return v

    @field_validator("knots_v")
    @classmethod
    def validate_knots_v(cls, v):
        """Validate ordinates are inside the unit interval."""
        arr = np.asarray(v, dtype=float)
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("Knot values must lie in [0, 1]")
        return v

    def model_post_init(self, __context: Any) -> None:
        if len(self.knots_u) != len(self.knots_v):
            raise ValueError("knots_u and knots_v must have the same length")
        self._u = np.asarray(self.knots_u, dtype=float)
        self._v = np.asarray(self.knots_v, dtype=float)
        drops = np.diff(self._v)
        if drops.size and drops.min() < -MONOTONICITY_SLACK:
            raise MonotonicityError(
                "Piecewise linear knots decrease",
                details={"drop": float(-drops.min())},
            )
        areas = np.diff(self._u) * (self._v[:-1] + self._v[1:]) / 2.0
        self._cumulative = np.concatenate([[0.0], np.cumsum(areas)])

    def _segment_value(self, k: np.ndarray, u: np.ndarray) -> np.ndarray:
        u0, u1 = self._u[k], self._u[k + 1]
        v0, v1 = self._v[k], self._v[k + 1]
        width = u1 - u0
        safe = np.where(width > 0.0, width, 1.0)
        frac = np.where(width > 0.0, (u - u0) / safe, 0.0)
        return v0 + (v1 - v0) * np.clip(frac, 0.0, 1.0)

    def _core_limits(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        last = len(self._u) - 2
        k_left = np.clip(np.searchsorted(self._u, u, side="left") - 1, 0, last)
        k_right = np.clip(np.searchsorted(self._u, u, side="right") - 1, 0, last)
        left = self._segment_value(k_left, u)
        right = self._segment_value(k_right, u)
        # A vertical segment ending exactly at u: the left limit is its lower end
        return np.minimum(left, right), np.maximum(left, right)

    def _core_integral(self, a: np.ndarray) -> np.ndarray:
        last = len(self._u) - 2
        k = np.clip(np.searchsorted(self._u, a, side="right") - 1, 0, last)
        value = self._segment_value(k, a)
        return self._cumulative[k] + (a - self._u[k]) * (self._v[k] + value) / 2.0

    def jumps(self) -> np.ndarray:
        repeated = np.diff(self._u) == 0.0
        rising = np.diff(self._v) > 0.0
        jumps = list(self._u[:-1][repeated & rising])
        if self._v[0] > 0.0:
            jumps.insert(0, 0.0)
        if self._v[-1] < 1.0:
            jumps.append(1.0)
        return np.unique(np.asarray(jumps, dtype=float))

    def inverse(self) -> "ExitFunction":
        new_u = list(np.clip(np.maximum.accumulate(self._v), 0.0, 1.0))
        new_v = list(self._u)
        if new_u[0] > 0.0:
            new_u.insert(0, 0.0)
            new_v.insert(0, 0.0)
        if new_u[-1] < 1.0:
            new_u.append(1.0)
            new_v.append(1.0)
        return PiecewiseLinear(
            knots_u=tuple(float(x) for x in new_u), knots_v=tuple(float(x) for x in new_v)
        )


class Analytic(ExitFunctionBase):
    """Continuous function given by a registered closure and its parameters."""

    kind: Literal["analytic"] = "analytic"
    closure_id: str = Field(description="Registry id of the closure factory")
    params: Tuple[float, ...] = Field(default=(), description="Closure parameters")

    _fn: VectorFunction = PrivateAttr()
    _total: float = PrivateAttr(default=float("nan"))

    def model_post_init(self, __context: Any) -> None:
        self._fn = resolve_closure(self.closure_id, tuple(self.params))
        self.check_monotone()

    def _core_limits(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        values = np.clip(np.asarray(self._fn(u), dtype=float), 0.0, 1.0)
        return values, values

    def _scalar(self, x: float) -> float:
        return float(np.clip(self._fn(np.array([x]))[0], 0.0, 1.0))

    def _quad(self, lo: float, hi: float) -> float:
        if hi <= lo:
            return 0.0
        value, abserr = integrate.quad(
            self._scalar, lo, hi, epsabs=QUAD_TOLERANCE, epsrel=QUAD_TOLERANCE, limit=200
        )
        if abserr > QUAD_ERROR_LIMIT:
            raise QuadratureFailureError(
                f"Quadrature of {self.closure_id} on [{lo}, {hi}] has error {abserr:.2e}",
                details={"closure_id": self.closure_id, "abserr": abserr},
            )
        return float(value)

    def _core_integral(self, a: np.ndarray) -> np.ndarray:
        if a.size == 1 and a[0] == 1.0 and not np.isnan(self._total):
            return np.array([self._total])
        order = np.argsort(a)
        sorted_a = a[order]
        pieces = np.empty_like(sorted_a)
        previous, running = 0.0, 0.0
        for i, point in enumerate(sorted_a):
            running += self._quad(previous, float(point))
            pieces[i] = running
            previous = float(point)
        result = np.empty_like(a)
        result[order] = pieces
        if a.size == 1 and a[0] == 1.0:
            self._total = float(result[0])
        return result

    def inverse(self) -> "ExitFunction":
        return Inverted(inner=self)


class Inverted(ExitFunctionBase):
    """Generalized inverse of another EXIT function, evaluated by bisection."""

    kind: Literal["inverted"] = "inverted"
    inner: "ExitFunction"

    def _core_limits(self, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        inner = self.inner
        zeros = np.zeros_like(v)
        ones = np.ones_like(v)
        # g(v-) = inf{u : h(u+) >= v}
        _, left = bisect_predicate(lambda u: inner.limits(u)[1] >= v, zeros, ones)
        left = np.where(inner.limits(zeros)[1] >= v, 0.0, left)
        # g(v+) = sup{u : h(u-) <= v}
        right, _ = bisect_predicate(lambda u: inner.limits(u)[0] > v, zeros, ones)
        right = np.where(inner.limits(ones)[0] <= v, 1.0, right)
        return left, np.maximum(left, right)

    def _core_integral(self, a: np.ndarray) -> np.ndarray:
        # Young's identity: int_0^a g + int_0^x h = a x for x in [g(a-), g(a+)]
        x = self._core_limits(a)[0]
        return a * x - np.asarray(self.inner.integral(x), dtype=float)

    def jumps(self) -> np.ndarray:
        return np.empty(0)

    def inverse(self) -> "ExitFunction":
        return self.inner


class Affine(ExitFunctionBase):
    """Affine change of coordinates: h(x) = (H(in_shift + in_scale x) - out_shift) / out_scale."""

    kind: Literal["affine"] = "affine"
    inner: "ExitFunction"
    in_shift: float = Field(description="Inner abscissa of x = 0")
    in_scale: float = Field(description="Inner abscissa span of the unit interval")
    out_shift: float = Field(description="Inner ordinate mapped to 0")
    out_scale: float = Field(description="Inner ordinate span mapped to the unit interval")

    @field_validator("in_scale", "out_scale")
    @classmethod
    def validate_scale(cls, v):
        """Validate scales are nonzero."""
        if v == 0.0:
            raise ValueError("Affine scales must be nonzero")
        return v

    def model_post_init(self, __context: Any) -> None:
        if (self.in_scale > 0) != (self.out_scale > 0):
            raise ValueError("Affine scales must share a sign to preserve monotonicity")

    def _core_limits(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        left_h, right_h = self.inner.limits(self.in_shift + self.in_scale * u)
        if self.in_scale < 0:
            left_h, right_h = right_h, left_h
        left = (left_h - self.out_shift) / self.out_scale
        right = (right_h - self.out_shift) / self.out_scale
        return left, right

    def _core_integral(self, a: np.ndarray) -> np.ndarray:
        start = float(self.inner.integral(self.in_shift))
        moved = np.asarray(self.inner.integral(self.in_shift + self.in_scale * a), dtype=float)
        return ((moved - start) / self.in_scale - self.out_shift * a) / self.out_scale

    def jumps(self) -> np.ndarray:
        mapped = (self.inner.jumps() - self.in_shift) / self.in_scale
        return np.unique(mapped[(mapped >= 0.0) & (mapped <= 1.0)])

    def inverse(self) -> "ExitFunction":
        return Affine(
            inner=self.inner.inverse(),
            in_shift=self.out_shift,
            in_scale=self.out_scale,
            out_shift=self.in_shift,
            out_scale=self.in_scale,
        )


ExitFunction = Annotated[
    Union[PiecewiseConstant, PiecewiseLinear, Analytic, Inverted, Affine],
    Field(discriminator="kind"),
]

Inverted.model_rebuild()
Affine.model_rebuild()


class ExitFunctionDocument(BaseModel):
    """Wrapper used to (de)serialize any EXIT function variant."""

    function: ExitFunction


def identity_function() -> PiecewiseLinear:
    """The identity map on [0, 1]."""
    return PiecewiseLinear(knots_u=(0.0, 1.0), knots_v=(0.0, 1.0))


def unit_step(at: float, height: float = 1.0) -> PiecewiseConstant:
    """Single jump of the given height at ``at``."""
    return PiecewiseConstant(positions=(float(at),), heights=(float(height),))


def dump_exit_function(h: ExitFunctionBase) -> str:
    """Serialize an EXIT function to JSON."""
    return ExitFunctionDocument(function=h).model_dump_json()  # type: ignore[arg-type]


def load_exit_function(payload: str) -> ExitFunctionBase:
    """Parse an EXIT function from JSON produced by dump_exit_function."""
    return ExitFunctionDocument.model_validate_json(payload).function  # type: ignore[return-value]
