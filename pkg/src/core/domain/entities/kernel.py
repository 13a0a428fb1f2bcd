"""Averaging kernels and their discretizations."""
from __future__ import annotations

from typing import Annotated, Any, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator
from scipy.stats import norm

from src.core.domain.numerics import invert_increasing

ArrayLike = Union[float, np.ndarray]

# Tail mass left outside a truncated Gaussian, per side
GAUSSIAN_TAIL = 5e-13


def _restore(values: np.ndarray, like: ArrayLike) -> Any:
    if np.ndim(like) == 0:
        return float(values)
    return values


class KernelBase(BaseModel):
    """Even, non-negative, unit-mass kernel omega with CDF Omega."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    def _pdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def half_width(self) -> float:
        """Effective support half-width used for padding and discretization."""
        raise NotImplementedError

    @property
    def sup_norm(self) -> float:
        raise NotImplementedError

    @property
    def regular(self) -> bool:
        """Positive exactly on the open support interval."""
        return True

    @property
    def strictly_positive(self) -> bool:
        """Positive on the whole effective support, including near its ends."""
        return False

    @property
    def kernel_id(self) -> str:
        raise NotImplementedError

    def pdf(self, x: ArrayLike) -> Any:
        values = self._pdf(np.atleast_1d(np.asarray(x, dtype=float)))
        return _restore(values.reshape(np.shape(x)), x)

    def cdf(self, x: ArrayLike) -> Any:
        values = np.clip(self._cdf(np.atleast_1d(np.asarray(x, dtype=float))), 0.0, 1.0)
        return _restore(values.reshape(np.shape(x)), x)

    def quantile(self, p: ArrayLike) -> Any:
        """Inverse CDF by bisection on the effective support."""
        target = np.clip(np.atleast_1d(np.asarray(p, dtype=float)), 0.0, 1.0)
        w = self.half_width
        values = invert_increasing(self._cdf, target, -w, w, iterations=80)
        return _restore(values.reshape(np.shape(p)), p)


class BoxcarKernel(KernelBase):
    """omega(x) = 1 / (2W) on [-W, W]."""

    shape: Literal["boxcar"] = "boxcar"
    half_width_w: float = Field(default=1.0, gt=0.0, alias="W", description="Half-width W")

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    def _pdf(self, x: np.ndarray) -> np.ndarray:
        return np.where(np.abs(x) <= self.half_width_w, 0.5 / self.half_width_w, 0.0)

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        return np.clip((x + self.half_width_w) / (2.0 * self.half_width_w), 0.0, 1.0)

    @property
    def half_width(self) -> float:
        return self.half_width_w

    @property
    def sup_norm(self) -> float:
        return 0.5 / self.half_width_w

    @property
    def kernel_id(self) -> str:
        return f"boxcar(W={self.half_width_w:g})"

    def quantile(self, p: ArrayLike) -> Any:
        target = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
        return _restore((2.0 * target - 1.0) * self.half_width_w, p)


class GaussianKernel(KernelBase):
    """Normal density of scale sigma truncated at +-radius and renormalized."""

    shape: Literal["gaussian"] = "gaussian"
    sigma: float = Field(default=1.0, gt=0.0, description="Standard deviation")
    truncation: Optional[float] = Field(
        default=None, description="Truncation radius; defaults to a 1e-12 tail mass"
    )

    @field_validator("truncation")
    @classmethod
    def validate_truncation(cls, v):
        """Validate the truncation radius is positive."""
        if v is not None and v <= 0:
            raise ValueError("Truncation radius must be positive")
        return v

    @property
    def radius(self) -> float:
        if self.truncation is not None:
            return float(self.truncation)
        return float(self.sigma * norm.isf(GAUSSIAN_TAIL))

    @property
    def _mass(self) -> float:
        return float(1.0 - 2.0 * norm.sf(self.radius / self.sigma))

    def _pdf(self, x: np.ndarray) -> np.ndarray:
        inside = np.abs(x) <= self.radius
        return np.where(inside, norm.pdf(x / self.sigma) / (self.sigma * self._mass), 0.0)

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        r = self.radius
        clipped = np.clip(x, -r, r)
        return (norm.cdf(clipped / self.sigma) - norm.cdf(-r / self.sigma)) / self._mass

    @property
    def half_width(self) -> float:
        return self.radius

    @property
    def sup_norm(self) -> float:
        return float(norm.pdf(0.0) / (self.sigma * self._mass))

    @property
    def strictly_positive(self) -> bool:
        return True

    @property
    def kernel_id(self) -> str:
        return f"gaussian(sigma={self.sigma:g},R={self.radius:g})"

    def quantile(self, p: ArrayLike) -> Any:
        target = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
        lower = norm.cdf(-self.radius / self.sigma)
        values = self.sigma * norm.ppf(lower + target * self._mass)
        return _restore(np.clip(values, -self.radius, self.radius), p)


class BoxcarGaussianKernel(KernelBase):
    """Boxcar of half-width W smoothed by a centered normal of scale sigma."""

    shape: Literal["boxcar_gaussian"] = "boxcar_gaussian"
    half_width_w: float = Field(default=1.0, gt=0.0, alias="W", description="Boxcar half-width")
    sigma: float = Field(gt=0.0, description="Mollifier standard deviation")

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    def _antiderivative(self, y: np.ndarray) -> np.ndarray:
        # int_{-inf}^{y} Phi(t / sigma) dt
        s = self.sigma
        return y * norm.cdf(y / s) + s * norm.pdf(y / s)

    def _pdf(self, x: np.ndarray) -> np.ndarray:
        w, s = self.half_width_w, self.sigma
        return (norm.cdf((x + w) / s) - norm.cdf((x - w) / s)) / (2.0 * w)

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        w = self.half_width_w
        return (self._antiderivative(x + w) - self._antiderivative(x - w)) / (2.0 * w)

    @property
    def half_width(self) -> float:
        return float(self.half_width_w + self.sigma * norm.isf(GAUSSIAN_TAIL))

    @property
    def sup_norm(self) -> float:
        mass = 2.0 * norm.cdf(self.half_width_w / self.sigma) - 1.0
        return float(mass / (2.0 * self.half_width_w))

    @property
    def strictly_positive(self) -> bool:
        return True

    @property
    def kernel_id(self) -> str:
        return f"boxcar_gaussian(W={self.half_width_w:g},sigma={self.sigma:g})"


class TableKernel(KernelBase):
    """Histogram kernel: values[k] on |x| in [k b, (k+1) b), mirrored and normalized."""

    shape: Literal["table"] = "table"
    bin_width: float = Field(gt=0.0, description="Bin width b")
    values: Tuple[float, ...] = Field(description="Non-negative bin heights for x >= 0")

    _density: np.ndarray = PrivateAttr()
    _edges: np.ndarray = PrivateAttr()
    _cumulative: np.ndarray = PrivateAttr()

    @field_validator("values")
    @classmethod
    def validate_values(cls, v):
        """Validate bin heights are non-negative with positive mass."""
        arr = np.asarray(v, dtype=float)
        if arr.size == 0 or np.any(arr < 0.0) or arr.sum() <= 0.0:
            raise ValueError("Table kernel needs non-negative values with positive mass")
        return v

    def model_post_init(self, __context: Any) -> None:
        raw = np.asarray(self.values, dtype=float)
        self._density = raw / (2.0 * self.bin_width * raw.sum())
        self._edges = self.bin_width * np.arange(raw.size + 1)
        self._cumulative = np.concatenate([[0.0], np.cumsum(self._density * self.bin_width)])

    def _pdf(self, x: np.ndarray) -> np.ndarray:
        k = np.floor(np.abs(x) / self.bin_width).astype(int)
        inside = k < self._density.size
        return np.where(inside, self._density[np.minimum(k, self._density.size - 1)], 0.0)

    def _half_mass(self, r: np.ndarray) -> np.ndarray:
        # int_0^r omega for r >= 0
        r = np.minimum(r, self._edges[-1])
        k = np.minimum(np.floor(r / self.bin_width).astype(int), self._density.size - 1)
        return self._cumulative[k] + (r - self._edges[k]) * self._density[k]

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        return 0.5 + np.sign(x) * self._half_mass(np.abs(x))

    @property
    def half_width(self) -> float:
        return float(self._edges[-1])

    @property
    def sup_norm(self) -> float:
        return float(self._density.max())

    @property
    def regular(self) -> bool:
        return bool(np.all(self._density > 0.0))

    @property
    def kernel_id(self) -> str:
        return f"table(b={self.bin_width:g},n={len(self.values)})"


KernelSpec = Annotated[
    Union[BoxcarKernel, GaussianKernel, BoxcarGaussianKernel, TableKernel],
    Field(discriminator="shape"),
]


class KernelDocument(BaseModel):
    """Wrapper used to (de)serialize any kernel shape."""

    kernel: KernelSpec


class DiscreteKernel(BaseModel):
    """Taps omega_i = Omega((i + 1/2) pitch) - Omega((i - 1/2) pitch), i = -M..M."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    pitch: float = Field(gt=0.0, description="Grid pitch Delta")
    taps: Tuple[float, ...] = Field(description="Centered taps of odd length summing to 1")
    kernel_id: str = Field(default="", description="Id of the parent kernel")

    @field_validator("taps")
    @classmethod
    def validate_taps(cls, v):
        """Validate taps are an odd-length even distribution."""
        arr = np.asarray(v, dtype=float)
        if arr.size % 2 != 1:
            raise ValueError("Tap count must be odd")
        if np.any(arr < 0.0):
            raise ValueError("Taps must be non-negative")
        if abs(arr.sum() - 1.0) > 1e-12:
            raise ValueError("Taps must sum to 1")
        if np.max(np.abs(arr - arr[::-1])) > 1e-12:
            raise ValueError("Taps must be even")
        return v

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.taps, dtype=float)

    @property
    def half_length(self) -> int:
        return (len(self.taps) - 1) // 2

    @property
    def offsets(self) -> np.ndarray:
        m = self.half_length
        return np.arange(-m, m + 1)
