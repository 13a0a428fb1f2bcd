"""Piecewise-constant traveling-wave solutions."""
from __future__ import annotations

from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class ContinuationState(BaseModel):
    """Snapshot of the continuation path after one accepted macro-step."""

    model_config = ConfigDict(frozen=True)

    t: float = Field(description="Path parameter in [0, 1]")
    step: float = Field(description="Accepted step length")
    condition_number: float = Field(description="Condition number of the extended Jacobian")
    spectral_radius: float = Field(description="Spectral radius of the projected coupling PMP")
    row_sum_error: float = Field(description="Max deviation of the coupling row sums from 1")
    gauge: float = Field(description="Weighted jump sum, constant along the path")
    shift: float = Field(description="Shift at t")


class WaveSolution(BaseModel):
    """Jump positions and shift of a piecewise-constant traveling wave.

    f(x) = sum_j heights_f[j] 1{x >= zf[j]}, g(x) = sum_i heights_g[i] 1{x >= zg[i]},
    and one iteration moves the pair right by ``shift``.
    """

    model_config = ConfigDict(frozen=True)

    zf: Tuple[float, ...] = Field(description="Jump positions of f")
    zg: Tuple[float, ...] = Field(description="Jump positions of g")
    heights_f: Tuple[float, ...] = Field(description="Jump heights of f")
    heights_g: Tuple[float, ...] = Field(description="Jump heights of g")
    targets_f: Tuple[float, ...] = Field(description="Smoothed g levels where f jumps")
    targets_g: Tuple[float, ...] = Field(description="Smoothed f levels where g jumps")
    shift: float = Field(description="Translation per iteration")
    kernel_id: str = Field(description="Kernel the wave was built for")
    residual: float = Field(description="Sup-norm forward-map residual")
    area_gap: float = Field(description="Area gap of the quantized pair")
    shift_extrapolated: Optional[float] = Field(
        default=None, description="Shift extrapolated to a vanishing mollifier"
    )
    path: List[ContinuationState] = Field(default_factory=list, description="Continuation trace")

    @field_validator("zf", "zg")
    @classmethod
    def validate_ordered(cls, v):
        """Validate jump positions are non-decreasing."""
        if np.any(np.diff(np.asarray(v, dtype=float)) < -1e-9):
            raise ValueError("Jump positions must be non-decreasing")
        return v

    @property
    def gauge(self) -> float:
        return float(
            np.dot(self.heights_g, self.zg) + np.dot(self.heights_f, self.zf)
        )

    def profile(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Right-continuous f and g on a grid."""
        pts = np.asarray(x, dtype=float)
        f = (pts[:, None] >= np.asarray(self.zf)[None, :]) @ np.asarray(self.heights_f)
        g = (pts[:, None] >= np.asarray(self.zg)[None, :]) @ np.asarray(self.heights_g)
        return f, g


class CertReport(BaseModel):
    """Clause-by-clause certificate of a wave solution."""

    model_config = ConfigDict(frozen=True)

    passed: bool = Field(description="All clauses hold")
    clauses: Dict[str, bool] = Field(description="Clause name to outcome")
    values: Dict[str, float] = Field(description="Quantities behind each clause")
