"""Spatial profiles on a uniform grid and the diagnostics of coupled runs."""
from __future__ import annotations

from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator


class SpatialProfile(BaseModel):
    """Values f(x_i), x_i = i * pitch, for i in [i_min, i_min + len(values) - 1].

    Outside the window the profile equals its left/right limit values.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pitch: float = Field(gt=0.0, description="Grid pitch Delta")
    i_min: int = Field(description="Index of the first stored sample")
    values: np.ndarray = Field(description="Samples on the window")
    left_limit: float = Field(default=0.0, description="Value for i < i_min")
    right_limit: float = Field(default=1.0, description="Value for i > i_max")

    @field_validator("values", mode="before")
    @classmethod
    def validate_values(cls, v):
        """Coerce samples to a 1-D float array."""
        arr = np.asarray(v, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("Profile values must be a non-empty 1-D array")
        return arr

    @field_serializer("values")
    def serialize_values(self, values: np.ndarray) -> List[float]:
        return [float(x) for x in values]

    @property
    def i_max(self) -> int:
        return self.i_min + self.values.size - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.i_min, self.i_max + 1)

    @property
    def positions(self) -> np.ndarray:
        return self.indices * self.pitch

    @property
    def is_monotone(self) -> bool:
        extended = np.concatenate([[self.left_limit], self.values, [self.right_limit]])
        return bool(np.all(np.diff(extended) >= -1e-12))

    def with_values(
        self,
        values: np.ndarray,
        left_limit: Optional[float] = None,
        right_limit: Optional[float] = None,
    ) -> "SpatialProfile":
        """Same grid, new samples."""
        return SpatialProfile(
            pitch=self.pitch,
            i_min=self.i_min,
            values=values,
            left_limit=self.left_limit if left_limit is None else left_limit,
            right_limit=self.right_limit if right_limit is None else right_limit,
        )

    def at(self, indices: np.ndarray) -> np.ndarray:
        """Samples at arbitrary integer indices, limits outside the window."""
        idx = np.asarray(indices, dtype=int)
        inside = np.clip(idx - self.i_min, 0, self.values.size - 1)
        out = self.values[inside]
        out = np.where(idx < self.i_min, self.left_limit, out)
        return np.where(idx > self.i_max, self.right_limit, out)


class TerminationKind(str, Enum):
    """How the chain is terminated."""

    NONE = "none"
    ONE_SIDED_LEFT = "left"
    TWO_SIDED = "both"


class Termination(BaseModel):
    """Forces f to 0 outside the allowed index region."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: TerminationKind = Field(default=TerminationKind.NONE, description="Termination kind")
    boundary_index: int = Field(default=0, description="First allowed index")
    length_index: Optional[int] = Field(
        default=None, description="Last allowed index for two-sided termination"
    )

    @field_validator("length_index")
    @classmethod
    def validate_length(cls, v):
        """Validate the window length is positive."""
        if v is not None and v <= 0:
            raise ValueError("Two-sided termination length must be positive")
        return v

    def allowed(self, indices: np.ndarray) -> np.ndarray:
        """Boolean mask of indices where the state is free."""
        idx = np.asarray(indices)
        if self.kind == TerminationKind.NONE:
            return np.ones(idx.shape, dtype=bool)
        mask = idx >= self.boundary_index
        if self.kind == TerminationKind.TWO_SIDED:
            if self.length_index is None:
                raise ValueError("Two-sided termination needs length_index")
            mask &= idx <= self.boundary_index + self.length_index
        return mask

    @property
    def zeroes_left(self) -> bool:
        return self.kind != TerminationKind.NONE

    @property
    def zeroes_right(self) -> bool:
        return self.kind == TerminationKind.TWO_SIDED


class LimitClass(str, Enum):
    """Classification of where a coupled run ended."""

    TO_ZERO = "to_zero"
    TO_ONE = "to_one"
    TO_WAVE_PAIR = "to_wave_pair"
    STALLED = "stalled"


class InitKind(str, Enum):
    """Initial profile families."""

    ALL_ONES = "ones"
    UNIT_STEP = "step"
    PROFILE = "file"


class InitialCondition(BaseModel):
    """AllOnes, UnitStep(position) or a custom profile."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: InitKind = Field(default=InitKind.ALL_ONES, description="Initial profile family")
    position: float = Field(default=0.0, description="Step location in x units")
    profile: Optional[SpatialProfile] = Field(default=None, description="Custom profile")


class Snapshot(BaseModel):
    """Profiles recorded at one iteration."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    iteration: int
    f: SpatialProfile
    g: SpatialProfile


class RunDiagnostics(BaseModel):
    """Trace of a coupled density-evolution run."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    iterations: int = Field(description="Iterations performed")
    fronts: List[Optional[float]] = Field(description="Front position of f per iteration")
    shifts: List[Optional[float]] = Field(description="Front displacement per iteration")
    f: SpatialProfile = Field(description="Final f profile")
    g: SpatialProfile = Field(description="Final g profile")
    converged: bool = Field(description="Sup-norm change stayed below tol")
    monotone: bool = Field(description="Every iterate was non-decreasing in space")
    classification: LimitClass = Field(description="Limit classification")
    front_level: float = Field(description="Absolute level tracked by the front")
    top_value: float = Field(description="Scalar DE limit from the all-ones state")
    snapshots: List[Snapshot] = Field(default_factory=list, description="Recorded iterates")


class SpeedEstimate(BaseModel):
    """Least-squares front speed."""

    model_config = ConfigDict(frozen=True)

    speed: float = Field(description="Slope of front position against iteration")
    stderr: float = Field(description="Standard error of the slope")
    samples: int = Field(description="Number of fronts used")


class FixedPointCheck(BaseModel):
    """Outcome of the spatial-integration identity on a fixed point."""

    model_config = ConfigDict(frozen=True)

    lhs: float = Field(description="Potential side of the identity")
    xi: float = Field(description="Spatial-integration functional")
    residual: float = Field(description="|lhs - xi|")
    reconstructed_area_gap: float = Field(description="A of the pair rebuilt from samples")
    step_change: float = Field(description="Sup-norm move under one more iteration")
