"""Affine change of coordinates between a crossing box and the unit square."""
from __future__ import annotations

from typing import Any, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.domain.exceptions import DegenerateBoxError

ArrayLike = Union[float, np.ndarray]

MIN_SCALE = 1e-12


class RescaleMap(BaseModel):
    """Maps raw (u, v) to box coordinates (u - origin_u) / scale_u, (v - origin_v) / scale_v.

    A negative scale reverses an axis. Both negative exchanges the roles of the
    (0,0) and (1,1) corners; mixed signs invert one orientation, as for models
    whose raw EXIT functions are decreasing.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    origin_u: float = Field(default=0.0, description="Raw u mapped to 0")
    origin_v: float = Field(default=0.0, description="Raw v mapped to 0")
    scale_u: float = Field(default=1.0, description="Raw u span of the box")
    scale_v: float = Field(default=1.0, description="Raw v span of the box")

    def model_post_init(self, __context: Any) -> None:
        if abs(self.scale_u) < MIN_SCALE or abs(self.scale_v) < MIN_SCALE:
            raise DegenerateBoxError(
                "Rescale box has a side shorter than 1e-12",
                details={"scale_u": self.scale_u, "scale_v": self.scale_v},
            )

    @classmethod
    def between(cls, lo: Tuple[float, float], hi: Tuple[float, float]) -> "RescaleMap":
        """Box with lo at the origin and hi at (1, 1)."""
        return cls(
            origin_u=float(lo[0]),
            origin_v=float(lo[1]),
            scale_u=float(hi[0] - lo[0]),
            scale_v=float(hi[1] - lo[1]),
        )

    @property
    def exchanged(self) -> bool:
        return self.scale_u < 0 and self.scale_v < 0

    @property
    def inverted(self) -> bool:
        return (self.scale_u < 0) != (self.scale_v < 0)

    @property
    def is_identity(self) -> bool:
        return (
            self.origin_u == 0.0
            and self.origin_v == 0.0
            and self.scale_u == 1.0
            and self.scale_v == 1.0
        )

    @property
    def potential_factor(self) -> float:
        """Raw potential differences equal box potential differences times this factor."""
        return self.scale_u * self.scale_v

    def to_box(self, u: ArrayLike, v: ArrayLike) -> Tuple[Any, Any]:
        return (
            (np.asarray(u, dtype=float) - self.origin_u) / self.scale_u,
            (np.asarray(v, dtype=float) - self.origin_v) / self.scale_v,
        )

    def from_box(self, u: ArrayLike, v: ArrayLike) -> Tuple[Any, Any]:
        return (
            self.origin_u + self.scale_u * np.asarray(u, dtype=float),
            self.origin_v + self.scale_v * np.asarray(v, dtype=float),
        )
