"""Potential, crossing and threshold reports."""
from __future__ import annotations

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from src.core.domain.entities.rescale_map import RescaleMap


class GapVerdict(str, Enum):
    """Outcome of the strictly positive gap test."""

    STRICT_GAP = "strict_gap"
    NON_STRICT_GAP = "non_strict_gap"
    FAILS = "fails"


class BoxRule(str, Enum):
    """Which pair of crossings spans the box used for area balance."""

    REACHED = "reached"
    LOWEST = "lowest"
    HIGHEST = "highest"


class CrossingPoint(BaseModel):
    """A point (u, v) with u in hg(v) and v in hf(u), together with its potential."""

    model_config = ConfigDict(frozen=True)

    u: float = Field(description="g-side coordinate")
    v: float = Field(description="f-side coordinate")
    phi: float = Field(default=0.0, description="Potential at the crossing")
    continuum: bool = Field(
        default=False, description="End point of a connected set of crossings"
    )


class PotentialReport(BaseModel):
    """Area gap, crossings and gap verdict of an EXIT pair."""

    model_config = ConfigDict(frozen=True)

    area_gap: float = Field(description="Signed area gap A = phi(1, 1)")
    area_gap_check: float = Field(description="1 - int hf - int hg, equal to A")
    crossings: List[CrossingPoint] = Field(description="Ordered crossing set")
    minimum: float = Field(description="Minimum of phi, attained at a crossing")
    cross_m_min: CrossingPoint = Field(description="Smallest minimizing crossing")
    cross_m_max: CrossingPoint = Field(description="Largest minimizing crossing")
    verdict: GapVerdict = Field(description="Gap verdict")
    margin: float = Field(description="min over nontrivial crossings of phi - max(0, A)")
    witness: Optional[CrossingPoint] = Field(
        default=None, description="Nontrivial crossing attaining the margin"
    )

    @property
    def nontrivial(self) -> List[CrossingPoint]:
        return [
            c
            for c in self.crossings
            if not (max(c.u, c.v) < 1e-7 or min(c.u, c.v) > 1.0 - 1e-7)
        ]


class AreaSample(BaseModel):
    """Area gap of the rescaled box at one parameter value."""

    model_config = ConfigDict(frozen=True)

    parameter: float = Field(description="Channel parameter")
    area_gap: float = Field(description="Signed area on the box; +-inf for trivial regimes")
    verdict: Optional[GapVerdict] = Field(default=None, description="Gap verdict on the box")
    box: Optional[RescaleMap] = Field(default=None, description="Box in raw coordinates")


class ThresholdReport(BaseModel):
    """Uncoupled and coupled thresholds with the area trace behind them."""

    model_config = ConfigDict(frozen=True)

    family: str = Field(description="Model family tag")
    parameter_role: str = Field(description="Name of the channel parameter")
    bracket: List[float] = Field(description="Parameter bracket searched")
    box_rule: BoxRule = Field(description="Box selection rule")
    uncoupled: float = Field(description="Uncoupled BP threshold")
    coupled: Optional[float] = Field(default=None, description="Coupled threshold")
    saturated: bool = Field(description="Coupling moved the threshold")
    trace: List[AreaSample] = Field(default_factory=list, description="A along the bracket")
    lower_endpoint: AreaSample = Field(description="Box area at the bracket start")
    upper_endpoint: AreaSample = Field(description="Box area at the bracket end")
