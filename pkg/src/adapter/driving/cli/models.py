"""Command-line configuration and result models."""
from __future__ import annotations

import re
from enum import Enum, IntEnum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.core.domain.entities.kernel import BoxcarKernel, KernelSpec
from src.core.domain.entities.model_spec import ModelSpec
from src.core.domain.entities.potential_report import BoxRule
from src.core.domain.entities.spatial_profile import InitKind, TerminationKind

INIT_PATTERN = re.compile(r"^(ones|step:[-+0-9.eE]+|file:.+)$")


class Command(str, Enum):
    """Sub-commands of the coupled-waves executable."""

    THRESHOLD = "threshold"
    SIMULATE = "simulate"
    WAVE = "wave"
    POTENTIAL = "potential"
    EXIT_CHART = "exit-chart"


class ExitCode(IntEnum):
    """Process exit codes."""

    SUCCESS = 0
    NO_SATURATION = 2
    USAGE = 64
    SOFTWARE = 70


class ExperimentConfig(BaseModel):
    """Fully resolved experiment; every default is explicit so the echo is self-describing."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Command = Field(description="Sub-command to run")
    model: ModelSpec = Field(description="Model family and its fixed parameters")
    kernel: KernelSpec = Field(default_factory=BoxcarKernel, description="Averaging kernel")
    parameter: Optional[float] = Field(
        default=None, description="Channel parameter; falls back to the model's"
    )
    bracket: Optional[Tuple[float, float]] = Field(
        default=None, description="Threshold bracket; falls back to the model's"
    )
    delta: float = Field(default=0.01, gt=0.0, description="Grid pitch")
    window: float = Field(default=20.0, gt=0.0, description="Chain length in x units")
    termination: TerminationKind = Field(
        default=TerminationKind.NONE, description="Termination of the chain"
    )
    init: str = Field(default="ones", description="ones, step:<x> or file:<path>")
    max_iters: int = Field(default=2000, gt=0, description="Iteration budget")
    tol: float = Field(default=1e-10, gt=0.0, description="Convergence tolerance")
    burn_in: int = Field(default=50, ge=0, description="Fronts skipped by the speed fit")
    record_every: Optional[int] = Field(
        default=None, gt=0, description="Snapshot stride; None writes the final profiles only"
    )
    quantization: int = Field(default=64, ge=2, description="Jumps per quantized EXIT function")
    continuation_steps: int = Field(default=32, ge=1, description="Continuation macro-steps")
    grid: int = Field(default=1001, ge=2, description="Rows of exit-chart and wave tables")
    box_rule: BoxRule = Field(default=BoxRule.REACHED, description="Crossing box selection")
    trace_points: int = Field(default=21, ge=2, description="Samples of the area trace")
    out: str = Field(default="out", description="Output directory")
    jobs: int = Field(default=1, ge=1, description="Worker threads for sweeps")
    seed: int = Field(default=0xC0DE, description="Monte Carlo seed of the quadrature resource")

    @field_validator("bracket")
    @classmethod
    def validate_bracket(cls, v):
        """Validate the bracket is a non-empty interval."""
        if v is not None and not v[0] < v[1]:
            raise ValueError("Parameter bracket must satisfy lo < hi")
        return v

    @field_validator("init")
    @classmethod
    def validate_init(cls, v):
        """Validate the init flag syntax."""
        if not INIT_PATTERN.match(v):
            raise ValueError(f"Unrecognized init '{v}'; expected ones, step:<x> or file:<path>")
        return v

    def resolved_parameter(self) -> Optional[float]:
        return self.parameter if self.parameter is not None else self.model.parameter

    def resolved_bracket(self) -> Optional[Tuple[float, float]]:
        return self.bracket if self.bracket is not None else self.model.bracket

    def parsed_init(self) -> Tuple[InitKind, float, Optional[str]]:
        kind, _, rest = self.init.partition(":")
        if kind == "step":
            return InitKind.UNIT_STEP, float(rest), None
        if kind == "file":
            return InitKind.PROFILE, 0.0, rest
        return InitKind.ALL_ONES, 0.0, None

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)


class CommandResult(BaseModel):
    """Outcome of one command."""

    report_path: str = Field(description="JSON report written by the command")
    files: List[str] = Field(default_factory=list, description="Every file written")


class ErrorResponse(BaseModel):
    """Machine-readable error written to stderr."""

    error: str = Field(description="Exception class name")
    message: str = Field(description="Error message")
    details: Dict[str, Any] = Field(default_factory=dict, description="Structured context")
    exit_code: int = Field(description="Process exit code")

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "error": "NoSaturationError",
                "message": "Area gap does not change sign inside the bracket",
                "details": {"bracket": [0.001, 0.1]},
                "exit_code": 2,
            }
        }
    )
