from __future__ import annotations

from typing import Any, Dict, List, Optional, Protocol, Tuple

from src.core.domain.entities.kernel import KernelBase
from src.core.domain.entities.model_spec import ModelSpecBase
from src.core.domain.entities.potential_report import BoxRule
from src.core.domain.entities.spatial_profile import InitKind, TerminationKind


class ExperimentConfigProtocol(Protocol):
    """Protocol defining what we expect from a resolved experiment configuration."""

    command: Any
    init: str
    burn_in: int
    model: ModelSpecBase
    kernel: KernelBase
    parameter: Optional[float]
    delta: float
    window: float
    termination: TerminationKind
    max_iters: int
    tol: float
    quantization: int
    continuation_steps: int
    grid: int
    record_every: Optional[int]
    box_rule: BoxRule
    trace_points: int
    jobs: int
    seed: int

    def resolved_parameter(self) -> Optional[float]:
        """Parameter override or the one declared by the model."""
        ...

    def resolved_bracket(self) -> Optional[Tuple[float, float]]:
        """Bracket override or the one declared by the model."""
        ...

    def parsed_init(self) -> Tuple[InitKind, float, Optional[str]]:
        """Initial profile family, step position and profile path."""
        ...

    def echo(self) -> Dict[str, Any]:
        """Every setting, defaults included, as plain JSON."""
        ...


class CommandResultProtocol(Protocol):
    """Protocol defining what we expect from a finished command."""

    report_path: str
    files: List[str]


class InputPort(Protocol):
    """Protocol defining the interface for experiment commands."""

    def run_threshold(self, config: ExperimentConfigProtocol) -> CommandResultProtocol:
        """Compute uncoupled and coupled thresholds with the area trace.

        Args:
            config: Resolved configuration

        Returns:
            Result pointing at the written report

        Raises:
            ConfigurationError: If the bracket is invalid
            NoSaturationError: If coupling does not move the threshold; the report is written first
        """
        ...

    def run_simulate(self, config: ExperimentConfigProtocol) -> CommandResultProtocol:
        """Run coupled density evolution and write diagnostics and profiles.

        Raises:
            ConfigurationError: If no parameter is given
        """
        ...

    def run_wave(self, config: ExperimentConfigProtocol) -> CommandResultProtocol:
        """Construct and certify a traveling wave.

        Raises:
            CertificationFailedError: If the wave violates a clause
        """
        ...

    def run_potential(self, config: ExperimentConfigProtocol) -> CommandResultProtocol:
        """Write the area gap, crossings and gap verdict of one pair."""
        ...

    def run_exit_chart(self, config: ExperimentConfigProtocol) -> CommandResultProtocol:
        """Write EXIT curves with the running signed area."""
        ...
