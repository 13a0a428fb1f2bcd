"""Service port definitions."""
from typing import Any, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from src.core.domain.entities.exit_function import ExitFunctionBase
from src.core.domain.entities.kernel import DiscreteKernel, KernelBase
from src.core.domain.entities.potential_report import (
    AreaSample,
    BoxRule,
    CrossingPoint,
    PotentialReport,
    ThresholdReport,
)
from src.core.domain.entities.spatial_profile import (
    FixedPointCheck,
    InitialCondition,
    RunDiagnostics,
    SpatialProfile,
    SpeedEstimate,
    Termination,
)
from src.core.domain.entities.wave_solution import CertReport, WaveSolution
from src.core.port.model_port import ExitModelPort


class PotentialServicePort(Protocol):
    """Interface for the potential service."""

    def phi(self, hf: ExitFunctionBase, hg: ExitFunctionBase, u: Any, v: Any) -> Any:
        """Evaluate the potential of a pair.

        Args:
            hf: Variable-side function u -> v
            hg: Check-side function v -> u
            u: g-side coordinate(s) in [0, 1]
            v: f-side coordinate(s) in [0, 1]

        Returns:
            The potential, a float for scalar input
        """
        ...

    def area_gap(self, hf: ExitFunctionBase, hg: ExitFunctionBase) -> float:
        """Signed area gap A = phi(1, 1)."""
        ...

    def crossings(
        self, hf: ExitFunctionBase, hg: ExitFunctionBase, tol: float = 1e-9
    ) -> List[CrossingPoint]:
        """Ordered crossing set including (0, 0) and (1, 1)."""
        ...

    def gap_verdict(self, hf: ExitFunctionBase, hg: ExitFunctionBase) -> PotentialReport:
        """Potential report with the strictly positive gap verdict.

        Raises:
            NoNontrivialCrossingError: If only the corners cross
        """
        ...


class KernelServicePort(Protocol):
    """Interface for the kernel service."""

    def discretize(self, kernel: KernelBase, delta: float) -> DiscreteKernel:
        """Integrate the kernel over grid cells of width delta."""
        ...

    def convolve(self, profile: SpatialProfile, kernel: DiscreteKernel) -> SpatialProfile:
        """Smooth a profile with discrete taps.

        Raises:
            PitchMismatchError: If the pitches differ
        """
        ...

    def cdf(self, kernel: KernelBase, x: Any) -> Any:
        """Kernel CDF Omega(x)."""
        ...

    def smooth_continuum(self, profile: SpatialProfile, kernel: KernelBase, x: Any) -> Any:
        """Continuous smoothing of the piecewise-constant extension of a profile."""
        ...


class ThresholdServicePort(Protocol):
    """Interface for threshold searches."""

    def uncoupled_threshold(
        self, model: ExitModelPort, bracket: Optional[Tuple[float, float]] = None
    ) -> float:
        """Largest parameter for which uncoupled DE reaches the origin.

        Raises:
            ConfigurationError: If the bracket does not contain the threshold
        """
        ...

    def coupled_threshold(
        self,
        model: ExitModelPort,
        box_rule: BoxRule = BoxRule.REACHED,
        bracket: Optional[Tuple[float, float]] = None,
    ) -> float:
        """Parameter where the rescaled area gap crosses zero under a strict gap.

        Raises:
            NoSaturationError: If the area never balances inside the bracket
        """
        ...

    def area_sample(
        self, model: ExitModelPort, parameter: float, box_rule: BoxRule = BoxRule.REACHED
    ) -> AreaSample:
        """Area gap on the selected crossing box at one parameter value."""
        ...

    def area_trace(
        self,
        model: ExitModelPort,
        parameters: Sequence[float],
        box_rule: BoxRule = BoxRule.REACHED,
    ) -> List[AreaSample]:
        """Area samples over a parameter sweep, in parameter order."""
        ...

    def threshold_report(
        self,
        model: ExitModelPort,
        box_rule: BoxRule = BoxRule.REACHED,
        bracket: Optional[Tuple[float, float]] = None,
        trace_points: int = 21,
    ) -> ThresholdReport:
        """Both thresholds together with the area trace and endpoint samples."""
        ...


class CoupledServicePort(Protocol):
    """Interface for spatially coupled density evolution."""

    def step(
        self,
        f: SpatialProfile,
        hf: ExitFunctionBase,
        hg: ExitFunctionBase,
        kernel: DiscreteKernel,
        termination: Termination,
    ) -> Tuple[SpatialProfile, SpatialProfile]:
        """One iteration returning (g, f_next)."""
        ...

    def run(
        self,
        hf: ExitFunctionBase,
        hg: ExitFunctionBase,
        kernel: DiscreteKernel,
        window: int,
        termination: Termination,
        init: InitialCondition,
        max_iters: int,
        tol: float,
        front_fraction: float = 0.5,
        record_every: Optional[int] = None,
    ) -> RunDiagnostics:
        """Iterate until convergence or max_iters and classify the limit."""
        ...

    def wave_speed(self, diagnostics: RunDiagnostics, burn_in: int = 0) -> SpeedEstimate:
        """Least-squares front speed.

        Raises:
            NoFrontError: If fewer than 10 fronts follow the burn-in
        """
        ...

    def xi_discrete(
        self, f: SpatialProfile, g: SpatialProfile, kernel: DiscreteKernel, i1: int, i2: int
    ) -> float:
        """Spatial-integration functional of a profile pair."""
        ...

    def fixed_point_identity_check(
        self,
        f: SpatialProfile,
        g: SpatialProfile,
        kernel: DiscreteKernel,
        i1: int,
        i2: int,
        hf: Optional[ExitFunctionBase] = None,
        hg: Optional[ExitFunctionBase] = None,
        tol: float = 1e-10,
        termination: Optional[Termination] = None,
    ) -> FixedPointCheck:
        """Compare the reconstructed potential with the functional.

        Raises:
            NotAFixedPointError: If one more iteration moves the pair
        """
        ...


class WaveServicePort(Protocol):
    """Interface for piecewise-constant traveling waves."""

    def forward_map(
        self,
        zf: np.ndarray,
        zg: np.ndarray,
        heights_f: np.ndarray,
        heights_g: np.ndarray,
        shift: float,
        kernel: KernelBase,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Smoothed levels (uf, ug) seen at the jump positions."""
        ...

    def continuation_solve(
        self,
        hf: ExitFunctionBase,
        hg: ExitFunctionBase,
        kernel: KernelBase,
        steps: int = 32,
        quantization: int = 64,
    ) -> WaveSolution:
        """Follow the tilt path from unit steps to the target pair.

        Raises:
            GapViolatedError: If the pair fails the gap condition
            StepCollapseError: If the step controller gives up
        """
        ...

    def inverse_space_iterate(
        self,
        hf: ExitFunctionBase,
        hg: ExitFunctionBase,
        kernel: KernelBase,
        tol: float = 1e-10,
        quantization: int = 64,
    ) -> WaveSolution:
        """Iterate the recursion in jump coordinates with the gauge re-fixed.

        Raises:
            NonContractionError: If the sweeps stop contracting
        """
        ...

    def construct(
        self,
        hf: ExitFunctionBase,
        hg: ExitFunctionBase,
        kernel: KernelBase,
        steps: int = 32,
        quantization: int = 64,
    ) -> WaveSolution:
        """Continuation for any supported kernel, mollifying a boxcar first."""
        ...

    def solving_kernel(self, kernel: KernelBase) -> KernelBase:
        """Kernel the returned wave of ``construct`` satisfies."""
        ...

    def xi_continuum(
        self, solution: WaveSolution, kernel: KernelBase, x1: float, x2: float
    ) -> float:
        """Spatial-integration functional of the wave profiles."""
        ...

    def certify(
        self,
        solution: WaveSolution,
        hf: ExitFunctionBase,
        hg: ExitFunctionBase,
        kernel: KernelBase,
    ) -> CertReport:
        """Check a wave against the existence and speed bounds.

        Raises:
            CertificationFailedError: On the first violated clause
        """
        ...
