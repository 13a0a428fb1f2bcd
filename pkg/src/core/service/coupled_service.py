"""Spatially discrete coupled density evolution."""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy import stats

from src.core.domain.entities.exit_function import ExitFunctionBase, PiecewiseLinear
from src.core.domain.entities.kernel import DiscreteKernel
from src.core.domain.entities.spatial_profile import (
    FixedPointCheck,
    InitialCondition,
    InitKind,
    LimitClass,
    RunDiagnostics,
    Snapshot,
    SpatialProfile,
    SpeedEstimate,
    Termination,
    TerminationKind,
)
from src.core.domain.exceptions import NoFrontError, NotAFixedPointError
from src.core.port.service_port import CoupledServicePort
from src.core.service.kernel_service import KernelService
from src.core.service.potential_service import PotentialService

logger = logging.getLogger(__name__)

PADDING_WIDTHS = 4
STABLE_ITERATIONS = 3
ZERO_LEVEL = 1e-6
TOP_MARGIN = 0.01
MIN_FRONTS = 10
SCALAR_DE_STEPS = 100_000


class CoupledService(CoupledServicePort):
    """Runs g = hg(f (x) w), f' = hf(g (x) w) on a finite window with limit-value padding."""

    def __init__(self, kernels: KernelService, potential: PotentialService):
        """Initialize the coupled service.

        Args:
            kernels: Service providing discrete convolution
            potential: Service evaluating potentials of reconstructed pairs
        """
        self.kernels = kernels
        self.potential = potential
        logger.info("CoupledService initialized")

    def step(
        self,
        f: SpatialProfile,
        hf: ExitFunctionBase,
        hg: ExitFunctionBase,
        kernel: DiscreteKernel,
        termination: Termination,
    ) -> Tuple[SpatialProfile, SpatialProfile]:
        """One coupled iteration.

        Args:
            f: Current f profile
            hf: Variable-side function
            hg: Check-side function
            kernel: Discrete kernel on the profile pitch
            termination: Region where f is forced to zero

        Returns:
            The g profile of this iteration and the next f profile

        Raises:
            PitchMismatchError: If the kernel and profile pitches differ
        """
        f_smooth = self.kernels.convolve(f, kernel)
        g = f.with_values(
            np.asarray(hg.eval(f_smooth.values), dtype=float),
            left_limit=float(hg.eval(f.left_limit)),
            right_limit=float(hg.eval(f.right_limit)),
        )
        g_smooth = self.kernels.convolve(g, kernel)
        values = np.asarray(hf.eval(g_smooth.values), dtype=float)
        left = float(hf.eval(g.left_limit))
        right = float(hf.eval(g.right_limit))
        f_next = self._terminate(f.with_values(values, left, right), termination)
        return g, f_next

    @staticmethod
    def _terminate(f: SpatialProfile, termination: Termination) -> SpatialProfile:
        if termination.kind == TerminationKind.NONE:
            return f
        values = np.where(termination.allowed(f.indices), f.values, 0.0)
        return f.with_values(
            values,
            left_limit=0.0 if termination.zeroes_left else f.left_limit,
            right_limit=0.0 if termination.zeroes_right else f.right_limit,
        )

    @staticmethod
    def top_value(hf: ExitFunctionBase, hg: ExitFunctionBase) -> float:
        """Limit of the uncoupled recursion started from the all-ones state."""
        v = 1.0
        for _ in range(SCALAR_DE_STEPS):
            nxt = float(hf.eval(float(hg.eval(v))))
            if abs(nxt - v) < 1e-14:
                return nxt
            v = nxt
        return v

    @staticmethod
    def front(profile: SpatialProfile, level: float) -> Optional[float]:
        """Leftmost upward crossing of ``level``, linearly interpolated."""
        values = profile.values
        hits = np.flatnonzero((values[:-1] < level) & (values[1:] >= level))
        if hits.size == 0:
            return None
        i = int(hits[0])
        frac = (level - values[i]) / (values[i + 1] - values[i])
        return float((profile.i_min + i + frac) * profile.pitch)

    def _initial_profile(
        self, init: InitialCondition, pitch: float, i_min: int, i_max: int, termination: Termination
    ) -> SpatialProfile:
        indices = np.arange(i_min, i_max + 1)
        if init.kind == InitKind.ALL_ONES:
            left = 1.0 if termination.kind == TerminationKind.NONE else 0.0
            profile = SpatialProfile(
                pitch=pitch, i_min=i_min, values=np.ones(indices.size), left_limit=left
            )
        elif init.kind == InitKind.UNIT_STEP:
            values = (indices * pitch >= init.position).astype(float)
            profile = SpatialProfile(pitch=pitch, i_min=i_min, values=values)
        else:
            if init.profile is None:
                raise ValueError("Profile initial condition needs a profile")
            self.kernels._check_pitch(init.profile.pitch, pitch)
            profile = SpatialProfile(
                pitch=pitch,
                i_min=i_min,
                values=init.profile.at(indices),
                left_limit=init.profile.left_limit,
                right_limit=init.profile.right_limit,
            )
        return self._terminate(profile, termination)

    @staticmethod
    def _classification_peak(f: SpatialProfile, window: int, termination: Termination) -> float:
        """Largest value the limit class is decided on.

        A terminated chain is judged on its window [0, window]; the padding past a
        free end stays tied to the untouched limit value.
        """
        if termination.kind == TerminationKind.NONE:
            return max(float(f.values.max()), f.left_limit, f.right_limit)
        chain = (f.indices >= 0) & (f.indices <= window)
        return float(f.values[chain].max())

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
        """Iterate the coupled recursion and classify where it ends.

        The grid covers indices [-pad, window + pad] with pad = 4 kernel widths.
        A run has converged once the sup-norm change, limits included, stays
        below ``tol`` for three consecutive iterations.

        Args:
            hf: Variable-side function
            hg: Check-side function
            kernel: Discrete kernel; its pitch is the grid pitch
            window: Chain length in grid indices
            termination: Boundary condition
            init: Initial profile
            max_iters: Iteration budget
            tol: Convergence threshold on the sup-norm change
            front_fraction: Front level as a fraction of the all-ones DE limit
            record_every: Snapshot stride; None records nothing

        Returns:
            Diagnostics with fronts, final profiles and the limit class
        """
        if window <= 0 or max_iters <= 0 or tol <= 0:
            raise ValueError("window, max_iters and tol must be positive")
        try:
            pitch = kernel.pitch
            pad = self.padding(kernel)
            f = self._initial_profile(init, pitch, -pad, window + pad, termination)
            g = f
            top = self.top_value(hf, hg)
            level = front_fraction * top

            fronts: List[Optional[float]] = []
            shifts: List[Optional[float]] = []
            snapshots: List[Snapshot] = []
            monotone = f.is_monotone
            quiet = 0
            converged = False
            iterations = 0
            logger.info(
                f"Running coupled DE: window={window}, pitch={pitch:g}, "
                f"termination={termination.kind.value}, init={init.kind.value}"
            )
            for t in range(1, max_iters + 1):
                g, f_next = self.step(f, hf, hg, kernel, termination)
                change = max(
                    float(np.max(np.abs(f_next.values - f.values))),
                    abs(f_next.left_limit - f.left_limit),
                    abs(f_next.right_limit - f.right_limit),
                )
                f = f_next
                iterations = t
                monotone = monotone and f.is_monotone
                position = self.front(f, level)
                previous = fronts[-1] if fronts else None
                shifts.append(
                    position - previous if position is not None and previous is not None else None
                )
                fronts.append(position)
                if record_every and t % record_every == 0:
                    snapshots.append(Snapshot(iteration=t, f=f, g=g))
                quiet = quiet + 1 if change < tol else 0
                if quiet >= STABLE_ITERATIONS:
                    converged = True
                    break

            peak = self._classification_peak(f, window, termination)
            if peak < ZERO_LEVEL:
                classification = LimitClass.TO_ZERO
            elif converged and peak >= top - TOP_MARGIN:
                classification = LimitClass.TO_ONE
            elif converged:
                classification = LimitClass.TO_WAVE_PAIR
            else:
                classification = LimitClass.STALLED
            logger.info(
                f"Coupled DE finished after {iterations} iterations: {classification.value}"
            )
            return RunDiagnostics(
                iterations=iterations,
                fronts=fronts,
                shifts=shifts,
                f=f,
                g=g,
                converged=converged,
                monotone=monotone,
                classification=classification,
                front_level=level,
                top_value=top,
                snapshots=snapshots,
            )
        except Exception as e:
            logger.error(f"Error running coupled DE: {str(e)}")
            raise

    def wave_speed(self, diagnostics: RunDiagnostics, burn_in: int = 0) -> SpeedEstimate:
        """Least-squares slope of the front position against the iteration count.

        Raises:
            NoFrontError: If fewer than 10 fronts exist after the burn-in
        """
        t = np.array(
            [i + 1 for i, x in enumerate(diagnostics.fronts) if i >= burn_in and x is not None],
            dtype=float,
        )
        x = np.array(
            [x for i, x in enumerate(diagnostics.fronts) if i >= burn_in and x is not None],
            dtype=float,
        )
        if t.size < MIN_FRONTS:
            raise NoFrontError(
                f"Only {t.size} front samples after burn-in {burn_in}",
                details={"samples": int(t.size), "burn_in": burn_in},
            )
        fit = stats.linregress(t, x)
        return SpeedEstimate(speed=float(fit.slope), stderr=float(fit.stderr), samples=int(t.size))

    # Spatial-integration functional

    @staticmethod
    def _signed_range(a: int, b: int) -> Tuple[np.ndarray, float]:
        """Indices of (a, b] and the orientation sign; reversed ranges count negatively."""
        if a <= b:
            return np.arange(a + 1, b + 1), 1.0
        return np.arange(b + 1, a + 1), -1.0

    def _xi_form(
        self,
        outer: SpatialProfile,
        inner: SpatialProfile,
        kernel: DiscreteKernel,
        i_inner: int,
        i_outer: int,
    ) -> float:
        # 1/2 sum_j w_j sum_{i in (i_inner - j, i_outer]}
        #     (2 a_{i_outer} - a_i - a_{i-1}) (b_{i+j} - b_{i+j-1})
        anchor = float(outer.at(np.array([i_outer]))[0])
        total = 0.0
        for j, weight in zip(kernel.offsets, kernel.array):
            idx, sign = self._signed_range(i_inner - int(j), i_outer)
            if idx.size == 0 or weight == 0.0:
                continue
            a = outer.at(idx)
            a_prev = outer.at(idx - 1)
            db = inner.at(idx + j) - inner.at(idx + j - 1)
            total += weight * sign * float(np.sum((2.0 * anchor - a - a_prev) * db))
        return 0.5 * total

    def xi_discrete_forms(
        self, f: SpatialProfile, g: SpatialProfile, kernel: DiscreteKernel, i1: int, i2: int
    ) -> Tuple[float, float]:
        """The functional summed against increments of g and against increments of f."""
        self.kernels._check_pitch(f.pitch, kernel.pitch)
        self.kernels._check_pitch(g.pitch, kernel.pitch)
        return (
            self._xi_form(f, g, kernel, i1, i2),
            self._xi_form(g, f, kernel, i2, i1),
        )

    def xi_discrete(
        self, f: SpatialProfile, g: SpatialProfile, kernel: DiscreteKernel, i1: int, i2: int
    ) -> float:
        """Spatial-integration functional with g anchored at i1 and f anchored at i2.

        Raises:
            PitchMismatchError: If the profiles and kernel have different pitches
        """
        by_g, by_f = self.xi_discrete_forms(f, g, kernel, i1, i2)
        if abs(by_g - by_f) > 1e-10 * max(1.0, abs(by_g)):
            logger.warning(f"Functional forms disagree: {by_g:.15g} vs {by_f:.15g}")
        return by_g

    @staticmethod
    def reconstruct(values: np.ndarray, smoothed: np.ndarray) -> PiecewiseLinear:
        """Monotone pairing of sampled (smoothed input, output) values as an EXIT function."""
        order = np.lexsort((values, smoothed))
        u = np.clip(smoothed[order], 0.0, 1.0)
        v = np.maximum.accumulate(np.clip(values[order], 0.0, 1.0))
        knots_u = np.concatenate([[0.0], u, [u[-1], 1.0]])
        knots_v = np.concatenate([[0.0], v, [1.0, 1.0]])
        return PiecewiseLinear(
            knots_u=tuple(float(x) for x in knots_u), knots_v=tuple(float(x) for x in knots_v)
        )

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
        """Compare the potential of the reconstructed pair with the functional.

        The pair h[f, g (x) w], h[g, f (x) w] is rebuilt from the samples, and its
        potential at (g_{i1}, f_{i2}) is compared with the functional. Two-sided
        profiles use their monotone half up to the peak of f.

        Args:
            f: Fixed-point f profile
            g: Matching g profile
            kernel: Discrete kernel
            i1: Index anchoring g
            i2: Index anchoring f
            hf: Variable-side function, for the fixed-point test
            hg: Check-side function, for the fixed-point test
            tol: Convergence tolerance the pair was computed with
            termination: Boundary condition the pair was computed with

        Returns:
            Both sides of the identity and the area gap of the rebuilt pair

        Raises:
            NotAFixedPointError: If one more iteration moves the pair by more than 10 tol
        """
        step_change = 0.0
        if hf is not None and hg is not None:
            g_next, f_next = self.step(f, hf, hg, kernel, termination or Termination())
            step_change = max(
                float(np.max(np.abs(f_next.values - f.values))),
                float(np.max(np.abs(g_next.values - g.values))),
            )
            if step_change > 10.0 * tol:
                raise NotAFixedPointError(
                    f"One more iteration moves the pair by {step_change:.3e}",
                    details={"step_change": step_change, "tol": tol},
                )

        f_smooth = self.kernels.convolve(f, kernel).values
        g_smooth = self.kernels.convolve(g, kernel).values
        last = int(np.argmax(f.values)) + 1 if not f.is_monotone else f.values.size
        hf_rec = self.reconstruct(f.values[:last], g_smooth[:last])
        hg_rec = self.reconstruct(g.values[:last], f_smooth[:last])

        u = float(g.at(np.array([i1]))[0])
        v = float(f.at(np.array([i2]))[0])
        lhs = float(self.potential.phi(hf_rec, hg_rec, u, v))
        xi = self.xi_discrete(f, g, kernel, i1, i2)
        area = self.potential.area_gap(hf_rec, hg_rec)
        return FixedPointCheck(
            lhs=lhs,
            xi=xi,
            residual=abs(lhs - xi),
            reconstructed_area_gap=area,
            step_change=step_change,
        )

    @staticmethod
    def padding(kernel: DiscreteKernel) -> int:
        """Grid points added on each side of the chain window."""
        return PADDING_WIDTHS * max(kernel.half_length, 1)

    @staticmethod
    def window_for(length: float, pitch: float) -> int:
        """Number of grid intervals covering a chain of the given length."""
        return int(math.ceil(length / pitch - 1e-9))
