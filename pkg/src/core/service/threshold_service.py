"""Uncoupled and coupled thresholds of parametrized EXIT pairs."""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from threadpoolctl import threadpool_limits

from src.core.domain.entities.exit_function import ExitFunctionBase
from src.core.domain.entities.potential_report import (
    AreaSample,
    BoxRule,
    CrossingPoint,
    GapVerdict,
    ThresholdReport,
)
from src.core.domain.entities.rescale_map import RescaleMap
from src.core.domain.exceptions import (
    AnalysisError,
    ConfigurationError,
    DegenerateBoxError,
    NoNontrivialCrossingError,
    NoSaturationError,
)
from src.core.port.model_port import ExitModelPort
from src.core.port.service_port import ThresholdServicePort
from src.core.service.potential_service import PotentialService
from src.core.service.transform_service import TransformService

logger = logging.getLogger(__name__)

PARAMETER_TOL = 1e-7
STABILITY_STEP = 1e-7
FIXED_POINT_TOL = 1e-12
ORIGIN_TOL = 1e-7
SATURATION_TOL = 1e-5


def _scan_grid(top: float) -> np.ndarray:
    """Log-spaced points near zero plus a uniform grid up to ``top``."""
    return np.union1d(np.geomspace(1e-8, top, 2000), np.linspace(0.0, top, 2001)[1:])


class ThresholdService(ThresholdServicePort):
    """Threshold searches by scalar DE and by area balance on crossing boxes."""

    def __init__(
        self,
        potential: PotentialService,
        transform: TransformService,
        n_jobs: int = 1,
    ):
        """Initialize the threshold service.

        Args:
            potential: Service evaluating potentials and gap verdicts
            transform: Service rescaling pairs to crossing boxes
            n_jobs: Worker threads for parameter sweeps
        """
        self.potential = potential
        self.transform = transform
        self.n_jobs = n_jobs
        logger.info("ThresholdService initialized")

    # Scalar density evolution

    @staticmethod
    def _round_trip(hf: ExitFunctionBase, hg: ExitFunctionBase, v: np.ndarray) -> np.ndarray:
        return np.asarray(hf.eval(np.asarray(hg.eval(v), dtype=float)), dtype=float)

    def _stuck(self, model: ExitModelPort, parameter: float) -> bool:
        """True if the uncoupled recursion has a nontrivial fixed point below its start."""
        hf, hg = model.pair(parameter)
        v0 = model.initial_state(parameter)
        if v0 <= 0.0:
            return False
        grid = _scan_grid(v0)
        return bool(np.max(self._round_trip(hf, hg, grid) - grid) >= 0.0)

    def _resolve_bracket(
        self, model: ExitModelPort, bracket: Optional[Tuple[float, float]]
    ) -> Tuple[float, float]:
        lo, hi = bracket if bracket is not None else model.parameter_bracket()
        if not lo < hi:
            raise ConfigurationError(
                f"Empty parameter bracket [{lo}, {hi}]", details={"bracket": [lo, hi]}
            )
        return float(lo), float(hi)

    def uncoupled_threshold(
        self, model: ExitModelPort, bracket: Optional[Tuple[float, float]] = None
    ) -> float:
        """Largest parameter for which uncoupled DE from the initial state reaches zero.

        Uses the family's closed form when it has one; otherwise bisects on the
        existence of a point v in (0, v0] with hf(hg(v)) >= v.

        Args:
            model: Parametrized family
            bracket: Search range; defaults to the family's declared bracket

        Returns:
            The uncoupled threshold

        Raises:
            ConfigurationError: If the bracket does not separate the two regimes
        """
        closed = model.closed_form_uncoupled()
        if closed is not None:
            logger.info(f"Uncoupled threshold of {model.family} from closed form: {closed:.8f}")
            return float(closed)
        lo, hi = self._resolve_bracket(model, bracket)
        try:
            if self._stuck(model, lo) or not self._stuck(model, hi):
                raise ConfigurationError(
                    "Bracket does not contain the uncoupled threshold",
                    details={"bracket": [lo, hi], "family": model.family},
                )
            while hi - lo > PARAMETER_TOL:
                mid = 0.5 * (lo + hi)
                if self._stuck(model, mid):
                    hi = mid
                else:
                    lo = mid
            threshold = 0.5 * (lo + hi)
            logger.info(f"Uncoupled threshold of {model.family}: {threshold:.8f}")
            return threshold
        except AnalysisError:
            raise
        except Exception as e:
            logger.error(f"Error computing uncoupled threshold: {str(e)}")
            raise

    # Crossing boxes

    def _stable(
        self, hf: ExitFunctionBase, hg: ExitFunctionBase, point: CrossingPoint
    ) -> bool:
        hg_inv = hg.inverse()

        def gap(u: float) -> float:
            return float(hf.eval(u)) - float(hg_inv.eval(u))

        if point.u <= ORIGIN_TOL and point.v <= ORIGIN_TOL:
            return gap(STABILITY_STEP) < 0.0
        if point.u >= 1.0 - ORIGIN_TOL and point.v >= 1.0 - ORIGIN_TOL:
            return gap(1.0 - STABILITY_STEP) > 0.0
        return gap(point.u - STABILITY_STEP) > 0.0 and gap(point.u + STABILITY_STEP) < 0.0

    def reached_fixed_point(
        self,
        hf: ExitFunctionBase,
        hg: ExitFunctionBase,
        v0: float,
        crossings: List[CrossingPoint],
    ) -> CrossingPoint:
        """Crossing the uncoupled recursion converges to from f-state v0."""
        moved = float(self._round_trip(hf, hg, np.array([v0]))[0])
        if abs(moved - v0) <= FIXED_POINT_TOL:
            return min(crossings, key=lambda c: abs(c.v - v0))
        if moved < v0:
            below = [c for c in crossings if c.v < v0]
            return below[-1] if below else crossings[0]
        above = [c for c in crossings if c.v > v0]
        return above[0] if above else crossings[-1]

    def select_box(
        self,
        model: ExitModelPort,
        parameter: float,
        box_rule: BoxRule,
    ) -> Optional[Tuple[CrossingPoint, CrossingPoint]]:
        """Corners of the box used for area balance; None if DE reaches the origin.

        Raises:
            DegenerateBoxError: If fewer than two stable crossings exist for the
                lowest/highest rules
        """
        hf, hg = model.pair(parameter)
        points = self.potential.crossings(hf, hg)
        if box_rule == BoxRule.REACHED:
            target = self.reached_fixed_point(hf, hg, model.initial_state(parameter), points)
            if target.u <= ORIGIN_TOL and target.v <= ORIGIN_TOL:
                return None
            return points[0], target
        stable = [p for p in points if self._stable(hf, hg, p)]
        if len(stable) < 2:
            raise DegenerateBoxError(
                f"Only {len(stable)} stable crossing(s) at parameter {parameter:g}",
                details={"parameter": parameter, "stable": [p.model_dump() for p in stable]},
            )
        if box_rule == BoxRule.LOWEST:
            return stable[0], stable[1]
        return stable[-2], stable[-1]

    def area_sample(
        self, model: ExitModelPort, parameter: float, box_rule: BoxRule = BoxRule.REACHED
    ) -> AreaSample:
        """Signed area on the selected box, mapped to +inf/-inf in trivial regimes.

        +inf means DE reaches the origin, where the gap condition holds vacuously;
        -inf means the box pair fails the gap condition, so coupling cannot push
        the recursion down. A box pair crossing only at its corners passes when its
        area is positive and fails otherwise.
        """
        try:
            corners = self.select_box(model, parameter, box_rule)
            if corners is None:
                return AreaSample(
                    parameter=parameter, area_gap=float("inf"), verdict=GapVerdict.STRICT_GAP
                )
            lo, hi = corners
            hf, hg = model.pair(parameter)
            hf_box, hg_box, box = self.transform.rescale_to_box(hf, hg, (lo.u, lo.v), (hi.u, hi.v))
            raw_box = self._raw_box(model, parameter, box)
            try:
                report = self.potential.gap_verdict(hf_box, hg_box)
                verdict = report.verdict
                area = report.area_gap
            except NoNontrivialCrossingError:
                area = self.potential.area_gap(hf_box, hg_box)
                verdict = GapVerdict.STRICT_GAP if area > 0.0 else GapVerdict.FAILS
            if verdict == GapVerdict.FAILS:
                area = float("-inf")
            return AreaSample(
                parameter=parameter, area_gap=area, verdict=verdict, box=raw_box
            )
        except AnalysisError:
            raise
        except Exception as e:
            logger.error(f"Error sampling area at parameter {parameter}: {str(e)}")
            raise

    @staticmethod
    def _raw_box(model: ExitModelPort, parameter: float, box: RescaleMap) -> RescaleMap:
        """Express a canonical box in the model's raw coordinates."""
        domain = model.domain_map(parameter)
        if domain.is_identity:
            return box
        lo = domain.from_box(box.origin_u, box.origin_v)
        hi = domain.from_box(box.origin_u + box.scale_u, box.origin_v + box.scale_v)
        return RescaleMap.between((float(lo[0]), float(lo[1])), (float(hi[0]), float(hi[1])))

    def _reference_uncoupled(
        self, model: ExitModelPort, bracket: Optional[Tuple[float, float]]
    ) -> Optional[float]:
        """Uncoupled threshold to compare against, or None if the bracket cannot locate it."""
        try:
            return self.uncoupled_threshold(model, bracket)
        except ConfigurationError:
            logger.debug(f"No uncoupled reference for {model.family} in bracket {bracket}")
            return None

    def coupled_threshold(
        self,
        model: ExitModelPort,
        box_rule: BoxRule = BoxRule.REACHED,
        bracket: Optional[Tuple[float, float]] = None,
    ) -> float:
        """Parameter where the area on the selected box changes sign.

        Args:
            model: Parametrized family
            box_rule: Which crossings span the box
            bracket: Search range; defaults to the family's declared bracket

        Returns:
            The coupled threshold

        Raises:
            NoSaturationError: If the bracket shows no sign change or the area only
                jumps from +inf to a failing gap, or the threshold found is the
                uncoupled one
        """
        if box_rule == BoxRule.REACHED and bracket is None:
            closed = model.closed_form_coupled()
            if closed is not None:
                logger.info(f"Coupled threshold of {model.family} from closed form: {closed:.8f}")
                return float(closed)
        lo, hi = self._resolve_bracket(model, bracket)
        try:
            value_lo = self.area_sample(model, lo, box_rule).area_gap
            value_hi = self.area_sample(model, hi, box_rule).area_gap
            if not (value_lo > 0.0 and value_hi <= 0.0):
                raise NoSaturationError(
                    "Area gap does not change sign inside the bracket",
                    details={"bracket": [lo, hi], "area": [value_lo, value_hi]},
                )
            while hi - lo > PARAMETER_TOL:
                mid = 0.5 * (lo + hi)
                value = self.area_sample(model, mid, box_rule).area_gap
                if value > 0.0:
                    lo, value_lo = mid, value
                else:
                    hi = mid
            if np.isinf(value_lo):
                raise NoSaturationError(
                    "Coupling does not move the threshold: the gap fails right above it",
                    details={"family": model.family, "parameter": lo},
                )
            threshold = 0.5 * (lo + hi)
            uncoupled = (
                self._reference_uncoupled(model, bracket) if box_rule == BoxRule.REACHED else None
            )
            if uncoupled is not None and threshold <= uncoupled + SATURATION_TOL:
                raise NoSaturationError(
                    "Coupled threshold collapses onto the uncoupled one",
                    details={"family": model.family, "coupled": threshold, "uncoupled": uncoupled},
                )
            logger.info(f"Coupled threshold of {model.family} ({box_rule.value}): {threshold:.8f}")
            return threshold
        except AnalysisError:
            raise
        except Exception as e:
            logger.error(f"Error computing coupled threshold: {str(e)}")
            raise

    def area_trace(
        self,
        model: ExitModelPort,
        parameters: Sequence[float],
        box_rule: BoxRule = BoxRule.REACHED,
    ) -> List[AreaSample]:
        """Area samples for a sweep, evaluated in parallel threads and kept in input order.

        Samples whose box degenerates are reported with a NaN area.
        """

        def sample(p: float) -> AreaSample:
            try:
                return self.area_sample(model, float(p), box_rule)
            except DegenerateBoxError as e:
                logger.warning(f"No box at parameter {p:g}: {e}")
                return AreaSample(parameter=float(p), area_gap=float("nan"))

        with threadpool_limits(limits=1):
            samples = Parallel(n_jobs=self.n_jobs, prefer="threads")(
                delayed(sample)(p) for p in parameters
            )
        return list(samples)

    def threshold_report(
        self,
        model: ExitModelPort,
        box_rule: BoxRule = BoxRule.REACHED,
        bracket: Optional[Tuple[float, float]] = None,
        trace_points: int = 21,
    ) -> ThresholdReport:
        """Both thresholds, the area trace and the endpoint samples.

        A missing saturation is reported with ``coupled=None`` rather than raised.
        """
        lo, hi = self._resolve_bracket(model, bracket)
        uncoupled = self.uncoupled_threshold(model, (lo, hi))
        try:
            coupled: Optional[float] = self.coupled_threshold(model, box_rule, bracket)
        except NoSaturationError as e:
            logger.warning(f"No saturation for {model.family}: {e}")
            coupled = None
        trace = self.area_trace(model, np.linspace(lo, hi, trace_points), box_rule)
        return ThresholdReport(
            family=model.family,
            parameter_role=model.parameter_role.value,
            bracket=[lo, hi],
            box_rule=box_rule,
            uncoupled=uncoupled,
            coupled=coupled,
            saturated=coupled is not None,
            trace=trace,
            lower_endpoint=trace[0],
            upper_endpoint=trace[-1],
        )
