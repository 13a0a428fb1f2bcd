"""Potential function, area gap, crossing sets and gap verdicts."""
import logging
from typing import Any, List, Tuple, Union

import numpy as np

from src.core.domain.entities.exit_function import ExitFunctionBase
from src.core.domain.entities.potential_report import CrossingPoint, GapVerdict, PotentialReport
from src.core.domain.exceptions import NoNontrivialCrossingError
from src.core.port.service_port import PotentialServicePort

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

SCAN_POINTS = 2**14
BISECTION_STEPS = 50
MERGE_TOL = 1e-7
CORNER_TOL = 1e-7
GAP_MARGIN = 1e-9


class PotentialService(PotentialServicePort):
    """Evaluates Phi(u, v) = int_0^u hg^-1 + int_0^v hf^-1 - u v and its crossings.

    Coordinates follow the recursion: hf maps u to v and hg maps v to u, so a
    crossing is a point with v in [hf(u-), hf(u+)] and u in [hg(v-), hg(v+)].
    """

    def __init__(self, scan_points: int = SCAN_POINTS):
        """Initialize the potential service.

        Args:
            scan_points: Number of grid intervals used to scan for crossings
        """
        self.scan_points = scan_points
        logger.info("PotentialService initialized")

    def phi(self, hf: ExitFunctionBase, hg: ExitFunctionBase, u: ArrayLike, v: ArrayLike) -> Any:
        """Potential of the pair at (u, v); vectorized over matching arrays."""
        u_arr = np.asarray(u, dtype=float)
        v_arr = np.asarray(v, dtype=float)
        value = (
            np.asarray(hg.inverse().integral(u_arr), dtype=float)
            + np.asarray(hf.inverse().integral(v_arr), dtype=float)
            - u_arr * v_arr
        )
        if np.ndim(value) == 0:
            return float(value)
        return value

    def area_gap(self, hf: ExitFunctionBase, hg: ExitFunctionBase) -> float:
        """Signed area gap A = Phi(1, 1)."""
        return float(self.phi(hf, hg, 1.0, 1.0))

    def area_gap_check(self, hf: ExitFunctionBase, hg: ExitFunctionBase) -> float:
        """1 - int hf - int hg, an independent evaluation of A."""
        return 1.0 - float(hf.integral(1.0)) - float(hg.integral(1.0))

    def _overlap(
        self, hf: ExitFunctionBase, hg_inv: ExitFunctionBase, u: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        f_left, f_right = hf.limits(u)
        g_left, g_right = hg_inv.limits(u)
        return np.maximum(f_left, g_left), np.minimum(f_right, g_right)

    def crossings(
        self, hf: ExitFunctionBase, hg: ExitFunctionBase, tol: float = 1e-9
    ) -> List[CrossingPoint]:
        """Ordered crossing set of the pair, corners included.

        Crossings are found as overlaps of the limit intervals of hf and hg^-1 on a
        uniform grid, plus bisection of sign changes of hf - hg^-1 between grid points.
        A run of consecutive overlaps is reported by its two end points.

        Args:
            hf: Variable-side function
            hg: Check-side function
            tol: Slack allowed in the interval overlap

        Returns:
            Crossings sorted component-wise, each with its potential
        """
        if tol <= 0:
            raise ValueError("Crossing tolerance must be positive")
        hg_inv = hg.inverse()
        u = np.linspace(0.0, 1.0, self.scan_points + 1)
        lo, hi = self._overlap(hf, hg_inv, u)
        overlap = lo <= hi + tol

        found: List[Tuple[float, float, bool]] = [(0.0, 0.0, False), (1.0, 1.0, False)]

        # Runs of overlapping grid points
        idx = np.flatnonzero(overlap)
        if idx.size:
            breaks = np.flatnonzero(np.diff(idx) > 1)
            starts = np.concatenate([[idx[0]], idx[breaks + 1]])
            ends = np.concatenate([idx[breaks], [idx[-1]]])
            for s, e in zip(starts, ends):
                if e > s:
                    segment = [
                        (float(u[s]), float(min(lo[s], hi[s]))),
                        (float(u[e]), float(max(lo[e], hi[e]))),
                    ]
                elif hi[s] - lo[s] > tol:
                    # Vertical segments of both functions at the same abscissa
                    segment = [(float(u[s]), float(lo[s])), (float(u[s]), float(hi[s]))]
                else:
                    found.append((float(u[s]), float(min(lo[s], hi[s])), False))
                    continue
                # Phi is constant on a connected crossing set, so a segment
                # reaching a corner belongs to that corner
                if any(self._is_corner(p) for p in segment):
                    continue
                found.extend((p[0], p[1], True) for p in segment)

        # Sign changes of the point values between grid points
        diff = np.asarray(hf.eval(u), dtype=float) - np.asarray(hg_inv.eval(u), dtype=float)
        brackets = np.flatnonzero(diff[:-1] * diff[1:] < 0.0)
        if brackets.size:
            left = u[brackets].copy()
            right = u[brackets + 1].copy()
            left_sign = np.sign(diff[brackets])
            for _ in range(BISECTION_STEPS):
                mid = 0.5 * (left + right)
                d_mid = np.asarray(hf.eval(mid), dtype=float) - np.asarray(
                    hg_inv.eval(mid), dtype=float
                )
                same = np.sign(d_mid) == left_sign
                left = np.where(same, mid, left)
                right = np.where(same, right, mid)
            roots = 0.5 * (left + right)
            # A jump between grid points sits inside the final bracket
            r_lo = np.maximum(hf.limits(left)[0], hg_inv.limits(left)[0])
            r_hi = np.minimum(hf.limits(right)[1], hg_inv.limits(right)[1])
            f_point = np.asarray(hf.eval(roots), dtype=float)
            g_point = np.asarray(hg_inv.eval(roots), dtype=float)
            v_roots = np.where(r_lo <= r_hi + tol, 0.5 * (r_lo + r_hi), 0.5 * (f_point + g_point))
            for r, v in zip(roots, v_roots):
                found.append((float(r), float(v), False))

        merged = self._merge(found)
        phis = np.asarray(
            self.phi(hf, hg, np.array([p[0] for p in merged]), np.array([p[1] for p in merged])),
            dtype=float,
        )
        points = [
            CrossingPoint(u=p[0], v=p[1], phi=float(ph), continuum=bool(p[2]))
            for p, ph in zip(merged, phis)
        ]
        # Corners carry their exact potentials
        points[0] = points[0].model_copy(update={"phi": 0.0})
        return points

    @staticmethod
    def _merge(points: List[Tuple[float, float, bool]]) -> List[Tuple[float, float, bool]]:
        ordered = sorted(points, key=lambda p: (p[0], p[1]))
        merged: List[Tuple[float, float, bool]] = []
        for u, v, flag in ordered:
            close_u = abs(u - merged[-1][0]) <= MERGE_TOL if merged else False
            if close_u and abs(v - merged[-1][1]) <= MERGE_TOL:
                last = merged[-1]
                merged[-1] = (last[0], last[1], last[2] or flag)
                continue
            merged.append((u, v, flag))
        # Snap the corners exactly
        merged[0] = (0.0, 0.0, merged[0][2]) if max(merged[0][:2]) <= MERGE_TOL else merged[0]
        if min(merged[-1][:2]) >= 1.0 - MERGE_TOL:
            merged[-1] = (1.0, 1.0, merged[-1][2])
        return merged

    @staticmethod
    def _is_corner(point: Tuple[float, float]) -> bool:
        u, v = point
        return max(u, v) < CORNER_TOL or min(u, v) > 1.0 - CORNER_TOL

    @staticmethod
    def is_trivial(point: CrossingPoint) -> bool:
        return max(point.u, point.v) < CORNER_TOL or min(point.u, point.v) > 1.0 - CORNER_TOL

    def gap_verdict(
        self, hf: ExitFunctionBase, hg: ExitFunctionBase, margin_tol: float = GAP_MARGIN
    ) -> PotentialReport:
        """Evaluate the strictly positive gap condition Phi > max(0, A) at nontrivial crossings.

        Args:
            hf: Variable-side function
            hg: Check-side function
            margin_tol: Margin separating strict from non-strict gaps

        Returns:
            The potential report with verdict and witness

        Raises:
            NoNontrivialCrossingError: If the pair only crosses at the corners
        """
        try:
            area = self.area_gap(hf, hg)
            check = self.area_gap_check(hf, hg)
            points = self.crossings(hf, hg)
            nontrivial = [p for p in points if not self.is_trivial(p)]
            if not nontrivial:
                raise NoNontrivialCrossingError(
                    "The pair only crosses at (0,0) and (1,1)",
                    details={"area_gap": area, "area_gap_check": check},
                )

            phis = np.array([p.phi for p in points])
            minimum = float(phis.min())
            at_min = [p for p in points if p.phi <= minimum + 1e-12]
            floor = max(0.0, area)
            margins = np.array([p.phi - floor for p in nontrivial])
            worst = int(np.argmin(margins))
            margin = float(margins[worst])
            if margin > margin_tol:
                verdict = GapVerdict.STRICT_GAP
            elif margin >= -margin_tol:
                verdict = GapVerdict.NON_STRICT_GAP
            else:
                verdict = GapVerdict.FAILS

            report = PotentialReport(
                area_gap=area,
                area_gap_check=check,
                crossings=points,
                minimum=minimum,
                cross_m_min=at_min[0],
                cross_m_max=at_min[-1],
                verdict=verdict,
                margin=margin,
                witness=nontrivial[worst],
            )
            logger.debug(f"Gap verdict {verdict.value} with A={area:.6g}, margin={margin:.3g}")
            return report
        except NoNontrivialCrossingError:
            raise
        except Exception as e:
            logger.error(f"Error evaluating gap verdict: {str(e)}")
            raise
