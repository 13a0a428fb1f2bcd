"""Piecewise-constant traveling waves by continuation and by inverse-space iteration."""
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate, linalg

from src.core.domain.entities.exit_function import ExitFunctionBase, PiecewiseConstant
from src.core.domain.entities.kernel import BoxcarGaussianKernel, BoxcarKernel, KernelBase
from src.core.domain.entities.potential_report import GapVerdict
from src.core.domain.entities.wave_solution import CertReport, ContinuationState, WaveSolution
from src.core.domain.exceptions import (
    CertificationFailedError,
    ConfigurationError,
    GapViolatedError,
    NoNontrivialCrossingError,
    NonContractionError,
    StepCollapseError,
)
from src.core.domain.numerics import invert_increasing
from src.core.port.service_port import WaveServicePort
from src.core.service.potential_service import PotentialService
from src.core.service.transform_service import TransformService

logger = logging.getLogger(__name__)

MERGE_TOL = 1e-9
CONDITION_LIMIT = 1e10
MIN_STEP = 1e-12
NEWTON_TOL = 1e-12
NEWTON_ITERATIONS = 30
RESIDUAL_LIMIT = 1e-8
MAX_SWEEPS = 10_000
MOLLIFIER_ORDERS = (4, 8, 16)
CERT_RESIDUAL = 1e-6
CERT_SLACK = 1e-8
ZERO_SHIFT = 1e-9


def merge_jumps(h: PiecewiseConstant) -> Tuple[np.ndarray, np.ndarray]:
    """Jump positions and heights with jumps closer than 1e-9 collapsed."""
    positions: List[float] = []
    heights: List[float] = []
    for p, d in zip(h.positions, h.heights):
        if positions and p - positions[-1] <= MERGE_TOL:
            heights[-1] += d
        else:
            positions.append(float(p))
            heights.append(float(d))
    return np.asarray(positions), np.asarray(heights)


class WaveService(WaveServicePort):
    """Traveling-wave construction for piecewise-constant EXIT pairs.

    A wave is f(x) = sum_j df_j 1{x >= zf_j}, g(x) = sum_i dg_i 1{x >= zg_i} with
    g = hg(f (x) w) and f moved right by ``shift`` per iteration:
    f(. - shift) = hf(g (x) w).
    """

    def __init__(self, potential: PotentialService, transform: TransformService):
        """Initialize the wave service.

        Args:
            potential: Service providing gap verdicts and area gaps
            transform: Service providing tilting and quantization
        """
        self.potential = potential
        self.transform = transform
        logger.info("WaveService initialized")

    # Forward map and its derivatives

    def forward_map(
        self,
        zf: np.ndarray,
        zg: np.ndarray,
        heights_f: np.ndarray,
        heights_g: np.ndarray,
        shift: float,
        kernel: KernelBase,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Levels seen at the jumps: uf_j = g^w(zf_j + shift), ug_i = f^w(zg_i).

        Returns:
            The pair (uf, ug)
        """
        zf = np.asarray(zf, dtype=float)
        zg = np.asarray(zg, dtype=float)
        ug = np.asarray(kernel.cdf(zg[:, None] - zf[None, :])) @ np.asarray(heights_f)
        uf = np.asarray(kernel.cdf(zf[:, None] + shift - zg[None, :])) @ np.asarray(heights_g)
        return uf, ug

    def _blocks(
        self,
        zf: np.ndarray,
        zg: np.ndarray,
        df: np.ndarray,
        dg: np.ndarray,
        shift: float,
        kernel: KernelBase,
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        b_f = np.asarray(kernel.pdf(zf[None, :] - zg[:, None])) * df[None, :]
        b_g = np.asarray(kernel.pdf(zg[None, :] - (zf[:, None] + shift))) * dg[None, :]
        return b_f.sum(axis=1), b_f, b_g.sum(axis=1), b_g

    def _jacobian(
        self,
        zf: np.ndarray,
        zg: np.ndarray,
        df: np.ndarray,
        dg: np.ndarray,
        shift: float,
        kernel: KernelBase,
    ) -> np.ndarray:
        """Extended Jacobian [[H, c], [delta^T, 0]] in the order (zg, zf, shift)."""
        d_f, b_f, d_g, b_g = self._blocks(zf, zg, df, dg, shift, kernel)
        kg, kf = zg.size, zf.size
        n = kg + kf
        jac = np.zeros((n + 1, n + 1))
        jac[:kg, :kg] = np.diag(d_f)
        jac[:kg, kg:n] = -b_f
        jac[kg:n, :kg] = -b_g
        jac[kg:n, kg:n] = np.diag(d_g)
        jac[kg:n, n] = d_g
        jac[n, :kg] = dg
        jac[n, kg:n] = df
        return jac

    def coupling_diagnostics(
        self,
        zf: np.ndarray,
        zg: np.ndarray,
        df: np.ndarray,
        dg: np.ndarray,
        shift: float,
        kernel: KernelBase,
    ) -> Tuple[float, float]:
        """Row-sum error of the stochastic coupling M and the spectral radius of PMP."""
        d_f, b_f, d_g, b_g = self._blocks(zf, zg, df, dg, shift, kernel)
        kg, kf = zg.size, zf.size
        n = kg + kf
        m = np.zeros((n, n))
        m[:kg, kg:] = np.divide(b_f, d_f[:, None], out=np.zeros_like(b_f), where=d_f[:, None] > 0)
        m[kg:, :kg] = np.divide(b_g, d_g[:, None], out=np.zeros_like(b_g), where=d_g[:, None] > 0)
        row_error = float(np.max(np.abs(m.sum(axis=1) - 1.0)))
        p = np.eye(n)
        p[-1, -1] = 0.0
        radius = float(np.max(np.abs(np.linalg.eigvals(p @ m @ p))))
        return row_error, radius

    # Continuation

    def _targets(
        self, pf: np.ndarray, pg: np.ndarray, df: np.ndarray, dg: np.ndarray, t: float
    ) -> Tuple[np.ndarray, np.ndarray]:
        bf, bg = float(df @ pf), float(dg @ pg)
        return (1.0 - t) * bf + t * pf, (1.0 - t) * bg + t * pg

    def _residual(
        self,
        y: np.ndarray,
        pf: np.ndarray,
        pg: np.ndarray,
        df: np.ndarray,
        dg: np.ndarray,
        t: float,
        kernel: KernelBase,
    ) -> np.ndarray:
        kg = pg.size
        zg, zf, shift = y[:kg], y[kg:-1], float(y[-1])
        uf, ug = self.forward_map(zf, zg, df, dg, shift, kernel)
        tf, tg = self._targets(pf, pg, df, dg, t)
        return np.concatenate([ug - tg, uf - tf, [dg @ zg + df @ zf]])

    @staticmethod
    def _pivoted_solve(jac: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        q, r, perm = linalg.qr(jac, pivoting=True)
        y = linalg.solve_triangular(r, q.T @ rhs)
        x = np.empty_like(y)
        x[perm] = y
        return x

    def _polish(
        self,
        y: np.ndarray,
        pf: np.ndarray,
        pg: np.ndarray,
        df: np.ndarray,
        dg: np.ndarray,
        t: float,
        kernel: KernelBase,
    ) -> Tuple[np.ndarray, float]:
        """Newton iterations on the forward-map equations at fixed t."""
        kg = pg.size
        residual = self._residual(y, pf, pg, df, dg, t, kernel)
        for _ in range(NEWTON_ITERATIONS):
            if np.max(np.abs(residual)) < NEWTON_TOL:
                break
            jac = self._jacobian(y[kg:-1], y[:kg], df, dg, float(y[-1]), kernel)
            y = y - self._pivoted_solve(jac, residual)
            residual = self._residual(y, pf, pg, df, dg, t, kernel)
        return y, float(np.max(np.abs(residual)))

    def _check_gap(self, hf: ExitFunctionBase, hg: ExitFunctionBase, t: float) -> None:
        try:
            report = self.potential.gap_verdict(hf, hg)
        except NoNontrivialCrossingError as e:
            raise GapViolatedError(
                "Pair has no nontrivial crossing, so no wave connects the corners",
                details={"t": t},
                original_error=e,
            ) from e
        if report.verdict == GapVerdict.FAILS:
            raise GapViolatedError(
                f"Gap condition fails on the path at t={t:.6g}",
                details={"t": t, "margin": report.margin},
            )

    def _as_piecewise_constant(self, h: ExitFunctionBase, n: int) -> PiecewiseConstant:
        if isinstance(h, PiecewiseConstant):
            return h
        return self.transform.quantize(h, n)

    def continuation_solve(
        self,
        hf: ExitFunctionBase,
        hg: ExitFunctionBase,
        kernel: KernelBase,
        steps: int = 32,
        quantization: int = 64,
    ) -> WaveSolution:
        """Follow the tilt path from unit steps to the target pair.

        Both EXIT functions are blended towards unit steps at their inverse means,
        which keeps the area gap constant along the path. Jump positions and the
        shift are advanced with an embedded Runge-Kutta pair on
        d/dt (z, shift) = J^-1 d/dt (targets, 0) and polished by Newton after each
        macro-step. Analytic inputs are quantized first.

        Args:
            hf: Variable-side function
            hg: Check-side function
            kernel: Strictly positive kernel
            steps: Number of macro-steps on [0, 1]
            quantization: Jumps used to quantize non piecewise-constant inputs

        Returns:
            The wave with its continuation trace

        Raises:
            ConfigurationError: If the kernel is not strictly positive
            GapViolatedError: If the pair or a tilted pair fails the gap condition
            StepCollapseError: If the step length falls below 1e-12
        """
        if not kernel.strictly_positive:
            raise ConfigurationError(
                f"Continuation needs a strictly positive kernel, got {kernel.kernel_id}",
                details={"kernel": kernel.kernel_id},
            )
        if steps < 1:
            raise ValueError("Continuation needs at least one macro-step")
        hf_pc = self._as_piecewise_constant(hf, quantization)
        hg_pc = self._as_piecewise_constant(hg, quantization)
        self._check_gap(hf_pc, hg_pc, 1.0)
        pf, df = merge_jumps(hf_pc)
        pg, dg = merge_jumps(hg_pc)
        kg = pg.size
        try:
            bf, bg = float(df @ pf), float(dg @ pg)
            d = float(kernel.quantile(bg))
            shift0 = d + float(kernel.quantile(bf))
            y = np.concatenate([np.full(kg, d / 2.0), np.full(pf.size, -d / 2.0), [shift0]])
            velocity = np.concatenate([pg - bg, pf - bf, [0.0]])

            def rhs(_t: float, state: np.ndarray) -> np.ndarray:
                jac = self._jacobian(state[kg:-1], state[:kg], df, dg, float(state[-1]), kernel)
                return np.linalg.solve(jac, velocity)

            path: List[ContinuationState] = []
            t, step = 0.0, 1.0 / steps
            while t < 1.0 - 1e-15:
                step = min(step, 1.0 - t)
                if step < MIN_STEP:
                    raise StepCollapseError(
                        f"Continuation step collapsed at t={t:.6g}", details={"t": t, "step": step}
                    )
                target_t = min(1.0, t + step)
                try:
                    sol = integrate.solve_ivp(
                        rhs, (t, target_t), y, method="RK45", rtol=1e-9, atol=1e-11
                    )
                    ok = bool(sol.success)
                    candidate = sol.y[:, -1] if ok else y
                except np.linalg.LinAlgError:
                    ok, candidate = False, y
                if ok:
                    candidate, residual = self._polish(candidate, pf, pg, df, dg, target_t, kernel)
                    jac = self._jacobian(
                        candidate[kg:-1], candidate[:kg], df, dg, float(candidate[-1]), kernel
                    )
                    condition = float(np.linalg.cond(jac))
                    ok = residual < RESIDUAL_LIMIT and condition <= CONDITION_LIMIT
                if not ok:
                    logger.debug(f"Rejected continuation step {step:.3g} at t={t:.6g}")
                    step /= 2.0
                    continue

                y, t = candidate, target_t
                zg, zf, shift = y[:kg], y[kg:-1], float(y[-1])
                self._check_gap(
                    self.transform.tilt(hf_pc, t), self.transform.tilt(hg_pc, t), t
                )
                row_error, radius = self.coupling_diagnostics(zf, zg, df, dg, shift, kernel)
                path.append(
                    ContinuationState(
                        t=t,
                        step=step,
                        condition_number=condition,
                        spectral_radius=radius,
                        row_sum_error=row_error,
                        gauge=float(dg @ zg + df @ zf),
                        shift=shift,
                    )
                )
                step = min(2.0 * step, 1.0 / steps)

            solution = self._solution(y, pf, pg, df, dg, kernel, hf_pc, hg_pc, path)
            logger.info(
                f"Continuation finished: shift={solution.shift:.6g}, "
                f"residual={solution.residual:.2e}, {len(path)} steps"
            )
            return solution
        except (StepCollapseError, GapViolatedError):
            raise
        except Exception as e:
            logger.error(f"Error in continuation: {str(e)}")
            raise

    def _solution(
        self,
        y: np.ndarray,
        pf: np.ndarray,
        pg: np.ndarray,
        df: np.ndarray,
        dg: np.ndarray,
        kernel: KernelBase,
        hf_pc: PiecewiseConstant,
        hg_pc: PiecewiseConstant,
        path: List[ContinuationState],
    ) -> WaveSolution:
        kg = pg.size
        zg, zf, shift = y[:kg], y[kg:-1], float(y[-1])
        uf, ug = self.forward_map(zf, zg, df, dg, shift, kernel)
        residual = float(max(np.max(np.abs(uf - pf)), np.max(np.abs(ug - pg))))
        # Equal targets may come out in either order up to rounding
        zf_sorted = np.maximum.accumulate(zf)
        zg_sorted = np.maximum.accumulate(zg)
        return WaveSolution(
            zf=tuple(float(x) for x in zf_sorted),
            zg=tuple(float(x) for x in zg_sorted),
            heights_f=tuple(float(x) for x in df),
            heights_g=tuple(float(x) for x in dg),
            targets_f=tuple(float(x) for x in pf),
            targets_g=tuple(float(x) for x in pg),
            shift=shift,
            kernel_id=kernel.kernel_id,
            residual=residual,
            area_gap=self.potential.area_gap(hf_pc, hg_pc),
            path=path,
        )

    # Inverse-space iteration

    def _smoothed_inverse(
        self, z: np.ndarray, d: np.ndarray, targets: np.ndarray, kernel: KernelBase
    ) -> np.ndarray:
        """Points x with sum_k d_k Omega(x - z_k) = target, by bisection."""
        reach = kernel.half_width

        def smoothed(x: np.ndarray) -> np.ndarray:
            return np.asarray(kernel.cdf(x[:, None] - z[None, :])) @ d

        return invert_increasing(
            smoothed, targets, float(z.min()) - reach, float(z.max()) + reach, iterations=100
        )

    def inverse_space_iterate(
        self,
        hf: ExitFunctionBase,
        hg: ExitFunctionBase,
        kernel: KernelBase,
        tol: float = 1e-10,
        quantization: int = 64,
    ) -> WaveSolution:
        """Iterate the recursion on jump positions until f moves rigidly.

        Each sweep solves f^w(zg_i) = ug_i and then g^w(zf_j') = uf_j, re-fixes the
        gauge sum dg.zg + df.zf = 0 and compares zf' with zf. The sweep stops once
        max(zf' - zf) - min(zf' - zf) < tol; the common displacement is the shift.

        Raises:
            NonContractionError: If the spread is still above tol after 10^4 sweeps
        """
        hf_pc = self._as_piecewise_constant(hf, quantization)
        hg_pc = self._as_piecewise_constant(hg, quantization)
        pf, df = merge_jumps(hf_pc)
        pg, dg = merge_jumps(hg_pc)
        zf = np.zeros(pf.size)
        spread = np.inf
        try:
            for sweep in range(1, MAX_SWEEPS + 1):
                zg = self._smoothed_inverse(zf, df, pg, kernel)
                gauge = float(dg @ zg + df @ zf) / 2.0
                zf, zg = zf - gauge, zg - gauge
                zf_next = self._smoothed_inverse(zg, dg, pf, kernel)
                moves = zf_next - zf
                spread = float(moves.max() - moves.min())
                shift = float(df @ moves)
                if spread < tol:
                    y = np.concatenate([zg, zf, [shift]])
                    solution = self._solution(y, pf, pg, df, dg, kernel, hf_pc, hg_pc, [])
                    logger.info(
                        f"Inverse-space iteration converged after {sweep} sweeps: shift={shift:.6g}"
                    )
                    return solution
                zf = zf_next
            raise NonContractionError(
                f"Spread {spread:.3e} still above {tol:g} after {MAX_SWEEPS} sweeps",
                details={"spread": spread, "tol": tol},
            )
        except NonContractionError:
            raise
        except Exception as e:
            logger.error(f"Error in inverse-space iteration: {str(e)}")
            raise

    # Kernels that vanish somewhere

    def construct(
        self,
        hf: ExitFunctionBase,
        hg: ExitFunctionBase,
        kernel: KernelBase,
        steps: int = 32,
        quantization: int = 64,
    ) -> WaveSolution:
        """Continuation for any supported kernel.

        A boxcar is mollified by Gaussians of scale 1/k, k in (4, 8, 16); the wave
        for k = 16 is returned with the shift extrapolated linearly to scale 0.
        """
        if kernel.strictly_positive:
            return self.continuation_solve(hf, hg, kernel, steps, quantization)
        if not isinstance(kernel, BoxcarKernel):
            raise ConfigurationError(
                f"No mollification available for {kernel.kernel_id}",
                details={"kernel": kernel.kernel_id},
            )
        scales, shifts = [], []
        solution: Optional[WaveSolution] = None
        for k in MOLLIFIER_ORDERS:
            mollified = BoxcarGaussianKernel(W=kernel.half_width_w, sigma=1.0 / k)
            solution = self.continuation_solve(hf, hg, mollified, steps, quantization)
            scales.append(1.0 / k)
            shifts.append(solution.shift)
            logger.debug(f"Mollifier 1/{k}: shift={solution.shift:.6g}")
        assert solution is not None
        intercept = float(np.polyfit(scales, shifts, 1)[1])
        return solution.model_copy(update={"shift_extrapolated": intercept})

    def solving_kernel(self, kernel: KernelBase) -> KernelBase:
        """Kernel solved by the wave from ``construct``; the finest mollifier for a boxcar."""
        if kernel.strictly_positive or not isinstance(kernel, BoxcarKernel):
            return kernel
        return BoxcarGaussianKernel(W=kernel.half_width_w, sigma=1.0 / MOLLIFIER_ORDERS[-1])

    # Certification

    @staticmethod
    def _reconstructed(values: np.ndarray, heights: np.ndarray) -> PiecewiseConstant:
        order = np.argsort(values, kind="stable")
        return PiecewiseConstant(
            positions=tuple(float(x) for x in np.clip(values[order], 0.0, 1.0)),
            heights=tuple(float(x) for x in heights[order]),
        )

    def xi_continuum(
        self, solution: WaveSolution, kernel: KernelBase, x1: float, x2: float
    ) -> float:
        """Spatial-integration functional of the wave profiles, g anchored at x1 and f at x2."""
        zf = np.asarray(solution.zf)
        zg = np.asarray(solution.zg)
        df = np.asarray(solution.heights_f)
        dg = np.asarray(solution.heights_g)
        g1 = float(dg @ (zg <= x1))
        a = zf - x1
        b = zf[:, None] - zg[None, :]
        cdf_a = np.asarray(kernel.cdf(a))
        cdf_b = np.asarray(kernel.cdf(b))
        # f jumps right of x2 count on (x2, x1 + x], those left of it negatively
        right = g1 * (1.0 - cdf_a) - np.maximum(cdf_b - cdf_a[:, None], 0.0) @ dg
        left = -(g1 * cdf_a - np.asarray(kernel.cdf(np.minimum(a[:, None], b))) @ dg)
        return float(df @ np.where(zf > x2, right, left))

    def certify(
        self,
        solution: WaveSolution,
        hf: ExitFunctionBase,
        hg: ExitFunctionBase,
        kernel: KernelBase,
    ) -> CertReport:
        """Check a wave against the area, speed, functional and transition-length bounds.

        Clauses: ``residual`` (forward-map residual below 1e-6), ``zero_area`` (a
        standing wave rebuilds a pair with zero area gap), ``speed_bound``
        (|shift| sup w >= |A|), ``xi_nonnegative`` and ``transition_length``.

        Raises:
            CertificationFailedError: With the first violated clause
        """
        zf = np.asarray(solution.zf)
        zg = np.asarray(solution.zg)
        df = np.asarray(solution.heights_f)
        dg = np.asarray(solution.heights_g)
        uf, ug = self.forward_map(zf, zg, df, dg, solution.shift, kernel)
        residual = float(
            max(
                np.max(np.abs(uf - np.asarray(solution.targets_f))),
                np.max(np.abs(ug - np.asarray(solution.targets_g))),
            )
        )
        hf_rec = self._reconstructed(uf, df)
        hg_rec = self._reconstructed(ug, dg)
        area_rec = self.potential.area_gap(hf_rec, hg_rec)
        area = self.potential.area_gap(hf, hg)

        clauses: Dict[str, bool] = {}
        values: Dict[str, float] = {"residual": residual, "area_gap": area}
        clauses["residual"] = bool(residual < CERT_RESIDUAL)
        standing = abs(solution.shift) < ZERO_SHIFT
        values["reconstructed_area_gap"] = area_rec
        clauses["zero_area"] = bool((not standing) or abs(area_rec) < CERT_SLACK)
        values["speed_times_sup"] = float(abs(solution.shift) * kernel.sup_norm)
        clauses["speed_bound"] = bool(values["speed_times_sup"] >= abs(area) - CERT_SLACK)

        reach = kernel.half_width
        grid = np.linspace(
            min(zf.min(), zg.min()) - reach, max(zf.max(), zg.max()) + reach, 41
        )
        xi_min = min(self.xi_continuum(solution, kernel, a, b) for a in grid for b in grid)
        values["xi_min"] = float(xi_min)
        clauses["xi_nonnegative"] = bool(xi_min >= -CERT_SLACK)

        bound = self._transition_bound(solution, kernel, hf_rec, hg_rec)
        values["transition_bound"] = bound
        clauses["transition_length"] = bool(bound <= 1.0 + CERT_SLACK)

        for name in ("residual", "zero_area", "speed_bound", "xi_nonnegative", "transition_length"):
            if not clauses[name]:
                raise CertificationFailedError(
                    name,
                    f"Wave certification failed at clause '{name}'",
                    details={"clauses": clauses, "values": values},
                )
        return CertReport(passed=True, clauses=clauses, values=values)

    def _transition_bound(
        self,
        solution: WaveSolution,
        kernel: KernelBase,
        hf_rec: PiecewiseConstant,
        hg_rec: PiecewiseConstant,
        a: float = 0.1,
        b: float = 0.9,
    ) -> float:
        """(delta / 2 - e_L) floor((x_b - x_a) / 2L) with L the kernel half-width."""
        zg = np.asarray(solution.zg)
        dg = np.asarray(solution.heights_g)
        x_a, x_b = self._smoothed_inverse(zg, dg, np.array([a, b]), kernel)
        u = np.linspace(a, b, 401)
        lower, upper = hf_rec.limits(u)
        delta = float(
            min(
                np.min(self.potential.phi(hf_rec, hg_rec, u, lower)),
                np.min(self.potential.phi(hf_rec, hg_rec, u, upper)),
            )
        )
        length = kernel.half_width
        tail = 1.0 - float(kernel.cdf(length))
        return float((0.5 * delta - tail) * np.floor((x_b - x_a) / (2.0 * length)))
