"""Command handlers behind the coupled-waves executable."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.adapter.driven.model.factory import ModelFactory
from src.adapter.driving.cli.models import CommandResult
from src.core.domain.entities.exit_function import ExitFunctionBase
from src.core.domain.entities.rescale_map import RescaleMap
from src.core.domain.entities.spatial_profile import (
    InitialCondition,
    InitKind,
    SpatialProfile,
    Termination,
    TerminationKind,
)
from src.core.domain.exceptions import (
    CertificationFailedError,
    ConfigurationError,
    NoFrontError,
    NoNontrivialCrossingError,
    NoSaturationError,
)
from src.core.port.input_port import ExperimentConfigProtocol, InputPort
from src.core.port.model_port import ExitModelPort
from src.core.port.storage_port import ResultStoragePort
from src.core.service.coupled_service import CoupledService
from src.core.service.kernel_service import KernelService
from src.core.service.potential_service import PotentialService
from src.core.service.threshold_service import ThresholdService
from src.core.service.transform_service import TransformService
from src.core.service.wave_service import WaveService

logger = logging.getLogger(__name__)


class CliHandler(InputPort):
    """Runs one experiment per call and writes its outputs through the storage port."""

    def __init__(
        self,
        factory: ModelFactory,
        potential: PotentialService,
        transform: TransformService,
        kernels: KernelService,
        thresholds: ThresholdService,
        coupled: CoupledService,
        waves: WaveService,
        storage: ResultStoragePort,
    ):
        """Initialize the handler with its services.

        Args:
            factory: Builds model adapters from specifications
            potential: Potential and gap verdicts
            transform: Rescaling to crossing boxes
            kernels: Kernel discretization and smoothing
            thresholds: Threshold searches
            coupled: Coupled density evolution
            waves: Traveling-wave construction
            storage: Writes reports and tables
        """
        self.factory = factory
        self.potential = potential
        self.transform = transform
        self.kernels = kernels
        self.thresholds = thresholds
        self.coupled = coupled
        self.waves = waves
        self.storage = storage
        logger.info("CliHandler initialized")

    # Shared plumbing

    @staticmethod
    def _parameter(config: ExperimentConfigProtocol) -> float:
        parameter = config.resolved_parameter()
        if parameter is None:
            raise ConfigurationError(
                f"Command '{config.command.value}' needs a channel parameter",
                details={"family": config.model.family},  # type: ignore[attr-defined]
            )
        return float(parameter)

    def _pair(
        self, config: ExperimentConfigProtocol
    ) -> Tuple[ExitModelPort, float, ExitFunctionBase, ExitFunctionBase]:
        model = self.factory.create(config.model)
        parameter = self._parameter(config)
        hf, hg = model.pair(parameter)
        return model, parameter, hf, hg

    def _box_pair(
        self,
        config: ExperimentConfigProtocol,
        model: ExitModelPort,
        parameter: float,
        hf: ExitFunctionBase,
        hg: ExitFunctionBase,
    ) -> Tuple[ExitFunctionBase, ExitFunctionBase, Optional[RescaleMap]]:
        """Pair rescaled to the crossing box; the pair itself when DE reaches the origin."""
        corners = self.thresholds.select_box(model, parameter, config.box_rule)
        if corners is None:
            return hf, hg, None
        lo, hi = corners
        return self.transform.rescale_to_box(hf, hg, (lo.u, lo.v), (hi.u, hi.v))

    @staticmethod
    def _header(config: ExperimentConfigProtocol, **extra: Any) -> Dict[str, Any]:
        return {"command": config.command.value, "config": config.echo(), **extra}

    def _profile_columns(
        self, f: SpatialProfile, g: SpatialProfile, kernel: Any
    ) -> Dict[str, np.ndarray]:
        return {
            "x": f.positions,
            "f": f.values,
            "g": g.values,
            "f_smoothed": self.kernels.convolve(f, kernel).values,
            "g_smoothed": self.kernels.convolve(g, kernel).values,
        }

    def _initial_condition(self, config: ExperimentConfigProtocol) -> InitialCondition:
        kind, position, path = config.parsed_init()
        if kind == InitKind.ALL_ONES:
            return InitialCondition(kind=kind)
        if kind == InitKind.UNIT_STEP:
            return InitialCondition(kind=kind, position=position)
        table = self.storage.load_profile_table(Path(str(path)))
        i_min = int(round(table["x"][0] / config.delta)) if "x" in table else 0
        values = np.asarray(table["f"], dtype=float)
        profile = SpatialProfile(
            pitch=config.delta,
            i_min=i_min,
            values=values,
            left_limit=float(values[0]),
            right_limit=float(values[-1]),
        )
        return InitialCondition(kind=kind, profile=profile)

    # Commands

    def run_threshold(self, config: ExperimentConfigProtocol) -> CommandResult:
        """Thresholds, area trace and endpoint verdicts.

        The report is written before a missing saturation is raised.
        """
        model = self.factory.create(config.model)
        report = self.thresholds.threshold_report(
            model, config.box_rule, config.resolved_bracket(), config.trace_points
        )
        payload = self._header(config, **report.model_dump())
        payload["closed_form_uncoupled"] = model.closed_form_uncoupled()
        payload["closed_form_coupled"] = model.closed_form_coupled()
        path = self.storage.save_report("threshold.json", payload)
        logger.info(
            f"Thresholds for {model.family}: uncoupled={report.uncoupled:.6g}, "
            f"coupled={report.coupled}"
        )
        if not report.saturated:
            raise NoSaturationError(
                f"Coupling does not move the {model.family} threshold inside {report.bracket}",
                details={
                    "bracket": report.bracket,
                    "uncoupled": report.uncoupled,
                    "report": str(path),
                },
            )
        return CommandResult(report_path=str(path), files=[str(path)])

    def run_simulate(self, config: ExperimentConfigProtocol) -> CommandResult:
        """Coupled density evolution with diagnostics, speed fit and profile tables."""
        model, parameter, hf, hg = self._pair(config)
        kernel = self.kernels.discretize(config.kernel, config.delta)
        window = self.coupled.window_for(config.window, config.delta)
        termination = Termination(
            kind=config.termination,
            boundary_index=0,
            length_index=window if config.termination == TerminationKind.TWO_SIDED else None,
        )
        diagnostics = self.coupled.run(
            hf,
            hg,
            kernel,
            window,
            termination,
            self._initial_condition(config),
            config.max_iters,
            config.tol,
            record_every=config.record_every,
        )
        try:
            speed = self.coupled.wave_speed(diagnostics, burn_in=config.burn_in).model_dump()
        except NoFrontError as e:
            logger.warning(f"No speed estimate: {e}")
            speed = None

        area = self.potential.area_gap(hf, hg)
        hf_box, hg_box, box = self._box_pair(config, model, parameter, hf, hg)
        box_area = self.potential.area_gap(hf_box, hg_box)
        header = {"family": model.family, "parameter": parameter, "delta": config.delta}
        files: List[str] = []
        for snapshot in diagnostics.snapshots:
            path = self.storage.save_table(
                f"profiles/profile_{snapshot.iteration:06d}.csv",
                self._profile_columns(snapshot.f, snapshot.g, kernel),
                header={**header, "iteration": snapshot.iteration},
            )
            files.append(str(path))
        final = self.storage.save_table(
            "profile.csv",
            self._profile_columns(diagnostics.f, diagnostics.g, kernel),
            header={**header, "iteration": diagnostics.iterations},
        )
        files.append(str(final))

        payload = self._header(
            config,
            family=model.family,
            parameter=parameter,
            area_gap=area,
            box=None if box is None else box.model_dump(),
            box_area_gap=box_area,
            speed_bound=abs(box_area) / config.kernel.sup_norm,
            iterations=diagnostics.iterations,
            converged=diagnostics.converged,
            monotone=diagnostics.monotone,
            classification=diagnostics.classification,
            front_level=diagnostics.front_level,
            top_value=diagnostics.top_value,
            speed=speed,
            fronts=diagnostics.fronts,
        )
        report = self.storage.save_report("simulate.json", payload)
        return CommandResult(report_path=str(report), files=[str(report), *files])

    def run_wave(self, config: ExperimentConfigProtocol) -> CommandResult:
        """Traveling wave of the quantized box pair with its certificate.

        The wave and profile are written before a failed certificate is raised.
        """
        model, parameter, raw_f, raw_g = self._pair(config)
        hf, hg, box = self._box_pair(config, model, parameter, raw_f, raw_g)
        solution = self.waves.construct(
            hf, hg, config.kernel, config.continuation_steps, config.quantization
        )
        failure = None
        try:
            certificate: Dict[str, Any] = self.waves.certify(
                solution, hf, hg, self.waves.solving_kernel(config.kernel)
            ).model_dump()
        except CertificationFailedError as e:
            failure = e
            certificate = {"passed": False, "failed_clause": e.clause, "values": e.details}

        jumps = np.concatenate([solution.zf, solution.zg])
        margin = 2.0 * config.kernel.half_width
        x = np.linspace(float(jumps.min()) - margin, float(jumps.max()) + margin, config.grid)
        f, g = solution.profile(x)
        table = self.storage.save_table(
            "wave_profile.csv",
            {"x": x, "f": f, "g": g},
            header={"family": model.family, "parameter": parameter, "shift": solution.shift},
        )
        payload = self._header(
            config,
            family=model.family,
            parameter=parameter,
            box=None if box is None else box.model_dump(),
            solution=solution.model_dump(),
            speed_bound=abs(solution.area_gap) / config.kernel.sup_norm,
            certificate=certificate,
        )
        report = self.storage.save_report("wave.json", payload)
        if failure is not None:
            raise failure
        return CommandResult(report_path=str(report), files=[str(report), str(table)])

    def run_potential(self, config: ExperimentConfigProtocol) -> CommandResult:
        """Area gap, crossings and verdict, plus the potential along the hf curve."""
        model, parameter, hf, hg = self._pair(config)
        try:
            verdict: Dict[str, Any] = self.potential.gap_verdict(hf, hg).model_dump()
        except NoNontrivialCrossingError as e:
            logger.info(f"Only trivial crossings at {parameter:g}: {e}")
            verdict = {
                "area_gap": self.potential.area_gap(hf, hg),
                "area_gap_check": self.potential.area_gap_check(hf, hg),
                "crossings": [c.model_dump() for c in self.potential.crossings(hf, hg)],
                "verdict": None,
            }

        u = np.linspace(0.0, 1.0, config.grid)
        v = np.asarray(hf.eval(u), dtype=float)
        table = self.storage.save_table(
            "potential.csv",
            {"u": u, "v": v, "phi": self.potential.phi(hf, hg, u, v)},
            header={"family": model.family, "parameter": parameter},
        )
        payload = self._header(
            config,
            family=model.family,
            parameter=parameter,
            domain=model.domain_map(parameter).model_dump(),
            **verdict,
        )
        report = self.storage.save_report("potential.json", payload)
        return CommandResult(report_path=str(report), files=[str(report), str(table)])

    def run_exit_chart(self, config: ExperimentConfigProtocol) -> CommandResult:
        """Columns u, hf(u), hg^-1(u) and the running area of hg^-1 - hf from 0 to u.

        Curves are drawn on the crossing box, so the last running area is the box area gap.
        """
        model, parameter, raw_f, raw_g = self._pair(config)
        hf, hg, box = self._box_pair(config, model, parameter, raw_f, raw_g)
        u = np.linspace(0.0, 1.0, config.grid)
        hg_inverse = hg.inverse()
        running = np.asarray(hg_inverse.integral(u), dtype=float) - np.asarray(
            hf.integral(u), dtype=float
        )
        table = self.storage.save_table(
            "exit_chart.csv",
            {
                "u": u,
                "hf": np.asarray(hf.eval(u), dtype=float),
                "hg_inv": np.asarray(hg_inverse.eval(u), dtype=float),
                "area": running,
            },
            header={"family": model.family, "parameter": parameter, "grid": config.grid},
        )
        payload = self._header(
            config,
            family=model.family,
            parameter=parameter,
            box=None if box is None else box.model_dump(),
            area_gap=float(running[-1]),
            table=str(table),
        )
        report = self.storage.save_report("exit_chart.json", payload)
        return CommandResult(report_path=str(report), files=[str(report), str(table)])
