"""Command-line application for coupled-system experiments."""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, NoReturn, Optional

from pydantic import ValidationError

from src.adapter.driven.storage.file_adapter import to_json_compatible
from src.adapter.driving.cli.handler import CliHandler
from src.adapter.driving.cli.models import (
    Command,
    CommandResult,
    ErrorResponse,
    ExitCode,
    ExperimentConfig,
)
from src.config.container import container
from src.config.logging import setup_logging
from src.config.settings import get_settings
from src.core.domain.entities.kernel import KernelDocument
from src.core.domain.entities.model_spec import ModelDocument
from src.core.domain.entities.potential_report import BoxRule
from src.core.domain.entities.spatial_profile import TerminationKind
from src.core.domain.exceptions import (
    AnalysisError,
    BadPolynomialError,
    BadThresholdBError,
    ConfigurationError,
    NoSaturationError,
    PriorUnsupportedError,
)

logger = logging.getLogger(__name__)

USAGE_ERRORS = (ConfigurationError, BadPolynomialError, BadThresholdBError, PriorUnsupportedError)

# Flag destination to ExperimentConfig field, for flags that override the config file
OVERRIDES = (
    "parameter",
    "bracket",
    "delta",
    "window",
    "termination",
    "init",
    "max_iters",
    "tol",
    "burn_in",
    "record_every",
    "quantization",
    "continuation_steps",
    "grid",
    "box_rule",
    "trace_points",
    "out",
    "jobs",
    "seed",
)


class UsageParser(argparse.ArgumentParser):
    """Argument parser reporting usage errors as exceptions instead of exiting."""

    def error(self, message: str) -> NoReturn:
        raise ConfigurationError(message, details={"usage": self.format_usage().strip()})


def build_parser() -> UsageParser:
    parser = UsageParser(
        prog="coupled-waves",
        description="Potentials, thresholds, coupled density evolution and traveling waves",
    )
    parser.add_argument("command", choices=[c.value for c in Command], help="Experiment to run")
    parser.add_argument("--config", help="JSON file holding a full experiment configuration")
    parser.add_argument("--model", help="JSON file holding the model specification")
    parser.add_argument("--kernel", help="JSON file holding the kernel specification")
    parser.add_argument("--parameter", type=float, help="Channel parameter (eps, sigma2, entropy)")
    parser.add_argument(
        "--bracket", type=float, nargs=2, metavar=("LO", "HI"), help="Threshold bracket"
    )
    parser.add_argument("--delta", type=float, help="Grid pitch")
    parser.add_argument("--window", type=float, help="Chain length in x units")
    parser.add_argument(
        "--termination", choices=[k.value for k in TerminationKind], help="Chain termination"
    )
    parser.add_argument("--init", help="ones, step:<x> or file:<path>")
    parser.add_argument("--max-iters", dest="max_iters", type=int, help="Iteration budget")
    parser.add_argument("--tol", type=float, help="Convergence tolerance")
    parser.add_argument("--burn-in", dest="burn_in", type=int, help="Fronts skipped by the fit")
    parser.add_argument(
        "--record-every", dest="record_every", type=int, help="Profile snapshot stride"
    )
    parser.add_argument("--quantization", type=int, help="Jumps per quantized EXIT function")
    parser.add_argument(
        "--steps", dest="continuation_steps", type=int, help="Continuation macro-steps"
    )
    parser.add_argument("--grid", type=int, help="Rows of the exit-chart and wave tables")
    parser.add_argument(
        "--box-rule", dest="box_rule", choices=[r.value for r in BoxRule], help="Crossing box"
    )
    parser.add_argument("--trace-points", dest="trace_points", type=int, help="Area trace size")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--jobs", type=int, help="Worker threads for parameter sweeps")
    parser.add_argument("--seed", type=int, help="Monte Carlo seed")
    parser.add_argument("--log-level", dest="log_level", help="Logging level")
    return parser


def _read_json(path: str) -> Dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(
            f"Could not read {path}: {e}", details={"path": path}, original_error=e
        ) from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path} does not hold a JSON object", details={"path": path})
    return data


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge the config file, the model files, the flags and the environment.

    Precedence, lowest first: ExperimentConfig defaults, settings, --config, flags,
    and COUPLED_WAVES_THREADS for the worker count.
    """
    settings = get_settings()
    values: Dict[str, Any] = {"out": settings.OUTPUT_DIR, "seed": settings.MONTE_CARLO_SEED}
    if args.config:
        values.update(_read_json(args.config))
    values["command"] = args.command
    if args.model:
        data = _read_json(args.model)
        values["model"] = data if "family" in data else ModelDocument.model_validate(data).model
    if args.kernel:
        data = _read_json(args.kernel)
        values["kernel"] = data if "shape" in data else KernelDocument.model_validate(data).kernel
    if "model" not in values:
        raise ConfigurationError("A model specification is required (--model or --config)")
    for name in OVERRIDES:
        value = getattr(args, name, None)
        if value is not None:
            values[name] = tuple(value) if name == "bracket" else value
    if settings.COUPLED_WAVES_THREADS is not None:
        values["jobs"] = settings.COUPLED_WAVES_THREADS
    return ExperimentConfig.model_validate(values)


def build_handler(config: ExperimentConfig) -> CliHandler:
    """Handler wired for one experiment: its output directory, seed and worker count."""
    quadrature = container.quadrature(
        config=container.quadrature_config(monte_carlo_seed=config.seed)
    )
    return container.input_port(
        factory=container.model_factory(quadrature=quadrature),
        thresholds=container.threshold_service(n_jobs=config.jobs),
        storage=container.storage_adapter(output_dir=Path(config.out)),
    )


def dispatch(handler: CliHandler, config: ExperimentConfig) -> CommandResult:
    commands: Dict[Command, Callable[[ExperimentConfig], CommandResult]] = {
        Command.THRESHOLD: handler.run_threshold,
        Command.SIMULATE: handler.run_simulate,
        Command.WAVE: handler.run_wave,
        Command.POTENTIAL: handler.run_potential,
        Command.EXIT_CHART: handler.run_exit_chart,
    }
    return commands[config.command](config)


def _report_error(error: str, message: str, details: Dict[str, Any], code: ExitCode) -> int:
    response = ErrorResponse(
        error=error, message=message, details=to_json_compatible(details), exit_code=int(code)
    )
    sys.stderr.write(json.dumps(response.model_dump(), sort_keys=True) + "\n")
    return int(code)


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command and return the process exit code.

    0 on success, 2 when coupling does not saturate, 64 on usage or configuration
    errors and 70 on numerical failures. Errors go to stderr as one JSON object;
    the JSON report of a successful command goes to stdout.
    """
    try:
        args = build_parser().parse_args(argv)
        setup_logging(args.log_level)
        config = resolve_config(args)
        logger.info(f"Running {config.command.value} for {config.model.family}")
        result = dispatch(build_handler(config), config)
        sys.stdout.write(Path(result.report_path).read_text(encoding="utf-8"))
        return int(ExitCode.SUCCESS)
    except ValidationError as e:
        errors = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        return _report_error(
            "ValidationError", "Invalid configuration", {"errors": errors}, ExitCode.USAGE
        )
    except USAGE_ERRORS as e:
        return _report_error(type(e).__name__, str(e), e.details, ExitCode.USAGE)
    except NoSaturationError as e:
        return _report_error(type(e).__name__, str(e), e.details, ExitCode.NO_SATURATION)
    except AnalysisError as e:
        logger.error(f"Command failed: {str(e)}")
        return _report_error(type(e).__name__, str(e), e.details, ExitCode.SOFTWARE)
    except Exception as e:
        logger.exception(f"Unexpected error: {str(e)}")
        return _report_error(type(e).__name__, str(e), {}, ExitCode.SOFTWARE)


if __name__ == "__main__":
    sys.exit(main())
