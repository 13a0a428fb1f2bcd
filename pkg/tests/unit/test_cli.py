import json
from unittest.mock import patch

import pytest

from src.adapter.driving.cli import app
from src.adapter.driving.cli.models import Command, ExitCode, ExperimentConfig
from src.core.domain.entities.kernel import BoxcarKernel
from src.core.domain.entities.model_spec import BecLdpcSpec
from src.core.domain.entities.spatial_profile import InitKind
from src.core.domain.exceptions import (
    ConfigurationError,
    NoSaturationError,
    StepCollapseError,
)
from tests.mocks import result_for

BEC_MODEL = {"family": "bec_ldpc", "lam": [0.0, 0.0, 1.0], "rho": [0.0] * 5 + [1.0]}


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps({**BEC_MODEL, "parameter": 0.45}))
    return path


def _parse(argv):
    return app.build_parser().parse_args(argv)


def test_resolve_config_precedence(cli_env, model_file):
    """Test flags override the config file, which overrides the settings."""
    # Setup
    config_file = cli_env / "experiment.json"
    config_file.write_text(json.dumps({"delta": 0.05, "window": 5.0, "out": "from-file"}))
    args = _parse(
        ["simulate", "--config", str(config_file), "--model", str(model_file), "--delta", "0.1"]
    )

    # Execute
    config = app.resolve_config(args)

    # Assert
    assert config.command == Command.SIMULATE
    assert config.delta == 0.1
    assert config.window == 5.0
    assert config.out == "from-file"
    assert config.seed == 11
    assert config.resolved_parameter() == 0.45
    assert isinstance(config.kernel, BoxcarKernel)


def test_thread_setting_overrides_jobs_flag(cli_env, model_file, settings):
    settings.COUPLED_WAVES_THREADS = 3
    args = _parse(["threshold", "--model", str(model_file), "--jobs", "8"])

    config = app.resolve_config(args)

    assert config.jobs == 3


def test_resolve_config_reads_document_forms(cli_env):
    """Test model and kernel files may wrap their specification in a document."""
    # Setup
    model = cli_env / "doc.json"
    model.write_text(json.dumps({"model": BEC_MODEL}))
    kernel = cli_env / "kernel.json"
    kernel.write_text(json.dumps({"kernel": {"shape": "gaussian", "sigma": 0.5}}))

    # Execute
    config = app.resolve_config(
        _parse(["potential", "--model", str(model), "--kernel", str(kernel), "--parameter", "0.5"])
    )

    # Assert
    assert isinstance(config.model, BecLdpcSpec)
    assert config.kernel.sigma == 0.5
    assert config.resolved_parameter() == 0.5


def test_resolve_config_needs_model(cli_env):
    with pytest.raises(ConfigurationError):
        app.resolve_config(_parse(["threshold"]))


def test_parsed_init():
    base = {"command": "simulate", "model": BEC_MODEL}

    assert ExperimentConfig(**base).parsed_init() == (InitKind.ALL_ONES, 0.0, None)
    assert ExperimentConfig(**base, init="step:2.5").parsed_init() == (
        InitKind.UNIT_STEP,
        2.5,
        None,
    )
    assert ExperimentConfig(**base, init="file:p.csv").parsed_init() == (
        InitKind.PROFILE,
        0.0,
        "p.csv",
    )
    with pytest.raises(ValueError):
        ExperimentConfig(**base, init="sideways")


def test_main_writes_report_to_stdout(cli_env, model_file, mock_input_port, capsys):
    """Test a successful command echoes its report and exits with 0."""
    # Setup
    report = cli_env / "report.json"
    report.write_text('{"area_gap": 0.03125}\n')
    mock_input_port.run_exit_chart.return_value = result_for(report)

    # Execute
    with patch("src.adapter.driving.cli.app.build_handler", return_value=mock_input_port):
        code = app.main(["exit-chart", "--model", str(model_file)])

    # Assert
    assert code == ExitCode.SUCCESS
    assert json.loads(capsys.readouterr().out) == {"area_gap": 0.03125}
    mock_input_port.run_exit_chart.assert_called_once()


@pytest.mark.parametrize(
    "error, expected",
    [
        (NoSaturationError("no sign change", details={"bracket": [0.001, 0.1]}), 2),
        (ConfigurationError("bad bracket"), 64),
        (StepCollapseError("collapsed", details={"t": 0.5}), 70),
        (RuntimeError("boom"), 70),
    ],
)
def test_main_maps_errors_to_exit_codes(cli_env, model_file, mock_input_port, capsys, error,
                                        expected):
    """Test each failure class maps to its exit code with a JSON error on stderr."""
    # Setup
    mock_input_port.run_threshold.side_effect = error

    # Execute
    with patch("src.adapter.driving.cli.app.build_handler", return_value=mock_input_port):
        code = app.main(["threshold", "--model", str(model_file)])

    # Assert
    assert code == expected
    response = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert response["error"] == type(error).__name__
    assert response["exit_code"] == expected


def test_main_rejects_bad_flags(cli_env, model_file, capsys):
    """Test argument and validation errors exit with 64."""
    unknown = app.main(["threshold", "--model", str(model_file), "--no-such-flag"])
    reversed_bracket = app.main(
        ["threshold", "--model", str(model_file), "--bracket", "0.6", "0.2"]
    )

    assert unknown == ExitCode.USAGE
    assert reversed_bracket == ExitCode.USAGE
    last = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert last["error"] == "ValidationError"
    assert any("bracket" in e for e in last["details"]["errors"])
