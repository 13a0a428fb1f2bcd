"""End-to-end runs of the coupled-waves command line."""
import json

import pytest

from src.adapter.driving.cli import app
from src.adapter.driving.cli.models import ExitCode


def _write(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


@pytest.fixture
def bec_file(cli_env):
    return _write(
        cli_env / "bec.json",
        {"family": "bec_ldpc", "lam": [0.0, 0.0, 1.0], "rho": [0.0] * 5 + [1.0], "parameter": 0.45},
    )


@pytest.mark.integration
def test_exit_chart_reports_box_area(cli_env, bec_file, capsys):
    """Test the running area on the crossing box ends at the area gap."""
    # Execute
    code = app.main(["exit-chart", "--model", bec_file, "--grid", "201"])

    # Assert
    assert code == ExitCode.SUCCESS
    report = json.loads(capsys.readouterr().out)
    assert report["area_gap"] == pytest.approx(0.03125, abs=1e-5)
    assert report["box"] is not None
    table = (cli_env / "settings-out" / "exit_chart.csv").read_text().splitlines()
    assert table[1] == "u,hf,hg_inv,area"
    assert len(table) == 2 + 201


@pytest.mark.integration
def test_rerun_gives_identical_outputs(cli_env, bec_file):
    """Test the same configuration writes byte-identical files."""
    # Setup
    outputs = []

    # Execute
    for run in ("first", "second"):
        assert app.main(["potential", "--model", bec_file, "--out", run]) == ExitCode.SUCCESS
        outputs.append(
            [(cli_env / run / name).read_bytes() for name in ("potential.json", "potential.csv")]
        )

    # Assert
    first, second = outputs
    assert first[1] == second[1]
    assert json.loads(first[0])["area_gap"] == json.loads(second[0])["area_gap"]
    assert first[0].replace(b"first", b"second") == second[0]


@pytest.mark.integration
def test_gallager_a_threshold_exits_without_saturation(cli_env, capsys):
    """Test the threshold report is written and exit code 2 signals no saturation."""
    # Setup
    model = _write(cli_env / "gal_a.json", {"family": "gallager_a", "dl": 3, "dr": 6})

    # Execute
    code = app.main(["threshold", "--model", model, "--trace-points", "5"])

    # Assert
    assert code == ExitCode.NO_SATURATION
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "NoSaturationError"
    report = json.loads((cli_env / "settings-out" / "threshold.json").read_text())
    assert report["saturated"] is False
    assert report["coupled"] is None


@pytest.mark.integration
def test_simulate_writes_profiles(cli_env, bec_file, capsys):
    """Test a short simulation writes snapshots and the final profile."""
    # Execute
    code = app.main(
        [
            "simulate", "--model", bec_file, "--delta", "0.1", "--window", "10",
            "--init", "step:5", "--max-iters", "20", "--record-every", "10",
        ]
    )

    # Assert
    assert code == ExitCode.SUCCESS
    report = json.loads(capsys.readouterr().out)
    assert report["iterations"] == 20
    assert len(report["fronts"]) == 20
    assert report["speed_bound"] == pytest.approx(0.0625, abs=1e-4)
    out = cli_env / "settings-out"
    assert (out / "profiles" / "profile_000010.csv").exists()
    assert (out / "profiles" / "profile_000020.csv").exists()
    assert (out / "profile.csv").read_text().splitlines()[1] == "x,f,g,f_smoothed,g_smoothed"
