import json

import pytest

from ..cli import bounds_summary, compare_logs, main
from ..scenario import reference_scenario
from ..simulation import run
from ..telemetry.plots import PLOT_NAMES
from .test_utils import shortened_reference_scenario

SHORT = ["--set", "sim.duration=0.2"]


def test_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", "--out", str(out), *SHORT]) == 0
    lines = (out / "telemetry.csv").read_text().splitlines()
    assert len(lines) == 22
    assert len(lines[0].split(",")) == 49
    report = json.loads((out / "bound_report.json").read_text())
    assert report["epsilon"] == pytest.approx(0.0999, abs=1e-4)
    assert len(report["per_follower"]) == 4
    assert (out / "run_log.pt").exists()
    for name in PLOT_NAMES:
        assert (out / name).exists()
    assert "bound violations" in capsys.readouterr().out


def test_run_stride_and_no_plots(tmp_path):
    out = tmp_path / "run"
    assert main(["run", "--out", str(out), "--no-plots", "--stride", "50", *SHORT]) == 0
    assert len((out / "telemetry.csv").read_text().splitlines()) == 6
    assert not (out / "errors.svg").exists()


def test_missing_scenario(tmp_path, capsys):
    missing = tmp_path / "nowhere.json"
    assert main(["run", "--scenario", str(missing), "--out", str(tmp_path)]) == 1
    assert str(missing) in capsys.readouterr().err


def test_unknown_override(tmp_path, capsys):
    assert main(["bounds", "--set", "gains.k_x=3"]) == 1
    assert "gains.k_x" in capsys.readouterr().err


def test_bounds(capsys):
    assert main(["bounds"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["V1_0"] == pytest.approx(24.0)
    assert summary["epsilon"] == pytest.approx(0.0999, abs=1e-4)
    assert summary["epsilon_rho"] == summary["epsilon"]
    assert summary["epsilon_delta"] == pytest.approx(0.0199, abs=1e-4)
    assert summary["alpha1_min"] == pytest.approx(2.333, abs=1e-3)
    assert summary["alpha1_suggestion"] == [7, 3]
    assert summary["t2_bound"] > 0
    assert summary["notes"]


def test_bounds_infeasible_tuning():
    summary = bounds_summary(reference_scenario(), epsilon_d=0.1, t1_d=100.0)
    assert summary["alpha1_min"] is None
    assert summary["alpha1_suggestion"] is None
    assert any("infeasible" in note for note in summary["notes"])


def test_bounds_gain_too_small(capsys):
    assert main(["bounds", "--set", "gains.k_e=1"]) == 1
    assert "n*k_e" in capsys.readouterr().err


def test_run_with_empty_bound_set(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", "--out", str(out), *SHORT, "--set", "gains.k_e=1"]) == 0
    assert "Warning: estimator gain too small" in capsys.readouterr().out
    report = json.loads((out / "bound_report.json").read_text())
    for key in ("epsilon", "epsilon_rho", "epsilon_delta", "f", "t1_bound"):
        assert report[key] is None
    assert "n*k_e" in report["notes"][0]
    assert all(f["settling_estimator"] is None for f in report["per_follower"])
    assert not any("estimator_error" in v for v in report["violations"])
    for name in PLOT_NAMES:
        assert (out / name).exists()


def test_compare_with_empty_bound_set(tmp_path):
    out = tmp_path / "compare"
    assert main(["compare", "--out", str(out), *SHORT, "--set", "gains.k_e=1"]) == 0
    comparison = json.loads((out / "comparison.json").read_text())
    assert comparison["window_start"] == pytest.approx(0.1)


@pytest.mark.parametrize("alpha1", ["[3,3]", "[1,1]", "[4,3]"])
def test_bounds_rejects_alpha1(alpha1):
    assert main(["bounds", "--set", f"gains.alpha1={alpha1}"]) == 1


def test_blowup_exit_code(tmp_path, capsys):
    positions = "[[2e9,0],[18,12],[4,12],[-2,16]]"
    code = main([
        "run", "--out", str(tmp_path), "--no-plots", *SHORT,
        "--set", f"followers.initial_positions={positions}",
    ])
    assert code == 2
    assert "t=0.001" in capsys.readouterr().err


def test_compare(tmp_path, capsys):
    out = tmp_path / "compare"
    assert main(["compare", "--out", str(out), "--set", "sim.duration=0.5"]) == 0
    comparison = json.loads((out / "comparison.json").read_text())
    assert 0.0 <= comparison["window_start"] <= 0.5
    assert comparison["k_sgn"] == pytest.approx(1.05 * 5 ** 0.5 / 2 * 3)
    for key in ("continuous", "signum"):
        assert (out / key / "telemetry.csv").exists()
        assert len(comparison[f"tv_{key}_per_follower"]) == 4
        assert comparison[f"tv_{key}"] >= 0
    assert "tv_ratio" in json.loads(capsys.readouterr().out)


def test_compare_logs_with_fixed_window():
    logs = {
        "continuous": run(shortened_reference_scenario(duration=0.1)),
        "signum": run(shortened_reference_scenario(duration=0.1, estimator="signum")),
    }
    result = compare_logs(logs, window_start=0.0)
    assert result["window_start"] == 0.0
    assert result["tv_ratio"] == pytest.approx(result["tv_continuous"] / result["tv_signum"])
    assert result["max_jump_ratio"] == pytest.approx(
        result["max_jump_signum"] / result["max_jump_continuous"]
    )


def test_sweep(tmp_path):
    out = tmp_path / "sweep"
    code = main([
        "sweep", "--out", str(out), "--key", "gains.k_e", "--values", "1,12",
        "--workers", "2", *SHORT,
    ])
    assert code == 0
    sweep = json.loads((out / "sweep.json").read_text())
    assert sweep["key"] == "gains.k_e"
    assert [entry["value"] for entry in sweep["runs"]] == [1, 12]
    assert sweep["runs"][0]["epsilon"] is None
    assert "n*k_e" in sweep["runs"][0]["note"]
    assert sweep["runs"][1]["epsilon"] == pytest.approx(0.0999 / 2 ** (7 / 3), rel=1e-3)


def test_plot(tmp_path):
    out = tmp_path / "run"
    assert main(["run", "--out", str(out), "--no-plots", *SHORT]) == 0
    assert main(["plot", "--csv", str(out / "telemetry.csv"), "--out", str(tmp_path / "figures")]) == 0
    for name in PLOT_NAMES:
        assert (tmp_path / "figures" / name).exists()


@pytest.mark.slow
def test_compare_reference_dithering(tmp_path):
    out = tmp_path / "compare"
    assert main(["compare", "--out", str(out)]) == 0
    comparison = json.loads((out / "comparison.json").read_text())
    assert comparison["tv_ratio"] < 0.5
    assert comparison["max_jump_ratio"] >= 5
