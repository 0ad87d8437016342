import io
import json
import logging

import pytest

from src.cli import main as cli_main
from src.cli.error_handlers import CLIErrorHandler
from src.cli.main import build_parser, main
from src.config.settings import settings
from src.utils.exceptions import ConfigError, ThresholdError

SMALL_SPECTRUM = {
    "kind": "spectrum",
    "name": "small",
    "description": "Weak two-cycle pulse on hydrogen",
    "scattering": {
        "Z": 1,
        "p_mag": 1.5,
        "theta_p": "0.4pi",
        "phi_p": "pi",
        "dp": 1e-3,
        "c_au": 20.0,
        "pulse": {"shape": "FieldSine2", "omega": 0.5, "amplitude": 0.05, "n_osc": 2},
    },
    "omega_grid": {"start": 1.2, "stop": 2.0, "num": 5},
}


@pytest.fixture(autouse=True)
def isolated_logs(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "LOG_DIR", str(tmp_path / "logs"))
    yield
    root = logging.getLogger()
    for handler in root.handlers[:]:
        root.removeHandler(handler)
        handler.close()


@pytest.fixture
def small_job_file(tmp_path):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(SMALL_SPECTRUM))
    return path


def _summary(capsys):
    return json.loads(capsys.readouterr().out)


def test_parser_has_one_subcommand_per_job_kind():
    """Test that every run kind is a subcommand"""
    parser = build_parser()
    for command in ("spectrum", "angular-map", "spectrogram", "saddle", "classical-check", "pulse-preview", "validate-kernels"):
        args = parser.parse_args([command, "--preset", "fig2"])
        assert args.command == command
    with pytest.raises(SystemExit):
        parser.parse_args(["spectrum", "--preset", "fig2", "--config", "x.json"])


def test_presets_command_lists_shipped_presets(capsys):
    """Test the preset listing on stdout"""
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "fig2" in out and "fig3_retardation" in out


def test_pulse_preview_writes_artifacts(tmp_path, capsys):
    """Test a pulse preview run end to end"""
    out_dir = tmp_path / "out"
    assert main(["pulse-preview", "--preset", "fig1", "--out", str(out_dir)]) == 0
    summary = _summary(capsys)

    assert summary["exit_code"] == 0
    assert "fig1_pulse.csv" in summary["artifacts"]
    assert "fig1_pulse.py" in summary["artifacts"]
    assert summary["summary"]["photon_energy_ev"] == pytest.approx(31.02, abs=0.01)
    sidecar = json.loads((out_dir / "fig1_meta.json").read_text())
    assert sidecar["plots"][0]["kind"] == "pulse-preview"
    rows = [line for line in (out_dir / "fig1_pulse.csv").read_text().splitlines() if not line.startswith("#")]
    # Header plus 1000 samples per cycle over three cycles, both ends included
    assert len(rows) == 1 + 3 * 1000 + 1


def test_spectrum_run_from_config_file(tmp_path, small_job_file, capsys):
    """Test a spectrum job read from a config file"""
    out_dir = tmp_path / "out"
    assert main(["spectrum", "--config", str(small_job_file), "--workers", "1", "--out", str(out_dir)]) == 0
    summary = _summary(capsys)

    assert summary["kind"] == "spectrum"
    assert summary["summary"]["field_free_peak"] == pytest.approx(1.625)
    header = (out_dir / "small_spectrum.csv").read_text().splitlines()
    assert any(line.startswith("# config_hash: ") for line in header)
    assert "omega_K,d3E,R_re,R_im" in "\n".join(header)


def test_outputs_are_identical_across_worker_counts(tmp_path, small_job_file, capsys):
    """Test that data files do not depend on the worker count"""
    for workers in ("1", "2"):
        assert main(["spectrum", "--config", str(small_job_file), "--workers", workers, "--out", str(tmp_path / workers)]) == 0
    capsys.readouterr()
    assert (tmp_path / "1" / "small_spectrum.csv").read_bytes() == (tmp_path / "2" / "small_spectrum.csv").read_bytes()


def test_saddle_run_tabulates_cutoffs(tmp_path, capsys):
    """Test the saddle job on the 10 keV preset"""
    assert main(["saddle", "--preset", "fig2c", "--out", str(tmp_path)]) == 0
    summary = _summary(capsys)
    assert summary["summary"]["cutoff_span"] == pytest.approx(6.48, abs=0.05)
    lines = [line for line in (tmp_path / "fig2c_cutoffs.csv").read_text().splitlines() if not line.startswith("#")]
    assert lines[0] == "theta_p,cutoff_dipole,cutoff_full,multiplicity"
    assert all(row.endswith(",2") for row in lines[1:])


def test_classical_check_passes(tmp_path, capsys):
    """Test the classical scaling job"""
    job = {
        "kind": "classical-check",
        "name": "classical",
        "scattering": {
            "Z": 1,
            "p_mag": 1.3,
            "theta_p": "0.4pi",
            "phi_p": "pi",
            "dp": 1e-3,
            "pulse": {"shape": "FieldSine2", "omega": 0.5, "amplitude": 0.2, "n_osc": 2},
        },
    }
    path = tmp_path / "classical.json"
    path.write_text(json.dumps(job))
    assert main(["classical-check", "--config", str(path), "--out", str(tmp_path)]) == 0
    summary = _summary(capsys)
    assert summary["summary"]["passed"]
    assert summary["summary"]["scaling_slope"] == pytest.approx(-2.0, abs=0.2)


def test_plot_command_reemits_scripts(tmp_path, capsys):
    """Test that plot scripts can be regenerated from a sidecar"""
    assert main(["pulse-preview", "--preset", "fig1", "--out", str(tmp_path)]) == 0
    script = tmp_path / "fig1_pulse.py"
    script.unlink()
    capsys.readouterr()

    assert main(["plot", str(tmp_path / "fig1_meta.json")]) == 0
    assert script.exists()
    assert str(script) in capsys.readouterr().out


def test_missing_config_is_a_config_error(capsys):
    """Test that run commands other than validate-kernels need an input"""
    assert main(["spectrum"]) == 1
    err = capsys.readouterr().err
    assert '"config_error"' in err
    assert '"field": "config"' in err


def test_usage_errors_exit_with_64(capsys):
    """Test that argparse usage errors get their own exit code, distinct from numerical failures"""
    assert main(["spectrum", "--preset", "fig2", "--config", "x.json"]) == 64
    assert main([]) == 64
    assert main(["spectrum", "--workers", "many"]) == 64
    assert "usage:" in capsys.readouterr().err

    assert main(["--help"]) == 0
    assert "usage:" in capsys.readouterr().out


def test_numerical_failure_exits_with_two(tmp_path, capsys):
    """Test that photon energies below threshold exit with code 2"""
    job = dict(SMALL_SPECTRUM, omega_grid={"start": 0.1, "stop": 2.0, "num": 5})
    path = tmp_path / "below.json"
    path.write_text(json.dumps(job))
    assert main(["spectrum", "--config", str(path), "--workers", "1", "--out", str(tmp_path)]) == 2
    assert '"threshold"' in capsys.readouterr().err


def test_interrupt_exits_with_130(monkeypatch, capsys):
    """Test Ctrl-C handling"""
    def interrupted(job, out_dir=None):
        raise KeyboardInterrupt

    monkeypatch.setattr(cli_main, "run", interrupted)
    assert main(["pulse-preview", "--preset", "fig1"]) == 130


def test_unexpected_errors_exit_with_one(monkeypatch, capsys):
    """Test that unexpected exceptions are reported as internal errors"""
    def broken(job, out_dir=None):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli_main, "run", broken)
    assert main(["pulse-preview", "--preset", "fig1"]) == 1
    assert '"internal_error"' in capsys.readouterr().err


def test_error_handler_reports():
    """Test the JSON error report for known failures"""
    stream = io.StringIO()
    code = CLIErrorHandler.handle(ThresholdError("below", indices=[0, 3]), "larr spectrum", stream)
    report = json.loads(stream.getvalue())
    assert code == 2
    assert report["error"] == "threshold"
    assert report["details"]["indices"] == [0, 3]
    assert report["command"] == "larr spectrum"
    assert report["error_id"].startswith("err_")

    assert CLIErrorHandler.handle(ConfigError("bad", field="omega_grid"), "larr spectrum", io.StringIO()) == 1


@pytest.mark.slow
def test_validate_kernels_without_config(tmp_path, capsys):
    """Test the oracle report with default settings"""
    assert main(["validate-kernels", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "larr_validation.json").read_text())
    assert report["passed"]


@pytest.mark.slow
def test_cutoff_angle_map_edges_follow_saddle_cutoffs(tmp_path, capsys):
    """Test that each spectral plateau edge lies within 1.5 E0 of the saddle-law cutoff"""
    assert main(["angular-map", "--preset", "fig2c", "--out", str(tmp_path)]) == 0
    summary = _summary(capsys)["summary"]
    cutoffs, edges = summary["cutoffs"], summary["plateau_edges"]

    assert edges.keys() == cutoffs.keys()
    for theta, edge in edges.items():
        assert abs(edge - cutoffs[theta]) <= 1.5
    ordered = [edges[key] for key in sorted(edges, key=float)]
    assert ordered[0] > ordered[-1]
    assert ordered[0] - ordered[-1] == pytest.approx(summary["cutoff_span"], abs=1.5)


@pytest.mark.slow
def test_spectrogram_ridge_follows_saddle_law(tmp_path, capsys):
    """Test that the spectrogram maximum tracks the saddle law for 90% of the pulse interior"""
    assert main(["spectrogram", "--preset", "fig2", "--out", str(tmp_path)]) == 0
    summary = _summary(capsys)["summary"]
    assert summary["ridge_fraction_within_two_windows"] >= 0.9
    assert summary["cutoff_full"] == pytest.approx(679.76, abs=0.05)
