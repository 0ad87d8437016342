import json

import numpy as np
import pytest

from src import __version__
from src.models.job_models import JobConfig
from src.services.output_service import OutputService, config_hash, load_sidecar
from src.utils.exceptions import OutputError


@pytest.fixture
def job() -> JobConfig:
    return JobConfig.model_validate({
        "kind": "pulse-preview",
        "name": "preview",
        "pulse": {"shape": "FieldSine2", "omega": 1.14, "amplitude": 10.0, "n_osc": 3},
    })


def _data_rows(path):
    return [line for line in path.read_text().splitlines() if not line.startswith("#")]


def test_config_hash_ignores_workers_and_output(job):
    """Test that the hash changes with physics but not with the worker count or output location"""
    base = config_hash(job)
    assert base == config_hash(job.model_copy(update={"workers": 8}))
    moved = JobConfig.model_validate({**job.model_dump(mode="json"), "output": {"directory": "elsewhere"}})
    assert base == config_hash(moved)

    stronger = JobConfig.model_validate({
        **job.model_dump(mode="json"),
        "pulse": {"shape": "FieldSine2", "omega": 1.14, "amplitude": 11.0, "n_osc": 3},
    })
    assert base != config_hash(stronger)


def test_csv_has_metadata_units_and_header(tmp_path):
    """Test the layout of a column table"""
    service = OutputService(tmp_path)
    path = service.write_csv(
        "table.csv",
        {"omega_K": [1.0, 2.0], "d3E": [0.5, 0.25]},
        metadata={"config_hash": "abc"},
        units={"omega_K": "E0"},
    )
    lines = path.read_text().splitlines()
    assert lines[0] == "# config_hash: abc"
    assert lines[1] == "# units: omega_K=E0"
    assert lines[2] == "omega_K,d3E"
    assert np.allclose(np.loadtxt(lines[3:], delimiter=","), [[1.0, 0.5], [2.0, 0.25]])


def test_csv_round_trips_full_precision(tmp_path):
    """Test that values survive the text format bit for bit"""
    values = np.array([np.pi, 1.0 / 3.0, 375.4912345678901])
    path = OutputService(tmp_path).write_csv("values.csv", {"x": values})
    assert np.array_equal(np.loadtxt(_data_rows(path)[1:]), values)


def test_csv_columns_must_share_length(tmp_path):
    """Test that ragged columns are an output error"""
    with pytest.raises(OutputError):
        OutputService(tmp_path).write_csv("bad.csv", {"a": [1.0, 2.0], "b": [1.0]})


def test_matrix_layout(tmp_path):
    """Test that the first row holds the column axis and the first column the row axis"""
    matrix = np.arange(6.0).reshape(2, 3)
    path = OutputService(tmp_path).write_matrix("m.csv", [0.1, 0.2], [10.0, 20.0, 30.0], matrix)
    table = np.genfromtxt(_data_rows(path), delimiter=",")

    assert np.isnan(table[0, 0])
    assert np.allclose(table[0, 1:], [10.0, 20.0, 30.0])
    assert np.allclose(table[1:, 0], [0.1, 0.2])
    assert np.allclose(table[1:, 1:], matrix)

    with pytest.raises(OutputError):
        OutputService(tmp_path).write_matrix("m.csv", [0.1], [10.0, 20.0, 30.0], matrix)


def test_sidecar_contents(tmp_path, job):
    """Test that the sidecar records the hash, version, tolerances and artifacts"""
    service = OutputService(tmp_path)
    data = service.write_csv("preview_pulse.csv", {"t": [0.0, 1.0]})
    path = service.write_sidecar("preview_meta.json", job, 1.5, {"rtol": 1e-8}, [data], extra={"exit_code": 0})
    sidecar = load_sidecar(path)

    assert sidecar["config_hash"] == config_hash(job)
    assert sidecar["version"] == __version__
    assert sidecar["tolerances"] == {"rtol": 1e-8}
    assert sidecar["artifacts"] == ["preview_pulse.csv"]
    assert sidecar["exit_code"] == 0
    assert sidecar["job"]["name"] == "preview"


def test_load_sidecar_reports_bad_files(tmp_path):
    """Test that unreadable sidecars raise OutputError"""
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(OutputError):
        load_sidecar(broken)
    with pytest.raises(OutputError):
        load_sidecar(tmp_path / "missing.json")


def test_plot_script_references_inputs(tmp_path):
    """Test that a plot script points at its data and figure files"""
    service = OutputService(tmp_path)
    data = service.write_csv("run_spectrum.csv", {"omega_K": [1.0, 2.0], "d3E": [1.0, 2.0]})
    script = service.emit_plot_script("spectrum", {"spectrum": data}, "run_spectrum.py", "Spectrum")

    text = script.read_text()
    assert data.resolve().as_posix() in text
    assert (tmp_path / "run_spectrum.png").resolve().as_posix() in text
    assert "import matplotlib" in text


def test_plot_script_errors(tmp_path):
    """Test unknown plot kinds, missing inputs and absent files"""
    service = OutputService(tmp_path)
    with pytest.raises(OutputError):
        service.emit_plot_script("histogram", {}, "x.py")
    with pytest.raises(OutputError):
        service.emit_plot_script("spectrum", {}, "x.py")
    with pytest.raises(OutputError):
        service.emit_plot_script("spectrum", {"spectrum": "absent.csv"}, "x.py")


def test_write_json_is_sorted(tmp_path):
    """Test that JSON reports are written with sorted keys"""
    path = OutputService(tmp_path).write_json("report.json", {"b": 1, "a": [1, 2]})
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [1, 2], "b": 1}


def test_prepare_directory_rejects_files(tmp_path):
    """Test that an existing file cannot serve as the output directory"""
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    with pytest.raises(OutputError):
        OutputService().prepare_directory(blocker / "sub")
