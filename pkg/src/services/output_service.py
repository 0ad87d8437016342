import hashlib
import json
import logging
import time
from datetime import datetime, timezone
from pathlib import Path
from string import Template
from typing import Any, Dict, Mapping, Optional, Sequence, Union

import numpy as np

from .. import __version__
from ..models.job_models import JobConfig
from ..utils.exceptions import OutputError
from ..utils.validation import validate_output_dir

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
FLOAT_FORMAT = "%.17g"


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


HASH_EXCLUDED_FIELDS = {"workers", "output"}


def config_hash(job: JobConfig) -> str:
    """sha256 of the canonical JSON form of a job; worker count and output location do not change results"""
    data = job.model_dump(mode="json", exclude=HASH_EXCLUDED_FIELDS)
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


SPECTRUM_TEMPLATE = Template('''"""Energy distribution of the emitted photons (log scale)"""
import matplotlib.pyplot as plt
import numpy as np


def read_table(path):
    with open(path) as handle:
        rows = [line for line in handle if not line.startswith("#")]
    return np.loadtxt(rows[1:], delimiter=",", ndmin=2)


data = read_table("$spectrum")
fig, ax = plt.subplots(figsize=(7, 4))
ax.semilogy(data[:, 0], data[:, 1], color="goldenrod", lw=1.0)
ax.set_xlabel(r"$$\\omega_K$$ (E$$_0$$)")
ax.set_ylabel(r"$$d^3E/d\\omega_K d^2\\Omega_K$$ (a.u.)")
ax.set_title("$title")
fig.tight_layout()
fig.savefig("$figure", dpi=200)
''')

ANGULAR_MAP_TEMPLATE = Template('''"""Energy distribution versus photon energy and electron polar angle"""
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LogNorm

table = np.loadtxt("$matrix", delimiter=",", comments="#")
omega = table[0, 1:]
theta = table[1:, 0]
values = table[1:, 1:]
positive = values[values > 0]
fig, ax = plt.subplots(figsize=(7, 5))
mesh = ax.pcolormesh(omega, theta / np.pi, values, shading="auto",
                     norm=LogNorm(vmin=positive.max() * 1e-8, vmax=positive.max()))
fig.colorbar(mesh, ax=ax, label=r"$$d^3E/d\\omega_K d^2\\Omega_K$$ (a.u.)")
ax.set_xlabel(r"$$\\omega_K$$ (E$$_0$$)")
ax.set_ylabel(r"$$\\theta_p$$ ($$\\pi$$)")
ax.set_title("$title")
fig.tight_layout()
fig.savefig("$figure", dpi=200)
''')

SPECTROGRAM_TEMPLATE = Template('''"""Spectrogram of the spectral amplitude with the saddle-point emission law"""
import matplotlib.pyplot as plt
import numpy as np


def read_table(path):
    with open(path) as handle:
        rows = [line for line in handle if not line.startswith("#")]
    return np.loadtxt(rows[1:], delimiter=",", ndmin=2)


center = $center
duration = $duration
table = np.loadtxt("$matrix", delimiter=",", comments="#")
omega = table[0, 1:] + center
times = table[1:, 0]
values = table[1:, 1:]
saddle = read_table("$saddle")

fig, ax = plt.subplots(figsize=(7, 5))
ax.pcolormesh(omega, times / duration, values / values.max(), shading="auto", cmap="magma")
ax.plot(saddle[:, 2], saddle[:, 0] / duration, color="red", lw=1.0)
for boundary in (0.0, 1.0):
    ax.axhline(boundary, color="white", lw=0.8, ls="--")
ax.set_xlim(omega[0], omega[-1])
ax.set_xlabel(r"$$\\omega_K$$ (E$$_0$$)")
ax.set_ylabel(r"$$t / T_p$$")
ax.set_title("$title")
fig.tight_layout()
fig.savefig("$figure", dpi=200)
''')

PULSE_TEMPLATE = Template('''"""Electric field and electron vector potential along the polarization"""
import matplotlib.pyplot as plt
import numpy as np


def read_table(path):
    with open(path) as handle:
        rows = [line for line in handle if not line.startswith("#")]
    return np.loadtxt(rows[1:], delimiter=",", ndmin=2)


data = read_table("$pulse")
fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
top.plot(data[:, 0], data[:, 1], color="tab:blue")
top.set_ylabel(r"$$\\mathcal{E}(t)$$ (a.u.)")
bottom.plot(data[:, 0], data[:, 2], color="tab:red")
bottom.set_ylabel(r"$$eA(t)$$ (a.u.)")
bottom.set_xlabel(r"$$t$$ (t$$_0$$)")
top.set_title("$title")
fig.tight_layout()
fig.savefig("$figure", dpi=200)
''')

PLOT_TEMPLATES = {
    "spectrum": (SPECTRUM_TEMPLATE, ("spectrum",)),
    "angular-map": (ANGULAR_MAP_TEMPLATE, ("matrix",)),
    "spectrogram": (SPECTROGRAM_TEMPLATE, ("matrix", "saddle")),
    "pulse-preview": (PULSE_TEMPLATE, ("pulse",)),
}


class OutputService:
    """
    Writes every artifact of a job: CSV tables, matrix files, metadata sidecars and plot scripts
    """

    def __init__(self, directory: Optional[PathLike] = None):
        self.directory = Path(directory) if directory is not None else None

    def prepare_directory(self, directory: PathLike) -> Path:
        is_valid, message = validate_output_dir(directory)
        if not is_valid:
            raise OutputError(message, details={"path": str(directory)})
        self.directory = Path(directory)
        return self.directory

    def _resolve(self, name: PathLike) -> Path:
        path = Path(name)
        if not path.is_absolute() and self.directory is not None:
            path = self.directory / path
        return path

    @staticmethod
    def _metadata_lines(metadata: Mapping[str, Any], units: Mapping[str, str]) -> str:
        lines = [f"{key}: {value}" for key, value in metadata.items()]
        if units:
            lines.append("units: " + ", ".join(f"{column}={unit}" for column, unit in units.items()))
        return "\n".join(lines)

    def _save(self, path: Path, table: np.ndarray, metadata: Mapping[str, Any], units: Mapping[str, str], header_row: Optional[str]):
        comment_block = self._metadata_lines(metadata, units)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="\n") as handle:
                if comment_block:
                    handle.write("".join(f"# {line}\n" for line in comment_block.split("\n")))
                if header_row:
                    handle.write(header_row + "\n")
                np.savetxt(handle, table, fmt=FLOAT_FORMAT, delimiter=",")
        except OSError as e:
            logger.error(f"Failed writing {path}: {str(e)}")
            raise OutputError(f"Cannot write {path}: {str(e)}", details={"path": str(path)})
        logger.debug(f"Wrote {path} ({table.shape[0]} rows)")
        return path

    def write_csv(
        self,
        name: PathLike,
        columns: Mapping[str, Sequence[float]],
        metadata: Optional[Mapping[str, Any]] = None,
        units: Optional[Mapping[str, str]] = None,
    ) -> Path:
        """Column table with '#' metadata, a units legend and a header row"""
        arrays = [np.asarray(values, dtype=float).ravel() for values in columns.values()]
        if len({a.size for a in arrays}) > 1:
            raise OutputError(f"Columns of {name} differ in length", details={"columns": list(columns)})
        table = np.column_stack(arrays) if arrays else np.empty((0, 0))
        return self._save(self._resolve(name), table, metadata or {}, units or {}, ",".join(columns))

    def write_matrix(
        self,
        name: PathLike,
        row_axis: Sequence[float],
        col_axis: Sequence[float],
        matrix: np.ndarray,
        metadata: Optional[Mapping[str, Any]] = None,
        units: Optional[Mapping[str, str]] = None,
    ) -> Path:
        """Row-major matrix; first row holds the column axis, first column the row axis"""
        rows = np.asarray(row_axis, dtype=float)
        cols = np.asarray(col_axis, dtype=float)
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (rows.size, cols.size):
            raise OutputError(
                f"Matrix shape {matrix.shape} does not match axes ({rows.size}, {cols.size})",
                details={"path": str(name)},
            )
        table = np.empty((rows.size + 1, cols.size + 1))
        table[0, 0] = np.nan
        table[0, 1:] = cols
        table[1:, 0] = rows
        table[1:, 1:] = matrix
        return self._save(self._resolve(name), table, metadata or {}, units or {}, None)

    def write_json(self, name: PathLike, data: Any) -> Path:
        path = self._resolve(name)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as e:
            logger.error(f"Failed writing {path}: {str(e)}")
            raise OutputError(f"Cannot write {path}: {str(e)}", details={"path": str(path)})
        logger.debug(f"Wrote {path}")
        return path

    def write_sidecar(
        self,
        name: PathLike,
        job: JobConfig,
        wall_time: float,
        tolerances: Mapping[str, Any],
        artifacts: Sequence[PathLike] = (),
        extra: Optional[Mapping[str, Any]] = None,
    ) -> Path:
        path = self._resolve(name)
        sidecar = {
            "config_hash": config_hash(job),
            "version": __version__,
            "tolerances": dict(tolerances),
            "wall_time_s": wall_time,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "artifacts": [Path(a).name for a in artifacts],
            "job": job.model_dump(mode="json"),
        }
        if extra:
            sidecar.update(extra)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as e:
            raise OutputError(f"Cannot write sidecar {path}: {str(e)}", details={"path": str(path)})
        logger.info(f"Sidecar written to {path} (hash {sidecar['config_hash'][:12]})")
        return path

    def emit_plot_script(
        self,
        kind: str,
        inputs: Mapping[str, PathLike],
        name: PathLike,
        title: str = "",
        **values: Any,
    ) -> Path:
        """Self-contained matplotlib script reproducing a figure panel from written results"""
        if kind not in PLOT_TEMPLATES:
            raise OutputError(f"No plot template for '{kind}'", details={"available": sorted(PLOT_TEMPLATES)})
        template, required = PLOT_TEMPLATES[kind]

        resolved = {}
        for key in required:
            if key not in inputs:
                raise OutputError(f"Plot script for {kind} needs the '{key}' input", details={"inputs": sorted(inputs)})
            path = self._resolve(inputs[key])
            if not path.exists():
                raise OutputError(f"Plot input {path} does not exist", details={"path": str(path)})
            resolved[key] = path.resolve().as_posix()

        script_path = self._resolve(name)
        figure = script_path.with_suffix(".png").resolve().as_posix()
        try:
            text = template.substitute(title=title, figure=figure, **resolved, **{k: repr(v) for k, v in values.items()})
        except KeyError as e:
            raise OutputError(f"Plot script for {kind} is missing the value {str(e)}")
        try:
            script_path.write_text(text, encoding="utf-8")
        except OSError as e:
            raise OutputError(f"Cannot write plot script {script_path}: {str(e)}", details={"path": str(script_path)})
        logger.info(f"Plot script written to {script_path}")
        return script_path


def load_sidecar(path: PathLike) -> Dict[str, Any]:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise OutputError(f"Cannot read sidecar {path}: {str(e)}", details={"path": str(path)})


class Stopwatch:
    def __init__(self):
        self.start = time.perf_counter()

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start

