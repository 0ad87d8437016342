"""
Job orchestration: one JobConfig in, data files, a metadata sidecar and plot scripts out.
"""
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np

from .. import __version__
from ..config.settings import settings
from ..models.job_models import JobConfig, JobKind
from ..models.result_models import SpectrumResult
from ..models.scattering_models import ScatteringConfig
from ..services import analysis_service, classical_service
from ..services.output_service import OutputService, Stopwatch, config_hash, load_sidecar
from ..services.pulse_service import get_pulse, sample_pulse
from ..services.sweep_service import SweepService
from ..services.validation_service import ValidationService
from ..utils.units import energy_au_to_ev, field_to_intensity

logger = logging.getLogger(__name__)

# Field-free ridge masked before tracing the spectrogram maximum, in window widths
RIDGE_EXCLUDE_WIDTHS = 3.0
# Fraction of the pulse interior used when scoring the ridge against the saddle law
RIDGE_INTERIOR = (0.1, 0.9)
RECOIL_IDENTITY_TOLERANCE = 1e-12
# Plateau median is taken below cutoff - PLATEAU_MARGIN, in E0
PLATEAU_MARGIN = 5.0


@dataclass
class RunReport:
    """
    Entity: Run Report
    Description: Outcome of one job: exit status, files written and headline numbers
    """
    job: JobConfig
    directory: Path
    artifacts: List[Path] = field(default_factory=list)
    exit_code: int = 0
    summary: Dict[str, Any] = field(default_factory=dict)
    sidecar: Optional[Path] = None


class JobRunner:
    """
    Runs one job kind and records every artifact it writes
    """

    def __init__(self, job: JobConfig, out_dir: Optional[Union[str, Path]] = None):
        self.job = job
        self.output = OutputService()
        self.out_dir = Path(out_dir or job.output.directory or settings.OUTPUT_DIR)
        self.prefix = job.output.prefix or job.name
        self.sweep = SweepService(workers=job.workers)
        self.hash = config_hash(job)
        self.artifacts: List[Path] = []
        self.plots: List[Dict[str, Any]] = []
        self.summary: Dict[str, Any] = {}
        self.exit_code = 0

    # Bookkeeping

    def _name(self, suffix: str, extension: str = "csv") -> str:
        return f"{self.prefix}_{suffix}.{extension}"

    def _record(self, path: Path) -> Path:
        self.artifacts.append(path)
        return path

    def _metadata(self, **extra: Any) -> Dict[str, Any]:
        metadata = {
            "job": self.job.name,
            "kind": self.job.kind.value,
            "config_hash": self.hash,
            "version": __version__,
        }
        metadata.update(extra)
        return metadata

    def _plot(self, kind: str, inputs: Mapping[str, Path], suffix: str, title: str, **values: Any):
        entry = {
            "kind": kind,
            "inputs": {key: Path(path).name for key, path in inputs.items()},
            "name": self._name(suffix, "py"),
            "title": title,
            "values": values,
        }
        self.plots.append(entry)
        if self.job.output.plot_script:
            self._record(self.output.emit_plot_script(kind, entry["inputs"], entry["name"], title, **values))

    def _tolerances(self) -> Dict[str, Any]:
        kind = self.job.kind
        tolerances: Dict[str, Any] = {}
        if kind in (JobKind.SPECTRUM, JobKind.ANGULAR_MAP, JobKind.SPECTROGRAM):
            tolerances["integration"] = self.job.integration.model_dump(mode="json")
        if kind == JobKind.SPECTROGRAM:
            tolerances["spectrogram"] = self.job.spectrogram.model_dump(mode="json", exclude={"t_grid", "omega_K_grid"})
        if kind == JobKind.CLASSICAL_CHECK:
            tolerances["classical"] = self.job.classical.model_dump(mode="json")
            tolerances["recoil_identity"] = RECOIL_IDENTITY_TOLERANCE
        if kind == JobKind.VALIDATE_KERNELS:
            tolerances["validation"] = self.job.validation.model_dump(mode="json")
        return tolerances

    def _grid_sizes(self) -> str:
        sizes = []
        if self.job.omega_grid is not None:
            sizes.append(f"omega={len(self.job.omega_grid)}")
        if self.job.theta_grid is not None:
            sizes.append(f"theta={len(self.job.theta_grid)}")
        return ", ".join(sizes) or "none"

    # Entry point

    def run(self) -> RunReport:
        directory = self.output.prepare_directory(self.out_dir)
        workers = self.job.workers or settings.DEFAULT_WORKERS
        logger.info(
            f"Starting {self.job.kind.value} job '{self.job.name}' (hash {self.hash[:12]}), "
            f"grids: {self._grid_sizes()}, workers: {workers}"
        )
        stopwatch = Stopwatch()

        RUNNERS[self.job.kind](self)

        wall_time = stopwatch.elapsed
        sidecar = self.output.write_sidecar(
            self._name("meta", "json"),
            self.job,
            wall_time,
            self._tolerances(),
            self.artifacts,
            extra={"summary": self.summary, "exit_code": self.exit_code, "plots": self.plots},
        )
        logger.info(
            f"Finished '{self.job.name}' in {wall_time:.2f} s, exit code {self.exit_code}, "
            f"artifacts: {', '.join(path.name for path in self.artifacts)}"
        )
        return RunReport(
            job=self.job,
            directory=directory,
            artifacts=list(self.artifacts),
            exit_code=self.exit_code,
            summary=dict(self.summary),
            sidecar=sidecar,
        )

    # Shared writers

    def _write_spectrum(self, config: ScatteringConfig, spectrum: SpectrumResult) -> Path:
        cutoff_dipole = analysis_service.cutoff(config, include_recoil=False)
        cutoff_full = analysis_service.cutoff(config, include_recoil=True)
        peak_omega = float(spectrum.omega_grid[int(np.argmax(spectrum.d3E))])
        self.summary.update({
            "field_free_peak": config.field_free_peak,
            "spectrum_peak": peak_omega,
            "cutoff_dipole": cutoff_dipole,
            "cutoff_full": cutoff_full,
        })

        parts = spectrum.parts or []
        R0 = np.array([p.R0 for p in parts], dtype=complex)
        R1 = np.array([p.R1 for p in parts], dtype=complex)
        R2 = np.array([p.R2 for p in parts], dtype=complex)
        columns = {
            "omega_K": spectrum.omega_grid,
            "d3E": spectrum.d3E,
            "R_re": spectrum.averaged_R.real,
            "R_im": spectrum.averaged_R.imag,
            "R0_re": R0.real,
            "R0_im": R0.imag,
            "R1_re": R1.real,
            "R1_im": R1.imag,
            "R2_re": R2.real,
            "R2_im": R2.imag,
            "H_Tp": [p.H_Tp for p in parts],
        }
        metadata = self._metadata(
            scattering=config.describe(),
            field_free_peak=repr(config.field_free_peak),
            cutoff_dipole=repr(cutoff_dipole),
            cutoff_full=repr(cutoff_full),
        )
        units = {"omega_K": "E0", "d3E": "a.u.", "R": "a.u.", "H_Tp": "rad"}
        return self._record(self.output.write_csv(self._name("spectrum"), columns, metadata, units))

    def _write_cutoff_table(self, config: ScatteringConfig, thetas: List[float]) -> Path:
        dipole, full, multiplicity = [], [], []
        for theta in thetas:
            row_config = config.with_updates(theta_p=theta)
            dipole.append(analysis_service.cutoff(row_config, include_recoil=False))
            full.append(analysis_service.cutoff(row_config, include_recoil=True))
            # Just below the cutoff the high plateau has its two emission times
            multiplicity.append(analysis_service.plateau_multiplicity(row_config, full[-1] - 0.5))
        self.summary["cutoffs"] = {f"{theta:.12g}": value for theta, value in zip(thetas, full)}
        if len(thetas) > 1:
            self.summary["cutoff_span"] = float(max(full) - min(full))
        columns = {"theta_p": thetas, "cutoff_dipole": dipole, "cutoff_full": full, "multiplicity": multiplicity}
        units = {"theta_p": "rad", "cutoff_dipole": "E0", "cutoff_full": "E0"}
        return self._record(self.output.write_csv(self._name("cutoffs"), columns, self._metadata(), units))

    def _record_plateau_edges(self, config: ScatteringConfig, thetas, omega_grid: np.ndarray, rows: np.ndarray):
        edges = {}
        for theta, row in zip(thetas, rows):
            stop = analysis_service.cutoff(config.with_updates(theta_p=float(theta))) - PLATEAU_MARGIN
            if omega_grid[0] < stop:
                edges[f"{float(theta):.12g}"] = analysis_service.plateau_edge(omega_grid, row, stop)
        self.summary["plateau_edges"] = edges

    # Job kinds

    def run_spectrum(self):
        config = self.job.scattering
        spectrum = self.sweep.scan_spectrum(config, self.job.omega_grid.to_array(), self.job.integration)
        path = self._write_spectrum(config, spectrum)
        self._plot("spectrum", {"spectrum": path}, "spectrum", self.job.description or self.job.name)

    def run_angular_map(self):
        config = self.job.scattering
        result = self.sweep.angular_map(
            config,
            self.job.theta_grid.to_array(),
            self.job.omega_grid.to_array(),
            self.job.integration,
        )
        peak_row, peak_col = np.unravel_index(int(np.argmax(result.d3E)), result.d3E.shape)
        self.summary.update({
            "peak_theta_p": float(result.theta_grid[peak_row]),
            "peak_omega_K": float(result.omega_grid[peak_col]),
        })
        metadata = self._metadata(flags=config.flags.model_dump(), rows="theta_p", columns="omega_K")
        path = self._record(self.output.write_matrix(
            self._name("angular_map"),
            result.theta_grid,
            result.omega_grid,
            result.d3E,
            metadata,
            {"theta_p": "rad", "omega_K": "E0", "d3E": "a.u."},
        ))
        if self.job.saddle.theta_values:
            self._write_cutoff_table(config, self.job.saddle.theta_values)
            self._record_plateau_edges(config, result.theta_grid, result.omega_grid, result.d3E)
        self._plot("angular-map", {"matrix": path}, "angular_map", self.job.description or self.job.name)

    def run_spectrogram(self):
        config = self.job.scattering
        cfg = self.job.spectrogram
        spectrum = self.sweep.scan_spectrum(config, self.job.omega_grid.to_array(), self.job.integration)
        spectrum_path = self._write_spectrum(config, spectrum)

        result = analysis_service.spectrogram_from_spectrum(spectrum, config, cfg)
        matrix_path = self._record(self.output.write_matrix(
            self._name("spectrogram"),
            result.t_grid,
            result.omega_K_grid,
            result.S,
            self._metadata(
                center=repr(result.center),
                xi_T=cfg.xi_T,
                xi_W=cfg.xi_W,
                omega1=cfg.omega1,
                omega2=cfg.omega2,
                rows="t",
                columns="omega_K - center",
            ),
            {"t": "t0", "omega_K": "E0", "S": "a.u."},
        ))

        curve = analysis_service.saddle_curve(config, result.t_grid)
        ridge = result.center + analysis_service.ridge(
            result.S,
            result.t_grid,
            result.omega_K_grid,
            exclude_center=0.0,
            exclude_width=RIDGE_EXCLUDE_WIDTHS * cfg.window_width,
        )
        duration = config.pulse.duration
        interior = (result.t_grid >= RIDGE_INTERIOR[0] * duration) & (result.t_grid <= RIDGE_INTERIOR[1] * duration)
        if np.any(interior):
            deviation = np.abs(ridge[interior] - curve.omega_full[interior])
            self.summary["ridge_fraction_within_two_windows"] = float(np.mean(deviation < 2.0 * cfg.window_width))
        saddle_path = self._record(self.output.write_csv(
            self._name("saddle"),
            {"t": curve.t_grid, "omega_dipole": curve.omega_dipole, "omega_full": curve.omega_full, "ridge": ridge},
            self._metadata(duration=repr(duration)),
            {"t": "t0", "omega_dipole": "E0", "omega_full": "E0", "ridge": "E0"},
        ))

        title = self.job.description or self.job.name
        self._plot("spectrum", {"spectrum": spectrum_path}, "spectrum", title)
        self._plot(
            "spectrogram",
            {"matrix": matrix_path, "saddle": saddle_path},
            "spectrogram",
            title,
            center=float(result.center),
            duration=float(duration),
        )

    def run_saddle(self):
        config = self.job.scattering
        t = np.linspace(0.0, config.pulse.duration, self.job.saddle.t_points)
        curve = analysis_service.saddle_curve(config, t)
        self._record(self.output.write_csv(
            self._name("saddle"),
            {
                "t": curve.t_grid,
                "omega_dipole": curve.omega_dipole,
                "omega_full": curve.omega_full,
                "recoil": analysis_service.recoil_correction(config, t),
            },
            self._metadata(scattering=config.describe()),
            {"t": "t0", "omega_dipole": "E0", "omega_full": "E0", "recoil": "E0"},
        ))
        thetas = self.job.saddle.theta_values or [config.theta_p]
        self._write_cutoff_table(config, list(thetas))

    def run_classical_check(self):
        config = self.job.scattering
        classical = self.job.classical
        p, spec, c_value = config.p_vec, config.pulse, config.c_au

        trajectory = classical_service.integrate_trajectory(p, spec, c_value, rtol=classical.rtol, atol=classical.atol)
        analytic, residual = classical_service.momentum_residual(trajectory, p, spec, c_value)
        columns = {"t": trajectory.t}
        for axis, label in enumerate("xyz"):
            columns[f"r_{label}"] = trajectory.r[:, axis]
        for axis, label in enumerate("xyz"):
            columns[f"pi_{label}"] = trajectory.pi[:, axis]
        for axis, label in enumerate("xyz"):
            columns[f"pi_analytic_{label}"] = analytic[:, axis]
        columns["residual"] = residual
        self._record(self.output.write_csv(
            self._name("trajectory"),
            columns,
            self._metadata(c_au=repr(c_value)),
            {"t": "t0", "r": "a0", "pi": "p0", "residual": "p0"},
        ))

        study = classical_service.scaling_study(
            p,
            spec,
            [multiplier * c_value for multiplier in classical.c_multipliers],
            rtol=classical.rtol,
            atol=classical.atol,
        )
        self._record(self.output.write_csv(
            self._name("scaling"),
            {"c": study.c_values, "max_residual": study.residuals},
            self._metadata(slope=repr(study.slope)),
            {"c": "a.u.", "max_residual": "p0"},
        ))

        # Recoil term of the classical kinetic energy against the saddle-law correction
        t = get_pulse(spec).time_grid(self.job.preview_samples_per_cycle)
        terms = classical_service.kinetic_energy_terms(p, spec, t, r=np.zeros((t.size, 3)), c_value=c_value)
        saddle_term = analysis_service.recoil_correction(config, t)
        scale = max(1.0, float(np.max(np.abs(saddle_term))))
        identity_error = float(np.max(np.abs(terms["recoil"] - saddle_term))) / scale

        slope_ok = abs(study.slope + 2.0) <= classical.slope_tolerance
        identity_ok = identity_error <= RECOIL_IDENTITY_TOLERANCE
        self.summary.update({
            "scaling_slope": study.slope,
            "max_residuals": study.residuals.tolist(),
            "recoil_identity_error": identity_error,
            "passed": bool(slope_ok and identity_ok),
        })
        if not slope_ok:
            logger.error(f"Classical residual slope {study.slope:.3f} is outside -2 +/- {classical.slope_tolerance}")
            self.exit_code = 2
        if not identity_ok:
            logger.error(f"Recoil identity error {identity_error:.3e} exceeds {RECOIL_IDENTITY_TOLERANCE:.0e}")
            self.exit_code = 2

    def run_pulse_preview(self):
        spec = self.job.pulse_spec
        pulse = get_pulse(spec)
        t, field_vec, ea_vec = sample_pulse(spec, self.job.preview_samples_per_cycle)
        frequency = pulse.instantaneous_frequency(t) if spec.is_chirped_shape else np.full_like(t, spec.omega)
        peak_field = float(np.max(np.abs(field_vec @ pulse.eps)))
        self.summary.update({
            "duration": spec.duration,
            "ponderomotive_energy": pulse.ponderomotive_energy(),
            "peak_eA": pulse.peak_electron_potential(),
            "peak_field": peak_field,
            "peak_intensity_w_cm2": field_to_intensity(peak_field),
            "photon_energy_ev": float(energy_au_to_ev(spec.omega)),
        })
        path = self._record(self.output.write_csv(
            self._name("pulse"),
            {"t": t, "field": field_vec @ pulse.eps, "eA": ea_vec @ pulse.eps, "frequency": frequency},
            self._metadata(
                shape=spec.shape.value,
                duration=repr(spec.duration),
                ponderomotive_energy=repr(self.summary["ponderomotive_energy"]),
            ),
            {"t": "t0", "field": "field0", "eA": "p0", "frequency": "E0"},
        ))
        self._plot("pulse-preview", {"pulse": path}, "pulse", self.job.description or self.job.name)

    def run_validate_kernels(self):
        checks = ValidationService(self.job.validation).run()
        failed = [check.name for check in checks if not check.passed]
        report = {
            "checks": [asdict(check) for check in checks],
            "passed": not failed,
            "failed": failed,
        }
        self._record(self.output.write_json(self._name("validation", "json"), report))
        self.summary.update({"passed": not failed, "failed": failed})
        if failed:
            logger.error(f"{len(failed)} kernel check(s) failed: {', '.join(failed)}")
            self.exit_code = 2


RUNNERS = {
    JobKind.SPECTRUM: JobRunner.run_spectrum,
    JobKind.ANGULAR_MAP: JobRunner.run_angular_map,
    JobKind.SPECTROGRAM: JobRunner.run_spectrogram,
    JobKind.SADDLE: JobRunner.run_saddle,
    JobKind.CLASSICAL_CHECK: JobRunner.run_classical_check,
    JobKind.PULSE_PREVIEW: JobRunner.run_pulse_preview,
    JobKind.VALIDATE_KERNELS: JobRunner.run_validate_kernels,
}


def run(job: JobConfig, out_dir: Optional[Union[str, Path]] = None) -> RunReport:
    return JobRunner(job, out_dir).run()


def emit_plot_from_sidecar(sidecar_path: Union[str, Path]) -> List[Path]:
    """Re-emit every plot script a finished job recorded in its sidecar"""
    sidecar_path = Path(sidecar_path)
    sidecar = load_sidecar(sidecar_path)
    output = OutputService(sidecar_path.parent)
    scripts = []
    for entry in sidecar.get("plots", []):
        scripts.append(output.emit_plot_script(
            entry["kind"],
            entry["inputs"],
            entry["name"],
            entry.get("title", ""),
            **entry.get("values", {}),
        ))
    return scripts
