import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config.settings import settings
from ..models.result_models import AmplitudeParts, AngularMapResult, SpectrumResult
from ..models.scattering_models import IntegrationMode, IntegrationSettings, ScatteringConfig
from ..utils.exceptions import ConfigError, NumericalError, ThresholdError
from ..utils.validation import validate_monotonic
from .amplitude_service import AmplitudeEngine, averaged_distributions, energy_prefactor

logger = logging.getLogger(__name__)

# Chunks per worker; more chunks balance uneven per-point cost
CHUNKS_PER_WORKER = 4


@dataclass(frozen=True)
class SweepTask:
    """Contiguous block of photon energies evaluated by one worker"""
    tag: int
    config: ScatteringConfig
    integration: IntegrationSettings
    indices: Tuple[int, ...]
    omegas: Tuple[float, ...]
    n_steps: Optional[int]


PointOutcome = Tuple[int, Optional[AmplitudeParts], Optional[str]]


def evaluate_task(task: SweepTask) -> List[PointOutcome]:
    """
    Worker entry point; must stay module-level so the process pool can pickle it
    """
    engine = AmplitudeEngine(task.config, task.integration)
    outcomes: List[PointOutcome] = []
    for index, omega in zip(task.indices, task.omegas):
        try:
            outcomes.append((index, engine.amplitude(omega, task.n_steps), None))
        except NumericalError as e:
            outcomes.append((index, None, f"{type(e).__name__}: {str(e)}"))
    return outcomes


class SweepService:
    """
    Farms independent photon-energy points to a worker pool and assembles results by index
    """

    def __init__(self, workers: Optional[int] = None):
        self.workers = workers

    def _worker_count(self, workers: Optional[int]) -> int:
        count = workers or self.workers or settings.DEFAULT_WORKERS
        return max(1, int(count))

    def _check_grid(self, config: ScatteringConfig, omega_grid: np.ndarray):
        is_valid, message = validate_monotonic(omega_grid, "omega_grid")
        if not is_valid:
            raise ConfigError(message, field="omega_grid")
        below = np.flatnonzero(omega_grid <= -config.binding_energy)
        if below.size:
            raise ThresholdError(
                f"{below.size} photon energies at or below |E_B| = {-config.binding_energy:g}",
                indices=below.tolist(),
            )

    def _build_tasks(
        self,
        tag: int,
        config: ScatteringConfig,
        omega_grid: np.ndarray,
        integration: IntegrationSettings,
        n_chunks: int,
    ) -> List[SweepTask]:
        n_steps = None
        if integration.mode == IntegrationMode.FAST:
            # One frozen grid for the whole sweep keeps results independent of chunking
            n_steps = AmplitudeEngine(config, integration).required_fast_steps(omega_grid)
            logger.info(f"Fast grid for sweep {tag}: {n_steps} steps over the pulse")

        tasks = []
        for block in np.array_split(np.arange(omega_grid.size), min(n_chunks, omega_grid.size)):
            if block.size == 0:
                continue
            tasks.append(SweepTask(
                tag=tag,
                config=config,
                integration=integration,
                indices=tuple(int(i) for i in block),
                omegas=tuple(float(omega_grid[i]) for i in block),
                n_steps=n_steps,
            ))
        return tasks

    def _execute(self, tasks: Sequence[SweepTask], sizes: Dict[int, int], workers: int) -> Dict[int, List[AmplitudeParts]]:
        results: Dict[int, List[Optional[AmplitudeParts]]] = {tag: [None] * size for tag, size in sizes.items()}
        failures: List[Tuple[int, int, str]] = []
        total = sum(sizes.values())
        completed = 0

        def collect(task: SweepTask, outcomes: List[PointOutcome]):
            nonlocal completed
            for index, parts, error in outcomes:
                completed += 1
                if error is not None:
                    logger.error(f"Grid point {index} (sweep {task.tag}) failed: {error}")
                    failures.append((task.tag, index, error))
                else:
                    results[task.tag][index] = parts
                    logger.debug(f"[{completed}/{total}] sweep {task.tag} point {index} done")

        if workers == 1 or len(tasks) == 1:
            for task in tasks:
                collect(task, evaluate_task(task))
        else:
            try:
                with ProcessPoolExecutor(max_workers=workers) as executor:
                    future_to_task = {executor.submit(evaluate_task, task): task for task in tasks}
                    for future in as_completed(future_to_task):
                        collect(future_to_task[future], future.result())
            except KeyboardInterrupt:
                logger.warning("Sweep interrupted; terminating workers")
                raise

        if failures:
            indices = sorted({index for _, index, _ in failures})
            raise NumericalError(
                f"{len(failures)} grid point(s) failed; first: {failures[0][2]}",
                indices=indices,
                details={"sweeps": sorted({tag for tag, _, _ in failures})},
            )
        return results

    def amplitudes(
        self,
        config: ScatteringConfig,
        omega_grid: Sequence[float],
        integration: Optional[IntegrationSettings] = None,
        workers: Optional[int] = None,
    ) -> List[AmplitudeParts]:
        grid = np.asarray(omega_grid, dtype=float)
        self._check_grid(config, grid)
        integration = integration or IntegrationSettings()
        n_workers = self._worker_count(workers)
        tasks = self._build_tasks(0, config, grid, integration, n_workers * CHUNKS_PER_WORKER)
        return self._execute(tasks, {0: grid.size}, n_workers)[0]

    def scan_spectrum(
        self,
        config: ScatteringConfig,
        omega_grid: Sequence[float],
        integration: Optional[IntegrationSettings] = None,
        workers: Optional[int] = None,
        keep_parts: bool = True,
    ) -> SpectrumResult:
        grid = np.asarray(omega_grid, dtype=float)
        logger.info(f"Spectrum scan: {grid.size} points, {config.describe()}")
        parts = self.amplitudes(config, grid, integration, workers)
        return assemble_spectrum(config, grid, parts, keep_parts)

    def angular_map(
        self,
        config: ScatteringConfig,
        theta_grid: Sequence[float],
        omega_grid: Sequence[float],
        integration: Optional[IntegrationSettings] = None,
        workers: Optional[int] = None,
    ) -> AngularMapResult:
        thetas = np.asarray(theta_grid, dtype=float)
        grid = np.asarray(omega_grid, dtype=float)
        if np.any(thetas <= 0.0) or np.any(thetas >= np.pi):
            raise ConfigError("Polar angles of an angular map must lie strictly inside (0, pi)", field="theta_grid")
        integration = integration or IntegrationSettings()
        n_workers = self._worker_count(workers)
        logger.info(f"Angular map: {thetas.size} angles x {grid.size} energies, flags={config.flags.model_dump()}")

        row_configs = [config.with_updates(theta_p=float(theta)) for theta in thetas]
        for row_config in row_configs:
            self._check_grid(row_config, grid)
        chunks_per_row = max(1, (n_workers * CHUNKS_PER_WORKER) // max(1, thetas.size))
        tasks = []
        for row, row_config in enumerate(row_configs):
            tasks.extend(self._build_tasks(row, row_config, grid, integration, chunks_per_row))

        results = self._execute(tasks, {row: grid.size for row in range(thetas.size)}, n_workers)
        matrix = np.vstack([
            assemble_spectrum(row_configs[row], grid, results[row], keep_parts=False).d3E
            for row in range(thetas.size)
        ])
        return AngularMapResult(theta_grid=thetas, omega_grid=grid, d3E=matrix)


def assemble_spectrum(config: ScatteringConfig, grid: np.ndarray, parts: List[AmplitudeParts], keep_parts: bool = True) -> SpectrumResult:
    avg_delta, avg_pv = averaged_distributions(config, grid)
    R0 = np.array([p.R0 for p in parts])
    R1 = np.array([p.R1 for p in parts])
    R2 = np.array([p.R2 for p in parts])
    averaged = R0 * avg_delta + R1 * avg_pv + R2
    d3E = energy_prefactor(config) * grid ** 4 * np.abs(averaged) ** 2
    return SpectrumResult(
        omega_grid=grid,
        d3E=d3E,
        averaged_R=averaged,
        parts=list(parts) if keep_parts else None,
        theta_p=config.theta_p,
    )


# Global instance of SweepService
sweep_service = SweepService()


def scan_spectrum(config: ScatteringConfig, omega_grid: Sequence[float], integration: Optional[IntegrationSettings] = None, workers: Optional[int] = None) -> SpectrumResult:
    return sweep_service.scan_spectrum(config, omega_grid, integration, workers)


def angular_map(config: ScatteringConfig, theta_grid: Sequence[float], omega_grid: Sequence[float], integration: Optional[IntegrationSettings] = None, workers: Optional[int] = None) -> AngularMapResult:
    return sweep_service.angular_map(config, theta_grid, omega_grid, integration, workers)
