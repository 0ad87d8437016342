"""
Saddle-point emission law and the time-frequency spectrogram of spectral amplitudes.
"""
import logging
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ..models.analysis_models import SpectrogramConfig
from ..models.result_models import SaddleCurve, SpectrogramResult, SpectrumResult
from ..models.scattering_models import ScatteringConfig
from ..utils.exceptions import ConfigError
from ..utils.validation import validate_grid_covers, validate_monotonic
from .pulse_service import get_pulse

logger = logging.getLogger(__name__)

SADDLE_SAMPLES_PER_CYCLE = 1000
DEFAULT_TIME_POINTS = 301
DEFAULT_OMEGA_POINTS = 400
# A spectrum has left its plateau once it drops this far below the plateau median
PLATEAU_EDGE_RATIO = 10.0


# Saddle-point law

def _electron_potential_inside(config: ScatteringConfig, t) -> np.ndarray:
    """eA along the polarization, exactly zero outside [0, T_p]"""
    pulse = get_pulse(config.pulse)
    t = np.asarray(t, dtype=float)
    ea = pulse.electron_potential_profile(t)
    return np.where((t < 0.0) | (t > pulse.duration), 0.0, ea)


def recoil_correction(config: ScatteringConfig, t) -> np.ndarray:
    """-(n.p)/c [eA.p - (eA)^2/2]"""
    pulse = get_pulse(config.pulse)
    p = config.p_vec
    ea = _electron_potential_inside(config, t)
    w = ea * float(p @ pulse.eps) - 0.5 * ea ** 2
    return -float(pulse.n @ p) / config.c_au * w


def saddle_energy(config: ScatteringConfig, t, include_recoil: bool = True) -> np.ndarray:
    """
    Photon energy emitted at time t by the stationary-phase condition:
    (p - eA(t))^2/2 - E_B, plus the recoil correction when requested
    """
    pulse = get_pulse(config.pulse)
    ea = _electron_potential_inside(config, t)
    kinetic = 0.5 * np.sum((config.p_vec - np.multiply.outer(ea, pulse.eps)) ** 2, axis=-1)
    energy = kinetic - config.binding_energy
    if include_recoil:
        energy = energy + recoil_correction(config, t)
    return energy


def saddle_curve(config: ScatteringConfig, t_grid) -> SaddleCurve:
    t = np.asarray(t_grid, dtype=float)
    return SaddleCurve(
        t_grid=t,
        omega_dipole=saddle_energy(config, t, include_recoil=False),
        omega_full=saddle_energy(config, t, include_recoil=True),
    )


def _dense_saddle(config: ScatteringConfig, include_recoil: bool, samples_per_cycle: int) -> Tuple[np.ndarray, np.ndarray]:
    t = get_pulse(config.pulse).time_grid(samples_per_cycle)
    return t, saddle_energy(config, t, include_recoil)


def cutoff(config: ScatteringConfig, include_recoil: bool = True, samples_per_cycle: int = SADDLE_SAMPLES_PER_CYCLE) -> float:
    """Highest photon energy the saddle law reaches during the pulse"""
    t, values = _dense_saddle(config, include_recoil, samples_per_cycle)
    i = int(np.argmax(values))
    lower, upper = t[max(i - 1, 0)], t[min(i + 1, t.size - 1)]
    best = float(values[i])
    if upper > lower:
        refined = minimize_scalar(
            lambda tau: -float(saddle_energy(config, tau, include_recoil)),
            bounds=(lower, upper),
            method="bounded",
            options={"xatol": 1e-12 * max(1.0, t[-1])},
        )
        best = max(best, -float(refined.fun))
    logger.debug(f"Cutoff {best:.8g} near t={t[i]:.6g} (recoil={include_recoil})")
    return best


def saddle_times(
    config: ScatteringConfig,
    omega_K: float,
    include_recoil: bool = True,
    samples_per_cycle: int = SADDLE_SAMPLES_PER_CYCLE,
) -> np.ndarray:
    """Sorted times in [0, T_p] at which the saddle law emits omega_K"""
    t, values = _dense_saddle(config, include_recoil, samples_per_cycle)
    g = values - omega_K

    def mismatch(tau: float) -> float:
        return float(saddle_energy(config, tau, include_recoil)) - omega_K

    roots = [float(t[i]) for i in np.flatnonzero(g == 0.0)]
    for i in np.flatnonzero(g[:-1] * g[1:] < 0.0):
        roots.append(brentq(mismatch, t[i], t[i + 1], xtol=1e-13))
    return np.array(sorted(roots))


def plateau_multiplicity(config: ScatteringConfig, omega_K: float, include_recoil: bool = True) -> int:
    """Number of interfering emission times; 2 in the highest plateau"""
    return int(saddle_times(config, omega_K, include_recoil).size)


def plateau_edge(omega_grid, d3E, plateau_stop: float, ratio: float = PLATEAU_EDGE_RATIO) -> float:
    """
    Highest photon energy whose distribution is still within `ratio` of the median
    taken over the grid points below plateau_stop
    """
    omega = np.asarray(omega_grid, dtype=float)
    values = np.asarray(d3E, dtype=float)
    if omega.shape != values.shape:
        raise ValueError(f"Spectrum shape {values.shape} does not match its grid {omega.shape}")
    plateau = values[omega <= plateau_stop]
    if plateau.size == 0:
        raise ConfigError(f"No grid points below plateau_stop={plateau_stop:g}", field="omega_grid")
    level = float(np.median(plateau)) / ratio
    return float(omega[np.flatnonzero(values >= level)[-1]])


# Spectrogram

def truncation_profile(x, dx: float) -> np.ndarray:
    """Five-branch sin^2 ramp: 0 outside (0, 1), 1 on [dx, 1 - dx]"""
    x = np.asarray(x, dtype=float)
    conditions = [
        x <= 0.0,
        x < dx,
        x <= 1.0 - dx,
        x < 1.0,
    ]
    choices = [
        np.zeros_like(x),
        np.sin(0.5 * np.pi * x / dx) ** 2,
        np.ones_like(x),
        np.sin(0.5 * np.pi * (1.0 - x) / dx) ** 2,
    ]
    return np.select(conditions, choices, default=0.0)


def gaussian_window(x, width: float) -> np.ndarray:
    """Unit-area Gaussian exp(-(x/width)^2) / (sqrt(pi) width)"""
    x = np.asarray(x, dtype=float)
    return np.exp(-(x / width) ** 2) / (np.sqrt(np.pi) * width)


def _check_signal_grid(omega_grid: np.ndarray, cfg: SpectrogramConfig):
    is_valid, message = validate_monotonic(omega_grid, "signal grid")
    if not is_valid:
        raise ConfigError(message, field="spectrogram")
    is_valid, message = validate_grid_covers(omega_grid, cfg.omega1, cfg.omega2)
    if not is_valid:
        raise ConfigError(message, field="spectrogram.omega1")


def truncate_signal(omega_grid, signal, cfg: SpectrogramConfig) -> np.ndarray:
    omega = np.asarray(omega_grid, dtype=float)
    _check_signal_grid(omega, cfg)
    x = (omega - cfg.omega1) / cfg.span
    return np.asarray(signal, dtype=complex) * truncation_profile(x, cfg.xi_T)


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    weights = np.zeros_like(x)
    steps = np.diff(x)
    weights[:-1] += 0.5 * steps
    weights[1:] += 0.5 * steps
    return weights


def default_time_grid(config: ScatteringConfig, points: int = DEFAULT_TIME_POINTS) -> np.ndarray:
    duration = config.pulse.duration
    return np.linspace(-0.1 * duration, 1.1 * duration, points)


def spectrogram(
    omega_grid,
    signal,
    cfg: SpectrogramConfig,
    t_grid: Optional[np.ndarray] = None,
    omega_K_grid: Optional[np.ndarray] = None,
    center: float = 0.0,
) -> SpectrogramResult:
    """
    S(t, omega_K) = |int d omega A_T(omega) W(omega - omega_K) e^(-i omega t)|^2
    by trapezoidal quadrature on the signal grid; rows follow t
    """
    omega = np.asarray(omega_grid, dtype=float)
    truncated = truncate_signal(omega, signal, cfg)
    if t_grid is None:
        if cfg.t_grid is None:
            raise ConfigError("Spectrogram needs a time grid", field="spectrogram.t_grid")
        t_grid = cfg.t_grid.to_array()
    if omega_K_grid is None:
        omega_K_grid = cfg.omega_K_grid.to_array() if cfg.omega_K_grid else np.linspace(cfg.omega1, cfg.omega2, DEFAULT_OMEGA_POINTS)
    t = np.asarray(t_grid, dtype=float)
    centers = np.asarray(omega_K_grid, dtype=float)

    inside = (omega >= cfg.omega1) & (omega <= cfg.omega2)
    nodes = omega[inside]
    weighted = _trapezoid_weights(nodes) * truncated[inside]
    window = gaussian_window(nodes[:, None] - centers[None, :], cfg.window_width)
    kernel = np.exp(-1j * np.outer(t, nodes))
    transform = kernel @ (weighted[:, None] * window)

    logger.info(f"Spectrogram: {t.size} times x {centers.size} centers from {nodes.size} signal samples")
    return SpectrogramResult(t_grid=t, omega_K_grid=centers, S=np.abs(transform) ** 2, center=center)


def spectrogram_signal(spectrum: SpectrumResult, config: ScatteringConfig) -> Tuple[np.ndarray, np.ndarray, float]:
    """<R>(omega) re-centered so the field-free peak sits at omega = 0"""
    center = config.field_free_peak
    return np.asarray(spectrum.omega_grid) - center, np.asarray(spectrum.averaged_R), center


def spectrogram_from_spectrum(
    spectrum: SpectrumResult,
    config: ScatteringConfig,
    cfg: SpectrogramConfig,
) -> SpectrogramResult:
    omega, signal, center = spectrogram_signal(spectrum, config)
    t = cfg.t_grid.to_array() if cfg.t_grid else default_time_grid(config)
    return spectrogram(omega, signal, cfg, t_grid=t, center=center)


def ridge(
    S: np.ndarray,
    t_grid,
    omega_grid,
    exclude_center: Optional[float] = None,
    exclude_width: float = 0.0,
) -> np.ndarray:
    """Per-time maximizing omega_K, optionally masking a vertical band around exclude_center"""
    S = np.asarray(S, dtype=float)
    omega = np.asarray(omega_grid, dtype=float)
    if S.shape != (len(t_grid), omega.size):
        raise ValueError(f"Spectrogram shape {S.shape} does not match grids ({len(t_grid)}, {omega.size})")
    masked = S.copy()
    if exclude_center is not None:
        band = np.abs(omega - exclude_center) <= exclude_width
        if np.all(band):
            raise ValueError("Excluded band covers the whole frequency grid")
        masked[:, band] = -np.inf
    return omega[np.argmax(masked, axis=1)]
