import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad, simpson, solve_ivp

from ..models.result_models import AmplitudeParts, KernelValues, NordsieckArgs
from ..models.scattering_models import IntegrationMode, IntegrationSettings, ScatteringConfig
from ..utils.exceptions import BranchCutError, NonFiniteError, StepSizeCollapseError, ThresholdError
from .nordsieck_service import kernel_B, kernel_values, trajectory_continuity
from .pulse_service import get_pulse

logger = logging.getLogger(__name__)

# Grid used to bound the integrand phase rate before building the fast grid
RATE_SAMPLES_PER_CYCLE = 2000
# Largest step-to-step jump of B along q(t), relative to max |B|, before a branch jump is assumed
CONTINUITY_LIMIT = 0.5


def energy_mismatch_Q(config: ScatteringConfig, omega_K):
    """Q = E_B + omega_K - p^2/2"""
    return config.binding_energy + omega_K - config.kinetic_energy


def effective_mass(config: ScatteringConfig) -> float:
    """m_e - n.p/c: the recoil factor read as a mass renormalization"""
    pulse = get_pulse(config.pulse)
    return 1.0 - float(pulse.n @ config.p_vec) / config.c_au


def averaged_distributions(config: ScatteringConfig, omega_K) -> Tuple[np.ndarray, np.ndarray]:
    """
    Lorentzian-smeared <delta(Q)> and <P(1/Q)> for the longitudinal momentum spread dp.
    Width Gamma = kappa0 dp with kappa0 = sqrt(2 (E_B + omega_K)).
    """
    omega = np.asarray(omega_K, dtype=float)
    excess = config.binding_energy + omega
    if np.any(excess <= 0):
        bad = np.atleast_1d(np.flatnonzero(np.atleast_1d(excess) <= 0)).tolist()
        raise ThresholdError(
            f"Photon energy must exceed |E_B| = {-config.binding_energy:g}",
            indices=bad,
        )
    width = np.sqrt(2.0 * excess) * config.dp
    Q = energy_mismatch_Q(config, omega)
    denominator = Q ** 2 + width ** 2
    return width / (np.pi * denominator), Q / denominator


def energy_prefactor(config: ScatteringConfig) -> float:
    """
    nu^4 e^(pi nu)/sinh(pi nu) * alpha |p|^2 / ((2 pi)^2 c^2), without the omega^4 factor
    """
    nu = config.nu
    # e^(x)/sinh(x) = 2/(1 - e^(-2x))
    coulomb = nu ** 4 * 2.0 / -np.expm1(-2.0 * np.pi * nu)
    return coulomb * config.alpha * config.p_mag ** 2 / ((2.0 * np.pi) ** 2 * config.c_au ** 2)


def combine_parts(config: ScatteringConfig, omega_K: float, parts: AmplitudeParts) -> complex:
    """<R> = R0 <delta(Q)> + R1 <P(1/Q)> + R2"""
    avg_delta, avg_pv = averaged_distributions(config, omega_K)
    return complex(parts.R0 * avg_delta + parts.R1 * avg_pv + parts.R2)


def distribution_from_parts(config: ScatteringConfig, omega_K: float, parts: AmplitudeParts) -> float:
    averaged = combine_parts(config, omega_K, parts)
    return float(energy_prefactor(config) * omega_K ** 4 * abs(averaged) ** 2)


class AmplitudeEngine:
    """
    Evaluates the partial LARR amplitudes R0, R1, R2 for one scattering configuration.

    The engine owns caches that depend only on the configuration (phase H(t) on the
    fast grid, photon-energy independent kernels), so one instance should serve a
    whole photon-energy sweep.
    """

    def __init__(self, config: ScatteringConfig, integration: Optional[IntegrationSettings] = None):
        self.config = config
        self.integration = integration or IntegrationSettings()
        self.pulse = get_pulse(config.pulse)
        self.p = config.p_vec
        self.n = self.pulse.n
        self.eps_pol = self.pulse.eps
        self.eps_K = config.eps_K_vec
        self.n_K = config.n_K_vec
        self.c = config.c_au
        self.flags = config.flags
        self.duration = self.pulse.duration
        self.p_along_pol = float(self.p @ self.eps_pol)
        self.recoil_factor = 1.0 + float(self.n @ self.p) / self.c if self.flags.recoil else 1.0

        self._phase_cache: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
        self._kernel_cache: Dict[Tuple[int, Optional[float]], KernelValues] = {}

    # Pulse-driven quantities

    def _laser_terms(self, t) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(eA, eE, w) along the polarization, with w = eA.p - (eA)^2/2"""
        ea = self.pulse.electron_potential_profile(t)
        ee = -self.pulse.field_profile(t)
        w = ea * self.p_along_pol - 0.5 * ea ** 2
        return ea, ee, w

    def photon_momentum(self, omega_K: float) -> np.ndarray:
        if not self.flags.photon_momentum:
            return np.zeros(3)
        return (omega_K / self.c) * self.n_K

    def q_of_t(self, omega_K: float, t) -> np.ndarray:
        ea, _, w = self._laser_terms(t)
        q = self.p - np.multiply.outer(ea, self.eps_pol) - self.photon_momentum(omega_K)
        if self.flags.retardation:
            q = q - np.multiply.outer(w / self.c, self.n)
        return q

    def q_dot(self, t) -> np.ndarray:
        ea, ee, _ = self._laser_terms(t)
        rate = np.multiply.outer(ee, self.eps_pol)
        if self.flags.retardation:
            rate = rate + np.multiply.outer(ee * (self.p_along_pol - ea) / self.c, self.n)
        return rate

    def H_rate(self, t) -> np.ndarray:
        _, _, w = self._laser_terms(t)
        return self.recoil_factor * w

    def kernels_along(self, omega_K: float, t) -> KernelValues:
        _, ee, _ = self._laser_terms(t)
        args = NordsieckArgs(nu=self.config.nu, lam=self.config.lam, q=self.q_of_t(omega_K, t), p=self.p)
        if self.flags.gauge:
            return kernel_values(args, self.eps_K, self.q_dot(t), np.multiply.outer(ee, self.eps_pol), self.n)
        return kernel_values(args, self.eps_K, self.q_dot(t))

    def check_continuity(self, omega_K: float, B: Optional[np.ndarray] = None) -> float:
        """
        Largest relative jump of B along q(t); B defaults to samples at points_per_cycle per cycle
        """
        if B is None:
            t = np.linspace(0.0, self.duration, self.integration.points_per_cycle * self.pulse.n_osc + 1)
            args = NordsieckArgs(nu=self.config.nu, lam=self.config.lam, q=self.q_of_t(omega_K, t), p=self.p)
            B = kernel_B(args, self.eps_K)
        jump = trajectory_continuity(B)
        if jump > CONTINUITY_LIMIT:
            raise BranchCutError(
                f"Kernel B jumps by {jump:.3g} of its maximum along q(t) at omega_K={omega_K:.6g}",
                details={"omega_K": omega_K, "jump": jump},
            )
        return jump

    # Field-free part

    def B_initial(self, omega_K: float) -> complex:
        """B at t = 0, where q(0) = p - K"""
        args = NordsieckArgs(nu=self.config.nu, lam=self.config.lam, q=self.q_of_t(omega_K, 0.0), p=self.p)
        return complex(kernel_B(args, self.eps_K))

    def R0(self, omega_K: float, H_Tp: float) -> complex:
        return 2.0 * np.pi * self.B_initial(omega_K) * np.exp(0.5j * H_Tp) * np.cos(0.5 * H_Tp)

    # Adaptive reference path

    def integrate_adaptive(self, omega_K: float) -> AmplitudeParts:
        Q = float(energy_mismatch_Q(self.config, omega_K))
        self.check_continuity(omega_K)
        include_gauge = self.flags.gauge

        def rhs(t, y):
            kernels = self.kernels_along(omega_K, t)
            rate = float(self.H_rate(t))
            phase = np.exp(1j * (Q * t + y[0].real))
            d_R1 = 1j * phase * (kernels.dB_dt + 1j * rate * kernels.B)
            d_R2 = -phase * kernels.C / self.c if include_gauge else 0.0
            return np.array([rate, d_R1, d_R2], dtype=complex)

        solution = solve_ivp(
            rhs,
            (0.0, self.duration),
            np.zeros(3, dtype=complex),
            method=self.integration.method,
            rtol=self.integration.rtol,
            atol=self.integration.atol,
        )
        if solution.status != 0:
            logger.warning(f"Amplitude ODE failed at omega_K={omega_K:.6g}: {solution.message}")
            raise StepSizeCollapseError(f"ODE integration failed at omega_K={omega_K:.6g}: {solution.message}")

        final = solution.y[:, -1]
        H_Tp = float(final[0].real)
        R1 = complex(final[1])
        R2 = complex(final[2]) if include_gauge else 0j
        logger.debug(f"Adaptive amplitude at omega_K={omega_K:.6g}: {solution.nfev} evaluations")
        return self._finish(omega_K, Q, H_Tp, R1, R2)

    # Fast frozen-grid path

    def required_fast_steps(self, omega_values: Iterable[float]) -> int:
        """
        Even step count giving at least points_per_cycle steps per laser cycle and
        a phase advance |Q + dH/dt| dt below max_phase_step for every omega_K
        """
        omegas = np.asarray(list(omega_values), dtype=float)
        Q = energy_mismatch_Q(self.config, omegas)
        rate_grid = self.pulse.time_grid(RATE_SAMPLES_PER_CYCLE)
        rate = self.H_rate(rate_grid)
        max_rate = max(np.max(np.abs(Q.min() + rate)), np.max(np.abs(Q.max() + rate)))

        by_cycle = self.integration.points_per_cycle * self.pulse.n_osc
        by_phase = int(np.ceil(self.duration * max_rate / self.integration.max_phase_step))
        steps = max(by_cycle, by_phase)
        return steps + (steps % 2)

    def fast_grid(self, n_steps: int) -> Tuple[np.ndarray, np.ndarray]:
        """Time grid and H(t) on it; H integrated once per grid size"""
        if n_steps not in self._phase_cache:
            t = np.linspace(0.0, self.duration, n_steps + 1)
            solution = solve_ivp(
                lambda tau, y: [float(self.H_rate(tau))],
                (0.0, self.duration),
                [0.0],
                method=self.integration.method,
                t_eval=t,
                rtol=min(self.integration.rtol, 1e-10),
                atol=self.integration.atol,
            )
            if solution.status != 0:
                raise StepSizeCollapseError(f"Phase integration failed: {solution.message}")
            self._phase_cache[n_steps] = (t, solution.y[0])
            logger.debug(f"Fast grid with {n_steps} steps, H(T_p)={solution.y[0][-1]:.6g}")
        return self._phase_cache[n_steps]

    def _grid_kernels(self, omega_K: float, n_steps: int) -> KernelValues:
        key = (n_steps, omega_K if self.flags.photon_momentum else None)
        if key not in self._kernel_cache:
            if self.flags.photon_momentum:
                # Only the energy-independent entries are worth keeping across a sweep
                self._kernel_cache = {k: v for k, v in self._kernel_cache.items() if k[1] is None}
            t, _ = self.fast_grid(n_steps)
            kernels = self.kernels_along(omega_K, t)
            self.check_continuity(omega_K, kernels.B)
            self._kernel_cache[key] = kernels
        return self._kernel_cache[key]

    def integrate_fast(self, omega_K: float, n_steps: Optional[int] = None) -> AmplitudeParts:
        if n_steps is None:
            n_steps = self.required_fast_steps([omega_K])
        Q = float(energy_mismatch_Q(self.config, omega_K))
        t, H = self.fast_grid(n_steps)
        kernels = self._grid_kernels(omega_K, n_steps)
        rate = self.H_rate(t)
        phase = np.exp(1j * (Q * t + H))

        R1 = complex(simpson(1j * phase * (kernels.dB_dt + 1j * rate * kernels.B), x=t))
        R2 = complex(simpson(-phase * kernels.C / self.c, x=t)) if self.flags.gauge else 0j
        return self._finish(omega_K, Q, float(H[-1]), R1, R2)

    def _finish(self, omega_K: float, Q: float, H_Tp: float, R1: complex, R2: complex) -> AmplitudeParts:
        parts = AmplitudeParts(R0=self.R0(omega_K, H_Tp), R1=R1, R2=R2, H_Tp=H_Tp, Q=Q)
        if not all(np.isfinite(v) for v in (parts.R0, parts.R1, parts.R2, parts.H_Tp)):
            raise NonFiniteError(f"Non-finite amplitude at omega_K={omega_K:.6g}")
        return parts

    def amplitude(self, omega_K: float, n_steps: Optional[int] = None) -> AmplitudeParts:
        if self.integration.mode == IntegrationMode.ADAPTIVE:
            return self.integrate_adaptive(omega_K)
        return self.integrate_fast(omega_K, n_steps)

    # Independent quadrature oracle for R1

    def reference_R1_quadrature(self, omega_K: float, epsrel: float = 1e-10) -> complex:
        """R1 by piecewise scipy quad with H(t) from a tightly converged dense ODE solution"""
        Q = float(energy_mismatch_Q(self.config, omega_K))
        phase_solution = solve_ivp(
            lambda tau, y: [float(self.H_rate(tau))],
            (0.0, self.duration),
            [0.0],
            method="DOP853",
            dense_output=True,
            rtol=1e-12,
            atol=1e-12,
        )
        H = phase_solution.sol

        def integrand(t: float) -> complex:
            kernels = self.kernels_along(omega_K, t)
            rate = float(self.H_rate(t))
            return complex(1j * np.exp(1j * (Q * t + H(t)[0])) * (kernels.dB_dt + 1j * rate * kernels.B))

        rate_grid = self.pulse.time_grid(RATE_SAMPLES_PER_CYCLE)
        max_rate = float(np.max(np.abs(Q + self.H_rate(rate_grid))))
        pieces = max(4 * self.pulse.n_osc, int(np.ceil(self.duration * max_rate / np.pi)))
        edges = np.linspace(0.0, self.duration, pieces + 1)

        total = 0j
        for a, b in zip(edges[:-1], edges[1:]):
            real, _ = quad(lambda t: integrand(t).real, a, b, epsabs=1e-14, epsrel=epsrel, limit=200)
            imag, _ = quad(lambda t: integrand(t).imag, a, b, epsabs=1e-14, epsrel=epsrel, limit=200)
            total += real + 1j * imag
        return total


def q_of_t(config: ScatteringConfig, omega_K: float, t) -> np.ndarray:
    return AmplitudeEngine(config).q_of_t(omega_K, t)


def H_rate(config: ScatteringConfig, t) -> np.ndarray:
    return AmplitudeEngine(config).H_rate(t)


def integrate_amplitude(config: ScatteringConfig, omega_K: float, integration: Optional[IntegrationSettings] = None) -> AmplitudeParts:
    return AmplitudeEngine(config, integration).amplitude(omega_K)


def averaged_R(config: ScatteringConfig, omega_K: float, integration: Optional[IntegrationSettings] = None) -> complex:
    return combine_parts(config, omega_K, integrate_amplitude(config, omega_K, integration))


def energy_distribution(config: ScatteringConfig, omega_K: float, integration: Optional[IntegrationSettings] = None) -> float:
    return distribution_from_parts(config, omega_K, integrate_amplitude(config, omega_K, integration))


def reference_R1_quadrature(config: ScatteringConfig, omega_K: float) -> complex:
    return AmplitudeEngine(config).reference_R1_quadrature(omega_K)


# Boca-Florescu regularization oracle

@dataclass(frozen=True)
class ToyProblem:
    """
    F(t) = exp(i H(t)) f(t) on [0, T_p] with H = 0 before the pulse, H = H(T_p) after it,
    and f = f(0) outside the pulse
    """
    H: Callable[[float], float]
    H_rate: Callable[[float], float]
    f: Callable[[float], complex]
    f_rate: Callable[[float], complex]
    duration: float

    def F(self, t: float) -> complex:
        return np.exp(1j * self.H(t)) * self.f(t)


def _complex_quad(func: Callable[[float], complex], a: float, b: float, pieces: int = 8) -> complex:
    edges = np.linspace(a, b, pieces + 1)
    total = 0j
    for lo, hi in zip(edges[:-1], edges[1:]):
        real, _ = quad(lambda t: func(t).real, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=400)
        imag, _ = quad(lambda t: func(t).imag, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=400)
        total += real + 1j * imag
    return total


def boca_florescu_oracle(Q: float, problem: ToyProblem, eps_list: Sequence[float]) -> np.ndarray:
    """
    Regularized integral I_eps = int exp(-eps|t|) exp(iQt) F(t) dt over the real line,
    with the constant tails summed analytically
    """
    if Q == 0:
        raise ValueError("The regularization oracle requires Q != 0")

    T = problem.duration
    F0 = problem.F(0.0)
    FT = np.exp(1j * problem.H(T)) * problem.f(0.0)
    values = []
    for eps in eps_list:
        before = F0 / (eps + 1j * Q)
        after = FT * np.exp((-eps + 1j * Q) * T) / (eps - 1j * Q)
        inside = _complex_quad(lambda t: np.exp((-eps + 1j * Q) * t) * problem.F(t), 0.0, T)
        values.append(before + inside + after)
    return np.array(values)


def boca_florescu_limit(Q: float, problem: ToyProblem) -> complex:
    """Off-resonance limit (i/Q) int_0^T exp(iQt + iH) [f' + i H' f] dt"""
    if Q == 0:
        raise ValueError("The principal-value limit requires Q != 0")

    def integrand(t: float) -> complex:
        return np.exp(1j * (Q * t + problem.H(t))) * (problem.f_rate(t) + 1j * problem.H_rate(t) * problem.f(t))

    return 1j / Q * _complex_quad(integrand, 0.0, problem.duration)


def convergence_slope(eps_values: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares log-log slope of error against eps"""
    slope, _ = np.polyfit(np.log(np.asarray(eps_values)), np.log(np.asarray(errors)), 1)
    return float(slope)
