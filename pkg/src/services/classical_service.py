"""
Classical electron motion in a plane-wave pulse.

Nonrelativistic Newton-Lorentz dynamics with the field taken at the retarded
time t - n.r/c, compared against the first-order analytic momentum
pi = p - eA(t) + delta_pi(t). Atomic units with e = -1, m_e = 1.
"""
import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from ..config.settings import settings
from ..models.pulse_models import PulseSpec
from ..models.result_models import ScalingStudy, Trajectory
from ..utils.exceptions import ConfigError, StepSizeCollapseError
from .pulse_service import LaserPulse, get_pulse

logger = logging.getLogger(__name__)

STEPS_PER_CYCLE = 40


def _electron_field(pulse: LaserPulse, t) -> np.ndarray:
    """eE along the polarization (scalar profile)"""
    return -pulse.field_profile(t)


def lorentz_rhs(t: float, state: np.ndarray, pulse: LaserPulse, c_value: float) -> np.ndarray:
    """
    d(r, pi)/dt with the retarded field E(t - n.r/c) and B = n x E / c.
    c_value = inf gives the dipole force eE(t).
    """
    r, pi = state[:3], state[3:]
    inverse_c = 0.0 if np.isinf(c_value) else 1.0 / c_value
    retarded = t - float(pulse.n @ r) * inverse_c
    eE = float(_electron_field(pulse, retarded)) * pulse.eps
    # (e/c) pi x (n x E) = (1/c) [n (pi.eE) - eE (n.pi)]
    force = eE + inverse_c * (pulse.n * float(pi @ eE) - eE * float(pulse.n @ pi))
    return np.concatenate([pi, force])


def integrate_trajectory(
    p: Sequence[float],
    spec: PulseSpec,
    c_value: Optional[float] = None,
    r0: Optional[Sequence[float]] = None,
    t_span: Optional[Tuple[float, float]] = None,
    t_eval: Optional[np.ndarray] = None,
    rtol: float = 1e-11,
    atol: float = 1e-13,
    method: Optional[str] = None,
) -> Trajectory:
    """
    Integrate the Newton-Lorentz equation from a field-free start with kinetic momentum p
    """
    pulse = get_pulse(spec)
    c_value = settings.C_AU if c_value is None else c_value
    p = np.asarray(p, dtype=float)
    r0 = np.zeros(3) if r0 is None else np.asarray(r0, dtype=float)
    t_start, t_end = t_span or (0.0, 1.1 * pulse.duration)
    if t_eval is None:
        t_eval = np.linspace(t_start, t_end, 20 * STEPS_PER_CYCLE * spec.n_osc + 1)

    start_field = lorentz_rhs(t_start, np.concatenate([r0, p]), pulse, c_value)[3:]
    if np.linalg.norm(start_field) > 1e-12:
        raise ConfigError(
            f"Trajectory must start before the pulse reaches the electron (|F|={np.linalg.norm(start_field):.3e})",
            field="classical.t_start",
        )

    solution = solve_ivp(
        lorentz_rhs,
        (t_start, t_end),
        np.concatenate([r0, p]),
        method=method or settings.ODE_METHOD,
        t_eval=t_eval,
        args=(pulse, c_value),
        rtol=rtol,
        atol=atol,
        max_step=pulse.spec.period / STEPS_PER_CYCLE,
    )
    if solution.status != 0:
        logger.warning(f"Newton-Lorentz integration stopped at t={solution.t[-1] if solution.t.size else t_start:.6g}")
        raise StepSizeCollapseError(f"Trajectory integration failed: {solution.message}")

    logger.debug(f"Trajectory with c={c_value:.6g}: {solution.nfev} RHS evaluations")
    return Trajectory(t=solution.t, r=solution.y[:3].T, pi=solution.y[3:].T)


def dipole_trajectory(p: Sequence[float], spec: PulseSpec, t, r0: Optional[Sequence[float]] = None) -> np.ndarray:
    """r(t) = r0 + int_0^t (p - eA(t')) dt' with the pulse switched on at t = 0"""
    pulse = get_pulse(spec)
    p = np.asarray(p, dtype=float)
    r0 = np.zeros(3) if r0 is None else np.asarray(r0, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))

    # Only the drift along eps_pol needs quadrature; the rest is linear in t
    drift = solve_ivp(
        lambda tau, y: [float(pulse.electron_potential_profile(tau))],
        (0.0, pulse.duration),
        [0.0],
        method="DOP853",
        dense_output=True,
        rtol=1e-12,
        atol=1e-14,
        max_step=pulse.spec.period / STEPS_PER_CYCLE,
    )
    inside = np.clip(t, 0.0, pulse.duration)
    # eA is held at its end value after the pulse
    after = np.maximum(t - pulse.duration, 0.0) * float(pulse.electron_potential_profile(pulse.duration))
    excursion = np.where(t > 0.0, drift.sol(inside)[0] + after, 0.0)
    return r0 + np.multiply.outer(t, p) - np.multiply.outer(excursion, pulse.eps)


def analytic_momentum_correction(
    p: Sequence[float],
    spec: PulseSpec,
    t,
    r_of_t: Optional[np.ndarray] = None,
    c_value: Optional[float] = None,
) -> np.ndarray:
    """
    delta_pi(t) = -(n.r/c) eE(t) - (n/c) [p.eA(t)] + (n/2c) (eA(t))^2
    with r from the dipole trajectory unless given
    """
    pulse = get_pulse(spec)
    c_value = settings.C_AU if c_value is None else c_value
    p = np.asarray(p, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    r = dipole_trajectory(p, spec, t) if r_of_t is None else np.atleast_2d(r_of_t)

    ea = pulse.electron_potential_profile(t)
    ee = _electron_field(pulse, t)
    n_dot_r = r @ pulse.n
    transverse = np.multiply.outer(-n_dot_r * ee / c_value, pulse.eps)
    forward = np.multiply.outer((-ea * float(p @ pulse.eps) + 0.5 * ea ** 2) / c_value, pulse.n)
    return transverse + forward


def analytic_momentum(p: Sequence[float], spec: PulseSpec, t, r_of_t: Optional[np.ndarray] = None, c_value: Optional[float] = None) -> np.ndarray:
    """p - eA(t) + delta_pi(t)"""
    pulse = get_pulse(spec)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    dipole = np.asarray(p, dtype=float) - pulse.electron_potential(t)
    return dipole + analytic_momentum_correction(p, spec, t, r_of_t, c_value)


def kinetic_energy_terms(
    p: Sequence[float],
    spec: PulseSpec,
    t,
    r: Optional[np.ndarray] = None,
    c_value: Optional[float] = None,
) -> Dict[str, np.ndarray]:
    """
    Kinetic energy split into the dipole part [p - eA]^2/2, the recoil term
    -(n.p)/c [eA.p - (eA)^2/2] and the retardation term -(n.r/c) [(p - eA).eE]
    """
    pulse = get_pulse(spec)
    c_value = settings.C_AU if c_value is None else c_value
    p = np.asarray(p, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    r = dipole_trajectory(p, spec, t) if r is None else np.atleast_2d(r)

    eA = pulse.electron_potential(t)
    eE = -pulse.electric_field(t)
    kinetic = p - eA
    recoil = -float(pulse.n @ p) / c_value * (eA @ p - 0.5 * np.sum(eA * eA, axis=-1))
    retardation = -(r @ pulse.n) / c_value * np.sum(kinetic * eE, axis=-1)
    return {
        "dipole": 0.5 * np.sum(kinetic * kinetic, axis=-1),
        "recoil": recoil,
        "retardation": retardation,
    }


def kinetic_energy_nondipole(p: Sequence[float], spec: PulseSpec, t, r: Optional[np.ndarray] = None, c_value: Optional[float] = None) -> np.ndarray:
    terms = kinetic_energy_terms(p, spec, t, r, c_value)
    return terms["dipole"] + terms["recoil"] + terms["retardation"]


def momentum_residual(trajectory: Trajectory, p: Sequence[float], spec: PulseSpec, c_value: float) -> Tuple[np.ndarray, np.ndarray]:
    """Analytic momentum along a trajectory and |pi_numeric - pi_analytic| per sample"""
    analytic = analytic_momentum(p, spec, trajectory.t, trajectory.r, c_value)
    return analytic, np.linalg.norm(trajectory.pi - analytic, axis=-1)


def scaling_study(
    p: Sequence[float],
    spec: PulseSpec,
    c_values: Optional[Sequence[float]] = None,
    rtol: float = 1e-12,
    atol: float = 1e-14,
) -> ScalingStudy:
    """
    Maximum momentum residual versus c; the first-order analytic form leaves an O(1/c^2) error
    """
    if c_values is None:
        c_values = [settings.C_AU, 2.0 * settings.C_AU, 4.0 * settings.C_AU]
    c_array = np.asarray(c_values, dtype=float)
    if c_array.size < 2 or np.any(c_array <= 0) or np.any(np.isinf(c_array)):
        raise ConfigError("Scaling study needs at least two finite positive speeds of light", field="classical.c_values")

    residuals = []
    for c_value in c_array:
        trajectory = integrate_trajectory(p, spec, c_value, rtol=rtol, atol=atol)
        _, residual = momentum_residual(trajectory, p, spec, c_value)
        residuals.append(float(np.max(residual)))
        logger.info(f"Classical residual at c={c_value:.6g}: {residuals[-1]:.4e}")

    residuals = np.asarray(residuals)
    slope = float(np.polyfit(np.log(c_array), np.log(residuals), 1)[0])
    return ScalingStudy(c_values=c_array, residuals=residuals, slope=slope)
