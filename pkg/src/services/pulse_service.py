import logging
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from ..models.pulse_models import PulseShape, PulseSpec
from ..utils.exceptions import ConfigError

logger = logging.getLogger(__name__)

TimeLike = Union[float, np.ndarray]

PEAK_SAMPLES_PER_CYCLE = 10_000


def _sine2_shape(u: TimeLike, n_osc: int) -> TimeLike:
    """sin^2(u/2N) sin(u) in the carrier phase u = omega t"""
    return np.sin(u / (2.0 * n_osc)) ** 2 * np.sin(u)


def _sine2_antiderivative(u: TimeLike, n_osc: int) -> TimeLike:
    """
    Closed-form integral of sin^2(u/2N) sin(u) from 0 to u.

    Product-to-sum: sin^2(u/2N) sin u = sin(u)/2 - [sin((1+1/N)u) + sin((1-1/N)u)]/4,
    so the integral is a sum of three cosine terms.
    """
    plus = 1.0 + 1.0 / n_osc
    minus = 1.0 - 1.0 / n_osc
    result = 0.5 * (1.0 - np.cos(u)) - 0.25 * (1.0 - np.cos(plus * u)) / plus
    if minus != 0.0:
        result = result - 0.25 * (1.0 - np.cos(minus * u)) / minus
    return result


@lru_cache(maxsize=64)
def _sine2_peak(n_osc: int) -> float:
    """Peak of |sin^2(u/2N) sin u| over one pulse, dense sampling then golden-section refinement"""
    u = np.linspace(0.0, 2.0 * np.pi * n_osc, PEAK_SAMPLES_PER_CYCLE * n_osc + 1)
    values = np.abs(_sine2_shape(u, n_osc))
    index = int(np.argmax(values))
    du = u[1] - u[0]

    result = minimize_scalar(
        lambda x: -abs(_sine2_shape(x, n_osc)),
        bracket=(u[index] - du, u[index], u[index] + du),
        method="golden",
        tol=1e-12,
    )
    peak = max(float(-result.fun), float(values[index]))
    logger.debug(f"sin^2 envelope peak for N={n_osc}: {peak:.15g} at u={result.x:.12g}")
    return peak


def normalization_factor(spec: PulseSpec) -> float:
    """
    N0 such that the FieldSine2 field peaks exactly at the requested amplitude
    """
    if spec.shape != PulseShape.FIELD_SINE2:
        raise ConfigError(f"Normalization factor is defined only for FieldSine2 pulses, got {spec.shape.value}", field="pulse.shape")
    return 1.0 / _sine2_peak(spec.n_osc)


def flat_top_cep(n_osc: int, eta0: float) -> float:
    """
    CEP chi = -[pi N + eta0 (pi N)^2 + pi/2] reduced to (-pi, pi].
    With it eA peaks at T_p/2 for both chirped shapes.
    """
    value = -(np.pi * n_osc + eta0 * (np.pi * n_osc) ** 2 + 0.5 * np.pi)
    return _wrap_phase(value)


def reference_cep(n_osc: int) -> float:
    """CEP -(-1)^N pi/2 of the unchirped reference pulse"""
    return _wrap_phase(-((-1) ** n_osc) * 0.5 * np.pi)


def _wrap_phase(value: float) -> float:
    wrapped = value - 2.0 * np.pi * np.ceil((value - np.pi) / (2.0 * np.pi))
    if abs(wrapped) < 1e-12:
        return 0.0
    return float(wrapped)


class LaserPulse:
    """
    Time-domain evaluator for one PulseSpec.

    The field and potential are stored as scalar profiles along eps_pol:
    A(t) = a(t) eps_pol and E(t) = e(t) eps_pol with E = -dA/dt.
    """

    def __init__(self, spec: PulseSpec):
        self.spec = spec
        self.omega = spec.omega
        self.n_osc = spec.n_osc
        self.duration = spec.duration
        self.eps = spec.eps_vec
        self.n = spec.n_vec
        self._n0 = normalization_factor(spec) if spec.shape == PulseShape.FIELD_SINE2 else 1.0

    # Scalar profiles

    def field_profile(self, t: TimeLike) -> TimeLike:
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t <= self.duration)
        tc = np.clip(t, 0.0, self.duration)
        if self.spec.shape == PulseShape.FIELD_SINE2:
            values = self.spec.amplitude * self._n0 * _sine2_shape(self.omega * tc, self.n_osc)
        else:
            _, shape_rate = self._shape_and_rate(tc)
            values = -self.spec.amplitude * shape_rate
        return np.where(inside, values, 0.0)

    def potential_profile(self, t: TimeLike) -> TimeLike:
        """a(t) with A(t) = a(t) eps_pol; zero before the pulse and held at a(T_p) after it"""
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, 0.0, self.duration)
        if self.spec.shape == PulseShape.FIELD_SINE2:
            scale = self.spec.amplitude * self._n0 / self.omega
            return -scale * _sine2_antiderivative(self.omega * tc, self.n_osc)
        shape, _ = self._shape_and_rate(tc)
        return self.spec.amplitude * shape

    def electron_potential_profile(self, t: TimeLike) -> TimeLike:
        """eA along eps_pol, with e = -1"""
        return -self.potential_profile(t)

    # Vector forms

    def electric_field(self, t: TimeLike) -> np.ndarray:
        return np.multiply.outer(self.field_profile(t), self.eps)

    def vector_potential(self, t: TimeLike) -> np.ndarray:
        return np.multiply.outer(self.potential_profile(t), self.eps)

    def electron_potential(self, t: TimeLike) -> np.ndarray:
        return np.multiply.outer(self.electron_potential_profile(t), self.eps)

    # Chirped carrier

    def chirped_phase(self, t: TimeLike) -> TimeLike:
        phase, _ = self._phase_and_rate(np.asarray(t, dtype=float))
        return phase

    def instantaneous_frequency(self, t: TimeLike) -> TimeLike:
        _, rate = self._phase_and_rate(np.asarray(t, dtype=float))
        return rate

    def _phase_and_rate(self, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        spec = self.spec
        u = self.omega * t
        half = u / (2.0 * self.n_osc)
        s = np.sin(half)
        chirp_power = s ** (2 * spec.n_c)
        if spec.n_c > 0:
            chirp_power_rate = 2 * spec.n_c * s ** (2 * spec.n_c - 1) * np.cos(half) * self.omega / (2.0 * self.n_osc)
        else:
            chirp_power_rate = np.zeros_like(u)

        phase = u + spec.chi + spec.eta0 * u ** 2 * chirp_power
        rate = self.omega + spec.eta0 * (2.0 * u * self.omega * chirp_power + u ** 2 * chirp_power_rate)
        return phase, rate

    def _shape_and_rate(self, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """f_j(t) and df_j/dt for the chirped shapes"""
        u = self.omega * t
        envelope = np.sin(u / (2.0 * self.n_osc)) ** 2
        envelope_rate = self.omega / (2.0 * self.n_osc) * np.sin(u / self.n_osc)
        phase, phase_rate = self._phase_and_rate(t)

        f1 = envelope * np.sin(phase)
        f1_rate = envelope_rate * np.sin(phase) + envelope * np.cos(phase) * phase_rate
        if self.spec.shape == PulseShape.CHIRP_F1:
            return f1, f1_rate
        return f1 * (f1 + 2.0), 2.0 * (f1 + 1.0) * f1_rate

    # Summaries

    def time_grid(self, samples_per_cycle: int = 1000) -> np.ndarray:
        n_points = samples_per_cycle * self.n_osc + 1
        return np.linspace(0.0, self.duration, n_points)

    def ponderomotive_energy(self, samples_per_cycle: int = 1000) -> float:
        """Peak (eA)^2 / 4 over the pulse"""
        profile = self.electron_potential_profile(self.time_grid(samples_per_cycle))
        return float(np.max(profile ** 2) / 4.0)

    def peak_electron_potential(self, samples_per_cycle: int = 1000) -> float:
        profile = self.electron_potential_profile(self.time_grid(samples_per_cycle))
        return float(np.max(np.abs(profile)))


@lru_cache(maxsize=256)
def get_pulse(spec: PulseSpec) -> LaserPulse:
    return LaserPulse(spec)


def electric_field(spec: PulseSpec, t: TimeLike) -> np.ndarray:
    return get_pulse(spec).electric_field(t)


def vector_potential(spec: PulseSpec, t: TimeLike) -> np.ndarray:
    return get_pulse(spec).vector_potential(t)


def electron_potential(spec: PulseSpec, t: TimeLike) -> np.ndarray:
    return get_pulse(spec).electron_potential(t)


def chirped_phase(spec: PulseSpec, t: TimeLike) -> TimeLike:
    return get_pulse(spec).chirped_phase(t)


def instantaneous_frequency(spec: PulseSpec, t: TimeLike) -> TimeLike:
    return get_pulse(spec).instantaneous_frequency(t)


def ponderomotive_energy(spec: PulseSpec) -> float:
    return get_pulse(spec).ponderomotive_energy()


def sample_pulse(spec: PulseSpec, samples_per_cycle: int = 1000) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    (t, E(t), eA(t)) over [0, T_p] for pulse previews
    """
    pulse = get_pulse(spec)
    t = pulse.time_grid(samples_per_cycle)
    return t, pulse.electric_field(t), pulse.electron_potential(t)
