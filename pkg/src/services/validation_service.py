import logging
from typing import Callable, List, Optional

import numpy as np

from ..models.job_models import ValidationSettings
from ..models.pulse_models import PulseShape, PulseSpec
from ..models.result_models import NordsieckArgs, OracleCheck
from ..models.scattering_models import IntegrationMode, IntegrationSettings, ScatteringConfig
from ..utils.exceptions import NumericalError
from ..utils.numerics import converged_difference, difference_step, relative_error, richardson_difference
from .amplitude_service import (
    AmplitudeEngine,
    ToyProblem,
    boca_florescu_limit,
    boca_florescu_oracle,
    convergence_slope,
)
from .nordsieck_service import kernel_B, kernel_C, nordsieck_f, quadrature_oracle_f
from .pulse_service import get_pulse

logger = logging.getLogger(__name__)

# Starting step of the converged kernel differences, before scaling to |(lambda, q)|
DIFFERENCE_STEP = 0.3
TIME_STEP = 1e-3
PULSE_CONSISTENCY_TOLERANCE = 1e-7
R1_TOLERANCE = 1e-5


def _random_unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def moderate_arguments(rng: np.random.Generator, count: int) -> List[NordsieckArgs]:
    """Arguments whose integrand the quadrature oracle can resolve"""
    samples = []
    for _ in range(count):
        lam = rng.uniform(0.8, 2.0)
        p = rng.uniform(0.3, 1.5) * _random_unit(rng)
        q = rng.uniform(0.1, 1.5) * _random_unit(rng)
        samples.append(NordsieckArgs(nu=rng.uniform(0.1, 2.0), lam=lam, q=q, p=p))
    return samples


def physical_arguments(rng: np.random.Generator, count: int) -> List[NordsieckArgs]:
    """Fast electrons on weakly charged ions, q close to p as along a LARR trajectory"""
    samples = []
    for _ in range(count):
        Z = int(rng.integers(1, 7))
        p = rng.uniform(5.0, 30.0) * _random_unit(rng)
        q = p + rng.uniform(0.0, 3.0) * _random_unit(rng)
        samples.append(NordsieckArgs(nu=Z / np.linalg.norm(p), lam=float(Z), q=q, p=p))
    return samples


def _f_of(args: NordsieckArgs) -> Callable[[np.ndarray], complex]:
    """f as a function of the 4-vector (lambda, q)"""
    def evaluate(x: np.ndarray) -> complex:
        return complex(nordsieck_f(NordsieckArgs(nu=args.nu, lam=float(x[0]), q=x[1:], p=args.p)))
    return evaluate


def _embed(v: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], v])


LAMBDA_AXIS = np.array([1.0, 0.0, 0.0, 0.0])


def validation_config() -> ScatteringConfig:
    """Small multi-cycle configuration with every correction switched on"""
    pulse = PulseSpec(shape=PulseShape.FIELD_SINE2, omega=0.5, amplitude=0.05, n_osc=2)
    return ScatteringConfig(Z=1, p_mag=1.5, theta_p=0.4 * np.pi, phi_p=np.pi, dp=1e-3, pulse=pulse, c_au=20.0)


def toy_problems() -> List[ToyProblem]:
    duration = 4.0 * np.pi
    s = lambda t: np.sin(np.pi * t / duration)
    c = lambda t: np.cos(np.pi * t / duration)
    return [
        ToyProblem(
            H=lambda t: 0.7 * s(t) ** 2,
            H_rate=lambda t: 0.7 * 2.0 * s(t) * c(t) * np.pi / duration,
            f=lambda t: 1.0 + 0.5 * s(t) ** 2,
            f_rate=lambda t: 0.5 * 2.0 * s(t) * c(t) * np.pi / duration,
            duration=duration,
        ),
        ToyProblem(
            H=lambda t: 0.3 * t - 0.2 * np.sin(t),
            H_rate=lambda t: 0.3 - 0.2 * np.cos(t),
            f=lambda t: (1.0 + 0.5j) * np.exp(0.3j * np.sin(t)),
            f_rate=lambda t: (1.0 + 0.5j) * 0.3j * np.cos(t) * np.exp(0.3j * np.sin(t)),
            duration=duration,
        ),
        ToyProblem(
            H=lambda t: -0.5 * np.sin(0.5 * t) ** 2,
            H_rate=lambda t: -0.25 * np.sin(t),
            f=lambda t: 2.0 - 1j * np.sin(0.5 * t) ** 2,
            f_rate=lambda t: -0.5j * np.sin(t),
            duration=duration,
        ),
    ]


class ValidationService:
    """
    Runs every oracle comparison behind the validate-kernels report
    """

    def __init__(self, validation: Optional[ValidationSettings] = None):
        self.validation = validation or ValidationSettings()

    def _rng(self, offset: int) -> np.random.Generator:
        return np.random.default_rng(self.validation.seed + offset)

    def check_f_quadrature(self) -> OracleCheck:
        count = self.validation.quadrature_samples
        errors = []
        for args in moderate_arguments(self._rng(0), count):
            reference = quadrature_oracle_f(args)
            errors.append(relative_error(complex(nordsieck_f(args)), reference))
        return OracleCheck(
            name="nordsieck_f vs 3D quadrature",
            max_error=max(errors) if errors else 0.0,
            tolerance=self.validation.f_tolerance,
            samples=count,
        )

    def _difference_check(self, name: str, exact: Callable[[NordsieckArgs, np.ndarray], complex], directions_of, tolerance: float) -> OracleCheck:
        count = self.validation.samples
        rng = self._rng(1)
        arguments = moderate_arguments(rng, count) + physical_arguments(rng, count)
        errors = []
        for args in arguments:
            eps_K = _random_unit(rng)
            directions = directions_of(eps_K, rng)
            x0 = np.concatenate([[args.lam], args.q])
            h = difference_step(x0, args.lam, DIFFERENCE_STEP)
            estimate = converged_difference(_f_of(args), x0, directions[0], h) * directions[1]
            errors.append(relative_error(exact(args, eps_K, *directions[2]), estimate))
        return OracleCheck(name=name, max_error=max(errors), tolerance=tolerance, samples=len(arguments))

    def check_B_difference(self) -> OracleCheck:
        def directions(eps_K, rng):
            return [LAMBDA_AXIS, _embed(eps_K)], 1j, ()

        return self._difference_check(
            "kernel_B vs nested finite differences",
            lambda args, eps_K: complex(kernel_B(args, eps_K)),
            directions,
            self.validation.B_tolerance,
        )

    def check_C_difference(self) -> OracleCheck:
        def directions(eps_K, rng):
            eE = rng.uniform(0.1, 2.0) * _random_unit(rng)
            n_prop = _random_unit(rng)
            return [LAMBDA_AXIS, _embed(eps_K), _embed(eE), _embed(n_prop)], -1j, (eE, n_prop)

        return self._difference_check(
            "kernel_C vs nested finite differences",
            lambda args, eps_K, eE, n_prop: complex(kernel_C(args, eps_K, eE, n_prop)),
            directions,
            self.validation.C_tolerance,
        )

    def check_B_time_derivative(self, config: Optional[ScatteringConfig] = None) -> OracleCheck:
        """dB/dt along a laser-driven q(t) against a time difference of B(q(t))"""
        config = config or validation_config()
        engine = AmplitudeEngine(config)
        omega_K = config.field_free_peak
        duration = config.pulse.duration
        times = np.linspace(0.05, 0.95, max(5, self.validation.samples // 5)) * duration
        kernels = engine.kernels_along(omega_K, times)

        def B_at(x: np.ndarray) -> complex:
            args = NordsieckArgs(nu=config.nu, lam=config.lam, q=engine.q_of_t(omega_K, float(x[0])), p=engine.p)
            return complex(kernel_B(args, engine.eps_K))

        scale = float(np.max(np.abs(kernels.dB_dt)))
        errors = [
            abs(kernels.dB_dt[i] - richardson_difference(B_at, np.array([t]), [np.array([1.0])], TIME_STEP * duration)) / scale
            for i, t in enumerate(times)
        ]
        return OracleCheck(
            name="dB/dt vs time differences of B(q(t))",
            max_error=float(max(errors)),
            tolerance=self.validation.dB_dt_tolerance,
            samples=len(times),
            note="errors relative to max |dB/dt| over the pulse",
        )

    def check_pulse_consistency(self) -> OracleCheck:
        """E = -dA/dt for every pulse family"""
        specs = [
            PulseSpec(shape=PulseShape.FIELD_SINE2, omega=0.7, amplitude=0.3, n_osc=3),
            PulseSpec(shape=PulseShape.CHIRP_F1, omega=0.7, amplitude=2.0, n_osc=3, eta0=-0.01, n_c=1, chi=0.4),
            PulseSpec(shape=PulseShape.CHIRP_F2, omega=0.7, amplitude=2.0, n_osc=3, eta0=0.005, n_c=2, chi=-0.3),
        ]
        worst = 0.0
        samples = 0
        for spec in specs:
            pulse = get_pulse(spec)
            t = np.linspace(0.02, 0.98, 97) * spec.duration
            h = 1e-3 / spec.omega
            derivative = (
                -pulse.potential_profile(t + 2 * h) + 8 * pulse.potential_profile(t + h)
                - 8 * pulse.potential_profile(t - h) + pulse.potential_profile(t - 2 * h)
            ) / (12 * h)
            field = pulse.field_profile(t)
            worst = max(worst, float(np.max(np.abs(field + derivative)) / np.max(np.abs(field))))
            samples += t.size
        return OracleCheck(
            name="pulse field vs -dA/dt",
            max_error=worst,
            tolerance=PULSE_CONSISTENCY_TOLERANCE,
            samples=samples,
        )

    def check_regularization(self) -> OracleCheck:
        """Regularized time integrals approach their off-resonance limit linearly in eps"""
        worst = 0.0
        slopes = []
        for problem, Q in zip(toy_problems(), (1.3, -0.7, 2.1)):
            eps = np.array([1e-2, 1e-3, 1e-4, 1e-5]) / problem.duration
            limit = boca_florescu_limit(Q, problem)
            errors = np.abs(boca_florescu_oracle(Q, problem, eps) - limit)
            slope = convergence_slope(eps, errors)
            slopes.append(slope)
            worst = max(worst, abs(slope - 1.0))
        return OracleCheck(
            name="regularized time integral convergence slope",
            max_error=worst,
            tolerance=self.validation.slope_tolerance,
            samples=len(slopes),
            note="slopes " + ", ".join(f"{s:.3f}" for s in slopes),
        )

    def check_R1_integrators(self, config: Optional[ScatteringConfig] = None) -> OracleCheck:
        """Fast and adaptive R1 against the independent quadrature"""
        config = config or validation_config()
        omegas = config.field_free_peak + np.array([-0.3, 0.0, 0.4])
        worst = 0.0
        for mode in (IntegrationMode.FAST, IntegrationMode.ADAPTIVE):
            engine = AmplitudeEngine(config, IntegrationSettings(mode=mode))
            n_steps = engine.required_fast_steps(omegas) if mode == IntegrationMode.FAST else None
            for omega in omegas:
                reference = engine.reference_R1_quadrature(float(omega))
                worst = max(worst, relative_error(engine.amplitude(float(omega), n_steps).R1, reference))
        return OracleCheck(
            name="R1 fast/adaptive vs reference quadrature",
            max_error=worst,
            tolerance=R1_TOLERANCE,
            samples=2 * omegas.size,
        )

    def run(self) -> List[OracleCheck]:
        checks = [
            self.check_pulse_consistency,
            self.check_B_difference,
            self.check_C_difference,
            self.check_B_time_derivative,
            self.check_regularization,
            self.check_R1_integrators,
        ]
        if self.validation.quadrature_samples > 0:
            checks.insert(1, self.check_f_quadrature)

        report = []
        for check in checks:
            try:
                result = check()
            except NumericalError as e:
                logger.error(f"Oracle {check.__name__} failed: {str(e)}")
                result = OracleCheck(name=check.__name__, max_error=float("inf"), tolerance=0.0, samples=0, note=str(e))
            status = "PASS" if result.passed else "FAIL"
            logger.info(f"[{status}] {result.name}: max error {result.max_error:.3e} (tolerance {result.tolerance:.1e})")
            report.append(result)
        return report


def validate_kernels(validation: Optional[ValidationSettings] = None) -> List[OracleCheck]:
    return ValidationService(validation).run()
