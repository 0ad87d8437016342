import logging
from functools import lru_cache
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import j0, roots_legendre

from ..models.result_models import KernelValues, NordsieckArgs
from ..utils.exceptions import BranchCutError, NonConvergenceError, NonFiniteError
from ..utils.special_functions import hyp1f1_imaginary
from ..utils.vectors import orthonormal_frame

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * np.pi
BRANCH_TOLERANCE = 1e-14

# Derivatives act on the 4-vector x = (lambda, q_x, q_y, q_z)
LAMBDA_DIRECTION = np.array([1.0, 0.0, 0.0, 0.0])


def q_direction(v: np.ndarray) -> np.ndarray:
    """Embed a q-space direction (..., 3) into (lambda, q) space"""
    v = np.asarray(v, dtype=float)
    return np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)


@lru_cache(maxsize=None)
def _pairings(indices: Tuple[int, ...]) -> Tuple[Tuple[Tuple[int, ...], ...], ...]:
    """
    Set partitions of indices into blocks of size one or two.

    Both quadratic forms have constant Hessian 2*I, so larger blocks never
    contribute to Faa di Bruno's formula.
    """
    if not indices:
        return ((),)
    first, rest = indices[0], indices[1:]
    partitions = [((first,),) + tail for tail in _pairings(rest)]
    for position, partner in enumerate(rest):
        remaining = rest[:position] + rest[position + 1:]
        partitions.extend(((first, partner),) + tail for tail in _pairings(remaining))
    return tuple(partitions)


class _QuadraticPower:
    """Y^c for a quadratic form Y(x) with gradient g(x) and Hessian 2*I"""

    def __init__(self, value: np.ndarray, gradient: np.ndarray, exponent: complex, max_order: int):
        log_value = np.log(value.astype(complex))
        self.gradient = gradient
        self.powers: List[np.ndarray] = []
        falling = 1.0 + 0.0j
        for order in range(max_order + 1):
            self.powers.append(falling * np.exp((exponent - order) * log_value))
            falling *= exponent - order

    def derivative(self, subset: Tuple[int, ...], first_order: Dict[int, np.ndarray], second_order: Dict[Tuple[int, int], np.ndarray]) -> np.ndarray:
        total = 0.0
        for blocks in _pairings(subset):
            term = self.powers[len(blocks)]
            for block in blocks:
                term = term * (first_order[block[0]] if len(block) == 1 else second_order[block])
            total = total + term
        return total


class NordsieckKernel:
    """
    Closed-form Nordsieck integral f = 4 pi S^(-1+i nu) D^(-i nu) and its mixed derivatives,
    with S = lambda^2 + q^2 and D = S - 2 p.q - 2 i lambda |p| (so 1 + xi = D/S).
    """

    def __init__(self, args: NordsieckArgs, max_order: int = 4):
        self.args = args
        lam, q, p = args.lam, args.q, args.p
        k = args.p_mag
        self.S = lam ** 2 + np.sum(q * q, axis=-1)
        self.D = self.S - 2.0 * (q @ p) - 2j * lam * k
        self._check_branch()

        lam_column = np.full(q.shape[:-1] + (1,), lam)
        self.grad_S = 2.0 * np.concatenate([lam_column, q], axis=-1)
        self.grad_D = 2.0 * np.concatenate([lam_column - 1j * k, q - p], axis=-1)
        self.g = _QuadraticPower(self.S, self.grad_S, -1.0 + 1j * args.nu, max_order)
        self.h = _QuadraticPower(self.D, self.grad_D, -1j * args.nu, max_order)
        self.max_order = max_order

    def _check_branch(self):
        margin = branch_margin_from(self.D / self.S)
        if np.any(margin < BRANCH_TOLERANCE):
            count = int(np.sum(margin < BRANCH_TOLERANCE))
            logger.warning(f"1+xi within {BRANCH_TOLERANCE:g} of the branch cut at {count} sample(s)")
            raise BranchCutError("Nordsieck kernel argument 1+xi lies on the negative real axis")

    def value(self) -> np.ndarray:
        return FOUR_PI * self.g.powers[0] * self.h.powers[0]

    def derivative(self, directions: Sequence[np.ndarray]) -> np.ndarray:
        """Mixed directional derivative prod_j (d_j . grad_x) f via Leibniz over g(S) h(D)"""
        order = len(directions)
        if order > self.max_order:
            raise ValueError(f"Derivative order {order} exceeds kernel max_order {self.max_order}")
        if order == 0:
            return self.value()

        first_S = {i: np.sum(self.grad_S * d, axis=-1) for i, d in enumerate(directions)}
        first_D = {i: np.sum(self.grad_D * d, axis=-1) for i, d in enumerate(directions)}
        second = {
            (i, j): 2.0 * np.sum(directions[i] * directions[j], axis=-1)
            for i in range(order) for j in range(i + 1, order)
        }

        indices = tuple(range(order))
        total = 0.0
        for size in range(order + 1):
            for subset in combinations(indices, size):
                complement = tuple(i for i in indices if i not in subset)
                total = total + self.g.derivative(subset, first_S, second) * self.h.derivative(complement, first_D, second)
        return FOUR_PI * total


def _finite_or_raise(values: np.ndarray, name: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        logger.warning(f"Non-finite {name} kernel value encountered")
        raise NonFiniteError(f"Non-finite value in kernel {name}")
    return values


def branch_margin_from(ratio: np.ndarray) -> np.ndarray:
    """Relative distance of 1+xi from the negative real axis (1 when Re >= 0)"""
    modulus = np.abs(ratio)
    safe = np.where(modulus > 0, modulus, 1.0)
    margin = np.where(ratio.real < 0, np.abs(ratio.imag) / safe, 1.0)
    return np.where(modulus > 0, margin, 0.0)


def branch_margin(args: NordsieckArgs) -> np.ndarray:
    return branch_margin_from(1.0 + args.xi)


def nordsieck_f(args: NordsieckArgs) -> np.ndarray:
    return _finite_or_raise(NordsieckKernel(args, max_order=0).value(), "f")


def kernel_f_derivative(args: NordsieckArgs, lambda_order: int, q_directions: Sequence[np.ndarray]) -> np.ndarray:
    """d^k/d lambda^k prod_j (v_j . grad_q) f in closed form"""
    directions = [LAMBDA_DIRECTION] * lambda_order + [q_direction(v) for v in q_directions]
    kernel = NordsieckKernel(args, max_order=max(len(directions), 1))
    return _finite_or_raise(kernel.derivative(directions), "derivative")


def kernel_B(args: NordsieckArgs, eps_K: np.ndarray) -> np.ndarray:
    """B = i d/d lambda (eps_K . grad_q) f"""
    return 1j * kernel_f_derivative(args, 1, [eps_K])


def kernel_C(args: NordsieckArgs, eps_K: np.ndarray, eE: np.ndarray, n_prop: np.ndarray) -> np.ndarray:
    """C = -i d/d lambda (eps_K . grad_q)(eE . grad_q)(n . grad_q) f"""
    return -1j * kernel_f_derivative(args, 1, [eps_K, eE, n_prop])


def kernel_B_time_derivative(args: NordsieckArgs, eps_K: np.ndarray, qdot: np.ndarray) -> np.ndarray:
    """dB/dt = (grad_q B) . qdot"""
    return 1j * kernel_f_derivative(args, 1, [eps_K, qdot])


def gradient_B(args: NordsieckArgs, eps_K: np.ndarray) -> np.ndarray:
    kernel = NordsieckKernel(args, max_order=3)
    eps_direction = q_direction(eps_K)
    components = [
        1j * kernel.derivative([LAMBDA_DIRECTION, eps_direction, q_direction(axis)])
        for axis in np.eye(3)
    ]
    return _finite_or_raise(np.stack(components, axis=-1), "grad B")


def kernel_values(
    args: NordsieckArgs,
    eps_K: np.ndarray,
    qdot: np.ndarray,
    eE: Optional[np.ndarray] = None,
    n_prop: Optional[np.ndarray] = None,
) -> KernelValues:
    """
    f, B, dB/dt and (optionally) C from one shared power table.
    Arrays broadcast over the leading axes of args.q.
    """
    kernel = NordsieckKernel(args, max_order=4)
    eps_direction = q_direction(eps_K)
    f = kernel.value()
    B = 1j * kernel.derivative([LAMBDA_DIRECTION, eps_direction])
    dB_dt = 1j * kernel.derivative([LAMBDA_DIRECTION, eps_direction, q_direction(qdot)])
    if eE is not None and n_prop is not None:
        C = -1j * kernel.derivative([LAMBDA_DIRECTION, eps_direction, q_direction(eE), q_direction(n_prop)])
    else:
        C = np.zeros_like(B)
    for name, values in (("f", f), ("B", B), ("dB/dt", dB_dt), ("C", C)):
        _finite_or_raise(values, name)
    return KernelValues(f=f, B=B, C=C, dB_dt=dB_dt)


def trajectory_continuity(values: np.ndarray) -> float:
    """
    Largest jump between successive samples relative to the largest sample magnitude
    """
    values = np.asarray(values)
    scale = float(np.max(np.abs(values)))
    if values.size < 2 or scale == 0.0:
        return 0.0
    return float(np.max(np.abs(np.diff(values))) / scale)


# Quadrature oracle

RADIAL_CUTOFF = 40.0
PANEL_NODES = 16
MAX_OSCILLATIONS = 100.0


def _oracle_integral(args: NordsieckArgs, n_panels: int, n_mu: int) -> complex:
    lam, nu, k = args.lam, args.nu, args.p_mag
    _, _, p_hat = orthonormal_frame(args.p)
    q = args.q
    q_par = float(q @ p_hat)
    q_perp = float(np.linalg.norm(q - q_par * p_hat))
    r_max = RADIAL_CUTOFF / lam

    panel_x, panel_w = roots_legendre(PANEL_NODES)
    edges = np.linspace(0.0, r_max, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    r = (mid[:, None] + half[:, None] * panel_x[None, :]).ravel()
    r_weights = (half[:, None] * panel_w[None, :]).ravel()

    mu, mu_weights = roots_legendre(n_mu)

    rr = r[:, None]
    angular = (
        np.exp(1j * q_par * rr * mu[None, :])
        * j0(q_perp * rr * np.sqrt(1.0 - mu[None, :] ** 2))
        * hyp1f1_imaginary(1j * nu, 1.0, k * rr * (1.0 - mu[None, :]))
    )
    radial = angular @ mu_weights
    # The azimuthal integral is exact: integral of exp(i a cos phi) is 2 pi J0(a)
    return complex(2.0 * np.pi * np.sum(r_weights * r * np.exp(-lam * r) * radial))


def quadrature_oracle_f(args: NordsieckArgs, tol: float = 1e-6, max_oscillations: float = MAX_OSCILLATIONS) -> complex:
    """
    Direct evaluation of the Nordsieck integral
    integral d^3r exp(-lambda r)/r exp(i q.r) 1F1(i nu; 1; i(|p| r - p.r))
    by composite Gauss-Legendre in r, Gauss-Legendre in cos(theta) about p and the exact azimuthal Bessel integral.
    """
    if args.q.shape != (3,):
        raise ValueError("quadrature_oracle_f evaluates a single q vector")

    r_max = RADIAL_CUTOFF / args.lam
    q_mag = float(np.linalg.norm(args.q))
    oscillations = (q_mag + 2.0 * args.p_mag) * r_max / (2.0 * np.pi)
    if oscillations > max_oscillations:
        logger.warning(f"Quadrature oracle refused: {oscillations:.1f} oscillations over the radial cutoff")
        raise NonConvergenceError(
            f"Integrand oscillates {oscillations:.1f} times within r_max={r_max:.3g}; oracle cannot converge",
            details={"oscillations": oscillations, "limit": max_oscillations},
        )

    base_panels = max(16, int(np.ceil(2.0 * oscillations)))
    base_mu = max(48, int(np.ceil(1.5 * (q_mag + args.p_mag) * r_max)) + 32)

    coarse = _oracle_integral(args, base_panels, base_mu)
    fine = _oracle_integral(args, int(1.5 * base_panels), int(1.5 * base_mu))
    error = abs(fine - coarse)
    if error > tol * max(abs(fine), 1e-300):
        logger.warning(f"Quadrature oracle error estimate {error:.3e} exceeds tolerance {tol:.1e}")
        raise NonConvergenceError(
            f"Quadrature oracle did not reach relative tolerance {tol:g} (estimate {error:.3e})",
            details={"estimate": error, "value": [fine.real, fine.imag]},
        )
    return fine
