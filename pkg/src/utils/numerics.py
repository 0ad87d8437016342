from itertools import product
from typing import Callable, Sequence

import numpy as np


def mixed_central_difference(
    func: Callable[[np.ndarray], complex],
    x0: np.ndarray,
    directions: Sequence[np.ndarray],
    h: float,
) -> complex:
    """
    Nested central difference of prod_j (d_j . grad) func at x0.
    Uses the 2^m corners x0 + h sum_j s_j d_j with weights prod_j s_j / (2h)^m.
    """
    x0 = np.asarray(x0, dtype=float)
    directions = [np.asarray(d, dtype=float) for d in directions]
    total = 0j
    for signs in product((1.0, -1.0), repeat=len(directions)):
        point = x0 + h * sum(s * d for s, d in zip(signs, directions))
        total += np.prod(signs) * func(point)
    return total / (2.0 * h) ** len(directions)


def richardson_difference(
    func: Callable[[np.ndarray], complex],
    x0: np.ndarray,
    directions: Sequence[np.ndarray],
    h: float,
) -> complex:
    """One Richardson step on the O(h^2) nested stencil"""
    coarse = mixed_central_difference(func, x0, directions, h)
    fine = mixed_central_difference(func, x0, directions, 0.5 * h)
    return (4.0 * fine - coarse) / 3.0


def relative_error(value: complex, reference: complex, floor: float = 1e-300) -> float:
    return float(abs(value - reference) / max(abs(reference), floor))


def converged_difference(
    func: Callable[[np.ndarray], complex],
    x0: np.ndarray,
    directions: Sequence[np.ndarray],
    h: float,
    levels: int = 6,
) -> complex:
    """
    Richardson estimates at h, h/2, ..., h/2^(levels-1); returns the finer member of
    the closest consecutive pair, where truncation and roundoff balance.
    """
    estimates = [richardson_difference(func, x0, directions, h * 0.5 ** k) for k in range(levels)]
    gaps = [abs(b - a) for a, b in zip(estimates[:-1], estimates[1:])]
    return estimates[int(np.argmin(gaps)) + 1]


def difference_step(x0: np.ndarray, lam: float, base: float = 0.3) -> float:
    """Starting step for converged_difference, scaled to |x0| and kept inside lambda > 0"""
    return min(base * max(1.0, 0.1 * float(np.linalg.norm(x0))), 0.5 * lam)
