"""
Confluent hypergeometric function on the imaginary axis.

The Nordsieck quadrature oracle needs 1F1(i nu; 1; i x) for real x >= 0 on
large vectorized grids. Power series below SERIES_LIMIT, Poincare asymptotic
expansion above it, truncated at the smallest term.
"""
import numpy as np
from scipy.special import gamma, rgamma

SERIES_LIMIT = 25.0
SERIES_TERMS = 140
ASYMPTOTIC_TERMS = 30


def hyp1f1_imaginary(a: complex, b: float, x: np.ndarray) -> np.ndarray:
    """
    1F1(a; b; i x) for real x >= 0, vectorized over x
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("hyp1f1_imaginary expects non-negative arguments")

    result = np.empty(x.shape, dtype=complex)
    small = x <= SERIES_LIMIT
    if np.any(small):
        result[small] = _series(a, b, 1j * x[small])
    if np.any(~small):
        result[~small] = _asymptotic(a, b, x[~small])
    return result


def _series(a: complex, b: float, z: np.ndarray) -> np.ndarray:
    term = np.ones_like(z)
    total = np.ones_like(z)
    for n in range(SERIES_TERMS):
        term = term * (a + n) / ((b + n) * (n + 1)) * z
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def _asymptotic(a: complex, b: float, x: np.ndarray) -> np.ndarray:
    """
    Large-|z| expansion for z = i x:
    1F1 = Gamma(b) [ (-z)^(-a)/Gamma(b-a) S1 + e^z z^(a-b)/Gamma(a) S2 ]
    """
    z = 1j * x
    log_x = np.log(x)
    log_z = log_x + 0.5j * np.pi
    log_minus_z = log_x - 0.5j * np.pi

    recessive = _truncated_sum(lambda s: (a + s) * (a - b + 1 + s), -z)
    dominant = _truncated_sum(lambda s: (b - a + s) * (1 - a + s), z)

    first = rgamma(b - a) * np.exp(-a * log_minus_z) * recessive
    second = rgamma(a) * np.exp(z + (a - b) * log_z) * dominant
    return gamma(b) * (first + second)


def _truncated_sum(numerator, w: np.ndarray) -> np.ndarray:
    """sum_s prod_{k<s} numerator(k) / (s! w^s), stopped per element once terms grow"""
    term = np.ones_like(w)
    total = np.ones_like(w)
    active = np.ones(w.shape, dtype=bool)
    for s in range(ASYMPTOTIC_TERMS):
        new_term = term * numerator(s) / ((s + 1) * w)
        active &= np.abs(new_term) < np.abs(term)
        total = np.where(active, total + new_term, total)
        term = new_term
        if not np.any(active):
            break
    return total
