import numpy as np
import pytest

from src.utils.numerics import converged_difference, difference_step, relative_error, richardson_difference

K = np.array([0.7, -1.3, 0.4])


def _plane_wave(x):
    return complex(np.exp(1j * K @ x) / (1.0 + 0.1 * x @ x))


def test_converged_difference_beats_roundoff_limited_step():
    """Test that the step search avoids the roundoff floor of a tiny fixed step"""
    x0 = np.array([0.2, 0.5, -0.1])
    directions = [np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])]
    reference = converged_difference(_plane_wave, x0, directions, 0.3, levels=10)

    converged = converged_difference(_plane_wave, x0, directions, 0.3)
    tiny = richardson_difference(_plane_wave, x0, directions, 1e-6)
    assert relative_error(converged, reference) < 1e-7
    assert relative_error(tiny, reference) > relative_error(converged, reference)


def test_converged_difference_exact_for_plane_wave():
    """Test a mixed second derivative of exp(i k.x) against -k_i k_j exp(i k.x)"""
    x0 = np.array([0.3, -0.2, 0.8])
    directions = [np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0])]
    estimate = converged_difference(lambda x: complex(np.exp(1j * K @ x)), x0, directions, 0.3)
    exact = -K[0] * K[2] * np.exp(1j * K @ x0)
    assert relative_error(estimate, exact) < 1e-7


def test_difference_step_scales_and_stays_inside_lambda():
    assert difference_step(np.array([1.0, 0.5, 0.0, 0.0]), lam=1.0) == pytest.approx(0.3)
    assert difference_step(np.array([4.0, 30.0, 0.0, 0.0]), lam=4.0) == pytest.approx(0.3 * 0.1 * np.hypot(4.0, 30.0))
    assert difference_step(np.array([0.2, 50.0, 0.0, 0.0]), lam=0.2) == pytest.approx(0.1)
