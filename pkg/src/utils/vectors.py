from typing import Tuple

import numpy as np

Vec3 = np.ndarray

UNIT_TOLERANCE = 1e-9


def direction_from_angles(theta: float, phi: float) -> Vec3:
    """Unit vector for polar angle theta and azimuth phi."""
    return np.array([
        np.sin(theta) * np.cos(phi),
        np.sin(theta) * np.sin(phi),
        np.cos(theta),
    ])


def orthonormal_frame(axis: Vec3) -> Tuple[Vec3, Vec3, Vec3]:
    """Right-handed frame (e1, e2, axis_hat) with axis_hat along the given axis."""
    a = axis / np.linalg.norm(axis)
    trial = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = trial - np.dot(trial, a) * a
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(a, e1)
    return e1, e2, a
