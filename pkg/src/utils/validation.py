import os
import re
from pathlib import Path
from typing import Sequence, Tuple, Union

import numpy as np

from .vectors import UNIT_TOLERANCE

_PI_MULTIPLE = re.compile(r'^([-+])?\s*(\d+\.?\d*(?:e[-+]?\d+)?|\.\d+)?\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?$')


def parse_angle(value: Union[str, float, int]) -> float:
    """
    Parse an angle in radians
    - Numbers pass through
    - Strings of the form "0.432pi", "-pi/2" or "pi" are read as multiples of pi
    """
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip().lower()
    match = _PI_MULTIPLE.match(text)
    if match:
        sign = -1.0 if match.group(1) == "-" else 1.0
        scale = sign * (float(match.group(2)) if match.group(2) else 1.0)
        divisor = float(match.group(3)) if match.group(3) else 1.0
        return scale * np.pi / divisor
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"Cannot interpret '{value}' as an angle")


def validate_unit_vector(components: Sequence[float], name: str) -> Tuple[bool, str]:
    """
    Validate that a direction vector is normalized
    - Must have three components
    - Norm must equal 1 within 1e-9
    """
    if len(components) != 3:
        return False, f"{name} must have exactly 3 components"

    length = float(np.linalg.norm(components))
    if abs(length - 1.0) > UNIT_TOLERANCE:
        return False, f"{name} must be a unit vector (norm is {length:.12g})"

    return True, f"Valid {name}"


def validate_orthogonal(a: Sequence[float], b: Sequence[float], names: Tuple[str, str]) -> Tuple[bool, str]:
    """
    Validate that two directions are orthogonal within 1e-9
    """
    product = float(np.dot(a, b))
    if abs(product) > UNIT_TOLERANCE:
        return False, f"{names[0]} and {names[1]} must be orthogonal (dot product {product:.3e})"

    return True, f"{names[0]} is orthogonal to {names[1]}"


def validate_grid_covers(grid: np.ndarray, lower: float, upper: float) -> Tuple[bool, str]:
    """
    Validate that a sorted grid spans [lower, upper]
    """
    if grid.size < 2:
        return False, "Grid must contain at least two points"

    if grid.min() > lower or grid.max() < upper:
        return False, f"Grid [{grid.min():.6g}, {grid.max():.6g}] does not cover [{lower:.6g}, {upper:.6g}]"

    return True, "Grid covers the requested interval"


def validate_monotonic(grid: np.ndarray, name: str) -> Tuple[bool, str]:
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        return False, f"{name} must be strictly increasing"

    return True, f"Valid {name}"


def validate_output_dir(path: Union[str, Path]) -> Tuple[bool, str]:
    """
    Validate that an output directory exists or can be created, and is writable
    """
    directory = Path(path)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        return False, f"Cannot create output directory {directory}: {str(e)}"

    if not os.access(directory, os.W_OK):
        return False, f"Output directory {directory} is not writable"

    return True, "Valid output directory"
