"""
Atomic units used throughout the simulation.

m_e = 1, e = -1, hbar = 1 and c = 1/alpha. All internal quantities are in
atomic units; conversion helpers exist only for configuration input and
reporting.
"""
from typing import Optional, Union

import numpy as np

from ..config.settings import settings

ArrayLike = Union[float, np.ndarray]

# SI values of the atomic units (CODATA 2018)
HARTREE_EV = 27.211386245988          # E0 in eV
HARTREE_J = 4.3597447222071e-18       # E0 in J
BOHR_M = 5.29177210903e-11            # a0 in m
TIME_S = 2.4188843265857e-17          # t0 in s
MOMENTUM_SI = 1.99285191410e-24       # p0 in kg m/s
FIELD_V_PER_M = 5.14220674763e11      # field0 in V/m
EPSILON0_SI = 8.8541878128e-12        # F/m
C_SI = 299792458.0                    # m/s
# I0 = eps0 c field0^2, reported in W/cm^2
INTENSITY_W_PER_CM2 = EPSILON0_SI * C_SI * FIELD_V_PER_M ** 2 / 1e4

ELECTRON_CHARGE = -1.0
ELECTRON_MASS = 1.0
NM_PER_BOHR = BOHR_M * 1e9


def energy_ev_to_au(energy_ev: ArrayLike) -> ArrayLike:
    return energy_ev / HARTREE_EV


def energy_au_to_ev(energy_au: ArrayLike) -> ArrayLike:
    return energy_au * HARTREE_EV


def momentum_from_energy(energy_au: float) -> float:
    """Nonrelativistic |p| = sqrt(2 m E) for a kinetic energy in E0."""
    if energy_au <= 0:
        raise ValueError(f"Kinetic energy must be positive, got {energy_au}")
    return float(np.sqrt(2.0 * ELECTRON_MASS * energy_au))


def photon_energy_from_wavelength(wavelength_nm: float, c_au: Optional[float] = None) -> float:
    """Photon energy omega = 2 pi c / lambda in E0."""
    c = settings.C_AU if c_au is None else c_au
    if wavelength_nm <= 0:
        raise ValueError(f"Wavelength must be positive, got {wavelength_nm}")
    return 2.0 * np.pi * c / (wavelength_nm / NM_PER_BOHR)


def wavelength_from_photon_energy(omega: float, c_au: Optional[float] = None) -> float:
    """Inverse of photon_energy_from_wavelength, result in nm."""
    c = settings.C_AU if c_au is None else c_au
    if omega <= 0:
        raise ValueError(f"Photon energy must be positive, got {omega}")
    return 2.0 * np.pi * c / omega * NM_PER_BOHR


def field_to_intensity(field_au: float) -> float:
    """Peak intensity in W/cm^2 of a linearly polarized field amplitude given in field0."""
    return float(field_au) ** 2 * INTENSITY_W_PER_CM2


def intensity_to_field(intensity_w_cm2: float) -> float:
    if intensity_w_cm2 < 0:
        raise ValueError(f"Intensity must be non-negative, got {intensity_w_cm2}")
    return float(np.sqrt(intensity_w_cm2 / INTENSITY_W_PER_CM2))
