from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..config.settings import settings
from ..utils.units import energy_ev_to_au, momentum_from_energy
from ..utils.validation import parse_angle, validate_orthogonal, validate_unit_vector
from ..utils.vectors import direction_from_angles
from .pulse_models import PulseSpec


class NondipoleFlags(BaseModel):
    """
    Entity: Nondipole Flags
    Description: Independent toggles for each leading-order 1/c correction
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    recoil: bool = True            # (1 + n.p/c) factor in the Volkov phase
    retardation: bool = True       # n/c [eA.p - (eA)^2/2] shift inside q(t)
    gauge: bool = True             # C(t)/c gauge-transformation term
    photon_momentum: bool = True   # -K shift inside q(t)

    @classmethod
    def dipole(cls) -> "NondipoleFlags":
        return cls(recoil=False, retardation=False, gauge=False, photon_momentum=False)

    @classmethod
    def only(cls, *names: str) -> "NondipoleFlags":
        unknown = set(names) - set(cls.model_fields)
        if unknown:
            raise ValueError(f"Unknown nondipole flags: {sorted(unknown)}")
        return cls(**{name: name in names for name in cls.model_fields})

    @property
    def any_enabled(self) -> bool:
        return self.recoil or self.retardation or self.gauge or self.photon_momentum


class ScatteringConfig(BaseModel):
    """
    Entity: Scattering Configuration
    Description: Incoming electron wave packet, target ion, emitted-photon
    geometry and the assisting pulse for one LARR calculation
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    Z: int = Field(..., ge=1)                    # ion charge number
    p_mag: float = Field(..., gt=0)              # central momentum |p| (p0)
    theta_p: float = 0.5 * np.pi                 # electron polar angle (rad)
    phi_p: float = np.pi                         # electron azimuth (rad)
    dp: float = Field(..., gt=0)                 # longitudinal momentum HWHM (p0)
    pulse: PulseSpec
    n_K: Tuple[float, float, float] = (0.0, 0.0, 1.0)    # photon emission direction
    eps_K: Tuple[float, float, float] = (1.0, 0.0, 0.0)  # photon polarization
    flags: NondipoleFlags = Field(default_factory=NondipoleFlags)
    c_au: float = Field(default_factory=lambda: settings.C_AU, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _energy_to_momentum(cls, data: Any) -> Any:
        """Accept electron_energy_ev in place of p_mag"""
        if isinstance(data, dict) and "electron_energy_ev" in data:
            data = dict(data)
            energy_ev = data.pop("electron_energy_ev")
            if "p_mag" in data:
                raise ValueError("Give either p_mag or electron_energy_ev, not both")
            if energy_ev is None or float(energy_ev) <= 0:
                raise ValueError("electron_energy_ev must be positive")
            data["p_mag"] = momentum_from_energy(energy_ev_to_au(float(energy_ev)))
        return data

    @field_validator("theta_p", "phi_p", mode="before")
    @classmethod
    def _parse_angles(cls, value):
        return parse_angle(value)

    @model_validator(mode="after")
    def _check_photon_geometry(self):
        for name, vector in (("n_K", self.n_K), ("eps_K", self.eps_K)):
            is_valid, message = validate_unit_vector(vector, name)
            if not is_valid:
                raise ValueError(message)

        is_valid, message = validate_orthogonal(self.n_K, self.eps_K, ("n_K", "eps_K"))
        if not is_valid:
            raise ValueError(message)
        return self

    def with_updates(self, **changes: Any) -> "ScatteringConfig":
        """Re-validated copy with some fields replaced"""
        data: Dict[str, Any] = self.model_dump()
        data.update(changes)
        return ScatteringConfig.model_validate(data)

    @property
    def p_vec(self) -> np.ndarray:
        return self.p_mag * direction_from_angles(self.theta_p, self.phi_p)

    @property
    def binding_energy(self) -> float:
        """E_B = -Z^2/2 for the hydrogen-like ground state"""
        return -0.5 * self.Z ** 2

    @property
    def nu(self) -> float:
        """Sommerfeld parameter Z/|p|"""
        return self.Z / self.p_mag

    @property
    def lam(self) -> float:
        return float(self.Z)

    @property
    def kinetic_energy(self) -> float:
        return 0.5 * self.p_mag ** 2

    @property
    def field_free_peak(self) -> float:
        """Photon energy at which Q = 0"""
        return self.kinetic_energy - self.binding_energy

    @property
    def alpha(self) -> float:
        return 1.0 / self.c_au

    @property
    def n_K_vec(self) -> np.ndarray:
        return np.asarray(self.n_K, dtype=float)

    @property
    def eps_K_vec(self) -> np.ndarray:
        return np.asarray(self.eps_K, dtype=float)

    def describe(self, omega_K: Optional[float] = None) -> str:
        text = f"Z={self.Z}, |p|={self.p_mag:.6g}, theta_p={self.theta_p / np.pi:.4g}pi, flags={self.flags.model_dump()}"
        if omega_K is not None:
            text += f", omega_K={omega_K:.6g}"
        return text


class IntegrationMode(str, Enum):
    ADAPTIVE = "adaptive"  # solve_ivp on the coupled (H, R1, R2) system
    FAST = "fast"          # frozen time grid shared by all photon energies, Simpson quadrature


class IntegrationSettings(BaseModel):
    """
    Entity: Integration Settings
    Description: Tolerances and time-grid controls for the amplitude integrals
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: IntegrationMode = IntegrationMode.FAST
    rtol: float = Field(default_factory=lambda: settings.ODE_RTOL, gt=0)
    atol: float = Field(default_factory=lambda: settings.ODE_ATOL, gt=0)
    method: str = Field(default_factory=lambda: settings.ODE_METHOD)
    points_per_cycle: int = Field(default_factory=lambda: settings.FAST_POINTS_PER_CYCLE, ge=10)
    max_phase_step: float = Field(default_factory=lambda: settings.FAST_MAX_PHASE_STEP, gt=0)

    @field_validator("method")
    @classmethod
    def _known_method(cls, value: str) -> str:
        if value not in ("RK45", "RK23", "DOP853", "Radau", "BDF", "LSODA"):
            raise ValueError(f"Unknown ODE method '{value}'")
        return value
