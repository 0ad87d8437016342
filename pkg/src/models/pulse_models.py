from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..utils.validation import parse_angle, validate_orthogonal, validate_unit_vector


class PulseShape(str, Enum):
    FIELD_SINE2 = "FieldSine2"  # sin^2 envelope applied to the electric field
    CHIRP_F1 = "ChirpF1"        # chirped sin^2 envelope applied to the vector potential
    CHIRP_F2 = "ChirpF2"        # (f1 + 1)^2 - 1, flat-top vector potential


class PulseSpec(BaseModel):
    """
    Entity: Pulse Specification
    Description: Linearly polarized plane-wave laser pulse of finite duration.
    For FieldSine2 the amplitude is the peak electric field strength; for the
    chirped shapes it is the vector potential amplitude |e| A0.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    shape: PulseShape = PulseShape.FIELD_SINE2
    omega: float = Field(..., gt=0)          # central photon energy (E0)
    amplitude: float = Field(..., ge=0)      # field strength or |e| A0 (atomic units)
    n_osc: int = Field(..., ge=1)            # number of carrier oscillations N
    eta0: float = 0.0                        # chirp parameter
    n_c: int = Field(0, ge=0)                # chirp envelope exponent
    chi: float = 0.0                         # carrier-envelope phase (rad)
    n_prop: Tuple[float, float, float] = (0.0, 0.0, 1.0)   # propagation direction
    eps_pol: Tuple[float, float, float] = (1.0, 0.0, 0.0)  # polarization direction

    @field_validator("chi", mode="before")
    @classmethod
    def _parse_phase(cls, value):
        return parse_angle(value)

    @model_validator(mode="after")
    def _check_geometry(self):
        for name, vector in (("n_prop", self.n_prop), ("eps_pol", self.eps_pol)):
            is_valid, message = validate_unit_vector(vector, name)
            if not is_valid:
                raise ValueError(message)

        is_valid, message = validate_orthogonal(self.n_prop, self.eps_pol, ("n_prop", "eps_pol"))
        if not is_valid:
            raise ValueError(message)

        if self.shape == PulseShape.FIELD_SINE2 and (self.eta0 != 0.0 or self.n_c != 0 or self.chi != 0.0):
            raise ValueError("FieldSine2 pulses carry no chirp or CEP; eta0, n_c and chi must be 0")
        return self

    @property
    def duration(self) -> float:
        """T_p = 2 pi N / omega"""
        return 2.0 * np.pi * self.n_osc / self.omega

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.omega

    @property
    def n_vec(self) -> np.ndarray:
        return np.asarray(self.n_prop, dtype=float)

    @property
    def eps_vec(self) -> np.ndarray:
        return np.asarray(self.eps_pol, dtype=float)

    @property
    def is_chirped_shape(self) -> bool:
        return self.shape in (PulseShape.CHIRP_F1, PulseShape.CHIRP_F2)
