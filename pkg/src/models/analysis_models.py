from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .grid_models import GridSpec


class SpectrogramConfig(BaseModel):
    """
    Entity: Spectrogram Configuration
    Description: Truncation and Gaussian-window parameters of the short-time
    Fourier transform of a spectral amplitude. omega1 and omega2 are offsets
    from the field-free peak.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    xi_T: float = Field(0.1, gt=0, lt=0.5)   # truncation ramp, fraction of the window
    xi_W: float = Field(0.03, gt=0)          # Gaussian window width, fraction of the window
    omega1: float = -5.0                     # lower truncation bound (E0)
    omega2: float = 21.55                    # upper truncation bound (E0)
    t_grid: Optional[GridSpec] = None        # output times; default spans the pulse with margins
    omega_K_grid: Optional[GridSpec] = None  # output window centers; default spans [omega1, omega2]

    @model_validator(mode="after")
    def _check_bounds(self):
        if not self.omega1 < self.omega2:
            raise ValueError("omega1 must be smaller than omega2")
        return self

    @property
    def span(self) -> float:
        return self.omega2 - self.omega1

    @property
    def window_width(self) -> float:
        """Absolute Gaussian width xi_W (omega2 - omega1)"""
        return self.xi_W * self.span
