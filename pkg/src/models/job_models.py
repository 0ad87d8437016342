from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..utils.validation import parse_angle
from .analysis_models import SpectrogramConfig
from .grid_models import GridSpec
from .pulse_models import PulseSpec
from .scattering_models import IntegrationSettings, ScatteringConfig


class JobKind(str, Enum):
    SPECTRUM = "spectrum"
    ANGULAR_MAP = "angular-map"
    SPECTROGRAM = "spectrogram"
    SADDLE = "saddle"
    CLASSICAL_CHECK = "classical-check"
    PULSE_PREVIEW = "pulse-preview"
    VALIDATE_KERNELS = "validate-kernels"


class SaddleSettings(BaseModel):
    """
    Entity: Saddle Settings
    Description: Sampling of the saddle-point law and the polar angles whose cutoffs are tabulated
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    t_points: int = Field(2001, ge=2)
    theta_values: Optional[List[float]] = None

    @field_validator("theta_values", mode="before")
    @classmethod
    def _parse_angles(cls, value):
        if value is None:
            return None
        return [parse_angle(item) for item in value]


class ClassicalSettings(BaseModel):
    """
    Entity: Classical Check Settings
    Description: Speed-of-light multipliers and tolerances for the Newton-Lorentz scaling study
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    c_multipliers: List[float] = Field(default_factory=lambda: [1.0, 2.0, 4.0])
    rtol: float = Field(1e-12, gt=0)
    atol: float = Field(1e-14, gt=0)
    slope_tolerance: float = Field(0.2, gt=0)

    @field_validator("c_multipliers")
    @classmethod
    def _positive(cls, value: List[float]) -> List[float]:
        if len(value) < 2 or any(m <= 0 for m in value):
            raise ValueError("c_multipliers needs at least two positive entries")
        return value


class ValidationSettings(BaseModel):
    """
    Entity: Validation Settings
    Description: Sample counts, seed and tolerances of the kernel oracle report
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    samples: int = Field(50, ge=1)
    quadrature_samples: int = Field(50, ge=0)
    seed: int = 20240917
    f_tolerance: float = Field(1e-4, gt=0)
    B_tolerance: float = Field(1e-6, gt=0)
    C_tolerance: float = Field(1e-4, gt=0)
    dB_dt_tolerance: float = Field(1e-6, gt=0)
    slope_tolerance: float = Field(0.15, gt=0)


class OutputSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    directory: Optional[str] = None     # defaults to LARR_OUTPUT_DIR
    prefix: Optional[str] = None        # defaults to the job name
    plot_script: bool = True


class JobConfig(BaseModel):
    """
    Entity: Job Configuration
    Description: One CLI run: the run kind, the physical configuration, the grids,
    tolerances, output location and worker count
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: JobKind
    name: str = "larr"
    description: str = ""
    scattering: Optional[ScatteringConfig] = None
    pulse: Optional[PulseSpec] = None
    omega_grid: Optional[GridSpec] = None
    theta_grid: Optional[GridSpec] = None
    spectrogram: SpectrogramConfig = Field(default_factory=SpectrogramConfig)
    saddle: SaddleSettings = Field(default_factory=SaddleSettings)
    integration: IntegrationSettings = Field(default_factory=IntegrationSettings)
    classical: ClassicalSettings = Field(default_factory=ClassicalSettings)
    validation: ValidationSettings = Field(default_factory=ValidationSettings)
    preview_samples_per_cycle: int = Field(1000, ge=10)
    output: OutputSettings = Field(default_factory=OutputSettings)
    workers: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _check_required(self):
        needs_scattering = self.kind not in (JobKind.PULSE_PREVIEW, JobKind.VALIDATE_KERNELS)
        if needs_scattering and self.scattering is None:
            raise ValueError(f"scattering is required for {self.kind.value} jobs")
        if self.kind == JobKind.PULSE_PREVIEW and self.scattering is None and self.pulse is None:
            raise ValueError("pulse-preview needs either pulse or scattering.pulse")
        if self.kind in (JobKind.SPECTRUM, JobKind.ANGULAR_MAP, JobKind.SPECTROGRAM) and self.omega_grid is None:
            raise ValueError(f"omega_grid is required for {self.kind.value} jobs")
        if self.kind == JobKind.ANGULAR_MAP and self.theta_grid is None:
            raise ValueError("theta_grid is required for angular-map jobs")
        return self

    @property
    def pulse_spec(self) -> Optional[PulseSpec]:
        if self.pulse is not None:
            return self.pulse
        return self.scattering.pulse if self.scattering is not None else None
