from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


@dataclass(frozen=True)
class NordsieckArgs:
    """
    Entity: Nordsieck Arguments
    Description: (nu, lambda, q, p) bundle for the analytic Coulomb kernel.
    q may carry leading axes (for example a time grid); p is a single vector.
    """
    nu: float
    lam: float
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        p = np.asarray(self.p, dtype=float)
        if p.shape != (3,) or not np.linalg.norm(p) > 0:
            raise ValueError("p must be a non-zero 3-vector")
        q = np.asarray(self.q, dtype=float)
        if q.shape[-1:] != (3,):
            raise ValueError(f"q must end in an axis of length 3, got shape {q.shape}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def p_mag(self) -> float:
        return float(np.linalg.norm(self.p))

    @property
    def zeta(self) -> np.ndarray:
        return 1.0 / (self.lam ** 2 + np.sum(self.q * self.q, axis=-1))

    @property
    def xi(self) -> np.ndarray:
        return -2.0 * self.zeta * (self.q @ self.p + 1j * self.lam * self.p_mag)


@dataclass(frozen=True)
class KernelValues:
    f: np.ndarray
    B: np.ndarray
    C: np.ndarray
    dB_dt: np.ndarray


@dataclass(frozen=True)
class AmplitudeParts:
    """
    Entity: Amplitude Parts
    Description: Partial LARR amplitudes for one photon energy
    """
    R0: complex
    R1: complex
    R2: complex
    H_Tp: float  # Volkov phase accumulated over the pulse (rad)
    Q: float     # energy mismatch E_B + omega_K - p^2/2 (E0)


@dataclass
class SpectrumResult:
    omega_grid: np.ndarray
    d3E: np.ndarray
    averaged_R: np.ndarray
    parts: Optional[List[AmplitudeParts]] = None
    theta_p: Optional[float] = None


@dataclass
class AngularMapResult:
    theta_grid: np.ndarray
    omega_grid: np.ndarray
    d3E: np.ndarray  # rows follow theta_grid, columns follow omega_grid


@dataclass(frozen=True)
class SaddleCurve:
    t_grid: np.ndarray
    omega_dipole: np.ndarray
    omega_full: np.ndarray


@dataclass
class SpectrogramResult:
    t_grid: np.ndarray
    omega_K_grid: np.ndarray
    S: np.ndarray  # rows follow t_grid, columns follow omega_K_grid
    center: float = 0.0  # offset added to omega_K_grid to recover absolute photon energies

    @property
    def absolute_omega(self) -> np.ndarray:
        return self.omega_K_grid + self.center


@dataclass(frozen=True)
class TrajectoryState:
    r: np.ndarray
    pi: np.ndarray
    t: float


@dataclass
class Trajectory:
    """
    Entity: Trajectory
    Description: Sampled classical electron trajectory with kinetic-energy bookkeeping
    """
    t: np.ndarray
    r: np.ndarray   # (N, 3)
    pi: np.ndarray  # (N, 3)
    kinetic_energy: np.ndarray = field(init=False)

    def __post_init__(self):
        self.kinetic_energy = 0.5 * np.sum(self.pi * self.pi, axis=-1)

    def __len__(self) -> int:
        return len(self.t)

    def state(self, index: int) -> TrajectoryState:
        return TrajectoryState(r=self.r[index], pi=self.pi[index], t=float(self.t[index]))

    def states(self) -> List[TrajectoryState]:
        return [self.state(i) for i in range(len(self))]


@dataclass
class OracleCheck:
    """One validate-kernels comparison"""
    name: str
    max_error: float
    tolerance: float
    samples: int
    passed: bool = field(init=False)
    note: str = ""

    def __post_init__(self):
        self.passed = bool(np.isfinite(self.max_error) and self.max_error <= self.tolerance)


@dataclass(frozen=True)
class ScalingStudy:
    """Maximum classical momentum residual per speed of light, with the fitted log-log slope"""
    c_values: np.ndarray
    residuals: np.ndarray
    slope: float
