import numpy as np
import pytest

from src.models.pulse_models import PulseShape, PulseSpec
from src.models.scattering_models import NondipoleFlags, ScatteringConfig
from src.services.pulse_service import flat_top_cep

FLAT_TOP_ETA0 = -1.0 / (6.0 * np.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def fig2_pulse() -> PulseSpec:
    return PulseSpec(shape=PulseShape.FIELD_SINE2, omega=1.14, amplitude=10.0, n_osc=3)


@pytest.fixture
def fig2_config(fig2_pulse) -> ScatteringConfig:
    """10 keV electrons on Z=4 at theta_p = 0.432 pi"""
    return ScatteringConfig(
        Z=4,
        electron_energy_ev=10000.0,
        theta_p="0.432pi",
        phi_p="pi",
        dp=2.74e-5,
        pulse=fig2_pulse,
    )


@pytest.fixture
def flat_top_pulse() -> PulseSpec:
    return PulseSpec(
        shape=PulseShape.CHIRP_F2,
        omega=1.14,
        amplitude=10.0,
        n_osc=3,
        eta0=FLAT_TOP_ETA0,
        n_c=0,
        chi=flat_top_cep(3, FLAT_TOP_ETA0),
    )


@pytest.fixture
def small_pulse() -> PulseSpec:
    """Two-cycle weak pulse, cheap enough for adaptive integration"""
    return PulseSpec(shape=PulseShape.FIELD_SINE2, omega=0.5, amplitude=0.05, n_osc=2)


@pytest.fixture
def small_config(small_pulse) -> ScatteringConfig:
    return ScatteringConfig(Z=1, p_mag=1.5, theta_p=0.4 * np.pi, phi_p=np.pi, dp=1e-3, pulse=small_pulse, c_au=20.0)


@pytest.fixture
def zero_field_config() -> ScatteringConfig:
    pulse = PulseSpec(shape=PulseShape.FIELD_SINE2, omega=0.5, amplitude=0.0, n_osc=2)
    return ScatteringConfig(Z=1, p_mag=1.5, theta_p=0.5 * np.pi, phi_p=np.pi, dp=1e-3, pulse=pulse)


@pytest.fixture
def dipole_flags() -> NondipoleFlags:
    return NondipoleFlags.dipole()
