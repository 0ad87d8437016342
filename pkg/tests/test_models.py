import numpy as np
import pytest
from pydantic import ValidationError

from src.models.analysis_models import SpectrogramConfig
from src.models.grid_models import GridSpec
from src.models.job_models import ClassicalSettings, JobConfig, JobKind
from src.models.pulse_models import PulseShape, PulseSpec
from src.models.result_models import NordsieckArgs, Trajectory
from src.models.scattering_models import IntegrationSettings, NondipoleFlags, ScatteringConfig


def test_grid_spec_forms():
    """Test ranged and explicit grids, including multiples of pi"""
    ranged = GridSpec(start="0.3pi", stop="0.7pi", num=5)
    assert np.allclose(ranged.to_array(), np.linspace(0.3 * np.pi, 0.7 * np.pi, 5))
    assert len(ranged) == 5

    explicit = GridSpec(values=["0.432pi", 1.5])
    assert np.allclose(explicit.to_array(), [0.432 * np.pi, 1.5])
    assert len(explicit) == 2


@pytest.mark.parametrize("data", [
    {"start": 0.0, "stop": 1.0},
    {"values": []},
    {"values": [1.0], "start": 0.0, "stop": 1.0, "num": 3},
    {"start": 1.0, "stop": 0.0, "num": 3},
    {"start": 0.0, "stop": 1.0, "num": 0},
])
def test_grid_spec_rejects_incomplete_forms(data):
    """Test that malformed grids are rejected"""
    with pytest.raises(ValidationError):
        GridSpec.model_validate(data)


def test_pulse_spec_geometry():
    """Test unit-vector and orthogonality checks on the pulse directions"""
    with pytest.raises(ValidationError):
        PulseSpec(omega=1.0, amplitude=1.0, n_osc=2, n_prop=(0.0, 0.0, 2.0))
    with pytest.raises(ValidationError):
        PulseSpec(omega=1.0, amplitude=1.0, n_osc=2, eps_pol=(0.0, 0.0, 1.0))


def test_field_sine2_carries_no_chirp():
    """Test that chirp and CEP parameters are refused for FieldSine2"""
    with pytest.raises(ValidationError):
        PulseSpec(shape=PulseShape.FIELD_SINE2, omega=1.0, amplitude=1.0, n_osc=2, eta0=0.01)
    spec = PulseSpec(shape=PulseShape.CHIRP_F1, omega=1.0, amplitude=1.0, n_osc=2, chi="pi/2")
    assert spec.chi == pytest.approx(0.5 * np.pi)
    assert spec.duration == pytest.approx(4.0 * np.pi)


def test_scattering_config_from_energy(fig2_config):
    """Test electron energy in eV converted to the central momentum"""
    assert fig2_config.p_mag == pytest.approx(27.11, abs=0.01)
    assert fig2_config.theta_p == pytest.approx(0.432 * np.pi)
    assert fig2_config.nu == pytest.approx(4.0 / fig2_config.p_mag)
    assert fig2_config.binding_energy == -8.0
    assert np.linalg.norm(fig2_config.p_vec) == pytest.approx(fig2_config.p_mag)


def test_scattering_config_rejects_both_momentum_forms(small_pulse):
    """Test that p_mag and electron_energy_ev are mutually exclusive"""
    with pytest.raises(ValidationError):
        ScatteringConfig.model_validate({
            "Z": 1, "p_mag": 1.0, "electron_energy_ev": 100.0, "dp": 1e-3, "pulse": small_pulse.model_dump(),
        })
    with pytest.raises(ValidationError):
        ScatteringConfig.model_validate({"Z": 1, "electron_energy_ev": -5.0, "dp": 1e-3, "pulse": small_pulse.model_dump()})


def test_scattering_config_photon_geometry(small_pulse):
    """Test that the emitted photon's direction and polarization are orthonormal"""
    with pytest.raises(ValidationError):
        ScatteringConfig(Z=1, p_mag=1.0, dp=1e-3, pulse=small_pulse, eps_K=(0.0, 0.0, 1.0))


def test_scattering_config_is_frozen(small_config):
    """Test that configurations are immutable and re-validated on update"""
    with pytest.raises(ValidationError):
        small_config.Z = 2
    with pytest.raises(ValidationError):
        small_config.with_updates(dp=-1.0)
    assert small_config.with_updates(theta_p="0.5pi").theta_p == pytest.approx(0.5 * np.pi)


def test_nondipole_flags():
    """Test the dipole and single-correction flag sets"""
    assert not NondipoleFlags.dipole().any_enabled
    only = NondipoleFlags.only("retardation")
    assert only.retardation and not only.recoil and not only.gauge and not only.photon_momentum
    with pytest.raises(ValueError):
        NondipoleFlags.only("magnetic")


def test_integration_settings_method():
    """Test that only scipy ODE methods are accepted"""
    assert IntegrationSettings(method="RK45").method == "RK45"
    with pytest.raises(ValidationError):
        IntegrationSettings(method="Euler")


def test_spectrogram_config_bounds():
    """Test the truncation bounds and the absolute window width"""
    cfg = SpectrogramConfig(xi_W=0.03, omega1=-5.0, omega2=21.55)
    assert cfg.window_width == pytest.approx(0.03 * 26.55)
    with pytest.raises(ValidationError):
        SpectrogramConfig(omega1=3.0, omega2=1.0)


def test_job_config_requirements(small_config):
    """Test that each job kind demands the inputs it needs"""
    scattering = small_config.model_dump()
    with pytest.raises(ValidationError):
        JobConfig.model_validate({"kind": "spectrum", "scattering": scattering})
    with pytest.raises(ValidationError):
        JobConfig.model_validate({
            "kind": "angular-map",
            "scattering": scattering,
            "omega_grid": {"start": 2.0, "stop": 3.0, "num": 3},
        })
    with pytest.raises(ValidationError):
        JobConfig.model_validate({"kind": "pulse-preview"})
    with pytest.raises(ValidationError):
        JobConfig.model_validate({"kind": "spectrum", "unknown": 1})

    job = JobConfig.model_validate({"kind": "validate-kernels"})
    assert job.kind == JobKind.VALIDATE_KERNELS
    assert job.pulse_spec is None

    preview = JobConfig.model_validate({"kind": "pulse-preview", "pulse": {"omega": 1.14, "amplitude": 10.0, "n_osc": 3}})
    assert preview.preview_samples_per_cycle == 1000


def test_classical_settings_multipliers():
    """Test that the scaling study needs two positive speed-of-light multipliers"""
    with pytest.raises(ValidationError):
        ClassicalSettings(c_multipliers=[1.0])
    with pytest.raises(ValidationError):
        ClassicalSettings(c_multipliers=[1.0, 0.0])


def test_nordsieck_args_validation():
    """Test the argument bundle checks on lambda, p and q"""
    with pytest.raises(ValueError):
        NordsieckArgs(nu=0.1, lam=0.0, q=np.ones(3), p=np.ones(3))
    with pytest.raises(ValueError):
        NordsieckArgs(nu=0.1, lam=1.0, q=np.ones(3), p=np.zeros(3))
    with pytest.raises(ValueError):
        NordsieckArgs(nu=0.1, lam=1.0, q=np.ones(2), p=np.ones(3))
    args = NordsieckArgs(nu=0.1, lam=1.0, q=np.ones((4, 3)), p=[1.0, 0.0, 0.0])
    assert args.zeta.shape == (4,)


def test_trajectory_kinetic_energy():
    """Test that a trajectory carries pi^2/2 per sample"""
    pi = np.array([[1.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
    trajectory = Trajectory(t=np.array([0.0, 1.0]), r=np.zeros((2, 3)), pi=pi)
    assert np.allclose(trajectory.kinetic_energy, [0.5, 1.5])
    assert len(trajectory) == 2
    assert trajectory.state(1).t == 1.0
