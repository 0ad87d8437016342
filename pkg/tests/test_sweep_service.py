import numpy as np
import pytest

from src.config.preset_loader import load_preset
from src.models.scattering_models import IntegrationSettings, NondipoleFlags
from src.services.amplitude_service import AmplitudeEngine, distribution_from_parts
from src.services.analysis_service import cutoff, plateau_edge
from src.services.sweep_service import SweepService, SweepTask, evaluate_task
from src.utils.exceptions import ConfigError, NumericalError, ThresholdError


@pytest.fixture
def omega_grid(small_config):
    return small_config.field_free_peak + np.linspace(-0.6, 0.6, 9)


def test_spectrum_matches_pointwise_evaluation(small_config, omega_grid):
    """Test that a sweep reproduces the single-point distribution on a shared grid"""
    result = SweepService(workers=1).scan_spectrum(small_config, omega_grid)

    engine = AmplitudeEngine(small_config)
    steps = engine.required_fast_steps(omega_grid)
    for i in (0, 4, 8):
        parts = engine.amplitude(float(omega_grid[i]), steps)
        assert result.d3E[i] == pytest.approx(distribution_from_parts(small_config, float(omega_grid[i]), parts), rel=1e-12)

    assert result.d3E.shape == omega_grid.shape
    assert np.all(result.d3E >= 0)
    assert len(result.parts) == omega_grid.size
    assert result.theta_p == pytest.approx(small_config.theta_p)


def test_results_do_not_depend_on_worker_count(small_config, omega_grid):
    """Test that serial and pooled sweeps give bit-identical spectra"""
    serial = SweepService(workers=1).scan_spectrum(small_config, omega_grid)
    pooled = SweepService(workers=2).scan_spectrum(small_config, omega_grid)
    assert np.array_equal(serial.d3E, pooled.d3E)
    assert np.array_equal(serial.averaged_R, pooled.averaged_R)


def test_non_monotonic_grid_is_rejected(small_config):
    """Test that a photon-energy grid must increase"""
    grid = small_config.field_free_peak + np.array([0.0, 0.2, 0.1])
    with pytest.raises(ConfigError) as info:
        SweepService(workers=1).scan_spectrum(small_config, grid)
    assert info.value.field == "omega_grid"


def test_threshold_points_are_reported(small_config):
    """Test that photon energies below |E_B| are rejected before any integration"""
    grid = np.array([0.3, 0.6, 1.0])
    with pytest.raises(ThresholdError) as info:
        SweepService(workers=1).scan_spectrum(small_config, grid)
    assert info.value.indices == [0]


def test_failed_points_carry_their_indices(small_config, omega_grid, monkeypatch):
    """Test that a numerical failure inside a worker names the grid point"""
    original = AmplitudeEngine.amplitude

    def failing(self, omega_K, n_steps=None):
        if omega_K == float(omega_grid[3]):
            raise NumericalError("synthetic failure")
        return original(self, omega_K, n_steps)

    monkeypatch.setattr(AmplitudeEngine, "amplitude", failing)
    with pytest.raises(NumericalError) as info:
        SweepService(workers=1).scan_spectrum(small_config, omega_grid)
    assert info.value.indices == [3]


def test_evaluate_task_keeps_order(small_config, omega_grid):
    """Test that a worker task returns outcomes in index order"""
    integration = IntegrationSettings()
    steps = AmplitudeEngine(small_config, integration).required_fast_steps(omega_grid)
    task = SweepTask(
        tag=0,
        config=small_config,
        integration=integration,
        indices=(5, 6),
        omegas=(float(omega_grid[5]), float(omega_grid[6])),
        n_steps=steps,
    )
    outcomes = evaluate_task(task)
    assert [index for index, _, _ in outcomes] == [5, 6]
    assert all(error is None for _, _, error in outcomes)


def test_angular_map_rows_match_spectra(small_config, omega_grid):
    """Test that each map row equals the spectrum at that polar angle"""
    thetas = np.array([0.3, 0.5, 0.7]) * np.pi
    service = SweepService(workers=1)
    result = service.angular_map(small_config, thetas, omega_grid)

    assert result.d3E.shape == (thetas.size, omega_grid.size)
    row = service.scan_spectrum(small_config.with_updates(theta_p=float(thetas[1])), omega_grid)
    assert np.allclose(result.d3E[1], row.d3E, rtol=1e-12, atol=0)


@pytest.mark.parametrize("theta", [0.0, np.pi, 3.5])
def test_angular_map_rejects_boundary_angles(small_config, omega_grid, theta):
    """Test that polar angles must lie strictly inside (0, pi)"""
    with pytest.raises(ConfigError):
        SweepService(workers=1).angular_map(small_config, [0.5 * np.pi, theta], omega_grid)


def test_perpendicular_row_is_blind_to_recoil(small_config, omega_grid):
    """Test that at theta_p = pi/2 the recoil flag leaves the map row unchanged"""
    thetas = np.array([0.4, 0.5]) * np.pi
    service = SweepService(workers=1)
    with_recoil = service.angular_map(small_config.with_updates(flags=NondipoleFlags()), thetas, omega_grid)
    without_recoil = service.angular_map(small_config.with_updates(flags=NondipoleFlags(recoil=False)), thetas, omega_grid)

    assert np.allclose(with_recoil.d3E[1], without_recoil.d3E[1], rtol=1e-12, atol=0)
    assert not np.allclose(with_recoil.d3E[0], without_recoil.d3E[0], rtol=1e-6, atol=0)


@pytest.mark.slow
def test_spectrum_peaks_at_field_free_line(fig2_config):
    """Test that the 10 keV spectrum peaks at 375.49 E0 within one Lorentzian half width"""
    peak = fig2_config.field_free_peak
    width = fig2_config.p_mag * fig2_config.dp
    omega = peak + np.linspace(-5.0, 5.0, 201) * width
    result = SweepService(workers=2).scan_spectrum(fig2_config, omega, keep_parts=False)

    found = omega[int(np.argmax(result.d3E))]
    assert peak == pytest.approx(375.49, abs=0.01)
    assert abs(found - peak) <= 1.5 * width


@pytest.mark.slow
def test_flat_top_pulse_enhances_spectrum_below_cutoff():
    """Test that the f2 pulse beats the chirped f1 pulse over the top 2 E0 at a shared cutoff"""
    f1 = load_preset("fig4_f1_nc0").scattering
    f2 = load_preset("fig4_f2_nc0").scattering
    top = cutoff(f2)
    assert cutoff(f1) == pytest.approx(top, abs=0.1)

    omega = np.linspace(top - 2.0, top, 81)
    service = SweepService(workers=2)
    f1_mean = service.scan_spectrum(f1, omega, keep_parts=False).d3E.mean()
    f2_mean = service.scan_spectrum(f2, omega, keep_parts=False).d3E.mean()
    assert f2_mean > f1_mean


@pytest.mark.slow
def test_retardation_only_map_is_nearly_mirror_symmetric():
    """Test that retardation alone keeps theta_p <-> pi - theta_p rows close, unlike recoil"""
    config = load_preset("fig3_retardation").scattering
    thetas = np.array([0.4, 0.6]) * np.pi
    omega = np.linspace(560.0, 720.0, 200)
    service = SweepService(workers=2)

    retarded = service.angular_map(config, thetas, omega).d3E
    edges = [plateau_edge(omega, row, plateau_stop=640.0) for row in retarded]
    assert abs(edges[0] - edges[1]) <= 1.0
    plateau = omega <= 680.0
    assert np.median(np.abs(np.log(retarded[0, plateau] / retarded[1, plateau]))) < np.log(2.0)

    recoiled = service.angular_map(config.with_updates(flags=NondipoleFlags.only("recoil")), thetas, omega).d3E
    recoil_edges = [plateau_edge(omega, row, plateau_stop=640.0) for row in recoiled]
    assert recoil_edges[0] - recoil_edges[1] > 10.0
