"""Trajectory reduction: populations, detrending, MI series and periods."""

import math

import numpy as np
import numpy.testing as npt
import pytest

from spinphonon import (
    ObservableSeries,
    SpinParameters,
    basis_state,
    build_model,
    delta_rho_initial,
    detrend_thermal,
    dominant_period,
    mutual_info_series,
    population_series,
    propagate,
)
from spinphonon.errors import ValidationError


def small_dissipative_trajectory(couple=0.0, store_states=False, mi_modes=()):
    g = np.zeros((3, 1))
    g[0, 0] = couple
    model = build_model(
        SpinParameters((1.987,) * 3, (0.0, 0.0, 50.0)),
        [45.0], g, 3, [4.0], 65.0,
    )
    rho0 = basis_state(model.layout, [0, 0])
    return propagate(
        model, rho0, 20.0, 0.005, stride=100,
        store_states=store_states, mi_modes=mi_modes,
    )


class TestObservableSeries:
    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            ObservableSeries(np.arange(3.0), np.arange(4.0), "x")


class TestPopulationSeries:
    def test_labels_and_initial_values(self):
        traj = small_dissipative_trajectory()
        spin = population_series(traj, 0, 0)
        mode = population_series(traj, 1, 0)
        assert spin.label == "spin_rho00"
        assert mode.label == "mode1_rho00"
        assert spin.values[0] == pytest.approx(1.0, abs=1e-12)
        assert mode.values[0] == pytest.approx(1.0, abs=1e-12)

    def test_index_validation(self):
        traj = small_dissipative_trajectory()
        with pytest.raises(ValidationError):
            population_series(traj, 2, 0)
        with pytest.raises(ValidationError):
            population_series(traj, 1, 3)


class TestDeltaRhoInitial:
    def test_constant_series_is_zero(self):
        s = ObservableSeries(np.arange(5.0), np.full(5, 0.7), "c")
        npt.assert_array_equal(delta_rho_initial(s).values, np.zeros(5))

    def test_arithmetic(self):
        s = ObservableSeries(np.arange(3.0), np.array([1.0, 0.99, 1.0]), "p")
        npt.assert_allclose(
            delta_rho_initial(s).values, [0.0, -0.01, 0.0], atol=1e-15
        )

    def test_ground_population_convention(self):
        # a ground-state population starting at 1 detrends to rho00 - 1
        s = ObservableSeries(np.arange(3.0), np.array([1.0, 0.95, 0.9]), "m")
        d = delta_rho_initial(s)
        npt.assert_allclose(d.values, s.values - 1.0, atol=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            delta_rho_initial(ObservableSeries(np.array([]), np.array([]), "e"))


class TestDetrendThermal:
    def test_zero_coupling_detrends_to_zero(self):
        traj = small_dissipative_trajectory(couple=0.0)
        d = detrend_thermal(traj, 1, 45.0, 65.0, 4.0, 3)
        assert np.max(np.abs(d.values)) < 1e-6

    def test_starts_at_zero(self):
        traj = small_dissipative_trajectory(couple=0.3)
        d = detrend_thermal(traj, 1, 45.0, 65.0, 4.0, 3)
        assert d.values[0] == pytest.approx(0.0, abs=1e-12)

    def test_coupled_run_has_residual_structure(self):
        traj = small_dissipative_trajectory(couple=0.3)
        d = detrend_thermal(traj, 1, 45.0, 65.0, 4.0, 3)
        assert np.max(np.abs(d.values)) > 1e-4

    def test_mode_index_validated(self):
        traj = small_dissipative_trajectory()
        with pytest.raises(ValidationError):
            detrend_thermal(traj, 0, 45.0, 65.0, 4.0, 3)

    def test_requires_finite_lifetime(self):
        traj = small_dissipative_trajectory()
        with pytest.raises(ValidationError):
            detrend_thermal(traj, 1, 45.0, 65.0, math.inf, 3)


class TestMutualInfoSeries:
    def test_from_recorded_values(self):
        traj = small_dissipative_trajectory(couple=0.3, mi_modes=(1,))
        s = mutual_info_series(traj, 1)
        assert s.label == "MI_spin_mode1"
        assert s.values[0] == pytest.approx(0.0, abs=1e-10)
        assert np.max(s.values) > 1e-4

    def test_from_stored_states_matches_recorded(self):
        traj = small_dissipative_trajectory(couple=0.3, store_states=True, mi_modes=(1,))
        recorded = traj.mutual_information[1].copy()
        traj.mutual_information.clear()
        s = mutual_info_series(traj, 1)
        npt.assert_allclose(s.values, recorded, atol=1e-12)

    def test_requires_states_or_recording(self):
        traj = small_dissipative_trajectory(couple=0.3)
        with pytest.raises(ValidationError):
            mutual_info_series(traj, 1)

    def test_mode_index_validated(self):
        traj = small_dissipative_trajectory(couple=0.3, mi_modes=(1,))
        with pytest.raises(ValidationError):
            mutual_info_series(traj, 2)


class TestDominantPeriod:
    def test_single_sine(self):
        t = np.arange(2000) * 0.5
        s = ObservableSeries(t, np.sin(2 * np.pi * t / 20.0), "s")
        assert dominant_period(s) == pytest.approx(20.0, abs=0.5)

    def test_long_period_with_offset(self):
        t = np.arange(4000) * 0.5
        v = 0.3 + 0.05 * np.sin(2 * np.pi * t / 200.0 + 0.4)
        s = ObservableSeries(t, v, "s")
        assert dominant_period(s) == pytest.approx(200.0, abs=2.0)

    def test_band_selects_weaker_component(self):
        t = np.arange(4000) * 0.25
        v = np.sin(2 * np.pi * t / 100.0) + 0.2 * np.sin(2 * np.pi * t / 20.0)
        s = ObservableSeries(t, v, "s")
        assert dominant_period(s) == pytest.approx(100.0, abs=1.0)
        assert dominant_period(s, band=(10.0, 30.0)) == pytest.approx(20.0, abs=0.5)

    def test_too_few_samples(self):
        t = np.arange(16.0)
        with pytest.raises(ValidationError):
            dominant_period(ObservableSeries(t, np.sin(t), "s"))

    def test_non_uniform_grid(self):
        t = np.concatenate([np.arange(40.0), [41.5]])
        with pytest.raises(ValidationError):
            dominant_period(ObservableSeries(t, np.sin(t), "s"))

    def test_constant_series_has_no_peak(self):
        t = np.arange(100.0)
        with pytest.raises(ValidationError):
            dominant_period(ObservableSeries(t, np.ones(100), "s"))
