"""Tests for lab-frame chirp schedules and the Table I rows."""
import math
from unittest.mock import patch

import pytest
from pydantic import ValidationError

from config import Config
from physics import labframe
from physics.conformal_field import DetectorLabel
from physics.labframe import (
    ChirpSchedule,
    asymptotic_frequency,
    chirp_profile,
    conformal_time,
    delta_tau_from_ratio,
    frequency_ratio,
    initial_lab_time,
    lab_interval,
    lab_time,
    table1,
    thermal_occupancy,
)
from utils.errors import DomainError

A = Config.TABLE1_DEFAULTS['a']
OMEGA = Config.TABLE1_DEFAULTS['omega_do']


@pytest.fixture
def default_rows():
    d = Config.TABLE1_DEFAULTS
    return table1(d['a'], d['omega_do'], d['tau_o'], d['t_max'])


# ============================================================
# Coordinate relations
# ============================================================

class TestRelations:

    def test_lab_interval_at_zero(self):
        assert lab_interval(0.0, 1e-10, A) == pytest.approx(math.expm1(A * 1e-10) / A, rel=1e-15)

    def test_lab_interval_tiny_delta_tau(self):
        # expm1 keeps precision where e^{aΔτ} - 1 would cancel
        assert lab_interval(0.0, 1e-25, A) == pytest.approx(1e-25, rel=1e-9)

    def test_frequency_ratio_round_trip(self):
        ratio = frequency_ratio(A, 2e-10)
        assert ratio == pytest.approx(math.exp(-A * 2e-10), rel=1e-15)
        assert delta_tau_from_ratio(A, 1.0, ratio) == pytest.approx(2e-10, rel=1e-12)

    def test_lab_and_conformal_time_are_inverse(self):
        tau = -0.47e-9
        assert conformal_time(lab_time(tau, A), A) == pytest.approx(tau, rel=1e-12)

    def test_initial_lab_time(self):
        assert initial_lab_time(0.0, A) == pytest.approx(1.0 / A)

    @pytest.mark.parametrize('tau_o, dt', [(-0.98e-9, 0.0), (-0.98e-9, 1e-16), (-2e-9, 5e-18)])
    def test_chirp_is_the_scaling_law(self, tau_o, dt):
        schedule = chirp_profile(OMEGA, A, tau_o, [dt], delta_tau=1e-9)
        t = initial_lab_time(tau_o, A) + dt
        assert schedule.samples[0][1] == pytest.approx(asymptotic_frequency(OMEGA, A, t), rel=1e-9)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            lab_interval(0.0, 1e-10, 0.0)
        with pytest.raises(DomainError):
            frequency_ratio(A, -1.0)
        with pytest.raises(DomainError):
            conformal_time(-1.0, A)
        with pytest.raises(DomainError):
            delta_tau_from_ratio(A, 0.0, 1.0)


class TestThermalOccupancy:

    def test_zero_temperature(self):
        assert thermal_occupancy(1e12, 0.0) == 0.0

    def test_bose_einstein(self):
        omega, temperature = 6.28e14, 300.0
        x = labframe.HBAR * omega / (labframe.K_BOLTZMANN * temperature)
        assert thermal_occupancy(omega, temperature) == pytest.approx(1.0 / (math.exp(x) - 1.0), rel=1e-12)

    def test_classical_limit(self):
        omega, temperature = 1e6, 300.0
        kt_over_hw = labframe.K_BOLTZMANN * temperature / (labframe.HBAR * omega)
        assert thermal_occupancy(omega, temperature) == pytest.approx(kt_over_hw, rel=1e-4)

    def test_negative_temperature(self):
        with pytest.raises(DomainError):
            thermal_occupancy(1e12, -1.0)


# ============================================================
# Chirp schedules
# ============================================================

class TestChirpProfile:
    """Future chirps run down, Past chirps run up over the same interval."""

    def test_future_runs_from_initial_to_final(self):
        total = lab_interval(-0.47e-9, 2e-10, A)
        schedule = chirp_profile(OMEGA, A, -0.47e-9, [0.0, total / 2, total], delta_tau=2e-10)
        freqs = [omega for _, omega in schedule.samples]
        assert freqs[0] == pytest.approx(schedule.omega_i, rel=1e-12)
        assert freqs[-1] == pytest.approx(schedule.omega_f, rel=1e-9)
        assert freqs[0] > freqs[1] > freqs[2]

    def test_past_is_time_reversed(self):
        total = lab_interval(-0.47e-9, 2e-10, A)
        grid = [0.0, total / 3, total]
        future = chirp_profile(OMEGA, A, -0.47e-9, grid, DetectorLabel.FUTURE, delta_tau=2e-10)
        past = chirp_profile(OMEGA, A, -0.47e-9, grid, DetectorLabel.PAST, delta_tau=2e-10)
        assert past.samples[0][1] == pytest.approx(future.omega_f, rel=1e-9)
        assert past.samples[-1][1] == pytest.approx(future.omega_i, rel=1e-9)
        assert past.label == DetectorLabel.PAST

    @pytest.mark.parametrize('label', [DetectorLabel.FUTURE, DetectorLabel.PAST])
    def test_unsorted_grid_with_repeats_is_sorted(self, label):
        total = lab_interval(-0.98e-9, 2e-10, A)
        grid = [0.5 * total, 0.25 * total, 0.5 * total]
        schedule = chirp_profile(OMEGA, A, -0.98e-9, grid, label, delta_tau=2e-10)
        assert [dt for dt, _ in schedule.samples] == [0.25 * total, 0.5 * total]

    def test_zero_tau_starts_at_peak_frequency(self):
        schedule = chirp_profile(OMEGA, A, 0.0, [0.0], delta_tau=1e-10)
        assert schedule.omega_i == OMEGA

    def test_sample_outside_interval(self):
        total = lab_interval(0.0, 1e-10, A)
        with pytest.raises(DomainError):
            chirp_profile(OMEGA, A, 0.0, [2.0 * total], delta_tau=1e-10)

    def test_default_delta_tau(self):
        schedule = chirp_profile(OMEGA, A, 0.0, [])
        assert schedule.delta_tau == Config.table1_delta_tau()

    def test_schedule_rejects_wrong_initial_frequency(self):
        schedule = chirp_profile(OMEGA, A, 0.0, [], delta_tau=1e-10)
        with pytest.raises(ValidationError):
            ChirpSchedule(**{**schedule.model_dump(), 'omega_i': 2.0 * OMEGA})

    def test_schedule_rejects_non_monotone_samples(self):
        schedule = chirp_profile(OMEGA, A, 0.0, [], delta_tau=1e-10)
        with pytest.raises(ValidationError):
            ChirpSchedule(**{**schedule.model_dump(), 'samples': [(0.0, 1.0), (1.0, 2.0)]})


# ============================================================
# Table I
# ============================================================

class TestTable1:
    """The three printed rows under the single-Δτ_T convention."""

    def test_delta_tau_from_first_row(self):
        assert Config.table1_delta_tau() == pytest.approx(1.9328e-10, rel=1e-3)

    @pytest.mark.parametrize('row', range(3))
    def test_frequencies_within_five_percent(self, default_rows, row):
        printed = Config.TABLE1_PRINTED[row]
        assert default_rows[row].omega_i == pytest.approx(printed['omega_i'], rel=0.05)
        assert default_rows[row].omega_f == pytest.approx(printed['omega_f'], rel=0.05)

    @pytest.mark.parametrize('row', range(3))
    def test_printed_interval_is_one_final_period(self, default_rows, row):
        printed = Config.TABLE1_PRINTED[row]
        assert default_rows[row].period_f == pytest.approx(printed['delta_t'], rel=0.05)

    def test_lab_interval_of_first_row(self, default_rows):
        # the scaling-law interval itself is ~9.4 times shorter than the printed column
        assert default_rows[0].delta_t == pytest.approx(1.06e-15, rel=0.01)

    def test_occupancy_column(self, default_rows):
        for schedule, t_max in zip(default_rows, Config.TABLE1_DEFAULTS['t_max']):
            assert schedule.temperature == t_max
            assert schedule.occupancy == pytest.approx(thermal_occupancy(schedule.omega_f, t_max), rel=1e-12)

    def test_extra_rows_without_temperature(self):
        rows = table1(A, OMEGA, [-0.98241e-9, 0.0], [300.0])
        assert rows[1].omega_i == OMEGA
        assert rows[1].occupancy is None

    def test_warns_when_interval_below_bandwidth(self):
        with patch.object(labframe.logger, 'warning') as warning:
            table1(A, OMEGA, [0.0], [], d=(5e9) ** 2)
        warning.assert_called_once()
        assert '1/sqrt(d)' in warning.call_args[0][0]

    def test_no_warning_for_long_interval(self):
        with patch.object(labframe.logger, 'warning') as warning:
            table1(A, OMEGA, [0.0], [], delta_tau=1e-9, d=(5e9) ** 2)
        warning.assert_not_called()

    def test_samples_per_row(self):
        rows = table1(A, OMEGA, [-0.47e-9], [], n_samples=5)
        assert len(rows[0].samples) == 5
