"""Tests for vacuum correlation records, closed forms and exact integrals.

Exact-quadrature tests use looser tolerances (``fast_spec``) than the
defaults; the physics tolerances are unchanged.
"""
import math
import warnings
from unittest.mock import patch

import numpy as np
import pytest
from pydantic import ValidationError

from config import Config
from physics.conformal_field import DetectorParams
from physics.quadrature import QuadratureSpec
from physics.vacuum_correlations import (
    CorrelationMethod,
    CorrelationRecord,
    approximate_record,
    correlation_record,
    cross_correlation_approx,
    cross_correlation_exact,
    fig1_sweep,
    measure_self_test,
    normalization_constant,
    record_from_gain,
    signal_variance_approx,
    signal_variance_exact,
)
from qkd.gaussian import effective_gain, epr_correlation
from utils.errors import DomainError, PairingViolationError, QuadratureBudgetExceeded


# ============================================================
# Closed forms
# ============================================================

class TestClosedForms:
    """Narrow-envelope expressions at machine precision."""

    def test_squeezing_at_table_parameters(self):
        record = approximate_record(10e9, 14e9)
        assert record.dx_minus_0 == pytest.approx(0.8083, abs=1e-4)

    def test_signal_variance_formula(self):
        x = 2.0 * math.pi * 10e9 / 14e9
        expected = (math.exp(x) + 1.0) / (math.exp(x) - 1.0)
        assert signal_variance_approx(10e9, 14e9) == pytest.approx(expected, rel=1e-12)

    def test_signal_variance_at_fig3_blue(self):
        assert signal_variance_approx(40e9, 60e9) == pytest.approx(1.0308, abs=1e-4)

    def test_cross_term_formula(self):
        x = math.pi * 10e9 / 14e9
        expected = 2.0 * math.exp(x) / (math.exp(2.0 * x) - 1.0)
        assert cross_correlation_approx(10e9, 14e9) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize('omega, a', [(10e9, 14e9), (40e9, 60e9), (1e9, 60e9), (100e9, 14e9)])
    def test_variance_equals_two_gain_minus_one(self, omega, a):
        assert signal_variance_approx(omega, a) == pytest.approx(2.0 * effective_gain(omega, a) - 1.0, rel=1e-12)

    @pytest.mark.parametrize('omega, a', [(10e9, 14e9), (40e9, 60e9), (5e9, 14e9), (90e9, 60e9)])
    def test_squeezing_equals_epr_correlation(self, omega, a):
        record = approximate_record(omega, a)
        assert record.dx_minus_0 == pytest.approx(epr_correlation(effective_gain(omega, a)), rel=1e-12)

    def test_approximate_record_is_pure_and_entangled(self):
        record = approximate_record(40e9, 60e9)
        assert record.purity_minus == pytest.approx(1.0, rel=1e-12)
        assert record.purity_plus == pytest.approx(1.0, rel=1e-12)
        assert record.cpi2 == -record.c0
        assert record.entangled
        assert record.method == CorrelationMethod.APPROXIMATE

    def test_large_ratio_does_not_overflow(self):
        record = approximate_record(1e12, 1e9)
        assert record.v_f == 1.0
        assert record.c0 == 0.0

    @pytest.mark.parametrize('omega, a', [(0.0, 14e9), (10e9, 0.0), (-1.0, 14e9)])
    def test_domain_errors(self, omega, a):
        with pytest.raises(DomainError):
            signal_variance_approx(omega, a)


class TestRecordFromGain:

    def test_gain_two(self):
        record = record_from_gain(2.0)
        assert record.v_f == 3.0
        assert record.c0 == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-15)
        assert record.dx_minus_0 == pytest.approx(3.0 - 2.0 * math.sqrt(2.0), rel=1e-12)
        assert record.omega_do == 0.0

    def test_unit_gain_is_vacuum(self):
        record = record_from_gain(1.0)
        assert record.v_f == 1.0
        assert not record.entangled

    def test_gain_below_one(self):
        with pytest.raises(DomainError):
            record_from_gain(0.5)


class TestCorrelationRecord:
    """Validation of assembled records."""

    def test_from_moments(self):
        record = CorrelationRecord.from_moments(1e9, 1.2, 1.2, 0.5, -0.5, CorrelationMethod.EXACT)
        assert record.dx_minus_0 == pytest.approx(0.7)
        assert record.dx_plus_0 == pytest.approx(1.7)
        assert record.dx_minus_pi2 == pytest.approx(1.7)
        assert record.dx_plus_pi2 == pytest.approx(0.7)
        assert record.purity_minus == pytest.approx(1.19)
        assert record.entangled

    def test_uncorrelated_vacuum_gives_unit_variances(self):
        record = CorrelationRecord.from_moments(1e9, 1.0, 1.0, 0.0, 0.0, CorrelationMethod.EXACT)
        assert record.dx_minus_0 == 1.0
        assert record.purity_minus == 1.0
        assert not record.entangled

    def test_numpy_moments_give_plain_bool_flag(self):
        with warnings.catch_warnings():
            warnings.simplefilter('error', DeprecationWarning)
            record = CorrelationRecord.from_moments(
                1e9, np.float64(1.2), np.float64(1.2), np.float64(0.5), np.float64(-0.5),
                CorrelationMethod.EXACT)
        assert type(record.entangled) is bool

    def test_rejects_sub_shot_noise_variance(self):
        with pytest.raises(ValidationError):
            CorrelationRecord.from_moments(1e9, 0.9, 1.0, 0.0, 0.0, CorrelationMethod.EXACT)

    def test_rejects_inconsistent_flag(self):
        record = approximate_record(10e9, 14e9)
        with pytest.raises(ValidationError):
            CorrelationRecord(**{**record.model_dump(), 'entangled': False})


# ============================================================
# Exact integrals
# ============================================================

@pytest.mark.slow
class TestNormalization:
    """K and the normalized measure."""

    def test_narrow_transverse_limit(self, fast_spec):
        params = DetectorParams.from_widths(60e9, 40e9, 2e9, 1e6)
        k_est = normalization_constant(params, fast_spec)
        assert k_est.value == pytest.approx(0.5, rel=1e-5)
        assert k_est.error < 1e-5

    def test_self_test_returns_one(self, fig1a_pair, fast_spec):
        result = measure_self_test(fig1a_pair[0].with_omega(40e9), fast_spec)
        assert result.value == pytest.approx(1.0, rel=1e-5)

    def test_budget_failure_propagates(self, fig1a_pair):
        with pytest.raises(QuadratureBudgetExceeded):
            normalization_constant(fig1a_pair[0], QuadratureSpec(max_evals=100))


@pytest.mark.slow
class TestExactCorrelations:
    """Exact moments against the closed forms (Fig. 1 parameter sets)."""

    @pytest.mark.parametrize('omega', [10e9, 40e9, 100e9])
    def test_fig1a_squeezing_within_two_percent(self, fig1a_pair, fast_spec, omega):
        future, past = (p.with_omega(omega) for p in fig1a_pair)
        exact = correlation_record(future, past, fast_spec)
        approx = approximate_record(omega, future.a)
        assert exact.dx_minus_0 == pytest.approx(approx.dx_minus_0, rel=0.02)
        # purity product stays near one; the estimated peak at the low end is ~1.02
        assert 1.0 - 1e-6 <= exact.purity_minus < 1.025

    def test_full_fig1a_sweep_matches_closed_form(self, fig1a_pair):
        p = Config.FIG1_PRESETS['a']
        grid = np.linspace(p['omega_min'], p['omega_max'], p['points'])
        records = fig1_sweep(fig1a_pair, grid)
        assert len(records) == 20
        for record in records:
            approx = approximate_record(record.omega_do, p['a'])
            assert record.dx_minus_0 == pytest.approx(approx.dx_minus_0, rel=0.02)
            assert record.purity_minus < 1.02

    def test_narrowing_widths_approaches_closed_form(self, fast_spec):
        p = Config.FIG1_PRESETS['b']
        approx = approximate_record(p['omega_min'], p['a'])
        gaps = []
        for halvings in range(4):
            scale = 0.5 ** halvings
            future, past = DetectorParams.pair(p['a'], p['omega_min'],
                                               scale * p['d_width'], scale * p['s_width'])
            exact = correlation_record(future, past, fast_spec)
            gaps.append(abs(exact.dx_minus_0 - approx.dx_minus_0))
        assert all(later < earlier for earlier, later in zip(gaps, gaps[1:]))
        assert gaps[-1] < 0.1 * gaps[0]

    def test_fig1b_low_end_is_impure(self, fig1b_pair, fast_spec):
        exact = correlation_record(*fig1b_pair, fast_spec)
        assert exact.purity_minus > 1.05

    def test_symmetric_pair_has_equal_variances(self, fig1a_pair, fast_spec):
        future, past = (p.with_omega(40e9) for p in fig1a_pair)
        record = correlation_record(future, past, fast_spec)
        assert record.v_f == pytest.approx(record.v_p, rel=1e-9)
        assert record.cpi2 == -record.c0
        assert record.entangled
        assert record.error_bound is not None

    def test_signal_variance_matches_record(self, fig1a_pair, fast_spec):
        future, past = (p.with_omega(40e9) for p in fig1a_pair)
        record = correlation_record(future, past, fast_spec)
        assert signal_variance_exact(future, fast_spec) == pytest.approx(record.v_f, rel=1e-6)

    def test_cross_term_phase_relation(self, fig1a_pair, fast_spec):
        future, past = (p.with_omega(40e9) for p in fig1a_pair)
        c0 = cross_correlation_exact(future, past, 0.0, fast_spec)
        cpi2 = cross_correlation_exact(future, past, math.pi / 2.0, fast_spec)
        assert cpi2 == pytest.approx(-c0, rel=1e-12)
        assert c0 == pytest.approx(cross_correlation_approx(40e9, 60e9), rel=0.05)

    def test_cross_term_rejects_other_phases(self, fig1a_pair):
        with pytest.raises(DomainError):
            cross_correlation_exact(*fig1a_pair, phi=1.0)

    def test_cross_term_rejects_bad_pair(self, fig1a_pair):
        future, _ = fig1a_pair
        with pytest.raises(PairingViolationError):
            cross_correlation_exact(future, future, 0.0)

    def test_approximate_method_skips_quadrature(self, fig1a_pair):
        with patch('physics.vacuum_correlations._integrate') as integrate:
            record = correlation_record(*fig1a_pair, method='approximate')
        integrate.assert_not_called()
        assert record == approximate_record(fig1a_pair[0].omega_do, fig1a_pair[0].a)


class TestFig1Sweep:

    def test_keeps_grid_order(self, fig1a_pair):
        grid = [30e9, 10e9, 20e9]
        records = fig1_sweep(fig1a_pair, grid, method=CorrelationMethod.APPROXIMATE)
        assert [r.omega_do for r in records] == grid

    def test_empty_grid(self, fig1a_pair):
        with pytest.raises(ValueError):
            fig1_sweep(fig1a_pair, [])

    def test_rejects_bad_pair(self, fig1a_pair):
        future, _ = fig1a_pair
        with pytest.raises(PairingViolationError):
            fig1_sweep((future, future), [10e9], method='approximate')

    def test_workers_fall_back_in_process_for_approximate(self, fig1a_pair):
        with patch('physics.vacuum_correlations.ProcessPoolExecutor') as pool:
            fig1_sweep(fig1a_pair, [10e9, 20e9], method='approximate', workers=4)
        pool.assert_not_called()

    def test_default_workers_from_config(self, fig1a_pair):
        with patch.object(Config, 'SWEEP_WORKERS', 1), \
             patch('physics.vacuum_correlations.ProcessPoolExecutor') as pool:
            fig1_sweep(fig1a_pair, [10e9, 20e9], method='approximate')
        pool.assert_not_called()
