"""Detector mode functions, vacuum correlations and lab-frame schedules."""
from .conformal_field import (
    DetectorLabel,
    DetectorParams,
    BogolyubovPair,
    bogolyubov,
    longitudinal_mode,
    transverse_mode,
    effective_longitudinal,
    unruh_temperature,
    validate_pair,
)
from .quadrature import QuadratureSpec, IntegralEstimate
from .vacuum_correlations import (
    CorrelationMethod,
    CorrelationRecord,
    approximate_record,
    correlation_record,
    fig1_sweep,
    normalization_constant,
    signal_variance_approx,
    signal_variance_exact,
    cross_correlation_exact,
)
from .labframe import ChirpSchedule, chirp_profile, lab_interval, frequency_ratio, table1

__all__ = [
    'DetectorLabel',
    'DetectorParams',
    'BogolyubovPair',
    'bogolyubov',
    'longitudinal_mode',
    'transverse_mode',
    'effective_longitudinal',
    'unruh_temperature',
    'validate_pair',
    'QuadratureSpec',
    'IntegralEstimate',
    'CorrelationMethod',
    'CorrelationRecord',
    'approximate_record',
    'correlation_record',
    'fig1_sweep',
    'normalization_constant',
    'signal_variance_approx',
    'signal_variance_exact',
    'cross_correlation_exact',
    'ChirpSchedule',
    'chirp_profile',
    'lab_interval',
    'frequency_ratio',
    'table1',
]
