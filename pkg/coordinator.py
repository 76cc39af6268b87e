"""Reproduction coordinator - runs the figure, table and protocol workflows."""
import math
import time
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from config import Config
from physics import (
    CorrelationMethod,
    DetectorParams,
    QuadratureSpec,
    approximate_record,
    fig1_sweep,
    table1,
)
from physics.vacuum_correlations import record_from_gain
from qkd import (
    ChannelParams,
    ProtocolConfig,
    TwoModeCovariance,
    Transcript,
    cm_from_correlations,
    fig3_sweep,
    run_protocol,
)
from utils import setup_logger

logger = setup_logger(__name__)

FIG1_COLUMNS = ['omega_do', 'squeeze_exact', 'squeeze_approx', 'purity_exact', 'purity_approx']
TABLE1_COLUMNS = ['tau_o_s', 'omega_i_rad_s', 'omega_f_rad_s', 'delta_t_s', 'n_bar_at_Tmax', 'period_f_s']
FIG3_COLUMNS = ['curve', 'z_m', 'eta', 'i_ab', 'chi_be', 'key_rate']


def linear_grid(start: float, stop: float, points: int) -> List[float]:
    """Evenly spaced grid; a single point yields [start]."""
    if points < 1:
        raise ValueError(f"points must be positive, got {points}")
    return [float(x) for x in np.linspace(start, stop, points)]


def log_grid(start: float, stop: float, points: int) -> List[float]:
    """Logarithmically spaced grid; a single point yields [start]."""
    if points < 1:
        raise ValueError(f"points must be positive, got {points}")
    if not (start > 0 and stop > 0):
        raise ValueError("log grid bounds must be positive")
    return [float(x) for x in np.geomspace(start, stop, points)]


class ReproductionCoordinator:
    """Runs each reproduction workflow and returns its table or transcript.

    Args:
        spec: Quadrature tolerances for exact integrals
        workers: Process count for Fig. 1 sweeps
        beta_rec: Reconciliation efficiency for key rates
    """

    def __init__(self, spec: Optional[QuadratureSpec] = None, workers: Optional[int] = None,
                 beta_rec: Optional[float] = None):
        Config.validate()
        self.spec = spec or QuadratureSpec()
        self.workers = workers or Config.SWEEP_WORKERS
        self.beta_rec = Config.BETA_REC if beta_rec is None else beta_rec
        logger.info(
            f"Reproduction coordinator ready (rel_tol={self.spec.rel_tol:g}, "
            f"workers={self.workers}, beta_rec={self.beta_rec})"
        )

    # ============================================================
    # Fig. 1
    # ============================================================

    def run_fig1(self, a: float, d_width: float, s_width: float, omega_grid: Sequence[float],
                 method: str = 'exact') -> pd.DataFrame:
        """Squeezing variance and purity product against the peak frequency.

        Args:
            a: Scaling rate, rad/s
            d_width: Longitudinal frequency width, rad/s
            s_width: Transverse frequency width, rad/s
            omega_grid: Peak frequencies, rad/s
            method: 'exact' (both column sets) or 'approximate' (exact columns left empty)

        Returns:
            DataFrame with FIG1_COLUMNS
        """
        method = CorrelationMethod(method)
        if len(omega_grid) == 0:
            raise ValueError("omega_grid must not be empty")
        run_start = time.monotonic()
        try:
            logger.info(f"Step 1: Building the detector pair (a={a:.4e}, d={d_width:.4e}, s={s_width:.4e})")
            base = DetectorParams.pair(a, omega_grid[0], d_width, s_width)

            logger.info(f"Step 2: Closed-form records for {len(omega_grid)} points")
            approx = [approximate_record(omega, a) for omega in omega_grid]

            if method == CorrelationMethod.EXACT:
                logger.info("Step 3: Exact records by nested quadrature")
                exact = fig1_sweep(base, omega_grid, self.spec, CorrelationMethod.EXACT, self.workers)
            else:
                logger.info("Step 3: Skipping exact quadrature (approximate method)")
                exact = [None] * len(omega_grid)
        except Exception as e:
            logger.error(f"Fig. 1 sweep failed: {e}", exc_info=True)
            raise

        rows = []
        for omega, ex, ap in zip(omega_grid, exact, approx):
            rows.append({
                'omega_do': float(omega),
                'squeeze_exact': ex.dx_minus_0 if ex else math.nan,
                'squeeze_approx': ap.dx_minus_0,
                'purity_exact': ex.purity_minus if ex else math.nan,
                'purity_approx': ap.purity_minus,
            })
        logger.info(f"Fig. 1 sweep completed in {time.monotonic() - run_start:.1f}s")
        return pd.DataFrame(rows, columns=FIG1_COLUMNS)

    def run_fig1_preset(self, preset: str, method: str = 'exact') -> pd.DataFrame:
        if preset not in Config.FIG1_PRESETS:
            raise ValueError(f"Unknown Fig. 1 preset '{preset}' (choose from {sorted(Config.FIG1_PRESETS)})")
        p = Config.FIG1_PRESETS[preset]
        grid = linear_grid(p['omega_min'], p['omega_max'], p['points'])
        return self.run_fig1(p['a'], p['d_width'], p['s_width'], grid, method)

    # ============================================================
    # Table I
    # ============================================================

    def run_table1(self, a: Optional[float] = None, omega_do: Optional[float] = None,
                   extra_tau_o: Sequence[float] = (), delta_tau: Optional[float] = None) -> pd.DataFrame:
        """Lab-frame parameters for the preset rows plus any extra τ_o values.

        Extra rows carry no T_max, so their occupancy cell is empty.
        """
        defaults = Config.TABLE1_DEFAULTS
        a = defaults['a'] if a is None else a
        omega_do = defaults['omega_do'] if omega_do is None else omega_do
        rows = list(defaults['tau_o']) + [float(t) for t in extra_tau_o]

        logger.info(f"Step 1: Lab-frame schedules for {len(rows)} rows (a={a:.4e}, omega_do={omega_do:.4e})")
        schedules = table1(a, omega_do, rows, list(defaults['t_max']), delta_tau=delta_tau,
                           d=defaults['d_width'] ** 2)

        frame = pd.DataFrame([{
            'tau_o_s': s.tau_o,
            'omega_i_rad_s': s.omega_i,
            'omega_f_rad_s': s.omega_f,
            'delta_t_s': s.delta_t,
            'n_bar_at_Tmax': s.occupancy if s.occupancy is not None else math.nan,
            'period_f_s': s.period_f,
        } for s in schedules], columns=TABLE1_COLUMNS)
        logger.info(f"Table I: {len(frame)} rows")
        return frame

    # ============================================================
    # Fig. 3
    # ============================================================

    def run_fig3(self, curves: Optional[List[Dict]] = None, z_grid: Optional[Sequence[float]] = None,
                 geometry: Optional[Dict[str, float]] = None, excess: float = 0.0) -> pd.DataFrame:
        """Key rate against distance for each configured source.

        Args:
            curves: Dicts with 'label' and either ('omega_do', 'a') or 'gain'
            z_grid: Distances, m
            geometry: {'waist': W, 'wavelength': λ}, m
            excess: Excess noise on Bob's mode

        Returns:
            DataFrame with FIG3_COLUMNS, curves stacked in order
        """
        curves = curves or Config.FIG3_CURVES
        geometry = geometry or Config.FIG3_GEOMETRY
        if z_grid is None:
            r = Config.FIG3_Z_RANGE
            z_grid = log_grid(r['z_min'], r['z_max'], r['points'])

        rows = []
        for i, curve in enumerate(curves, start=1):
            label = curve.get('label', f"curve{i}")
            logger.info(f"Step {i}: Key-rate sweep for curve '{label}' over {len(z_grid)} distances")
            if 'gain' in curve:
                source = record_from_gain(curve['gain'])
            else:
                source = approximate_record(curve['omega_do'], curve['a'])

            try:
                results = fig3_sweep(source, (geometry['waist'], geometry['wavelength']), z_grid,
                                     self.beta_rec, excess)
            except Exception as e:
                logger.error(f"Fig. 3 sweep failed for curve '{label}': {e}", exc_info=True)
                raise

            for z, result in results:
                eta = ChannelParams(waist=geometry['waist'], wavelength=geometry['wavelength'], distance=z).eta
                rows.append({
                    'curve': label,
                    'z_m': z,
                    'eta': eta,
                    'i_ab': result.i_ab,
                    'chi_be': result.chi_be,
                    'key_rate': result.key_rate,
                })
        return pd.DataFrame(rows, columns=FIG3_COLUMNS)

    # ============================================================
    # Protocol
    # ============================================================

    @staticmethod
    def protocol_state(omega_do: Optional[float] = None, a: Optional[float] = None,
                       gain: Optional[float] = None, eta: Optional[float] = None,
                       distance: Optional[float] = None, excess: float = 0.0,
                       geometry: Optional[Dict[str, float]] = None) -> TwoModeCovariance:
        """Joint state of one time window for the protocol.

        The source is the detected vacuum at (omega_do, a), an EPR source of
        the given gain, or nothing (uncorrelated vacuum). Bob's channel is a
        bare transmissivity or the diffraction channel at ``distance``.
        """
        if omega_do is not None or a is not None:
            if omega_do is None or a is None:
                raise ValueError("a vacuum source needs both omega_do and a")
            record = approximate_record(omega_do, a)
        elif gain is not None:
            record = record_from_gain(gain)
        else:
            if eta is not None or distance is not None or excess:
                logger.warning("No source given; channel settings are ignored for the uncorrelated state")
            return TwoModeCovariance.identity()

        if distance is not None:
            geometry = geometry or Config.FIG3_GEOMETRY
            channel = ChannelParams(waist=geometry['waist'], wavelength=geometry['wavelength'], distance=distance)
        else:
            channel = ChannelParams(eta=1.0 if eta is None else eta)
        return cm_from_correlations(record, channel, excess)

    def run_protocol(self, cm: TwoModeCovariance, seed: int, n_windows: Optional[int] = None,
                     reveal_fraction: Optional[float] = None,
                     scheduler: str = 'interleaved') -> Transcript:
        """Run the two-party protocol once on ``cm``."""
        fields = {'cm': cm, 'seed': seed, 'beta_rec': self.beta_rec, 'scheduler': scheduler}
        if n_windows is not None:
            fields['n_windows'] = n_windows
        if reveal_fraction is not None:
            fields['reveal_fraction'] = reveal_fraction
        config = ProtocolConfig(**fields)

        run_start = time.monotonic()
        try:
            transcript = run_protocol(config)
        except Exception as e:
            logger.error(f"Protocol run failed: {e}", exc_info=True)
            raise
        logger.info(f"Protocol run completed in {time.monotonic() - run_start:.1f}s")
        return transcript
