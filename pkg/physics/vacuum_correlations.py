"""Vacuum correlations seen by a Future/Past pair of scaled homodyne detectors.

Exact values come from the 2-D integrals over the transverse wavenumber k
(polar, 2 pi k dk) and u = k_d1 = sqrt(Ω̄² - k²), where the measure
dΩ̄ = (u / Ω̄) du turns the Ω̄ / sqrt(Ω̄² - k²) prefactor of the effective
envelope into Ω̄ u / u². Both branches k_d1 = ±u contribute equally, so the
normalization K is 1 / (2 I) with I the folded integral. The approximate
values are the narrow-envelope closed forms.

Correlation variances use (V_F + V_P ± 2 C) / 2 so that uncorrelated vacuum
gives exactly one.
"""
import math
from concurrent.futures import ProcessPoolExecutor
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from config import Config
from utils.errors import DomainError
from utils.logger import setup_logger

from .conformal_field import DetectorParams, longitudinal_mode, transverse_mode, validate_pair
from .quadrature import IntegralEstimate, QuadratureSpec, integrate_2d

logger = setup_logger(__name__)

# Tolerance on V >= 1 for quadrature results
_VARIANCE_FLOOR_TOL = 1e-9


class CorrelationMethod(str, Enum):
    EXACT = 'exact'
    APPROXIMATE = 'approximate'


class CorrelationRecord(BaseModel):
    """Variances, cross terms and witnesses at one peak frequency Ω_do."""
    model_config = ConfigDict(frozen=True)

    omega_do: float
    v_f: float
    v_p: float
    c0: float
    cpi2: float
    dx_minus_0: float
    dx_plus_0: float
    dx_minus_pi2: float
    dx_plus_pi2: float
    purity_minus: float
    purity_plus: float
    entangled: bool
    method: CorrelationMethod
    error_bound: Optional[float] = None

    @model_validator(mode='after')
    def _check_moments(self) -> 'CorrelationRecord':
        if self.v_f < 1.0 - _VARIANCE_FLOOR_TOL or self.v_p < 1.0 - _VARIANCE_FLOOR_TOL:
            raise ValueError(f"variances below shot noise: v_f={self.v_f}, v_p={self.v_p}")
        if self.entangled != (self.dx_minus_0 * self.dx_plus_pi2 < 1.0):
            raise ValueError("entangled flag disagrees with the correlation variances")
        return self

    @classmethod
    def from_moments(cls, omega_do: float, v_f: float, v_p: float, c0: float, cpi2: float,
                     method: CorrelationMethod, error_bound: Optional[float] = None) -> 'CorrelationRecord':
        """Assemble a record from the two variances and the two cross terms."""
        dx_minus_0 = (v_f + v_p - 2.0 * c0) / 2.0
        dx_plus_0 = (v_f + v_p + 2.0 * c0) / 2.0
        dx_minus_pi2 = (v_f + v_p - 2.0 * cpi2) / 2.0
        dx_plus_pi2 = (v_f + v_p + 2.0 * cpi2) / 2.0
        return cls(
            omega_do=omega_do,
            v_f=v_f,
            v_p=v_p,
            c0=c0,
            cpi2=cpi2,
            dx_minus_0=dx_minus_0,
            dx_plus_0=dx_plus_0,
            dx_minus_pi2=dx_minus_pi2,
            dx_plus_pi2=dx_plus_pi2,
            purity_minus=dx_minus_0 * dx_minus_pi2,
            purity_plus=dx_plus_0 * dx_plus_pi2,
            entangled=bool(dx_minus_0 * dx_plus_pi2 < 1.0),
            method=method,
            error_bound=error_bound,
        )


# ============================================================
# Thermal kernels
# ============================================================

def _coth_csch(x: float) -> Tuple[float, float]:
    """coth(x) and 1/sinh(x) for x > 0 without overflow."""
    em = math.exp(-x)
    denom = -math.expm1(-2.0 * x)
    return 1.0 + 2.0 * em * em / denom, 2.0 * em / denom


def _check_rates(omega_do: float, a: float) -> None:
    if not omega_do > 0 or not a > 0:
        raise DomainError(f"omega_do and a must be positive (got {omega_do}, {a})")


def signal_variance_approx(omega_do: float, a: float) -> float:
    """Narrow-envelope variance (e^{2πΩ/a} + 1) / (e^{2πΩ/a} - 1) = coth(πΩ/a)."""
    _check_rates(omega_do, a)
    return _coth_csch(math.pi * omega_do / a)[0]


def cross_correlation_approx(omega_do: float, a: float) -> float:
    """Narrow-envelope cross term at φ = 0, 2e^{πΩ/a} / (e^{2πΩ/a} - 1) = 1/sinh(πΩ/a)."""
    _check_rates(omega_do, a)
    return _coth_csch(math.pi * omega_do / a)[1]


def approximate_record(omega_do: float, a: float) -> CorrelationRecord:
    """Closed-form record: V = coth(πΩ/a), C(0) = -C(π/2) = csch(πΩ/a)."""
    _check_rates(omega_do, a)
    v, c = _coth_csch(math.pi * omega_do / a)
    return CorrelationRecord.from_moments(omega_do, v, v, c, -c, CorrelationMethod.APPROXIMATE)


def record_from_gain(gain: float) -> CorrelationRecord:
    """Record of a lossless EPR source with gain G (V = 2G - 1, C = 2 sqrt(G(G-1))).

    ``omega_do`` is set to zero: the record is not tied to a detector.
    """
    if gain < 1:
        raise DomainError(f"gain must be >= 1, got {gain}")
    v = 2.0 * gain - 1.0
    c = 2.0 * math.sqrt(gain * (gain - 1.0))
    return CorrelationRecord.from_moments(0.0, v, v, c, -c, CorrelationMethod.APPROXIMATE)


# ============================================================
# Exact integrals
# ============================================================

class _Measure:
    """Integrand factory for the folded (u, k) measure of one or two detectors.

    Components are selected by name:
        'w_f', 'w_p'          normalization weights
        'w_f_coth', 'w_p_coth' variance numerators
        'cross_csch'          cross-term numerator at φ = 0
    """

    def __init__(self, future: DetectorParams, past: Optional[DetectorParams],
                 components: Sequence[str], scale: float = 1.0):
        self.future = future
        self.past = past if past is not None else future
        self.components = tuple(components)
        self.scale = scale
        self.guard = Config.SINGULAR_GUARD
        self.pi_over_a = math.pi / future.a
        self.tau_diff = self.future.tau - self.past.tau
        self._zeros = np.zeros(len(self.components))

    def __call__(self, u: float, k: float) -> np.ndarray:
        omega_bar = math.hypot(u, k)
        if omega_bar == 0.0 or k == 0.0:
            return self._zeros

        jac = omega_bar * u / max(u * u, self.guard * omega_bar * omega_bar)
        radial = 2.0 * math.pi * k * jac * self.scale

        env_f = longitudinal_mode(u, self.future) + longitudinal_mode(-u, self.future)
        g_f = transverse_mode(k * k, self.future)
        w_f = radial * abs(env_f) ** 2 * g_f * g_f

        if self.past is self.future:
            env_p, g_p, w_p = env_f, g_f, w_f
        else:
            env_p = longitudinal_mode(u, self.past) + longitudinal_mode(-u, self.past)
            g_p = transverse_mode(k * k, self.past)
            w_p = radial * abs(env_p) ** 2 * g_p * g_p

        coth, csch = _coth_csch(self.pi_over_a * omega_bar)

        out = np.empty(len(self.components))
        for i, name in enumerate(self.components):
            if name == 'w_f':
                out[i] = w_f
            elif name == 'w_p':
                out[i] = w_p
            elif name == 'w_f_coth':
                out[i] = w_f * coth
            elif name == 'w_p_coth':
                out[i] = w_p * coth
            elif name == 'cross_csch':
                product = env_f * env_p * g_f * g_p
                if self.tau_diff:
                    product *= complex(math.cos(omega_bar * self.tau_diff), -math.sin(omega_bar * self.tau_diff))
                out[i] = radial * product.real * csch
            else:
                raise ValueError(f"Unknown component {name}")
        return out


def _integrate(measure: _Measure, spec: QuadratureSpec) -> IntegralEstimate:
    params = measure.future
    half_u = spec.n_sigma * math.sqrt(params.d)
    u_lo = max(0.0, params.omega_do - half_u)
    u_hi = params.omega_do + half_u
    k_hi = spec.n_sigma * math.sqrt(params.s)

    cutoff = math.sqrt(measure.guard / (1.0 - measure.guard))

    def inner_range(k: float) -> Tuple[float, float]:
        return u_lo, u_hi

    def inner_points(k: float) -> List[float]:
        # log region below u ~ k, guard kink at u_c, envelope peak
        return [cutoff * k, k, params.omega_do]

    return integrate_2d(
        measure, (0.0, k_hi), inner_range, len(measure.components), spec,
        inner_points=inner_points,
    )


def normalization_constant(params: DetectorParams, spec: Optional[QuadratureSpec] = None) -> IntegralEstimate:
    """Normalization K of the effective envelope.

    Args:
        params: Detector parameters
        spec: Quadrature tolerances; defaults from Config

    Returns:
        IntegralEstimate whose value is K and error its propagated bound

    Raises:
        QuadratureBudgetExceeded: when the integral cannot meet the tolerance
    """
    spec = spec or QuadratureSpec()
    result = _integrate(_Measure(params, None, ('w_f',)), spec)
    folded = float(result.value[0])
    k_value = 1.0 / (2.0 * folded)
    k_error = result.error / (2.0 * folded * folded)
    logger.debug(f"K={k_value:.12e} +/- {k_error:.2e} for omega_do={params.omega_do:.4e}")
    return IntegralEstimate(k_value, k_error, result.n_evals)


def measure_self_test(params: DetectorParams, spec: Optional[QuadratureSpec] = None) -> IntegralEstimate:
    """Integrate the normalized measure |f̄_D g_S|² with K applied; should return 1."""
    spec = spec or QuadratureSpec()
    k_est = normalization_constant(params, spec)
    result = _integrate(_Measure(params, None, ('w_f',), scale=2.0 * k_est.value), spec)
    return IntegralEstimate(float(result.value[0]), result.error, k_est.n_evals + result.n_evals)


def signal_variance_exact(params: DetectorParams, spec: Optional[QuadratureSpec] = None) -> float:
    """Vacuum-normalized variance of one detector from the exact integral.

    Raises:
        QuadratureBudgetExceeded: when the integral cannot meet the tolerance
    """
    spec = spec or QuadratureSpec()
    result = _integrate(_Measure(params, None, ('w_f', 'w_f_coth')), spec)
    weight, numerator = result.value
    return float(numerator / weight)


def _phi_sign(phi: float) -> float:
    if math.isclose(phi, 0.0, abs_tol=1e-12):
        return 1.0
    if math.isclose(phi, math.pi / 2.0, rel_tol=1e-12):
        return -1.0
    raise DomainError(f"phi must be 0 or pi/2, got {phi}")


def cross_correlation_exact(future: DetectorParams, past: DetectorParams, phi: float,
                            spec: Optional[QuadratureSpec] = None) -> float:
    """Normalized cross term between the Future and Past detectors at phase φ.

    Args:
        future: Future detector
        past: Past detector, mirrored from ``future``
        phi: 0 or π/2
        spec: Quadrature tolerances

    Returns:
        C(φ); C(π/2) = -C(0)

    Raises:
        PairingViolationError: when the pair breaks the anti-symmetry conditions
        QuadratureBudgetExceeded: when the integral cannot meet the tolerance
    """
    sign = _phi_sign(phi)
    validate_pair(future, past)
    spec = spec or QuadratureSpec()
    result = _integrate(_Measure(future, past, ('w_f', 'w_p', 'cross_csch')), spec)
    w_f, w_p, cross = result.value
    return float(sign * cross / math.sqrt(w_f * w_p))


def correlation_record(future: DetectorParams, past: DetectorParams,
                       spec: Optional[QuadratureSpec] = None,
                       method: CorrelationMethod = CorrelationMethod.EXACT) -> CorrelationRecord:
    """Correlation variances, purity products and entanglement flag of a pair.

    The exact method evaluates both variances and the cross term in one
    nested integration.
    """
    validate_pair(future, past)
    method = CorrelationMethod(method)

    if method == CorrelationMethod.APPROXIMATE:
        return approximate_record(future.omega_do, future.a)

    spec = spec or QuadratureSpec()
    measure = _Measure(future, past, ('w_f', 'w_f_coth', 'w_p', 'w_p_coth', 'cross_csch'))
    result = _integrate(measure, spec)
    w_f, w_f_coth, w_p, w_p_coth, cross = result.value

    v_f = w_f_coth / w_f
    v_p = w_p_coth / w_p
    c0 = cross / math.sqrt(w_f * w_p)
    # relative error of the weakest normalization, carried to the moments
    error_bound = result.error / min(w_f, w_p) * max(v_f, v_p)

    logger.debug(
        f"omega_do={future.omega_do:.4e}: v_f={v_f:.10f} v_p={v_p:.10f} c0={c0:.10f} "
        f"({result.n_evals} evaluations)"
    )
    return CorrelationRecord.from_moments(
        future.omega_do, v_f, v_p, c0, -c0, CorrelationMethod.EXACT, error_bound=error_bound,
    )


def _record_task(args) -> CorrelationRecord:
    future, past, spec, method = args
    return correlation_record(future, past, spec, method)


def fig1_sweep(base: Tuple[DetectorParams, DetectorParams], omega_grid: Sequence[float],
               spec: Optional[QuadratureSpec] = None,
               method: CorrelationMethod = CorrelationMethod.EXACT,
               workers: Optional[int] = None) -> List[CorrelationRecord]:
    """Correlation records along a grid of peak frequencies at fixed (a, d, s).

    Args:
        base: (future, past) pair; its omega_do is replaced per grid point
        omega_grid: Peak frequencies, rad/s
        spec: Quadrature tolerances
        method: exact or approximate
        workers: Process count; results keep grid order

    Returns:
        One record per grid point
    """
    if len(omega_grid) == 0:
        raise ValueError("omega_grid must not be empty")

    future, past = base
    validate_pair(future, past)
    spec = spec or QuadratureSpec()
    method = CorrelationMethod(method)
    workers = workers or Config.SWEEP_WORKERS

    tasks = [(future.with_omega(omega), past.with_omega(omega), spec, method) for omega in omega_grid]
    logger.info(f"Sweeping {len(tasks)} points ({method.value}, workers={workers})")

    if workers > 1 and method == CorrelationMethod.EXACT and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_record_task, tasks))
    return [_record_task(task) for task in tasks]
