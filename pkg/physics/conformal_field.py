"""Mode functions and Bogolyubov coefficients of scaled (conformal-time) detectors.

All rates and frequencies are angular, in rad/s, with hbar = c = 1 inside
the mode algebra. SI constants only enter the temperature conversions.

Width convention: ``DetectorParams.d`` and ``DetectorParams.s`` are the
quantities that sit in the Gaussian exponents, ``exp(-(k - k_do)**2 / (2 d))``,
so they carry rad^2/s^2. Published widths are frequency widths in rad/s;
``DetectorParams.from_widths`` squares them.
"""
import cmath
import math
from enum import Enum
from typing import NamedTuple, Tuple

from pydantic import BaseModel, ConfigDict, Field
from scipy import constants

from config import Config
from utils.errors import DomainError, PairingViolationError
from utils.logger import setup_logger

logger = setup_logger(__name__)

# CODATA values, pinned here and nowhere else
HBAR = constants.hbar
K_BOLTZMANN = constants.k


class DetectorLabel(str, Enum):
    """Which light-cone mode a detector couples to."""
    FUTURE = 'future'
    PAST = 'past'


class DetectorParams(BaseModel):
    """Envelope and phase parameters of one energy-scaled detector.

    Attributes:
        a: Scaling rate, rad/s
        omega_do: Peak conformal frequency, rad/s
        d: Longitudinal width parameter, rad^2/s^2
        s: Transverse width parameter, rad^2/s^2
        epsilon: Longitudinal phase offset, s
        tau: Local-oscillator centre conformal time, s
        label: Future or Past
    """
    model_config = ConfigDict(frozen=True)

    a: float = Field(gt=0)
    omega_do: float = Field(gt=0)
    d: float = Field(gt=0)
    s: float = Field(gt=0)
    epsilon: float = 0.0
    tau: float = 0.0
    label: DetectorLabel = DetectorLabel.FUTURE

    @classmethod
    def from_widths(cls, a: float, omega_do: float, d_width: float, s_width: float,
                    **kwargs) -> 'DetectorParams':
        """Build params from frequency widths in rad/s (d = d_width**2)."""
        return cls(a=a, omega_do=omega_do, d=d_width ** 2, s=s_width ** 2, **kwargs)

    @property
    def d_width(self) -> float:
        return math.sqrt(self.d)

    @property
    def s_width(self) -> float:
        return math.sqrt(self.s)

    def mirror(self) -> 'DetectorParams':
        """Partner detector satisfying the anti-symmetry conditions."""
        other = DetectorLabel.PAST if self.label == DetectorLabel.FUTURE else DetectorLabel.FUTURE
        return self.model_copy(update={'epsilon': -self.epsilon, 'tau': -self.tau, 'label': other})

    def with_omega(self, omega_do: float) -> 'DetectorParams':
        return self.model_copy(update={'omega_do': float(omega_do)})

    @classmethod
    def pair(cls, a: float, omega_do: float, d_width: float, s_width: float,
             epsilon: float = 0.0, tau: float = 0.0) -> Tuple['DetectorParams', 'DetectorParams']:
        """Future/Past pair built from frequency widths.

        Returns:
            (future, past) with epsilon and tau mirrored
        """
        future = cls.from_widths(a, omega_do, d_width, s_width,
                                 epsilon=epsilon, tau=tau, label=DetectorLabel.FUTURE)
        return future, future.mirror()


class BogolyubovPair(NamedTuple):
    """Coefficients relating one conformal mode to one Minkowski mode."""
    a_coef: complex
    b_coef: complex


class EffectiveAmplitude(NamedTuple):
    """Effective longitudinal amplitude, flagged near the k_d1 -> 0 boundary."""
    value: complex
    near_singular: bool


def _positive(name: str, value: float) -> None:
    if not value > 0 or not math.isfinite(value):
        raise DomainError(f"{name} must be positive and finite, got {value}")


def bogolyubov(omega_d: float, k_s1: float, omega_s: float, a: float,
               label: DetectorLabel = DetectorLabel.FUTURE) -> BogolyubovPair:
    """Bogolyubov coefficients of a conformal mode against a Minkowski mode.

    A = N(Omega) / sqrt(2 pi omega_s) * exp(i Omega phi / a)
    B = A * exp(-pi Omega / a)
    with phi = 0.5 * ln((omega_s + k_s1) / (omega_s - k_s1)) and
    |N| = (1 - exp(-2 pi Omega / a))**-0.5. The Past detector carries the
    conjugate phase.

    Args:
        omega_d: Conformal frequency, rad/s
        k_s1: Longitudinal Minkowski wavenumber, rad/s
        omega_s: Minkowski frequency, rad/s
        a: Scaling rate, rad/s
        label: Future or Past detector

    Returns:
        BogolyubovPair(a_coef, b_coef)
    """
    _positive('omega_d', omega_d)
    _positive('omega_s', omega_s)
    _positive('a', a)
    if omega_s <= abs(k_s1):
        raise DomainError(
            f"omega_s must exceed |k_s1| (got omega_s={omega_s}, k_s1={k_s1}); the rapidity diverges"
        )

    ratio = omega_d / a
    # |N| with expm1 so Omega/a -> 0 keeps its precision
    norm = 1.0 / math.sqrt(-math.expm1(-2.0 * math.pi * ratio))
    rapidity = 0.5 * math.log((omega_s + k_s1) / (omega_s - k_s1))

    sign = 1.0 if label == DetectorLabel.FUTURE else -1.0
    phase = cmath.exp(1j * sign * ratio * rapidity)
    magnitude = norm / math.sqrt(2.0 * math.pi * omega_s)

    a_coef = magnitude * phase
    b_coef = a_coef * math.exp(-math.pi * ratio)
    return BogolyubovPair(a_coef=a_coef, b_coef=b_coef)


def longitudinal_mode(k_d1: float, params: DetectorParams) -> complex:
    """Longitudinal Gaussian envelope f_D(k_d1).

    (d pi)**-1/4 * exp(-(k_d1 - k_do)**2 / (2 d)) * exp(i epsilon k_d1);
    |f_D|**2 integrates to one over the real line.
    """
    envelope = (params.d * math.pi) ** -0.25 * math.exp(-(k_d1 - params.omega_do) ** 2 / (2.0 * params.d))
    if params.epsilon == 0.0:
        return complex(envelope, 0.0)
    return envelope * cmath.exp(1j * params.epsilon * k_d1)


def transverse_mode(k_perp_sq: float, params: DetectorParams) -> float:
    """Transverse Gaussian envelope g_S(k_perp).

    Each transverse axis carries (s pi)**-1/4, so the amplitude is
    (s pi)**-1/2 * exp(-k_perp_sq / (2 s)) and |g_S|**2 integrates to one
    over the transverse plane (2 pi k dk).
    """
    if k_perp_sq < 0:
        raise DomainError(f"k_perp_sq must be non-negative, got {k_perp_sq}")
    return math.exp(-k_perp_sq / (2.0 * params.s)) / math.sqrt(params.s * math.pi)


def effective_longitudinal(omega_bar: float, k_perp_sq: float, params: DetectorParams,
                           K: float) -> EffectiveAmplitude:
    """Effective longitudinal amplitude f̄_D(Ω̄, k⊥).

    sqrt(K) * Ω̄ / sqrt(Ω̄² - k⊥²) * (f_D(k_d1) + f_D(-k_d1)) with
    k_d1 = sqrt(Ω̄² - k⊥²). Below the guard Ω̄² - k⊥² < SINGULAR_GUARD * Ω̄²
    the denominator is clamped and the result flagged; integrals must use the
    u = k_d1 substitution instead of sampling this directly.

    Args:
        omega_bar: Minkowski frequency Ω̄, rad/s
        k_perp_sq: Squared transverse wavenumber, rad^2/s^2
        params: Detector parameters
        K: Normalization constant

    Returns:
        EffectiveAmplitude(value, near_singular)
    """
    if k_perp_sq < 0:
        raise DomainError(f"k_perp_sq must be non-negative, got {k_perp_sq}")
    if omega_bar * omega_bar < k_perp_sq:
        raise DomainError(f"omega_bar={omega_bar} is below |k_perp|={math.sqrt(k_perp_sq)}")
    if omega_bar == 0.0:
        return EffectiveAmplitude(0j, True)

    gap = omega_bar * omega_bar - k_perp_sq
    guard = Config.SINGULAR_GUARD * omega_bar * omega_bar
    near_singular = gap < guard
    k_d1 = math.sqrt(gap)

    prefactor = omega_bar / math.sqrt(max(gap, guard))
    value = math.sqrt(K) * prefactor * (longitudinal_mode(k_d1, params) + longitudinal_mode(-k_d1, params))
    return EffectiveAmplitude(value, near_singular)


def unruh_temperature(a: float) -> float:
    """Temperature of the thermal bath seen by a detector with scaling rate a.

    Args:
        a: Scaling rate, rad/s

    Returns:
        a * hbar / (2 pi k_B) in kelvin
    """
    if a < 0:
        raise DomainError(f"a must be non-negative, got {a}")
    return a * HBAR / (2.0 * math.pi * K_BOLTZMANN)


def thermal_quadrature_variance(omega: float, temperature: float) -> float:
    """Vacuum-normalized quadrature variance of a thermal mode, coth(hbar w / 2 k T).

    At the Unruh temperature of ``a`` this equals the approximate detector
    variance coth(pi omega / a).
    """
    _positive('omega', omega)
    if temperature < 0:
        raise DomainError(f"temperature must be non-negative, got {temperature}")
    if temperature == 0:
        return 1.0
    x = HBAR * omega / (K_BOLTZMANN * temperature)
    return 1.0 + 2.0 / math.expm1(x)


def validate_pair(future: DetectorParams, past: DetectorParams, rel_tol: float = 1e-12) -> None:
    """Check the anti-symmetry conditions of a Future/Past detector pair.

    Raises:
        PairingViolationError: when labels, envelopes or phase offsets do not mirror
    """
    problems = []
    if future.label != DetectorLabel.FUTURE or past.label != DetectorLabel.PAST:
        problems.append(f"labels are ({future.label.value}, {past.label.value}), expected (future, past)")

    for name in ('a', 'omega_do', 'd', 's'):
        f_val, p_val = getattr(future, name), getattr(past, name)
        if not math.isclose(f_val, p_val, rel_tol=rel_tol):
            problems.append(f"{name} differs ({f_val} vs {p_val})")

    if not math.isclose(future.epsilon, -past.epsilon, rel_tol=rel_tol, abs_tol=1e-30):
        problems.append(f"epsilon_F={future.epsilon} is not -epsilon_P={-past.epsilon}")
    if not math.isclose(future.tau, -past.tau, rel_tol=rel_tol, abs_tol=1e-30):
        problems.append(f"tau_F={future.tau} is not -tau_P={-past.tau}")

    if problems:
        raise PairingViolationError("Invalid detector pairing: " + "; ".join(problems))
