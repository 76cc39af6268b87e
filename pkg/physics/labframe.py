"""Conformal-time detector parameters expressed in the laboratory frame.

On axis, lab time and conformal time are related by t = e^{aτ} / a, so a
detector that is stationary at Ω_do in conformal time sees the chirp
ω(Δt) = Ω_do / (e^{aτ_o} + a Δt) in the lab.
"""
import math
from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import Config
from utils.errors import DomainError
from utils.logger import setup_logger

from .conformal_field import HBAR, K_BOLTZMANN, DetectorLabel

logger = setup_logger(__name__)


class ChirpSchedule(BaseModel):
    """Lab-frame frequency schedule of one detector plus its Table I row.

    Attributes:
        tau_o: Initial conformal time, s
        delta_tau: Conformal detection interval, s
        omega_i: Initial lab frequency, rad/s
        omega_f: Final lab frequency, rad/s
        delta_t: Lab duration of the detection interval, s
        period_f: One optical period at omega_f, 2π/omega_f, s
        a: Scaling rate, rad/s
        omega_do: Peak conformal frequency, rad/s
        samples: (Δt, ω) pairs
        temperature: Background temperature used for ``occupancy``, K
        occupancy: Thermal occupancy n̄ at omega_f and ``temperature``
        label: Future or Past
    """
    model_config = ConfigDict(frozen=True)

    tau_o: float
    delta_tau: float = Field(ge=0)
    omega_i: float = Field(gt=0)
    omega_f: float = Field(gt=0)
    delta_t: float = Field(ge=0)
    period_f: float = Field(gt=0)
    a: float = Field(gt=0)
    omega_do: float = Field(gt=0)
    samples: List[Tuple[float, float]] = Field(default_factory=list)
    temperature: Optional[float] = None
    occupancy: Optional[float] = None
    label: DetectorLabel = DetectorLabel.FUTURE

    @model_validator(mode='after')
    def _check_schedule(self) -> 'ChirpSchedule':
        expected = self.omega_do * math.exp(-self.a * self.tau_o)
        if not math.isclose(self.omega_i, expected, rel_tol=1e-9):
            raise ValueError(f"omega_i={self.omega_i} does not match omega_do*exp(-a*tau_o)={expected}")

        freqs = [omega for _, omega in self.samples]
        steps = zip(freqs, freqs[1:])
        if self.label == DetectorLabel.FUTURE:
            ordered = all(later < earlier for earlier, later in steps)
        else:
            ordered = all(later > earlier for earlier, later in steps)
        if not ordered:
            raise ValueError(f"{self.label.value} chirp samples are not strictly monotone")
        return self


def lab_interval(tau_o: float, delta_tau: float, a: float) -> float:
    """Lab duration (e^{aτ_o} / a)(e^{aΔτ} - 1) of a conformal interval Δτ."""
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}")
    return math.exp(a * tau_o) / a * math.expm1(a * delta_tau)


def frequency_ratio(a: float, delta_tau_T: float) -> float:
    """Final-to-initial lab frequency ratio e^{-aΔτ_T}."""
    if not a > 0 or delta_tau_T < 0:
        raise DomainError(f"need a > 0 and delta_tau_T >= 0 (got {a}, {delta_tau_T})")
    return math.exp(-a * delta_tau_T)


def delta_tau_from_ratio(a: float, omega_i: float, omega_f: float) -> float:
    """Conformal interval producing the frequency sweep omega_i -> omega_f."""
    if not (a > 0 and omega_i > 0 and omega_f > 0):
        raise DomainError("a, omega_i and omega_f must be positive")
    return math.log(omega_i / omega_f) / a


def lab_time(tau: float, a: float) -> float:
    """On-axis lab time t = e^{aτ} / a of conformal time τ."""
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}")
    return math.exp(a * tau) / a


def conformal_time(t: float, a: float) -> float:
    """Inverse of lab_time: τ = ln(a t) / a."""
    if not (a > 0 and t > 0):
        raise DomainError(f"a and t must be positive (got {a}, {t})")
    return math.log(a * t) / a


def initial_lab_time(tau_o: float, a: float) -> float:
    """Lab time t_i at which the Future detector starts (t_f for the Past one)."""
    return lab_time(tau_o, a)


def asymptotic_frequency(omega_do: float, a: float, t: float) -> float:
    """τ_o -> -∞ limit of the chirp, Ω_do / (a t)."""
    if not (omega_do > 0 and a > 0 and t > 0):
        raise DomainError("omega_do, a and t must be positive")
    return omega_do / (a * t)


def thermal_occupancy(omega: float, temperature: float) -> float:
    """Bose-Einstein occupancy 1 / (e^{ħω/k_BT} - 1)."""
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    if temperature < 0:
        raise DomainError(f"temperature must be non-negative, got {temperature}")
    if temperature == 0:
        return 0.0
    return 1.0 / math.expm1(HBAR * omega / (K_BOLTZMANN * temperature))


def _future_frequency(omega_do: float, a: float, tau_o: float, delta_t: float) -> float:
    return omega_do / (math.exp(a * tau_o) + a * delta_t)


def chirp_profile(omega_do: float, a: float, tau_o: float, delta_t_grid: Sequence[float],
                  label: DetectorLabel = DetectorLabel.FUTURE,
                  delta_tau: Optional[float] = None,
                  temperature: Optional[float] = None) -> ChirpSchedule:
    """Sample the lab-frame chirp of a detector.

    The Future detector runs ω(Δt) = Ω_do / (e^{aτ_o} + aΔt) forward from t_i.
    The Past detector runs the same schedule backward from t_f, i.e.
    ω_P(Δt) = ω_F(Δt_total - Δt).

    Args:
        omega_do: Peak conformal frequency, rad/s
        a: Scaling rate, rad/s
        tau_o: Initial conformal time, s
        delta_t_grid: Sample times within [0, Δt_total], s, in any order
        label: Future or Past
        delta_tau: Conformal detection interval; defaults to the Table I value
        temperature: Background temperature for the occupancy column, K

    Returns:
        ChirpSchedule with one sample per distinct time, in ascending Δt
    """
    if not (omega_do > 0 and a > 0):
        raise DomainError("omega_do and a must be positive")
    if delta_tau is None:
        delta_tau = Config.table1_delta_tau()
    label = DetectorLabel(label)

    total = lab_interval(tau_o, delta_tau, a)
    slack = 1e-12 * max(total, 1e-300)
    grid = sorted({float(dt) for dt in delta_t_grid})
    for dt in grid:
        if dt < -slack or dt > total + slack:
            raise DomainError(f"sample time {dt} s lies outside [0, {total}] s")

    if label == DetectorLabel.FUTURE:
        samples = [(dt, _future_frequency(omega_do, a, tau_o, dt)) for dt in grid]
    else:
        samples = [(dt, _future_frequency(omega_do, a, tau_o, total - dt)) for dt in grid]

    omega_i = omega_do * math.exp(-a * tau_o)
    omega_f = omega_i * frequency_ratio(a, delta_tau)
    occupancy = thermal_occupancy(omega_f, temperature) if temperature is not None else None

    return ChirpSchedule(
        tau_o=tau_o,
        delta_tau=delta_tau,
        omega_i=omega_i,
        omega_f=omega_f,
        delta_t=total,
        period_f=2.0 * math.pi / omega_f,
        a=a,
        omega_do=omega_do,
        samples=samples,
        temperature=temperature,
        occupancy=occupancy,
        label=label,
    )


def table1(a: float, omega_do: float, rows: Sequence[float], temperature_grid: Sequence[Optional[float]],
           delta_tau: Optional[float] = None, d: Optional[float] = None,
           n_samples: int = 0) -> List[ChirpSchedule]:
    """Lab-frame parameters for a list of initial conformal times.

    One Δτ_T is used for every row (by default the one that reproduces the
    first printed row's frequency ratio). ``temperature_grid`` pairs a
    temperature with each row; rows without one get no occupancy.

    Args:
        a: Scaling rate, rad/s
        omega_do: Peak conformal frequency, rad/s
        rows: Initial conformal times τ_o, s
        temperature_grid: Temperature per row, K (may be shorter than rows)
        delta_tau: Conformal detection interval Δτ_T, s
        d: Longitudinal width parameter, rad^2/s^2; warns when Δτ_T < 1/sqrt(d)
        n_samples: Chirp samples per row (0 keeps rows compact)

    Returns:
        One ChirpSchedule per τ_o
    """
    if delta_tau is None:
        delta_tau = Config.table1_delta_tau()
    if d is not None and delta_tau < 1.0 / math.sqrt(d):
        logger.warning(
            f"delta_tau_T={delta_tau:.3e} s is shorter than 1/sqrt(d)={1.0 / math.sqrt(d):.3e} s; "
            f"the detector cannot resolve its own bandwidth"
        )

    schedules = []
    for i, tau_o in enumerate(rows):
        temperature = temperature_grid[i] if i < len(temperature_grid) else None
        total = lab_interval(tau_o, delta_tau, a)
        grid = [total * j / (n_samples - 1) for j in range(n_samples)] if n_samples > 1 else []
        schedule = chirp_profile(omega_do, a, tau_o, grid, DetectorLabel.FUTURE,
                                 delta_tau=delta_tau, temperature=temperature)
        logger.debug(
            f"tau_o={tau_o:.4e}: omega_i={schedule.omega_i:.4e} omega_f={schedule.omega_f:.4e} "
            f"delta_t={schedule.delta_t:.4e}"
        )
        schedules.append(schedule)
    return schedules
