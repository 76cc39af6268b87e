"""Gaussian two-mode states, the diffraction channel and asymptotic key rates.

Covariance matrices use the (x_A, p_A, x_B, p_B) ordering with vacuum
variance 1. Key rates are reverse-reconciliation homodyne rates against
collective Gaussian attacks, in bits per sifted symbol.
"""
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator
from scipy.special import xlogy

from config import Config
from physics.vacuum_correlations import CorrelationRecord, approximate_record
from utils.errors import DegenerateStateError, DomainError, NumericalError, UnphysicalStateError
from utils.logger import setup_logger

logger = setup_logger(__name__)

PHYSICALITY_TOL = 1e-9
SYMMETRY_TOL = 1e-12


class TwoModeCovariance(BaseModel):
    """4x4 real symmetric covariance matrix, ordering (x_A, p_A, x_B, p_B)."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray

    @field_validator('matrix', mode='before')
    @classmethod
    def _as_array(cls, value):
        matrix = np.array(value, dtype=float)
        if matrix.shape != (4, 4):
            raise ValueError(f"covariance matrix must be 4x4, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("covariance matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(matrix))))
        if np.max(np.abs(matrix - matrix.T)) > SYMMETRY_TOL * scale:
            raise ValueError("covariance matrix is not symmetric")
        matrix = 0.5 * (matrix + matrix.T)
        matrix.setflags(write=False)
        return matrix

    @field_serializer('matrix')
    def _serialize_matrix(self, matrix: np.ndarray) -> List[List[float]]:
        return matrix.tolist()

    @property
    def block_a(self) -> np.ndarray:
        return self.matrix[:2, :2]

    @property
    def block_b(self) -> np.ndarray:
        return self.matrix[2:, 2:]

    @property
    def block_c(self) -> np.ndarray:
        return self.matrix[:2, 2:]

    def is_physical(self, tol: float = PHYSICALITY_TOL) -> bool:
        try:
            return min(symplectic_eigenvalues(self)) >= 1.0 - tol
        except NumericalError:
            return False

    @classmethod
    def identity(cls) -> 'TwoModeCovariance':
        return cls(matrix=np.eye(4))


class ChannelParams(BaseModel):
    """Transmissivity of the channel, given directly or by beam geometry.

    With geometry, eta = min(1, (z0 / z)**2) and z0 = π W² / λ.
    """
    model_config = ConfigDict(frozen=True)

    eta: Optional[float] = Field(default=None, gt=0, le=1)
    waist: Optional[float] = Field(default=None, gt=0)
    wavelength: Optional[float] = Field(default=None, gt=0)
    distance: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode='before')
    @classmethod
    def _derive_eta(cls, data):
        if isinstance(data, dict) and data.get('eta') is None:
            geometry = (data.get('waist'), data.get('wavelength'), data.get('distance'))
            if any(value is None for value in geometry):
                raise ValueError("give either eta or the full (waist, wavelength, distance) geometry")
            if all(value > 0 for value in geometry):
                data = {**data, 'eta': rayleigh_eta(*geometry)}
        return data


class KeyRateResult(BaseModel):
    """Asymptotic key rate of one covariance matrix."""
    model_config = ConfigDict(frozen=True)

    i_ab: float
    chi_be: float = Field(ge=0)
    key_rate: float
    nu: List[float]
    nu_conditional: List[float]
    beta_rec: float = Field(gt=0, le=1)

    @model_validator(mode='after')
    def _check_balance(self) -> 'KeyRateResult':
        expected = self.beta_rec * self.i_ab - self.chi_be
        if not math.isclose(self.key_rate, expected, rel_tol=1e-12, abs_tol=1e-15):
            raise ValueError(f"key_rate {self.key_rate} != beta_rec*i_ab - chi_be = {expected}")
        return self


# ============================================================
# EPR source and channel closed forms
# ============================================================

def epr_correlation(gain: float) -> float:
    """Correlation variance (√G - √(G-1))² of an EPR source with gain G."""
    if gain < 1:
        raise DomainError(f"gain must be >= 1, got {gain}")
    # 1 / (√G + √(G-1))² avoids the cancellation at large G
    return 1.0 / (math.sqrt(gain) + math.sqrt(gain - 1.0)) ** 2


def effective_gain(omega_do: float, a: float) -> float:
    """Gain of the EPR source equivalent to the vacuum seen by the detectors.

    G = e^{2πΩ/a} / (e^{2πΩ/a} - 1)
    """
    if not (omega_do > 0 and a > 0):
        raise DomainError(f"omega_do and a must be positive (got {omega_do}, {a})")
    return 1.0 / -math.expm1(-2.0 * math.pi * omega_do / a)


def lossy_correlation(gain: float, eta: float) -> float:
    """EPR correlation variance after transmission eta: η(√G - √(G-1))² + 1 - η."""
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"eta must lie in [0, 1], got {eta}")
    return eta * epr_correlation(gain) + 1.0 - eta


def rayleigh_length(waist: float, wavelength: float) -> float:
    """Rayleigh length z0 = π W² / λ in metres."""
    if not (waist > 0 and wavelength > 0):
        raise DomainError("waist and wavelength must be positive")
    return math.pi * waist ** 2 / wavelength


def rayleigh_eta(waist: float, wavelength: float, distance: float) -> float:
    """Far-field diffraction transmissivity min(1, (z0 / z)²)."""
    if not distance > 0:
        raise DomainError(f"distance must be positive, got {distance}")
    z0 = rayleigh_length(waist, wavelength)
    return min(1.0, (z0 / distance) ** 2)


# ============================================================
# Covariance-matrix toolbox
# ============================================================

def tmsv_covariance(variance: float) -> TwoModeCovariance:
    """Two-mode squeezed vacuum with local variance V (= cosh 2r)."""
    if variance < 1:
        raise DomainError(f"variance must be >= 1, got {variance}")
    c = math.sqrt(variance * variance - 1.0)
    return TwoModeCovariance(matrix=[
        [variance, 0.0, c, 0.0],
        [0.0, variance, 0.0, -c],
        [c, 0.0, variance, 0.0],
        [0.0, -c, 0.0, variance],
    ])


def apply_loss(cm: TwoModeCovariance, eta: float, mode: str = 'b') -> TwoModeCovariance:
    """Send one mode through a beamsplitter of transmissivity eta (vacuum at the other port).

    Args:
        cm: Input state
        eta: Transmissivity in [0, 1]
        mode: 'a' or 'b'
    """
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"eta must lie in [0, 1], got {eta}")
    if mode not in ('a', 'b'):
        raise ValueError(f"mode must be 'a' or 'b', got {mode}")

    scale = np.ones(4)
    noise = np.zeros(4)
    idx = slice(2, 4) if mode == 'b' else slice(0, 2)
    scale[idx] = math.sqrt(eta)
    noise[idx] = 1.0 - eta

    matrix = np.outer(scale, scale) * cm.matrix + np.diag(noise)
    return TwoModeCovariance(matrix=matrix)


def add_excess_noise(cm: TwoModeCovariance, excess: float) -> TwoModeCovariance:
    """Add excess noise ξ to both of Bob's quadratures."""
    if excess < 0:
        raise DomainError(f"excess noise must be non-negative, got {excess}")
    return TwoModeCovariance(matrix=cm.matrix + np.diag([0.0, 0.0, excess, excess]))


def symplectic_eigenvalues(cm: TwoModeCovariance) -> Tuple[float, float]:
    """Symplectic spectrum (ν₁ ≥ ν₂) of a two-mode covariance matrix.

    Δ = det A + det B + 2 det C, ν± = sqrt((Δ ± sqrt(Δ² - 4 det V)) / 2)

    Raises:
        NumericalError: when the discriminant or ν² goes negative beyond rounding
    """
    matrix = cm.matrix
    delta = (np.linalg.det(matrix[:2, :2]) + np.linalg.det(matrix[2:, 2:])
             + 2.0 * np.linalg.det(matrix[:2, 2:]))
    det = np.linalg.det(matrix)
    disc = delta * delta - 4.0 * det
    tol = 1e-10 * max(1.0, delta * delta)

    if disc < -tol:
        raise NumericalError(f"negative discriminant {disc:.3e} (delta={delta:.6e}, det={det:.6e})")
    # a discriminant within rounding of zero means a degenerate spectrum
    root = math.sqrt(disc) if disc > tol else 0.0

    nu1_sq = (delta + root) / 2.0
    if nu1_sq <= 0:
        raise NumericalError(f"covariance matrix is indefinite (delta={delta:.6e})")
    # ν₁²ν₂² = det V, which avoids the cancellation in Δ - root
    nu2_sq = det / nu1_sq
    if nu2_sq < -tol:
        raise NumericalError(f"covariance matrix is indefinite (nu^2={nu2_sq:.3e})")
    return math.sqrt(nu1_sq), math.sqrt(max(nu2_sq, 0.0))


def _require_physical(cm: TwoModeCovariance) -> Tuple[float, float]:
    try:
        nu = symplectic_eigenvalues(cm)
    except NumericalError as e:
        raise UnphysicalStateError(f"covariance matrix is not a valid state: {e}") from e
    if min(nu) < 1.0 - PHYSICALITY_TOL:
        raise UnphysicalStateError(
            f"symplectic eigenvalues {nu[0]:.12f}, {nu[1]:.12f} violate the uncertainty principle",
            eigenvalues=nu,
        )
    return nu


def cm_from_correlations(record: CorrelationRecord, channel: Union[ChannelParams, float],
                         excess: float = 0.0) -> TwoModeCovariance:
    """Effective covariance matrix of the detected vacuum after Bob's channel.

    V_A = v_f, V_B = η v_p + 1 - η + ξ, C_x = √η c0, C_p = √η cpi2. With
    cpi2 = -c0 the x quadratures are correlated and the p quadratures
    anti-correlated.

    Args:
        record: Observed correlations
        channel: ChannelParams or a bare transmissivity in [0, 1]
        excess: Excess noise on Bob's mode (what-if analysis)

    Raises:
        UnphysicalStateError: when the assembled matrix is not a valid state
    """
    eta = channel.eta if isinstance(channel, ChannelParams) else float(channel)
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"eta must lie in [0, 1], got {eta}")
    if excess < 0:
        raise DomainError(f"excess noise must be non-negative, got {excess}")

    v_a = record.v_f
    v_b = eta * record.v_p + 1.0 - eta + excess
    c_x = math.sqrt(eta) * record.c0
    c_p = math.sqrt(eta) * record.cpi2

    cm = TwoModeCovariance(matrix=[
        [v_a, 0.0, c_x, 0.0],
        [0.0, v_a, 0.0, c_p],
        [c_x, 0.0, v_b, 0.0],
        [0.0, c_p, 0.0, v_b],
    ])
    _require_physical(cm)
    return cm


# ============================================================
# Key rate
# ============================================================

def entropy_function(nu: float) -> float:
    """Von Neumann entropy (bits) of a thermal mode with symplectic eigenvalue ν.

    g(ν) = ((ν+1)/2) log2((ν+1)/2) - ((ν-1)/2) log2((ν-1)/2); ν < 1 is
    rounding and counts as a pure mode.
    """
    nu = max(float(nu), 1.0)
    plus = (nu + 1.0) / 2.0
    minus = (nu - 1.0) / 2.0
    return float((xlogy(plus, plus) - xlogy(minus, minus)) / math.log(2.0))


def key_rate(cm: TwoModeCovariance, beta_rec: Optional[float] = None) -> KeyRateResult:
    """Reverse-reconciliation homodyne key rate of a covariance matrix.

    Rates are computed per measured quadrature and averaged, since each
    basis is used half the time.

    Args:
        cm: Joint state shared by Alice and Bob
        beta_rec: Reconciliation efficiency in (0, 1]; defaults to Config.BETA_REC

    Raises:
        UnphysicalStateError: when cm is not a valid state
        DegenerateStateError: when a variance or conditional variance is not positive
    """
    beta_rec = Config.BETA_REC if beta_rec is None else beta_rec
    if not 0.0 < beta_rec <= 1.0:
        raise DomainError(f"beta_rec must lie in (0, 1], got {beta_rec}")

    nu1, nu2 = _require_physical(cm)
    matrix = cm.matrix
    block_a = matrix[:2, :2]

    mutual, holevo, nu_conditional = [], [], []
    for q in (0, 1):
        v_a = matrix[q, q]
        v_b = matrix[2 + q, 2 + q]
        c = matrix[q, 2 + q]
        if v_a <= 0 or v_b <= 0:
            raise DegenerateStateError(f"non-positive variance in quadrature {q} (V_A={v_a}, V_B={v_b})")

        v_b_given_a = v_b - c * c / v_a
        if v_b_given_a <= 0:
            raise DegenerateStateError(f"conditional variance V_B|A={v_b_given_a} is not positive")
        mutual.append(0.5 * math.log2(v_b / v_b_given_a))

        column = matrix[:2, 2 + q]
        conditional = block_a - np.outer(column, column) / v_b
        det_conditional = float(np.linalg.det(conditional))
        if det_conditional <= 0:
            raise DegenerateStateError(f"Alice's conditional state is degenerate (det={det_conditional})")
        nu3 = math.sqrt(det_conditional)
        nu_conditional.append(nu3)
        holevo.append(entropy_function(nu1) + entropy_function(nu2) - entropy_function(nu3))

    i_ab = float(np.mean(mutual))
    chi_be = max(0.0, float(np.mean(holevo)))
    return KeyRateResult(
        i_ab=i_ab,
        chi_be=chi_be,
        key_rate=beta_rec * i_ab - chi_be,
        nu=[nu1, nu2],
        nu_conditional=nu_conditional,
        beta_rec=beta_rec,
    )


def fig3_sweep(source: Union[CorrelationRecord, Tuple[float, float]],
               geometry: Tuple[float, float],
               z_grid: Sequence[float],
               beta_rec: Optional[float] = None,
               excess: float = 0.0) -> List[Tuple[float, KeyRateResult]]:
    """Key rate against distance for one detected-vacuum source.

    Args:
        source: CorrelationRecord, or (omega_do, a) for the closed-form record
        geometry: (waist W, wavelength λ) in metres
        z_grid: Distances in metres
        beta_rec: Reconciliation efficiency
        excess: Excess noise on Bob's mode

    Returns:
        (z, KeyRateResult) per distance, in grid order
    """
    if len(z_grid) == 0:
        raise ValueError("z_grid must not be empty")

    record = source if isinstance(source, CorrelationRecord) else approximate_record(*source)
    waist, wavelength = geometry

    results = []
    for z in z_grid:
        channel = ChannelParams(waist=waist, wavelength=wavelength, distance=float(z))
        cm = cm_from_correlations(record, channel, excess)
        results.append((float(z), key_rate(cm, beta_rec)))
    logger.debug(f"fig3 sweep: {len(results)} distances for omega_do={record.omega_do:.4e}")
    return results
