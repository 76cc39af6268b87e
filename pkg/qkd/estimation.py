"""Channel estimation from the revealed part of the sifted data.

Both parties run the same estimator on the same revealed pairs, so they
reach the same decision without exchanging anything else. The state is
assumed zero-mean, so second moments are taken about zero.

The channel is fitted to the lossy-EPR model: a source with local variance
V_A sent through transmissivity η with excess noise ξ has
C² = η (V_A² - 1) and V_B = η (V_A - 1) + 1 + ξ. An estimate that is not
significant at Config.PE_SIGNIFICANCE standard errors is replaced by its
model value (no correlation, or no excess noise).
"""
import math
from typing import NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from config import Config
from utils.errors import InsufficientDataError
from utils.logger import setup_logger

from .gaussian import TwoModeCovariance, add_excess_noise, apply_loss, tmsv_covariance

logger = setup_logger(__name__)

X_BASIS = 0
P_BASIS = 1


class RevealedPairs(BaseModel):
    """Revealed sifted windows: common basis and both parties' values."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    bases: np.ndarray
    alice: np.ndarray
    bob: np.ndarray

    @field_validator('bases', 'alice', 'bob', mode='before')
    @classmethod
    def _as_array(cls, value):
        return np.asarray(value)

    def basis(self, q: int):
        mask = self.bases == q
        return self.alice[mask], self.bob[mask]


class BasisMoments(NamedTuple):
    count: int
    var_a: float
    var_b: float
    cov: float


class ChannelEstimate(BaseModel):
    """Outcome of parameter estimation.

    Attributes:
        eta: Transmissivity estimate η̂ in [0, 1]
        eta_std: Standard error of η̂
        excess_noise: Excess noise estimate ξ̂ (>= 0)
        excess_std: Standard error of ξ̂
        correlation: Pooled correlation ĉ = (Ĉ_x - Ĉ_p) / 2
        correlation_std: Standard error of ĉ
        significant: ĉ exceeds Config.PE_SIGNIFICANCE standard errors
        estimated_cm: Sample covariance matrix of the revealed data
        model_cm: Lossy-EPR covariance at (V_A, η̂, ξ̂) used for the key rate
        pairs_x: Revealed pairs measured in x
        pairs_p: Revealed pairs measured in p
    """
    model_config = ConfigDict(frozen=True)

    eta: float = Field(ge=0, le=1)
    eta_std: float
    excess_noise: float = Field(ge=0)
    excess_std: float
    correlation: float
    correlation_std: float
    significant: bool
    estimated_cm: TwoModeCovariance
    model_cm: TwoModeCovariance
    pairs_x: int
    pairs_p: int


def _moments(alice: np.ndarray, bob: np.ndarray) -> BasisMoments:
    return BasisMoments(
        count=len(alice),
        var_a=float(np.mean(alice * alice)),
        var_b=float(np.mean(bob * bob)),
        cov=float(np.mean(alice * bob)),
    )


def estimate_channel(revealed: RevealedPairs, source_variance: float,
                     significance: Optional[float] = None,
                     min_pairs: Optional[int] = None) -> ChannelEstimate:
    """Estimate the channel from revealed pairs against a known source variance.

    Args:
        revealed: Revealed sifted windows
        source_variance: Alice's assumed local variance V_A
        significance: z-score for keeping ĉ and ξ̂; defaults to Config
        min_pairs: Required pairs per basis; defaults to Config

    Returns:
        ChannelEstimate

    Raises:
        InsufficientDataError: when a basis has fewer than min_pairs pairs
    """
    significance = Config.PE_SIGNIFICANCE if significance is None else significance
    min_pairs = Config.PE_MIN_PAIRS_PER_BASIS if min_pairs is None else min_pairs

    mx = _moments(*revealed.basis(X_BASIS))
    mp = _moments(*revealed.basis(P_BASIS))
    if mx.count < min_pairs or mp.count < min_pairs:
        raise InsufficientDataError(
            f"need {min_pairs} revealed pairs per basis, got x={mx.count}, p={mp.count}"
        )

    estimated_cm = TwoModeCovariance(matrix=[
        [mx.var_a, 0.0, mx.cov, 0.0],
        [0.0, mp.var_a, 0.0, mp.cov],
        [mx.cov, 0.0, mx.var_b, 0.0],
        [0.0, mp.cov, 0.0, mp.var_b],
    ])

    v_a = float(source_variance)
    var_b = (mx.var_b * mx.count + mp.var_b * mp.count) / (mx.count + mp.count)

    # x correlated, p anti-correlated
    c_hat = (mx.cov - mp.cov) / 2.0
    c_std = 0.5 * math.sqrt(
        (mx.var_a * mx.var_b + mx.cov ** 2) / mx.count
        + (mp.var_a * mp.var_b + mp.cov ** 2) / mp.count
    )
    significant = c_hat > significance * c_std

    if v_a > 1.0 and significant:
        eta = min(1.0, c_hat ** 2 / (v_a * v_a - 1.0))
        eta_std = 2.0 * c_hat * c_std / (v_a * v_a - 1.0)
    else:
        eta, eta_std = 0.0, 0.0

    excess = var_b - 1.0 - eta * (v_a - 1.0)
    excess_std = math.sqrt(2.0 * var_b ** 2 / (mx.count + mp.count) + ((v_a - 1.0) * eta_std) ** 2)
    if excess < significance * excess_std:
        excess = 0.0

    model_cm = add_excess_noise(apply_loss(tmsv_covariance(max(v_a, 1.0)), eta), excess)

    logger.info(
        f"Channel estimate: eta={eta:.4f} +/- {eta_std:.4f}, excess={excess:.4f} +/- {excess_std:.4f}, "
        f"c={c_hat:.4f} +/- {c_std:.4f} ({mx.count}+{mp.count} pairs)"
    )
    return ChannelEstimate(
        eta=eta,
        eta_std=eta_std,
        excess_noise=excess,
        excess_std=excess_std,
        correlation=c_hat,
        correlation_std=c_std,
        significant=significant,
        estimated_cm=estimated_cm,
        model_cm=model_cm,
        pairs_x=mx.count,
        pairs_p=mp.count,
    )
