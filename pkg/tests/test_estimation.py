"""Tests for channel estimation from revealed pairs."""
import numpy as np
import pytest
from pydantic import ValidationError

from qkd.estimation import P_BASIS, X_BASIS, ChannelEstimate, RevealedPairs, estimate_channel
from qkd.gaussian import TwoModeCovariance, add_excess_noise, apply_loss, tmsv_covariance
from qkd.sampling import sample_quadratures
from utils.errors import InsufficientDataError

N = 200_000


def reveal(cm: TwoModeCovariance, n: int, seed: int) -> RevealedPairs:
    """Sifted pairs with a random common basis per window."""
    samples = sample_quadratures(cm, n, seed=seed)
    bases = np.random.default_rng(seed + 1).integers(0, 2, n)
    return RevealedPairs(
        bases=bases,
        alice=np.where(bases == X_BASIS, samples[:, 0], samples[:, 1]),
        bob=np.where(bases == X_BASIS, samples[:, 2], samples[:, 3]),
    )


class TestRevealedPairs:

    def test_basis_split(self):
        pairs = RevealedPairs(bases=[0, 1, 0], alice=[1.0, 2.0, 3.0], bob=[4.0, 5.0, 6.0])
        alice, bob = pairs.basis(X_BASIS)
        assert alice.tolist() == [1.0, 3.0]
        assert bob.tolist() == [4.0, 6.0]
        assert pairs.basis(P_BASIS)[0].tolist() == [2.0]


# ============================================================
# estimate_channel
# ============================================================

class TestEstimateChannel:
    """Transmissivity, excess noise and significance gating."""

    def test_lossless_channel(self):
        estimate = estimate_channel(reveal(tmsv_covariance(3.0), N, seed=1), source_variance=3.0)
        assert estimate.significant
        assert estimate.eta == pytest.approx(1.0, abs=0.03)
        assert estimate.excess_noise < 0.05
        assert estimate.pairs_x + estimate.pairs_p == N

    def test_lossy_channel(self):
        estimate = estimate_channel(reveal(apply_loss(tmsv_covariance(3.0), 0.25), N, seed=2), 3.0)
        assert estimate.eta == pytest.approx(0.25, abs=0.01)
        assert abs(estimate.eta - 0.25) < 5.0 * estimate.eta_std

    def test_excess_noise(self):
        cm = add_excess_noise(apply_loss(tmsv_covariance(3.0), 0.25), 0.5)
        estimate = estimate_channel(reveal(cm, N, seed=3), 3.0)
        assert estimate.excess_noise == pytest.approx(0.5, abs=0.05)

    def test_sample_covariance_entries(self):
        cm = apply_loss(tmsv_covariance(3.0), 0.5)
        estimate = estimate_channel(reveal(cm, N, seed=4), 3.0)
        # each basis sees about N / 2 pairs; second moments up to ~3 carry std ~ 3 sqrt(2 / (N / 2))
        tolerance = 5.0 * 3.0 * np.sqrt(4.0 / N)
        for i, j in [(0, 0), (1, 1), (2, 2), (3, 3), (0, 2), (1, 3)]:
            assert estimate.estimated_cm.matrix[i, j] == pytest.approx(cm.matrix[i, j], abs=tolerance)

    def test_model_cm_is_lossy_epr(self):
        estimate = estimate_channel(reveal(apply_loss(tmsv_covariance(3.0), 0.5), N, seed=5), 3.0)
        expected = add_excess_noise(apply_loss(tmsv_covariance(3.0), estimate.eta), estimate.excess_noise)
        assert np.allclose(estimate.model_cm.matrix, expected.matrix)
        assert estimate.model_cm.is_physical()

    def test_uncorrelated_data_is_not_significant(self):
        estimate = estimate_channel(reveal(TwoModeCovariance.identity(), 20_000, seed=6), 3.0)
        assert not estimate.significant
        assert estimate.eta == 0.0

    def test_vacuum_source_gives_zero_eta(self):
        estimate = estimate_channel(reveal(TwoModeCovariance.identity(), 1000, seed=7), 1.0)
        assert estimate.eta == 0.0
        assert estimate.eta_std == 0.0

    def test_strict_significance_rejects_weak_correlation(self):
        cm = apply_loss(tmsv_covariance(1.2), 0.05)
        pairs = reveal(cm, 2000, seed=8)
        assert not estimate_channel(pairs, 1.2, significance=50.0).significant

    def test_too_few_pairs(self):
        pairs = reveal(tmsv_covariance(3.0), 40, seed=9)
        with pytest.raises(InsufficientDataError):
            estimate_channel(pairs, 3.0, min_pairs=50)

    def test_result_bounds(self):
        estimate = estimate_channel(reveal(tmsv_covariance(3.0), 1000, seed=10), 3.0)
        with pytest.raises(ValidationError):
            ChannelEstimate(**{**dict(estimate), 'eta': 1.5})
