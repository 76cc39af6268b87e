"""Tests for seeded quadrature sampling."""
import numpy as np
import pytest

from qkd.gaussian import TwoModeCovariance, apply_loss, tmsv_covariance
from qkd.sampling import party_streams, sample_quadratures, symmetric_sqrt
from utils.errors import FactorizationError

N = 200_000


class TestPartyStreams:

    def test_same_seed_same_numbers(self):
        first, second = party_streams(7), party_streams(7)
        for a, b in zip(first, second):
            assert np.array_equal(a.standard_normal(5), b.standard_normal(5))

    def test_streams_are_independent(self):
        streams = party_streams(7)
        draws = [g.standard_normal(5) for g in streams]
        assert not np.array_equal(draws[0], draws[1])
        assert not np.array_equal(draws[1], draws[2])

    def test_uses_pcg64(self):
        assert isinstance(party_streams(1).alice.bit_generator, np.random.PCG64)


class TestSymmetricSqrt:

    def test_squares_back(self):
        matrix = tmsv_covariance(3.0).matrix
        root = symmetric_sqrt(matrix)
        assert np.allclose(root @ root, matrix, rtol=1e-12, atol=1e-12)
        assert np.allclose(root, root.T)

    def test_rejects_indefinite_matrix(self):
        with pytest.raises(FactorizationError):
            symmetric_sqrt(np.diag([1.0, 1.0, 1.0, -1.0]))


# ============================================================
# sample_quadratures
# ============================================================

class TestSampleQuadratures:
    """Sample moments against the requested covariance."""

    def test_shape(self):
        assert sample_quadratures(tmsv_covariance(3.0), 10, seed=1).shape == (10, 4)

    def test_identity_covariance(self):
        samples = sample_quadratures(TwoModeCovariance.identity(), N, seed=3)
        estimate = samples.T @ samples / N
        assert np.all(np.abs(estimate - np.eye(4)) < 5.0 * np.sqrt(2.0 / N))

    def test_epr_correlation_of_gain_two(self):
        samples = sample_quadratures(tmsv_covariance(3.0), N, seed=11)
        diff = samples[:, 0] - samples[:, 2]
        assert np.mean(diff * diff) / 2.0 == pytest.approx(3.0 - 2.0 * np.sqrt(2.0), abs=0.005)

    def test_p_quadratures_anti_correlated(self):
        samples = sample_quadratures(apply_loss(tmsv_covariance(3.0), 0.5), N, seed=5)
        assert np.mean(samples[:, 1] * samples[:, 3]) < 0
        assert np.mean(samples[:, 0] * samples[:, 2]) > 0

    def test_deterministic_by_seed(self):
        cm = tmsv_covariance(2.0)
        assert np.array_equal(sample_quadratures(cm, 100, seed=9), sample_quadratures(cm, 100, seed=9))
        assert not np.array_equal(sample_quadratures(cm, 100, seed=9), sample_quadratures(cm, 100, seed=10))

    def test_seed_uses_state_stream(self):
        cm = tmsv_covariance(2.0)
        from_rng = sample_quadratures(cm, 50, rng=party_streams(4).state)
        assert np.array_equal(from_rng, sample_quadratures(cm, 50, seed=4))

    def test_rejects_empty_sample(self):
        with pytest.raises(ValueError):
            sample_quadratures(tmsv_covariance(2.0), 0, seed=1)
