"""Seeded Gaussian sampling of the joint quadratures.

Random streams come from ``numpy.random.SeedSequence(seed).spawn(3)`` with
the PCG64 bit generator: stream 0 draws the state, stream 1 belongs to
Alice and stream 2 to Bob. The same seed therefore gives the same numbers on
every platform and for every scheduler.
"""
from typing import NamedTuple

import numpy as np

from utils.errors import FactorizationError
from utils.logger import setup_logger

from .gaussian import TwoModeCovariance

logger = setup_logger(__name__)


class PartyStreams(NamedTuple):
    state: np.random.Generator
    alice: np.random.Generator
    bob: np.random.Generator


def party_streams(seed: int) -> PartyStreams:
    """Independent generators for the state sampler and the two parties."""
    state, alice, bob = np.random.SeedSequence(seed).spawn(3)
    return PartyStreams(
        state=np.random.Generator(np.random.PCG64(state)),
        alice=np.random.Generator(np.random.PCG64(alice)),
        bob=np.random.Generator(np.random.PCG64(bob)),
    )


def symmetric_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Symmetric square root S (S @ S = matrix) of a positive-definite matrix.

    Raises:
        FactorizationError: when the matrix has a non-positive eigenvalue
    """
    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    if eigenvalues.min() <= 0:
        raise FactorizationError(
            f"covariance matrix is not positive definite (smallest eigenvalue {eigenvalues.min():.3e})"
        )
    return (eigenvectors * np.sqrt(eigenvalues)) @ eigenvectors.T


def sample_quadratures(cm: TwoModeCovariance, n: int, seed=None,
                       rng: np.random.Generator = None) -> np.ndarray:
    """Draw n zero-mean samples (x_A, p_A, x_B, p_B) with covariance cm.

    Args:
        cm: Joint covariance matrix
        n: Number of time windows
        seed: Integer seed; ignored when ``rng`` is given
        rng: Generator to draw from (the protocol passes its state stream)

    Returns:
        Array of shape (n, 4)
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if rng is None:
        rng = party_streams(seed).state

    root = symmetric_sqrt(cm.matrix)
    normals = rng.standard_normal((n, 4))
    samples = normals @ root
    logger.debug(f"Sampled {n} windows")
    return samples
