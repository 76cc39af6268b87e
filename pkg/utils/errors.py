"""Exceptions raised by the physics and QKD modules.

Each one subclasses the builtin a caller would otherwise expect, so code
that only knows about ValueError or RuntimeError keeps working.
"""
from typing import Optional, Sequence


class DomainError(ValueError):
    """An argument lies outside the domain of a closed-form expression."""


class PairingViolationError(ValueError):
    """A Future/Past detector pair breaks the anti-symmetry conditions."""


class QuadratureBudgetExceeded(RuntimeError):
    """Adaptive quadrature ran out of budget before meeting its tolerance.

    Attributes:
        estimate: Best estimate reached (scalar or vector)
        error_bound: Error estimate attached to it
        n_evals: Integrand evaluations spent
    """

    def __init__(self, message: str, estimate, error_bound: float, n_evals: int):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
        self.n_evals = n_evals


class UnphysicalStateError(ValueError):
    """A covariance matrix violates the uncertainty principle."""

    def __init__(self, message: str, eigenvalues: Optional[Sequence[float]] = None):
        super().__init__(message)
        self.eigenvalues = tuple(eigenvalues) if eigenvalues is not None else ()


class DegenerateStateError(ValueError):
    """A variance or conditional variance is not strictly positive."""


class NumericalError(ArithmeticError):
    """A discriminant or intermediate quantity went negative beyond tolerance."""


class FactorizationError(ValueError):
    """A covariance matrix could not be factorized for sampling."""


class InsufficientDataError(ValueError):
    """Too few revealed pairs to estimate the channel."""


class ProtocolStateError(RuntimeError):
    """A party received a message its state machine does not allow."""
