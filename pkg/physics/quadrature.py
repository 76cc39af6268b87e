"""Nested adaptive Gauss-Kronrod quadrature over a 2-D rectangle-like domain.

Both levels use ``scipy.integrate.quad_vec`` (GK21, vector-valued
integrands). The inner integral's error estimate is carried as an extra
component and integrated by the outer level, so the reported bound covers
both levels. Each level works on the unit interval after an affine map,
which keeps the integrand O(1) for physical scales (~1e9 rad/s) and makes
``abs_tol`` meaningful.
"""
import math
from typing import Callable, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import quad_vec

from config import Config
from utils.errors import QuadratureBudgetExceeded
from utils.logger import setup_logger

logger = setup_logger(__name__)

# Gauss-Kronrod 21-point rule: evaluations per subinterval
_GK_NODES = 21


class QuadratureSpec(BaseModel):
    """Tolerances, truncation radius and evaluation budget of one integral."""
    model_config = ConfigDict(frozen=True)

    rel_tol: float = Field(default_factory=lambda: Config.QUAD_REL_TOL, gt=0)
    abs_tol: float = Field(default_factory=lambda: Config.QUAD_ABS_TOL, ge=0)
    n_sigma: float = Field(default_factory=lambda: Config.QUAD_N_SIGMA, ge=4)
    max_evals: int = Field(default_factory=lambda: Config.QUAD_MAX_EVALS, gt=0)

    @property
    def subinterval_limit(self) -> int:
        """Per-level subinterval cap so that both levels together fit max_evals."""
        per_level = math.sqrt(self.max_evals) / _GK_NODES
        return max(4, int(per_level))


class IntegralEstimate(NamedTuple):
    """Value (scalar or vector), absolute error bound and evaluation count."""
    value: object
    error: float
    n_evals: int


def _interior(points: Optional[Sequence[float]], lo: float, hi: float) -> Optional[list]:
    """Breakpoints strictly inside (lo, hi), mapped onto the unit interval."""
    if not points:
        return None
    width = hi - lo
    mapped = sorted({(p - lo) / width for p in points if lo < p < hi})
    return mapped or None


def integrate_2d(integrand: Callable[[float, float], np.ndarray],
                 outer_range: Tuple[float, float],
                 inner_range: Callable[[float], Tuple[float, float]],
                 size: int,
                 spec: QuadratureSpec,
                 inner_points: Optional[Callable[[float], Sequence[float]]] = None,
                 outer_points: Optional[Sequence[float]] = None) -> IntegralEstimate:
    """Integrate a vector integrand f(u, k) over u in inner_range(k), k in outer_range.

    Args:
        integrand: f(u, k) returning an array of ``size`` components
        outer_range: (lo, hi) of the outer variable k
        inner_range: k -> (lo, hi) of the inner variable u
        size: Number of components returned by the integrand
        spec: Tolerances and budget
        inner_points: k -> breakpoints in u (kinks, peaks, log regions)
        outer_points: Breakpoints in k

    Returns:
        IntegralEstimate with ``value`` an array of ``size`` integrals

    Raises:
        QuadratureBudgetExceeded: when either level hits its subinterval
            limit or the evaluation budget is spent
    """
    evals = [0]
    inner_failures = [0]
    limit = spec.subinterval_limit
    zeros = np.zeros(size + 1)

    def inner(t_k: float) -> np.ndarray:
        k = k_lo + (k_hi - k_lo) * t_k
        u_lo, u_hi = inner_range(k)
        if not u_hi > u_lo:
            return zeros
        u_width = u_hi - u_lo

        def mapped(t_u: float) -> np.ndarray:
            evals[0] += 1
            return integrand(u_lo + u_width * t_u, k) * u_width

        points = _interior(inner_points(k) if inner_points else None, u_lo, u_hi)
        res, err, info = quad_vec(
            mapped, 0.0, 1.0,
            epsabs=spec.abs_tol, epsrel=spec.rel_tol, norm='max',
            limit=limit, points=points, full_output=True,
        )
        if info.status != 0:
            inner_failures[0] += 1
        out = np.empty(size + 1)
        out[:size] = res * (k_hi - k_lo)
        out[size] = err * (k_hi - k_lo)
        return out

    k_lo, k_hi = outer_range
    if not k_hi > k_lo:
        return IntegralEstimate(np.zeros(size), 0.0, 0)

    res, err, info = quad_vec(
        inner, 0.0, 1.0,
        epsabs=spec.abs_tol, epsrel=spec.rel_tol, norm='max',
        limit=limit, points=_interior(outer_points, k_lo, k_hi), full_output=True,
    )

    value = np.asarray(res[:size], dtype=float)
    error = float(err + abs(res[size]))
    n_evals = evals[0]
    logger.debug(f"integrate_2d: {n_evals} evaluations, error bound {error:.3e}")

    if info.status != 0 or inner_failures[0] or n_evals > spec.max_evals:
        raise QuadratureBudgetExceeded(
            f"Quadrature budget exceeded (outer status {info.status}, "
            f"{inner_failures[0]} inner failures, {n_evals}/{spec.max_evals} evaluations)",
            estimate=value, error_bound=error, n_evals=n_evals,
        )

    return IntegralEstimate(value, error, n_evals)
