"""Adaptive quadrature over truncated infinite intervals."""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from ..config import quad_config
from ..exceptions import ConfigurationError, QuadratureError

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadResult:
    """Value and absolute error estimate of one quadrature.

    ``converged`` is False when QUADPACK warned and its error estimate
    exceeds the requested tolerance; ``value`` is then the best estimate.
    """

    value: float
    error: float
    converged: bool = True
    message: str = ""

    def value_or_raise(self) -> float:
        if not self.converged:
            reason = self.message or "quadrature did not converge"
            raise QuadratureError(f"{reason} (best estimate {self.value:.17g}, error {self.error:.3g})",
                                  self.value, self.error)
        return self.value


def quad_improper(
    f: Callable[[float], float],
    T: float,
    tol: Optional[float] = None,
    limit: Optional[int] = None,
    points: Optional[Sequence[float]] = None,
) -> QuadResult:
    """Integrate ``f`` over ``[-T, T]`` with adaptive Gauss-Kronrod subdivision.

    Args:
        f: Integrand, decaying fast enough that the tail beyond T is negligible
        T: Truncation half-width
        tol: Absolute tolerance (relative tolerance is off)
        limit: Subinterval budget
        points: Interior breakpoints, e.g. the nodes of an oscillating factor

    Returns:
        QuadResult with the value, error estimate and convergence flag
    """
    tol = quad_config.tol if tol is None else tol
    limit = quad_config.limit if limit is None else limit
    if not (math.isfinite(T) and T > 0):
        raise ConfigurationError(f"truncation T must be positive, got {T}")
    if not tol > 0:
        raise ConfigurationError(f"tolerance must be positive, got {tol}")

    kwargs = dict(epsabs=tol, epsrel=0.0, limit=limit)
    if points is not None:
        inner = sorted(p for p in points if -T < p < T)
        if inner:
            kwargs["points"] = inner
            kwargs["limit"] = max(limit, 2 * len(inner) + 50)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        value, error = quad(f, -T, T, **kwargs)

    issues = [str(w.message).strip() for w in caught if issubclass(w.category, IntegrationWarning)]
    converged = bool(np.isfinite(value)) and (not issues or error <= tol)
    message = issues[0].splitlines()[0] if issues else ""
    if not converged:
        LOGGER.warning(f"quadrature on [-{T:g}, {T:g}] did not reach tol={tol:g} (error {error:.3g}): {message}")
    return QuadResult(float(value), float(error), converged, message)
