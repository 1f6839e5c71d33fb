"""Melnikov function of the perturbed mu-u system.

Along the heteroclinic orbit of branch b and the oscillator phase theta0,

    M(theta0) = (1/Omega) * int {F, H1}(t, theta0) dt
              = -sqrt(2k) * int mu1(t) mu2(t) sin(t + theta0) dt
              = -s3 * pi * sqrt(2k) * sech(pi / (2M)) * cos(theta0).

Simple zeros of M imply transverse heteroclinic intersections in the
Poincare map of the perturbed flow.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from scipy.optimize import bisect
from tqdm import tqdm

from ..analytic.heteroclinic import TWO_PI, HeteroclinicBranch, MelnikovSetup, resolve_branch, unperturbed_orbit
from ..config import QuadConfig, quad_config
from ..exceptions import ConfigurationError, DomainError
from ..geometry.poisson import SE2R2, Array, bracket
from ..models.lorenz import perturbation_field, rigid_energy_field
from ..numerics.quadrature import QuadResult, quad_improper

LOGGER = logging.getLogger(__name__)

DEFAULT_GRID_SIZE = 128

# Step of the central difference used for dM/dtheta0 at a zero
DERIVATIVE_STEP = 1e-4

ZERO_XTOL = 1e-12
SIMPLE_ZERO_TOL = 1e-6


def _sech(x: float) -> float:
    e = math.exp(-abs(x))
    return 2 * e / (1 + e * e)


def integrand(t: float, s: MelnikovSetup, b: Optional[HeteroclinicBranch] = None) -> float:
    """{F, H1} on the unperturbed orbit: -mu1(t) mu2(t) sqrt(2k) sin(t + theta0)."""
    b = resolve_branch(s, b)
    s1, s2, _ = b.signs
    M = s.M
    mu1 = s1 * M * _sech(M * t)
    mu2 = s2 * M * math.tanh(M * t)
    return -mu1 * mu2 * math.sqrt(2 * s.k) * math.sin(t + s.theta0)


def integrand_via_bracket(t: float, s: MelnikovSetup, b: Optional[HeteroclinicBranch] = None) -> float:
    """The same integrand, built as the se*(2) x R^2 bracket {F, H1} at the orbit point."""
    state = unperturbed_orbit(t, s, b).state
    return bracket(SE2R2, rigid_energy_field(), perturbation_field(), state)


def tail_bound(s: MelnikovSetup, T: float) -> float:
    """Bound on the integrand mass outside [-T, T]: 4 sqrt(2k) M exp(-MT)."""
    return 4 * math.sqrt(2 * s.k) * s.M * math.exp(-s.M * T)


def melnikov_numeric(
    s: MelnikovSetup,
    b: Optional[HeteroclinicBranch] = None,
    quad: Optional[QuadConfig] = None,
) -> QuadResult:
    """Adaptive quadrature of the Melnikov integral over [-T, T].

    The returned error estimate includes the analytic tail bound.

    Raises:
        DomainError: If sech(M T) is not below the configured tail tolerance
    """
    quad = quad or quad_config
    b = resolve_branch(s, b)
    T = quad.truncation(s.M)
    if _sech(s.M * T) >= quad.tail_tol:
        raise DomainError(
            f"truncation T={T:g} too short for M={s.M:g}: sech(MT)={_sech(s.M * T):.3g} >= {quad.tail_tol:g}"
        )
    # Breakpoints at the nodes of sin(t + theta0) keep each panel to one half-wave
    first = math.ceil((-T + s.theta0) / math.pi)
    last = math.floor((T + s.theta0) / math.pi)
    points = [n * math.pi - s.theta0 for n in range(first, last + 1)]
    result = quad_improper(lambda t: integrand(t, s, b), T, quad.tol, quad.limit, points)
    omega = s.omega
    return QuadResult(
        value=result.value / omega,
        error=(result.error + tail_bound(s, T)) / omega,
        converged=result.converged,
        message=result.message,
    )


def melnikov_amplitude(M: float, k: float) -> float:
    """pi sqrt(2k) sech(pi / (2M))."""
    s = MelnikovSetup(M, k)
    return math.pi * math.sqrt(2 * s.k) * _sech(math.pi / (2 * s.M))


def melnikov_closed(s: MelnikovSetup, b: Optional[HeteroclinicBranch] = None) -> float:
    """-s3 pi sqrt(2k) sech(pi / (2M)) cos(theta0)."""
    sign = resolve_branch(s, b).melnikov_sign
    return -sign * melnikov_amplitude(s.M, s.k) * math.cos(s.theta0)


def melnikov_derivative_closed(s: MelnikovSetup, b: Optional[HeteroclinicBranch] = None) -> float:
    """dM/dtheta0 of the closed form."""
    sign = resolve_branch(s, b).melnikov_sign
    return sign * melnikov_amplitude(s.M, s.k) * math.sin(s.theta0)


class HarmonicFit(NamedTuple):
    A: float
    B: float
    residual: float


def fit_harmonic(theta: ArrayLike, values: ArrayLike) -> HarmonicFit:
    """Least-squares fit of ``values ~ A cos(theta) + B sin(theta)``.

    Returns:
        Coefficients and the max-norm of the fit residual
    """
    theta = np.asarray(theta, dtype=float)
    values = np.asarray(values, dtype=float)
    if theta.shape != values.shape or theta.ndim != 1:
        raise ConfigurationError("theta and values must be 1-d arrays of equal length")
    finite = np.isfinite(values)
    if finite.sum() < 2:
        raise ConfigurationError("harmonic fit needs at least two finite samples")
    theta, values = theta[finite], values[finite]
    design = np.column_stack([np.cos(theta), np.sin(theta)])
    (A, B), *_ = np.linalg.lstsq(design, values, rcond=None)
    residual = float(np.max(np.abs(design @ np.array([A, B]) - values)))
    return HarmonicFit(float(A), float(B), residual)


class MelnikovZero(NamedTuple):
    theta0: float
    derivative: float
    simple: bool


class ZeroSearch(NamedTuple):
    zeros: List[MelnikovZero]
    degenerate: bool


@dataclass
class MelnikovProfile:
    """Numeric and closed-form Melnikov function on a theta0 grid."""

    setup: MelnikovSetup
    branch: HeteroclinicBranch
    theta0: Array
    numeric: Array
    closed: Array
    error: Array
    converged: Array
    quad: QuadConfig = field(default_factory=QuadConfig)
    zeros: List[MelnikovZero] = field(default_factory=list)
    degenerate: bool = False

    @property
    def abs_err(self) -> Array:
        return np.abs(self.numeric - self.closed)

    @property
    def max_abs_err(self) -> float:
        return float(self.abs_err.max()) if self.theta0.size else 0.0

    def passed(self, tol: Optional[float] = None) -> bool:
        """All quadratures converged, numeric matches closed within tol, every zero simple."""
        tol = 1e-8 if tol is None else tol
        return (bool(np.all(self.converged))
                and self.max_abs_err < tol
                and all(z.simple for z in self.zeros))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "theta0": self.theta0,
            "numeric": self.numeric,
            "closed": self.closed,
            "abs_err": self.abs_err,
            "error_estimate": self.error,
        })

    def zeros_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(z.theta0, z.derivative) for z in self.zeros],
            columns=["theta0_star", "derivative"],
        )


def _evaluate(task):
    setup, branch, quad, theta0 = task
    return melnikov_numeric(setup.with_theta0(theta0), branch, quad)


def default_grid(n: int = DEFAULT_GRID_SIZE) -> Array:
    return np.linspace(0.0, TWO_PI, n, endpoint=False)


def melnikov_profile(
    setup: MelnikovSetup,
    branch: Optional[HeteroclinicBranch] = None,
    grid: Optional[ArrayLike] = None,
    quad: Optional[QuadConfig] = None,
    workers: Optional[int] = None,
    progress: bool = False,
    locate_zeros: bool = True,
) -> MelnikovProfile:
    """Evaluate the Melnikov function on a theta0 grid and locate its zeros.

    Args:
        setup: Energy level; its theta0 is ignored
        branch: Heteroclinic branch, default (+,+,+)
        grid: theta0 values, default 128 uniform points on [0, 2pi)
        quad: Quadrature settings
        workers: Processes for the grid evaluation; None or 1 runs serially
        progress: Show a tqdm bar
        locate_zeros: Run :func:`find_zeros` on the result

    Returns:
        The populated profile
    """
    quad = quad or quad_config
    branch = resolve_branch(setup, branch)
    theta = default_grid() if grid is None else np.asarray(grid, dtype=float)
    tasks = [(setup, branch, quad, float(t)) for t in theta]

    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(tqdm(pool.map(_evaluate, tasks, chunksize=8), total=len(tasks),
                                desc="Melnikov", disable=not progress))
    else:
        results = [_evaluate(task) for task in tqdm(tasks, desc="Melnikov", disable=not progress)]

    profile = MelnikovProfile(
        setup=setup,
        branch=branch,
        theta0=theta,
        numeric=np.array([r.value for r in results]),
        closed=np.array([melnikov_closed(setup.with_theta0(t), branch) for t in theta]),
        error=np.array([r.error for r in results]),
        converged=np.array([r.converged for r in results], dtype=bool),
        quad=quad,
    )
    LOGGER.info(f"Melnikov profile M={setup.M:g} k={setup.k:g} branch {branch.label}: {theta.size} points, "
                f"max |numeric - closed| = {profile.max_abs_err:.3g}")
    if locate_zeros and theta.size:
        profile.zeros, profile.degenerate = find_zeros(profile)
    return profile


def find_zeros(profile: MelnikovProfile) -> ZeroSearch:
    """Zeros of the numeric profile with their theta0-derivatives.

    Grid values within quadrature noise of zero are skipped when bracketing,
    so a zero that falls exactly on a grid point is still bracketed by its
    neighbours. Brackets wrap around 2pi. Each bracket is refined by
    bisection of the numeric Melnikov function itself.

    Returns:
        Zeros sorted by theta0 in [0, 2pi), and a flag that is True when the
        profile shows no sign change at all
    """
    theta, values = profile.theta0, profile.numeric
    noise = 10 * max(profile.quad.tol, float(np.max(profile.error, initial=0.0)))
    signs = np.where(np.abs(values) <= noise, 0, np.sign(values)).astype(int)
    nonzero = np.flatnonzero(signs)
    if nonzero.size < 2:
        LOGGER.info(f"Melnikov profile is identically zero within {noise:.3g}; zeros are degenerate")
        return ZeroSearch([], True)

    def numeric(t):
        return melnikov_numeric(profile.setup.with_theta0(t), profile.branch, profile.quad).value

    zeros = []
    for n, a in enumerate(nonzero):
        b = nonzero[(n + 1) % nonzero.size]
        if signs[a] == signs[b]:
            continue
        lo = theta[a]
        hi = theta[b] if b > a else theta[b] + TWO_PI
        root = bisect(numeric, lo, hi, xtol=ZERO_XTOL, maxiter=200)
        derivative = (numeric(root + DERIVATIVE_STEP) - numeric(root - DERIVATIVE_STEP)) / (2 * DERIVATIVE_STEP)
        zeros.append(MelnikovZero(root % TWO_PI, derivative, abs(derivative) > SIMPLE_ZERO_TOL))

    if not zeros:
        LOGGER.info("Melnikov profile has no sign change on the grid")
        return ZeroSearch([], True)
    zeros.sort(key=lambda z: z.theta0)
    for z in zeros:
        LOGGER.debug(f"zero at theta0={z.theta0:.12f}, dM/dtheta0={z.derivative:.6g}")
    return ZeroSearch(zeros, False)
