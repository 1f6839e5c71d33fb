"""Closed-form objects of the unperturbed mu-u system.

At eps = 0 the se*(2) part has saddles (0, +-M, 0) on the cylinder
mu1^2 + mu2^2 = M^2, joined by the heteroclinic orbits

    mu1 = s1 M sech(Mt),  mu2 = s2 M tanh(Mt),  mu3 = s3 M sech(Mt),

which solve the equations only when s1 = s2 s3. The R^2 part is the unit
frequency oscillator, I = k and theta = t + theta0 in action-angle form.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from ..exceptions import ConfigurationError, DomainError
from ..geometry.poisson import Array
from ..models.lorenz import rigid_energy, transformed_rhs

LOGGER = logging.getLogger(__name__)

TWO_PI = 2 * math.pi

Signs = Tuple[int, int, int]

ALL_SIGNS = tuple(itertools.product((1, -1), repeat=3))
ADMISSIBLE_SIGNS = tuple(s for s in ALL_SIGNS if s[0] == s[1] * s[2])
INADMISSIBLE_SIGNS = tuple(s for s in ALL_SIGNS if s[0] != s[1] * s[2])


def _check_radius(M: float) -> float:
    M = float(M)
    if not (math.isfinite(M) and M > 0):
        raise DomainError(f"Casimir radius M must be positive, got {M}")
    return M


def sech(x):
    """Overflow-free hyperbolic secant for scalars and arrays."""
    e = np.exp(-np.abs(x))
    return 2 * e / (1 + e * e)


@dataclass(frozen=True)
class HeteroclinicBranch:
    """One of the four heteroclinic solutions on the cylinder of radius M.

    Attributes:
        signs: (s1, s2, s3), each +1 or -1, with s1 = s2 * s3.
        M: Casimir radius.
    """

    signs: Signs = (1, 1, 1)
    M: float = 1.0

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if len(signs) != 3 or any(s not in (1, -1) for s in signs):
            raise DomainError(f"branch signs must be three of +1/-1, got {self.signs}")
        if signs not in ADMISSIBLE_SIGNS:
            raise DomainError(
                f"sign triple {signs} is not a solution: heteroclinic branches need s1 = s2*s3"
            )
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "M", _check_radius(self.M))

    @classmethod
    def from_string(cls, spec: str, M: float = 1.0) -> "HeteroclinicBranch":
        """Build a branch from ``'+++'``, ``'+--'``, ``'-+-'`` or ``'--+'``."""
        spec = spec.strip()
        if len(spec) != 3 or any(c not in "+-" for c in spec):
            raise ConfigurationError(f"branch must be three '+'/'-' characters, got {spec!r}")
        return cls(tuple(1 if c == "+" else -1 for c in spec), M)

    @property
    def label(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)

    @property
    def melnikov_sign(self) -> int:
        """Sign of mu1*mu2 along the branch, equal to s3."""
        return self.signs[2]


@dataclass(frozen=True)
class MelnikovSetup:
    """Energy bookkeeping for the perturbation analysis.

    Attributes:
        M: Casimir radius of the cylinder carrying the heteroclinic orbit.
        k: Action level I = k of the oscillator.
        theta0: Initial phase of the oscillator.
    """

    M: float = 1.0
    k: float = 0.5
    theta0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "M", _check_radius(self.M))
        if not (math.isfinite(self.k) and self.k >= 0):
            raise DomainError(f"action level k must be non-negative, got {self.k}")
        if not math.isfinite(self.theta0):
            raise DomainError(f"theta0 must be finite, got {self.theta0}")

    @property
    def h_tilde(self) -> float:
        """Energy F of the heteroclinic orbit."""
        return self.M ** 2

    @property
    def h(self) -> float:
        """Total unperturbed energy F + G on the orbit."""
        return self.M ** 2 + self.k

    @property
    def omega(self) -> float:
        """Oscillator frequency dG/dI."""
        return 1.0

    @property
    def l0(self) -> float:
        """G^{-1}(h - h_tilde) with G(I) = I."""
        return self.h - self.h_tilde

    @property
    def satisfies_hypotheses(self) -> bool:
        """h > h_tilde and a positive frequency."""
        return self.h > self.h_tilde and self.omega > 0

    def with_theta0(self, theta0: float) -> "MelnikovSetup":
        return MelnikovSetup(self.M, self.k, theta0)

    def branch(self, signs: Signs = (1, 1, 1)) -> HeteroclinicBranch:
        return HeteroclinicBranch(signs, self.M)


def heteroclinic_formula(t, M: float, signs: Signs):
    """The closed-form triple for any sign choice, admissible or not.

    Works elementwise on arrays of times; returns (mu1, mu2, mu3).
    """
    s1, s2, s3 = signs
    s = sech(M * np.asarray(t, dtype=float))
    th = np.tanh(M * np.asarray(t, dtype=float))
    return s1 * M * s, s2 * M * th, s3 * M * s


def heteroclinic(t, b: HeteroclinicBranch) -> Array:
    """Point of the heteroclinic orbit at time t (array of shape (3,) or (3, n))."""
    return np.array(heteroclinic_formula(t, b.M, b.signs))


def heteroclinic_residual(t, M: float, signs: Signs):
    """Max-norm residual of the closed form in the eps = 0 mu-equations.

    Uses the exact time derivative of the formula, so admissible signs give
    rounding-level residuals and inadmissible ones do not.
    """
    M = _check_radius(M)
    s1, s2, s3 = signs
    times = np.atleast_1d(np.asarray(t, dtype=float))
    residuals = np.empty(times.shape)
    for n, tau in enumerate(times):
        mu = np.array(heteroclinic_formula(tau, M, signs))
        s = float(sech(M * tau))
        th = math.tanh(M * tau)
        derivative = np.array([-s1 * M * M * s * th, s2 * M * M * s * s, -s3 * M * M * s * th])
        field = transformed_rhs(np.concatenate([mu, [0.0, 0.0]]), 0.0)[:3]
        residuals[n] = np.max(np.abs(derivative - field))
    return float(residuals.max())


class ActionAngle(NamedTuple):
    action: float
    angle: Optional[float]


def action_angle_to_cart(action: float, angle: float) -> Tuple[float, float]:
    """(I, theta) -> (u1, u2) with u1 = sqrt(2I) cos(theta), u2 = sqrt(2I) sin(theta).

    Raises:
        DomainError: If the action is negative
    """
    if not action >= 0:
        raise DomainError(f"action I must be non-negative, got {action}")
    r = math.sqrt(2 * action)
    return r * math.cos(angle), r * math.sin(angle)


def cart_to_action_angle(u1: float, u2: float) -> ActionAngle:
    """(u1, u2) -> (I, theta) with theta in [0, 2pi); theta is None at the origin."""
    action = 0.5 * (u1 * u1 + u2 * u2)
    if u1 == 0 and u2 == 0:
        return ActionAngle(0.0, None)
    return ActionAngle(action, math.atan2(u2, u1) % TWO_PI)


class OrbitPoint(NamedTuple):
    mu: Array
    action: float
    angle: float
    state: Array


def unperturbed_orbit(t: float, s: MelnikovSetup, b: Optional[HeteroclinicBranch] = None) -> OrbitPoint:
    """Point of the eps = 0 orbit (mu(t), I = k, theta = t + theta0) in both forms."""
    b = resolve_branch(s, b)
    mu = heteroclinic(t, b)
    angle = t + s.theta0
    u1, u2 = action_angle_to_cart(s.k, angle)
    return OrbitPoint(mu=mu, action=s.k, angle=angle % TWO_PI, state=np.array([*mu, u1, u2]))


def resolve_branch(s: MelnikovSetup, b: Optional[HeteroclinicBranch]) -> HeteroclinicBranch:
    if b is None:
        return s.branch()
    if not math.isclose(b.M, s.M, rel_tol=1e-15, abs_tol=0.0):
        raise DomainError(f"branch radius {b.M} does not match setup radius {s.M}")
    return b


def saddle_points(M: float) -> Tuple[Array, Array]:
    """The saddles (0, M, 0) and (0, -M, 0), completed with u = (0, 0)."""
    M = _check_radius(M)
    return np.array([0.0, M, 0.0, 0.0, 0.0]), np.array([0.0, -M, 0.0, 0.0, 0.0])


def saddle_eigenvalues(M: float, sign: int = 1) -> Array:
    """Eigenvalues of the eps = 0 mu-equations linearized at (0, sign*M, 0), sorted."""
    M = _check_radius(M)
    m1, m2, m3 = 0.0, sign * M, 0.0
    jacobian = np.array([
        [0.0, -m3, -m2],
        [m3, 0.0, m1],
        [-m2, -m1, 0.0],
    ])
    return np.sort(np.linalg.eigvals(jacobian).real)


def regular_seed(M: float, k: float, theta0: float = 0.0) -> Array:
    """An eps = 0 libration state with the separatrix orbit's total energy M^2 + k.

    mu = (M, 0, M/2) sits inside the libration region (F < M^2); the action
    absorbs the difference so F + I = M^2 + k.
    """
    M = _check_radius(M)
    mu = np.array([M, 0.0, 0.5 * M])
    F = rigid_energy(np.concatenate([mu, [0.0, 0.0]]))
    u1, u2 = action_angle_to_cart(M ** 2 + k - F, theta0)
    return np.array([*mu, u1, u2])


def separatrix_seed(s: MelnikovSetup, b: Optional[HeteroclinicBranch] = None) -> Array:
    """The orbit point at t = 0: the canonical seed inside the separatrix layer."""
    return unperturbed_orbit(0.0, s, b).state
