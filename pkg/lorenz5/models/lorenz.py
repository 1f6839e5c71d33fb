"""The Lorenz five-component model in both charts.

x-chart: (x1, x2, x3) slow Rossby modes, (x4, x5) fast gravity wave.
mu-u-chart: (mu1, mu2, mu3) on se*(2) and (u1, u2) on R^2, reached through
the linear Poisson map Phi(x) = (x1, x2, x3, x4, eps x3 + x5).
"""

import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, NamedTuple

import numpy as np
from numpy.typing import ArrayLike

from ..exceptions import DomainError
from ..geometry.poisson import R5, SE2R2, Array, PoissonStructure, ScalarField, check_eps, as_state

LOGGER = logging.getLogger(__name__)


class Chart(str, enum.Enum):
    X = "x"
    MU_U = "mu-u"


@dataclass(frozen=True)
class ModelParams:
    """Coupling and chart of a model run.

    Attributes:
        eps: Coupling between Rossby and gravity modes (any finite value).
        chart: Coordinates the state vector is expressed in.
    """

    eps: float = 0.0
    chart: Chart = Chart.MU_U

    def __post_init__(self):
        object.__setattr__(self, "eps", check_eps(self.eps))
        object.__setattr__(self, "chart", Chart(self.chart))

    @property
    def structure(self) -> PoissonStructure:
        return R5 if self.chart is Chart.X else SE2R2

    def rhs(self) -> Callable[[Array], Array]:
        """Autonomous vector field of this chart at this coupling.

        The returned callable skips input validation so integrators can
        detect blow-up themselves.
        """
        eps = self.eps
        if self.chart is Chart.X:
            return lambda x: _lorenz5_kernel(x, eps)
        return lambda p: _transformed_kernel(p, eps)

    def energy(self) -> ScalarField:
        return hamiltonian_r5_field() if self.chart is Chart.X else hamiltonian_eps_field(self.eps)

    def casimir(self) -> ScalarField:
        return casimir_field()


def _lorenz5_kernel(x: Array, eps: float) -> Array:
    x1, x2, x3, x4, x5 = x
    return np.array([
        -x2 * x3 + eps * x2 * x5,
        x1 * x3 - eps * x1 * x5,
        -x1 * x2,
        -x5,
        x4 + eps * x1 * x2,
    ])


def _transformed_kernel(p: Array, eps: float) -> Array:
    m1, m2, m3, u1, u2 = p
    return np.array([
        -m2 * m3 + eps * m2 * u2 - eps ** 2 * m2 * m3,
        m1 * m3 - eps * m1 * u2 + eps ** 2 * m1 * m3,
        -m1 * m2,
        -u2 + eps * m3,
        u1,
    ])


def lorenz5_rhs(x: ArrayLike, eps: float) -> Array:
    """Right-hand side of the original five-component system."""
    return _lorenz5_kernel(as_state(x), check_eps(eps))


def transformed_rhs(p: ArrayLike, eps: float) -> Array:
    """Right-hand side in (mu1, mu2, mu3, u1, u2)."""
    return _transformed_kernel(as_state(p), check_eps(eps))


def phi_jacobian(eps: float) -> Array:
    """Constant Jacobian of Phi."""
    D = np.eye(5)
    D[4, 2] = check_eps(eps)
    return D


def phi(x: ArrayLike, eps: float) -> Array:
    """Chart change x -> (mu, u)."""
    x = as_state(x)
    out = x.copy()
    out[4] = check_eps(eps) * x[2] + x[4]
    return out


def phi_inv(p: ArrayLike, eps: float) -> Array:
    """Chart change (mu, u) -> x."""
    p = as_state(p)
    out = p.copy()
    out[4] = p[4] - check_eps(eps) * p[2]
    return out


def hamiltonian_r5(x: ArrayLike) -> float:
    x1, x2, x3, x4, x5 = as_state(x)
    return 0.5 * (x1 ** 2 + 2 * x2 ** 2 + x3 ** 2 + x4 ** 2 + x5 ** 2)


def hamiltonian_r5_gradient(x: ArrayLike) -> Array:
    x = as_state(x)
    return x * np.array([1.0, 2.0, 1.0, 1.0, 1.0])


def hamiltonian_eps(p: ArrayLike, eps: float) -> float:
    m1, m2, m3, u1, u2 = as_state(p)
    eps = check_eps(eps)
    return 0.5 * (m1 ** 2 + 2 * m2 ** 2 + m3 ** 2 + u1 ** 2 + u2 ** 2
                  - 2 * eps * m3 * u2 + eps ** 2 * m3 ** 2)


def hamiltonian_eps_gradient(p: ArrayLike, eps: float) -> Array:
    m1, m2, m3, u1, u2 = as_state(p)
    eps = check_eps(eps)
    return np.array([m1, 2 * m2, m3 - eps * u2 + eps ** 2 * m3, u1, u2 - eps * m3])


def casimir_mu(p: ArrayLike) -> float:
    """mu1^2 + mu2^2, the Casimir of the product structure."""
    p = as_state(p)
    return float(p[0] ** 2 + p[1] ** 2)


def casimir_x(x: ArrayLike) -> float:
    """x1^2 + x2^2, the pullback of the Casimir through Phi."""
    return casimir_mu(x)


class SplitHamiltonian(NamedTuple):
    F: float
    G: float
    H1: float
    remainder: float


def split_hamiltonian(mu: ArrayLike, action: float, angle: float, eps: float) -> SplitHamiltonian:
    """Decompose H^eps = F(mu) + G(I) + eps H1(mu, theta, I) + remainder.

    F = (mu1^2 + 2 mu2^2 + mu3^2)/2, G(I) = I, H1 = -mu3 sqrt(2I) sin(theta),
    remainder = eps^2 mu3^2 / 2 (already multiplied by eps^2).

    Raises:
        DomainError: If the action is negative
    """
    m1, m2, m3 = as_state(mu, dim=3)
    eps = check_eps(eps)
    if not action >= 0:
        raise DomainError(f"action I must be non-negative, got {action}")
    F = 0.5 * (m1 ** 2 + 2 * m2 ** 2 + m3 ** 2)
    H1 = -m3 * math.sqrt(2 * action) * math.sin(angle)
    return SplitHamiltonian(F=F, G=float(action), H1=H1, remainder=0.5 * eps ** 2 * m3 ** 2)


def pushforward_residual(x: ArrayLike, eps: float) -> Array:
    """DPhi . f1(x) - f2(Phi(x)); zero when Phi conjugates the two systems."""
    return phi_jacobian(eps) @ lorenz5_rhs(x, eps) - transformed_rhs(phi(x, eps), eps)


def pushforward_structure_residual(x: ArrayLike, eps: float, structure: PoissonStructure = R5) -> float:
    """Max-norm of DPhi J1(x) DPhi^T - J2(Phi(x)), the Poisson-map condition."""
    D = phi_jacobian(eps)
    pushed = D @ structure.matrix(x, eps) @ D.T
    return float(np.max(np.abs(pushed - SE2R2.matrix(phi(x, eps), eps))))


# Scalar fields

def hamiltonian_r5_field() -> ScalarField:
    return ScalarField(hamiltonian_r5, hamiltonian_r5_gradient, name="H")


def hamiltonian_eps_field(eps: float) -> ScalarField:
    eps = check_eps(eps)
    return ScalarField(
        func=lambda p: hamiltonian_eps(p, eps),
        gradient=lambda p: hamiltonian_eps_gradient(p, eps),
        name="H_eps",
    )


def casimir_field() -> ScalarField:
    return ScalarField(
        func=casimir_mu,
        gradient=lambda p: np.array([2 * p[0], 2 * p[1], 0.0, 0.0, 0.0]),
        name="casimir",
    )


def rigid_energy(p: ArrayLike) -> float:
    """F(mu) evaluated on a full (mu, u) state."""
    m1, m2, m3 = as_state(p)[:3]
    return 0.5 * (m1 ** 2 + 2 * m2 ** 2 + m3 ** 2)


def rigid_energy_field() -> ScalarField:
    return ScalarField(
        func=rigid_energy,
        gradient=lambda p: np.array([p[0], 2 * p[1], p[2], 0.0, 0.0]),
        name="F",
    )


def action(p: ArrayLike) -> float:
    """I = (u1^2 + u2^2)/2 on a full (mu, u) state."""
    p = as_state(p)
    return 0.5 * float(p[3] ** 2 + p[4] ** 2)


def action_field() -> ScalarField:
    return ScalarField(
        func=action,
        gradient=lambda p: np.array([0.0, 0.0, 0.0, p[3], p[4]]),
        name="I",
    )


def perturbation_field() -> ScalarField:
    """H1 = -mu3 sqrt(2I) sin(theta) = -mu3 u2."""
    return ScalarField(
        func=lambda p: -p[2] * p[4],
        gradient=lambda p: np.array([0.0, 0.0, -p[4], 0.0, -p[2]]),
        name="H1",
    )


def tracked_fields(params: ModelParams) -> Dict[str, ScalarField]:
    """Conserved or slowly varying quantities recorded along a trajectory."""
    if params.chart is Chart.X:
        return {"H": hamiltonian_r5_field(), "casimir": casimir_field()}
    return {
        "H_eps": hamiltonian_eps_field(params.eps),
        "casimir": casimir_field(),
        "F": rigid_energy_field(),
        "I": action_field(),
    }
