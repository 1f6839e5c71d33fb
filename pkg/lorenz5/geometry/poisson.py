"""Poisson structures of the five-component model and their structural checks.

Two linear Poisson structures live here:

* ``R5``: Bokhove's bracket on R^5, depending on the coupling eps.
* ``SE2R2``: the product of the Lie-Poisson structure on se*(2) and the
  canonical structure on R^2, in coordinates (mu1, mu2, mu3, u1, u2).

Brackets follow ``{f, g} = grad(f)^T J grad(g)`` with ``J[i, j] = {x_i, x_j}``,
so the Hamiltonian vector field of H is ``J grad(H)``. Indices are 0-based.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..config import DEFAULT_SEED
from ..exceptions import ConfigurationError, DomainError

LOGGER = logging.getLogger(__name__)

Array = NDArray[np.float64]

# Central differences balance truncation and rounding with h ~ eps_mach^(1/3)
FD_STEP = np.cbrt(np.finfo(float).eps)


def as_state(p: ArrayLike, dim: int = 5) -> Array:
    """Validate a phase-space point and return it as a float array.

    Raises:
        DomainError: If the point has the wrong shape or non-finite entries
    """
    state = np.asarray(p, dtype=float)
    if state.shape != (dim,):
        raise DomainError(f"expected a {dim}-vector, got shape {state.shape}")
    if not np.all(np.isfinite(state)):
        raise DomainError(f"state has non-finite components: {state}")
    return state


def check_eps(eps: float) -> float:
    eps = float(eps)
    if not np.isfinite(eps):
        raise DomainError(f"eps must be finite, got {eps}")
    return eps


def central_difference(func: Callable[[Array], float], p: Array) -> Array:
    """Gradient of ``func`` at ``p`` by central differences."""
    grad = np.empty_like(p)
    for i in range(p.size):
        h = FD_STEP * max(1.0, abs(p[i]))
        forward = p.copy()
        backward = p.copy()
        forward[i] += h
        backward[i] -= h
        grad[i] = (func(forward) - func(backward)) / (forward[i] - backward[i])
    return grad


@dataclass(frozen=True)
class ScalarField:
    """A smooth function on phase space with an optional analytic gradient.

    Attributes:
        func: Point -> real.
        gradient: Point -> dim-vector, or None to fall back to finite differences.
        dim: Dimension of the phase space.
        name: Label used in reports and tracked series.
    """

    func: Callable[[Array], float]
    gradient: Optional[Callable[[Array], Array]] = None
    dim: int = 5
    name: str = ""

    def __call__(self, p: ArrayLike) -> float:
        return float(self.func(as_state(p, self.dim)))

    def grad(self, p: ArrayLike, finite_difference: bool = True) -> Array:
        """Gradient at ``p``, analytic when available.

        Raises:
            ConfigurationError: If there is no analytic gradient and finite
                differences are disabled
        """
        p = as_state(p, self.dim)
        if self.gradient is not None:
            return np.asarray(self.gradient(p), dtype=float)
        if not finite_difference:
            raise ConfigurationError(
                f"field {self.name or '<anonymous>'} has no analytic gradient and finite differences are disabled"
            )
        return central_difference(self.func, p)

    def __mul__(self, other: "ScalarField") -> "ScalarField":
        """Pointwise product, with the product-rule gradient when both factors have one."""
        gradient = None
        if self.gradient is not None and other.gradient is not None:
            def gradient(p):
                return self.func(p) * other.gradient(p) + other.func(p) * self.gradient(p)
        return ScalarField(
            func=lambda p: self.func(p) * other.func(p),
            gradient=gradient,
            dim=self.dim,
            name=f"({self.name})*({other.name})",
        )

    @classmethod
    def coordinate(cls, i: int, dim: int = 5, name: Optional[str] = None) -> "ScalarField":
        """The coordinate function p -> p[i]."""
        basis = np.zeros(dim)
        basis[i] = 1.0
        return cls(func=lambda p: p[i], gradient=lambda p: basis.copy(), dim=dim, name=name or f"x{i + 1}")

    @classmethod
    def constant(cls, value: float, dim: int = 5) -> "ScalarField":
        return cls(func=lambda p: value, gradient=lambda p: np.zeros(dim), dim=dim, name=str(value))


@dataclass(frozen=True)
class PoissonStructure:
    """A Poisson structure whose matrix entries are polynomials of degree <= 1.

    ``matrix(p, eps) = constant(eps) + derivatives(eps) . p`` where
    ``derivatives(eps)[i, j, l] = d J_ij / d p_l``.
    """

    label: str
    constant: Callable[[float], Array]
    derivatives: Callable[[float], Array]
    dim: int = 5

    def matrix(self, p: ArrayLike, eps: float = 0.0) -> Array:
        p = as_state(p, self.dim)
        eps = check_eps(eps)
        return self.constant(eps) + self.derivatives(eps) @ p


def _r5_tensors(eps: float, flip: bool = False) -> Tuple[Array, Array]:
    const = np.zeros((5, 5))
    const[4, 3] = 1.0
    const[3, 4] = -1.0

    D = np.zeros((5, 5, 5))
    D[1, 2, 0], D[2, 1, 0] = 1.0, -1.0      # J23 = x1
    D[0, 2, 1], D[2, 0, 1] = -1.0, 1.0      # J13 = -x2
    D[1, 4, 0], D[4, 1, 0] = -eps, eps      # J25 = -eps x1
    D[0, 4, 1], D[4, 0, 1] = eps, -eps      # J15 = eps x2
    if flip:
        D[0, 2, 1], D[2, 0, 1] = 1.0, -1.0
    return const, D


def _se2r2_tensors(eps: float) -> Tuple[Array, Array]:
    const = np.zeros((5, 5))
    const[4, 3] = 1.0                       # {u2, u1} = 1
    const[3, 4] = -1.0

    D = np.zeros((5, 5, 5))
    D[1, 2, 0], D[2, 1, 0] = 1.0, -1.0      # {mu2, mu3} = mu1
    D[0, 2, 1], D[2, 0, 1] = -1.0, 1.0      # {mu1, mu3} = -mu2
    return const, D


R5 = PoissonStructure(
    label="x-chart",
    constant=lambda eps: _r5_tensors(eps)[0],
    derivatives=lambda eps: _r5_tensors(eps)[1],
)

SE2R2 = PoissonStructure(
    label="mu-u-chart",
    constant=lambda eps: _se2r2_tensors(eps)[0],
    derivatives=lambda eps: _se2r2_tensors(eps)[1],
)

# Self-test structure for the verification suite: R5 with {x1, x3} sign-flipped
R5_FAULTY = PoissonStructure(
    label="x-chart-faulty",
    constant=lambda eps: _r5_tensors(eps, flip=True)[0],
    derivatives=lambda eps: _r5_tensors(eps, flip=True)[1],
)


def structure_matrix_r5(x: ArrayLike, eps: float) -> Array:
    """Structure matrix of Bokhove's bracket at ``x``.

    Nonzero entries: J23 = x1, J13 = -x2, J25 = -eps x1, J15 = eps x2,
    J54 = 1, and their antisymmetric partners (1-based labels).
    """
    return R5.matrix(x, eps)


def structure_matrix_se2r2(p: ArrayLike) -> Array:
    """Structure matrix of the se*(2) x R^2 product bracket at ``p = (mu, u)``."""
    return SE2R2.matrix(p, 0.0)


def bracket(
    S: PoissonStructure,
    f: ScalarField,
    g: ScalarField,
    p: ArrayLike,
    eps: float = 0.0,
    finite_difference: bool = True,
) -> float:
    """Evaluate ``{f, g}(p) = grad f . J(p, eps) grad g``."""
    J = S.matrix(p, eps)
    return float(f.grad(p, finite_difference) @ J @ g.grad(p, finite_difference))


def jacobi_residual(S: PoissonStructure, p: ArrayLike, triple: Tuple[int, int, int], eps: float = 0.0) -> float:
    """Cyclic sum {{x_i, x_j}, x_k} + {{x_j, x_k}, x_i} + {{x_k, x_i}, x_j}.

    Computed from ``sum_l J_il d_l J_jk + J_jl d_l J_ki + J_kl d_l J_ij`` with
    exact entry derivatives.

    Raises:
        DomainError: If the indices are not distinct or out of range
    """
    i, j, k = (int(index) for index in triple)
    if len({i, j, k}) != 3:
        raise DomainError(f"Jacobi triple needs distinct indices, got {triple}")
    if not all(0 <= index < S.dim for index in (i, j, k)):
        raise DomainError(f"Jacobi indices must lie in [0, {S.dim}), got {triple}")

    J = S.matrix(p, eps)
    D = S.derivatives(check_eps(eps))
    return float(J[i] @ D[j, k] + J[j] @ D[k, i] + J[k] @ D[i, j])


def jacobi_triples(dim: int = 5) -> Iterator[Tuple[int, int, int]]:
    """All ordered-by-index triples i < j < k."""
    return itertools.combinations(range(dim), 3)


def max_jacobi_residual(S: PoissonStructure, p: ArrayLike, eps: float = 0.0) -> float:
    return max(abs(jacobi_residual(S, p, triple, eps)) for triple in jacobi_triples(S.dim))


def casimir_residual(S: PoissonStructure, C: ScalarField, p: ArrayLike, eps: float = 0.0) -> Array:
    """``J(p) grad C(p)``; the zero vector exactly when C is a Casimir at p."""
    return S.matrix(p, eps) @ C.grad(p)


def hamiltonian_vector_field(S: PoissonStructure, H: ScalarField, p: ArrayLike, eps: float = 0.0) -> Array:
    """``J(p) grad H(p)``, i.e. ``dp/dt = {p, H}``."""
    return S.matrix(p, eps) @ H.grad(p)


def sample_points(n: int, seed: int = DEFAULT_SEED, box: float = 5.0, dim: int = 5) -> Array:
    """``n`` reproducible uniform points in ``[-box, box]^dim``."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-box, box, size=(n, dim))
