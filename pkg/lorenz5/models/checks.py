"""Randomized structural verification of both charts.

Each check draws reproducible points in the sampling box, evaluates a
residual that vanishes identically for the correct model and reports the
largest one against its threshold.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional

import numpy as np
import pandas as pd

from ..config import DEFAULT_SEED, VerifyConfig, verify_config
from ..geometry.poisson import (
    R5,
    SE2R2,
    PoissonStructure,
    casimir_residual,
    hamiltonian_vector_field,
    max_jacobi_residual,
    sample_points,
)
from .lorenz import (
    casimir_field,
    hamiltonian_eps,
    hamiltonian_eps_field,
    hamiltonian_r5,
    hamiltonian_r5_field,
    lorenz5_rhs,
    phi,
    pushforward_residual,
    pushforward_structure_residual,
    transformed_rhs,
)

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    check: str
    target: str
    samples: int
    max_residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.threshold)


def _max_over(points: Iterable, residual: Callable[..., float]) -> float:
    return max((float(residual(*p)) for p in points), default=0.0)


def run_checks(
    structure: PoissonStructure = R5,
    config: Optional[VerifyConfig] = None,
    seed: int = DEFAULT_SEED,
) -> List[CheckResult]:
    """Antisymmetry, Jacobi, Casimir, pushforward, Poisson-map, consistency and energy checks.

    Args:
        structure: Bracket used for the x-chart (``R5``, or a deliberately
            broken one to exercise the failure path)
        config: Sample sizes, eps values and thresholds
        seed: Seed for the sample points

    Returns:
        One result per (check, chart)
    """
    config = config or verify_config
    eps_values = config.eps_values
    results = []

    def record(check, target, samples, value):
        result = CheckResult(check, target, samples, value, config.threshold(check))
        level = logging.INFO if result.passed else logging.WARNING
        LOGGER.log(level, f"{check} [{target}]: max residual {value:.3g} (threshold {result.threshold:.3g})")
        results.append(result)

    def grid(n, offset):
        points = sample_points(n, seed + offset, config.box)
        return [(p, eps) for p in points for eps in eps_values]

    for offset, S in enumerate((structure, SE2R2)):
        pts = grid(config.n_antisymmetry, offset)
        record("antisymmetry", S.label, len(pts),
               _max_over(pts, lambda p, e: np.max(np.abs(S.matrix(p, e) + S.matrix(p, e).T))))

        pts = grid(config.n_jacobi, 10 + offset)
        record("jacobi", S.label, len(pts), _max_over(pts, lambda p, e: max_jacobi_residual(S, p, e)))

        pts = grid(config.n_consistency, 20 + offset)
        C = casimir_field()
        record("casimir", S.label, len(pts),
               _max_over(pts, lambda p, e: np.max(np.abs(casimir_residual(S, C, p, e)))))

    pts = grid(config.n_consistency, 30)
    H = hamiltonian_r5_field()
    record("consistency", structure.label, len(pts),
           _max_over(pts, lambda p, e: np.max(np.abs(hamiltonian_vector_field(structure, H, p, e) - lorenz5_rhs(p, e)))))
    record("consistency", SE2R2.label, len(pts),
           _max_over(pts, lambda p, e: np.max(np.abs(
               hamiltonian_vector_field(SE2R2, hamiltonian_eps_field(e), p, e) - transformed_rhs(p, e)))))

    # Pushforward checks draw eps uniformly from [-1, 1] alongside each point
    rng = np.random.default_rng(seed + 40)
    points = sample_points(config.n_pushforward, seed + 41, config.box)
    pts = list(zip(points, rng.uniform(-1.0, 1.0, size=len(points))))
    record("pushforward", "phi", len(pts), _max_over(pts, lambda x, e: np.max(np.abs(pushforward_residual(x, e)))))
    record("poisson_map", "phi", len(pts),
           _max_over(pts, lambda x, e: pushforward_structure_residual(x, e, structure)))
    record("energy", "phi", len(pts), _max_over(pts, lambda x, e: abs(hamiltonian_eps(phi(x, e), e) - hamiltonian_r5(x))))
    return results


def checks_frame(results: List[CheckResult]) -> pd.DataFrame:
    return pd.DataFrame([
        {"check": r.check, "target": r.target, "samples": r.samples,
         "max_residual": r.max_residual, "threshold": r.threshold, "passed": r.passed}
        for r in results
    ])
