"""Centralized configuration for lorenz5."""

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .exceptions import ConfigurationError

# Seed shared by every randomized check and experiment unless overridden.
DEFAULT_SEED = 20020308

INTEGRATOR_METHODS = ("rk4", "rk45", "dop853")


@dataclass
class IntegratorConfig:
    """Settings for time integration of the model vector fields."""

    # "rk4" (fixed step), "rk45" (Dormand-Prince 5(4)) or "dop853"
    method: str = "rk45"

    # Step size for the fixed-step method
    step: float = 1e-3

    # Tolerances for the adaptive methods
    rtol: float = 1e-10
    atol: float = 1e-12

    # Hard cap on accepted steps per integration
    max_steps: int = 2_000_000

    def __post_init__(self):
        if self.method not in INTEGRATOR_METHODS:
            raise ConfigurationError(
                f"Unknown integrator '{self.method}'. Available methods: {list(INTEGRATOR_METHODS)}"
            )
        if not (self.step > 0 and self.rtol > 0 and self.atol > 0):
            raise ConfigurationError("step, rtol and atol must be positive")
        if self.max_steps <= 0:
            raise ConfigurationError("max_steps must be positive")

    @property
    def adaptive(self) -> bool:
        return self.method != "rk4"


@dataclass
class QuadConfig:
    """Settings for the improper Melnikov quadrature."""

    # Truncation half-width; None means 50/M
    T: Optional[float] = None

    # Absolute tolerance of the adaptive Gauss-Kronrod rule
    tol: float = 1e-10

    # Subinterval budget handed to QUADPACK
    limit: int = 2000

    # Largest admissible sech(M*T) tail
    tail_tol: float = 1e-8

    def __post_init__(self):
        if self.T is not None and not self.T > 0:
            raise ConfigurationError("quadrature truncation T must be positive")
        if not (self.tol > 0 and self.tail_tol > 0) or self.limit <= 0:
            raise ConfigurationError("quadrature tolerances and limit must be positive")

    def truncation(self, M: float) -> float:
        """Half-width of the integration window for Casimir radius M."""
        return self.T if self.T is not None else 50.0 / M


@dataclass
class LyapunovConfig:
    """Settings for the two-trajectory largest-exponent estimator."""

    total_time: float = 1000.0
    renorm_interval: float = 1.0
    delta0: float = 1e-8

    def __post_init__(self):
        if not (self.total_time > 0 and self.renorm_interval > 0 and self.delta0 > 0):
            raise ConfigurationError("Lyapunov times and delta0 must be positive")
        if self.renorm_interval > self.total_time:
            raise ConfigurationError("renorm_interval must not exceed total_time")


@dataclass
class SectionConfig:
    """Settings for Poincare sections in the angle variable."""

    crossings: int = 200

    # Integration horizon; None means 2*pi*(crossings + 2)*2
    max_time: Optional[float] = None

    # Length of each integration chunk between crossing scans
    chunk: float = 8 * math.pi

    def __post_init__(self):
        if self.crossings < 0:
            raise ConfigurationError("crossings must be non-negative")
        if self.max_time is not None and not self.max_time > 0:
            raise ConfigurationError("max_time must be positive")

    def horizon(self) -> float:
        if self.max_time is not None:
            return self.max_time
        return 4 * math.pi * (self.crossings + 2)


@dataclass
class VerifyConfig:
    """Sample sizes and thresholds of the structural verification suite."""

    n_antisymmetry: int = 1000
    n_jacobi: int = 100
    n_pushforward: int = 1000
    n_consistency: int = 200
    eps_values: Tuple[float, ...] = (0.0, 0.1, 1.0)
    box: float = 5.0

    # Pass thresholds per check
    thresholds: dict = field(default_factory=lambda: {
        "antisymmetry": 0.0,            # polynomial entries cancel exactly
        "jacobi": 1e-10,
        "casimir": 1e-12,
        "pushforward": 1e-12,
        "poisson_map": 1e-12,
        "consistency": 1e-12,
        "energy": 1e-10,
    })

    def threshold(self, check: str) -> float:
        return self.thresholds[check]


# Global config instances
integrator_config = IntegratorConfig()
quad_config = QuadConfig()
lyapunov_config = LyapunovConfig()
section_config = SectionConfig()
verify_config = VerifyConfig()
