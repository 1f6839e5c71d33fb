"""Parameter sweeps of the diagnostics over (eps, M, k, theta0) grids."""

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, Optional, Sequence, Tuple

import pandas as pd
from tqdm import tqdm

from ..analytic.heteroclinic import MelnikovSetup, separatrix_seed
from ..config import (
    IntegratorConfig,
    LyapunovConfig,
    QuadConfig,
    SectionConfig,
    integrator_config,
    lyapunov_config,
    quad_config,
    section_config,
)
from ..exceptions import ConfigurationError, Lorenz5Error
from ..melnikov.melnikov import melnikov_amplitude, melnikov_closed, melnikov_numeric
from .chaos import delta_f_experiment, lyapunov_mle, poincare_section

LOGGER = logging.getLogger(__name__)

TASKS = ("none", "melnikov", "melnikov_amplitude", "deltaf", "lyapunov", "poincare_spread")

KEYS = ["eps", "M", "k", "theta0"]


def _values(name: str, values: Sequence[float]) -> Tuple[float, ...]:
    values = tuple(float(v) for v in values)
    if not values:
        raise ConfigurationError(f"sweep dimension '{name}' is empty")
    if not all(math.isfinite(v) for v in values):
        raise ConfigurationError(f"sweep dimension '{name}' has non-finite entries: {values}")
    return values


@dataclass(frozen=True)
class SweepGrid:
    """Cartesian grid of parameters and the diagnostic evaluated on it."""

    eps_values: Sequence[float] = (0.0,)
    k_values: Sequence[float] = (0.5,)
    M_values: Sequence[float] = (1.0,)
    theta0_values: Sequence[float] = (0.0,)
    task: str = "none"

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigurationError(f"Unknown sweep task '{self.task}'. Available tasks: {list(TASKS)}")
        for name in ("eps_values", "k_values", "M_values", "theta0_values"):
            object.__setattr__(self, name, _values(name, getattr(self, name)))

    def __len__(self) -> int:
        return len(self.eps_values) * len(self.k_values) * len(self.M_values) * len(self.theta0_values)

    def cells(self) -> Iterator[Tuple[float, float, float, float]]:
        """(eps, M, k, theta0) for every grid cell."""
        return itertools.product(self.eps_values, self.M_values, self.k_values, self.theta0_values)


@dataclass(frozen=True)
class SweepSettings:
    """Numerical settings shared by every cell of a sweep."""

    integrator: IntegratorConfig = field(default_factory=lambda: integrator_config)
    quad: QuadConfig = field(default_factory=lambda: quad_config)
    lyapunov: LyapunovConfig = field(default_factory=lambda: lyapunov_config)
    section: SectionConfig = field(default_factory=lambda: section_config)
    T: float = 30.0
    seed: Optional[int] = None


def _task_values(task: str, eps: float, setup: MelnikovSetup, settings: SweepSettings) -> Dict[str, Any]:
    if task == "none":
        return {}
    if task == "melnikov":
        result = melnikov_numeric(setup, quad=settings.quad)
        closed = melnikov_closed(setup)
        return {"numeric": result.value, "closed": closed, "abs_err": abs(result.value - closed),
                "error_estimate": result.error, "converged": result.converged}
    if task == "melnikov_amplitude":
        numeric = melnikov_numeric(setup.with_theta0(0.0), quad=settings.quad)
        return {"amplitude": melnikov_amplitude(setup.M, setup.k), "numeric_amplitude": -numeric.value_or_raise()}
    if task == "deltaf":
        result = delta_f_experiment(eps, setup, T=settings.T, cfg=settings.integrator)
        return {"scaled": result.scaled, "raw_scaled": result.raw_scaled, "prediction": result.prediction,
                "abs_err": abs(result.scaled - result.prediction), "run_status": result.status}
    if task == "lyapunov":
        kwargs = {} if settings.seed is None else {"seed": settings.seed}
        estimate = lyapunov_mle(eps, separatrix_seed(setup), settings.lyapunov, settings.integrator, **kwargs)
        return {"lambda_max": estimate.lambda_max, "tail_variation": estimate.tail_variation,
                "run_status": estimate.status}
    section = poincare_section(eps, separatrix_seed(setup), setup.theta0, None, settings.integrator, settings.section)
    return {"crossings": len(section), "F_spread": section.spread("F"),
            "casimir_spread": section.spread("casimir"), "run_status": section.status}


def _run_cell(task_spec) -> Dict[str, Any]:
    """Evaluate one cell; failures become a row with status 'error'."""
    task, (eps, M, k, theta0), settings = task_spec
    row: Dict[str, Any] = {"eps": eps, "M": M, "k": k, "theta0": theta0}
    try:
        row.update(_task_values(task, eps, MelnikovSetup(M, k, theta0), settings))
        row["status"] = "ok"
        row["error"] = ""
    except Lorenz5Error as e:
        LOGGER.warning(f"sweep cell eps={eps:g} M={M:g} k={k:g} theta0={theta0:g} failed: {e}")
        row["status"] = "error"
        row["error"] = str(e)
    except Exception as e:
        LOGGER.exception(f"sweep cell eps={eps:g} M={M:g} k={k:g} theta0={theta0:g} raised")
        row["status"] = "error"
        row["error"] = f"{type(e).__name__}: {e}"
    return row


def sweep(
    grid: SweepGrid,
    settings: Optional[SweepSettings] = None,
    workers: Optional[int] = None,
    progress: bool = False,
) -> pd.DataFrame:
    """Evaluate ``grid.task`` on every cell of the grid.

    Cells are independent; with ``workers > 1`` they run in a process pool.
    The table is sorted by (eps, M, k, theta0), so its content does not
    depend on the execution order.

    Args:
        grid: Parameter grid and task
        settings: Numerical settings for the cells
        workers: Number of processes; None or 1 runs serially
        progress: Show a tqdm bar

    Returns:
        One row per cell with the parameters, task outputs, status and error
    """
    settings = settings or SweepSettings()
    specs = [(grid.task, cell, settings) for cell in grid.cells()]
    LOGGER.info(f"sweep '{grid.task}' over {len(specs)} cells")

    if workers and workers > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(tqdm(pool.map(_run_cell, specs), total=len(specs), desc="sweep", disable=not progress))
    else:
        rows = [_run_cell(spec) for spec in tqdm(specs, desc="sweep", disable=not progress)]

    frame = pd.DataFrame(rows)
    columns = KEYS + [c for c in frame.columns if c not in KEYS + ["status", "error"]] + ["status", "error"]
    frame = frame.reindex(columns=columns)
    failed = int((frame["status"] != "ok").sum())
    if failed:
        LOGGER.warning(f"{failed} of {len(frame)} sweep cells failed")
    return frame.sort_values(KEYS, kind="mergesort").reset_index(drop=True)
