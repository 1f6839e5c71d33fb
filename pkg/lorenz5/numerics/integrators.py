"""Time integration of autonomous vector fields with per-step recording.

The adaptive methods drive scipy's embedded Runge-Kutta pairs one accepted
step at a time through the ``OdeSolver.step`` interface, so every accepted
step lands in the trajectory; the fixed-step method is classic RK4.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from scipy.integrate import DOP853, RK45
from scipy.optimize import bisect

from ..config import IntegratorConfig, integrator_config
from ..exceptions import DomainError
from ..geometry.poisson import Array, ScalarField

LOGGER = logging.getLogger(__name__)

VectorField = Callable[[Array], Array]
Tracked = Union[Mapping[str, ScalarField], Sequence[ScalarField], None]

# States beyond this norm count as blow-up
BLOW_UP_NORM = 1e100

# Local re-integration used to pin down event crossings
REFINE_RTOL = 1e-12
REFINE_ATOL = 1e-14
REFINE_XTOL = 1e-13

STATUS_OK = "ok"
STATUS_BLOW_UP = "blow_up"
STATUS_MAX_STEPS = "max_steps"

SOLVERS = {"rk45": RK45, "dop853": DOP853}


@dataclass
class Trajectory:
    """States recorded at every accepted step of one integration run.

    Attributes:
        times: Step times, monotone in the direction of integration.
        states: Array of shape (len(times), dim).
        tracked: Named series evaluated at every recorded state.
        status: ``ok``, ``blow_up`` or ``max_steps``.
        message: Human readable detail for a non-ok status.
        rhs: Vector field that produced the run, kept for crossing refinement.
    """

    times: Array
    states: Array
    tracked: Dict[str, Array] = field(default_factory=dict)
    status: str = STATUS_OK
    message: str = ""
    rhs: Optional[VectorField] = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    @property
    def final(self) -> Array:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.times)

    def drift(self, name: str) -> float:
        """Largest deviation of a tracked series from its initial value."""
        series = self.tracked[name]
        return float(np.max(np.abs(series - series[0])))

    def to_frame(self, columns: Optional[Sequence[str]] = None) -> pd.DataFrame:
        """Tabulate as ``t``, one column per state component, then tracked series."""
        dim = self.states.shape[1]
        columns = list(columns) if columns is not None else [f"x{i + 1}" for i in range(dim)]
        frame = pd.DataFrame(self.states, columns=columns)
        frame.insert(0, "t", self.times)
        for name, series in self.tracked.items():
            frame[name] = series
        return frame


class Propagation(NamedTuple):
    t: float
    state: Array
    status: str
    message: str
    steps: int


class _StepFailure(Exception):
    def __init__(self, status: str, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _check_span(tspan: Tuple[float, float]) -> Tuple[float, float]:
    t0, t1 = (float(t) for t in tspan)
    if not (math.isfinite(t0) and math.isfinite(t1)):
        raise DomainError(f"time span must be finite, got {tspan}")
    return t0, t1


def _check_initial(x0: ArrayLike) -> Array:
    state = np.array(x0, dtype=float)
    if state.ndim != 1 or state.size == 0:
        raise DomainError(f"initial state must be a non-empty vector, got shape {state.shape}")
    if not np.all(np.isfinite(state)):
        raise DomainError(f"initial state has non-finite components: {state}")
    return state


def _blown_up(y: Array) -> bool:
    return not np.all(np.isfinite(y)) or float(np.max(np.abs(y))) > BLOW_UP_NORM


def _rk4_steps(rhs: VectorField, y: Array, t0: float, t1: float, step: float) -> Iterator[Tuple[float, Array]]:
    n = max(1, math.ceil(abs(t1 - t0) / step - 1e-12))
    h = (t1 - t0) / n
    for i in range(1, n + 1):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        # Land exactly on t1
        yield (t1 if i == n else t0 + i * h), y


def _adaptive_steps(rhs: VectorField, y: Array, t0: float, t1: float, cfg: IntegratorConfig,
                    solver_class=None) -> Iterator[Tuple[float, Array]]:
    solver_class = solver_class or SOLVERS[cfg.method]
    solver = solver_class(lambda t, u: rhs(u), t0, y, t1, rtol=cfg.rtol, atol=cfg.atol)
    while solver.status == "running":
        message = solver.step()
        if solver.status == "failed":
            raise _StepFailure(STATUS_BLOW_UP, f"step failed at t={solver.t:.6g}: {message}")
        yield solver.t, solver.y.copy()


def _steps(rhs: VectorField, y0: Array, t0: float, t1: float, cfg: IntegratorConfig) -> Iterator[Tuple[float, Array]]:
    """Accepted steps after the initial state; raises _StepFailure on blow-up or exhaustion."""
    if cfg.adaptive:
        source = _adaptive_steps(rhs, y0, t0, t1, cfg)
    else:
        source = _rk4_steps(rhs, y0, t0, t1, cfg.step)

    count = 0
    with np.errstate(all="ignore"):
        for t, y in source:
            if _blown_up(y):
                raise _StepFailure(STATUS_BLOW_UP, f"non-finite or unbounded state at t={t:.6g}")
            count += 1
            yield t, y
            if count >= cfg.max_steps and t != t1:
                raise _StepFailure(STATUS_MAX_STEPS, f"max_steps={cfg.max_steps} exhausted at t={t:.6g}")


def _tracked_fields(track: Tracked) -> Dict[str, ScalarField]:
    if track is None:
        return {}
    if isinstance(track, Mapping):
        return dict(track)
    return {f.name or f"f{i}": f for i, f in enumerate(track)}


def integrate(
    rhs: VectorField,
    x0: ArrayLike,
    tspan: Tuple[float, float],
    cfg: Optional[IntegratorConfig] = None,
    track: Tracked = None,
) -> Trajectory:
    """Integrate ``dx/dt = rhs(x)`` over ``tspan`` and record every accepted step.

    Backward spans (t1 < t0) are allowed. Blow-up and step exhaustion do not
    raise: the partial trajectory is returned with its status set.

    Args:
        rhs: Autonomous vector field
        x0: Initial state
        tspan: (t0, t1)
        cfg: Integrator settings (defaults to the global ``integrator_config``)
        track: Scalar fields evaluated along the trajectory

    Returns:
        The recorded trajectory

    Raises:
        DomainError: If x0 or the time span is not finite
    """
    cfg = cfg or integrator_config
    y0 = _check_initial(x0)
    t0, t1 = _check_span(tspan)

    times = [t0]
    states = [y0]
    status, message = STATUS_OK, ""

    if t1 != t0:
        try:
            for t, y in _steps(rhs, y0, t0, t1, cfg):
                times.append(t)
                states.append(y)
        except _StepFailure as failure:
            status, message = failure.status, failure.message
            LOGGER.warning(f"integration stopped early: {message}")

    states = np.array(states)
    tracked = {
        name: np.array([f.func(state) for state in states], dtype=float)
        for name, f in _tracked_fields(track).items()
    }
    LOGGER.debug(f"integrated {len(times) - 1} steps over [{t0:g}, {t1:g}] with {cfg.method}")
    return Trajectory(np.array(times), states, tracked, status, message, rhs)


def propagate(
    rhs: VectorField,
    x0: ArrayLike,
    tspan: Tuple[float, float],
    cfg: Optional[IntegratorConfig] = None,
) -> Propagation:
    """Like :func:`integrate` but keeps only the last state."""
    cfg = cfg or integrator_config
    y = _check_initial(x0)
    t0, t1 = _check_span(tspan)
    t, steps = t0, 0
    if t1 == t0:
        return Propagation(t0, y, STATUS_OK, "", 0)
    try:
        for t, y in _steps(rhs, y, t0, t1, cfg):
            steps += 1
    except _StepFailure as failure:
        LOGGER.debug(f"propagation stopped early: {failure.message}")
        return Propagation(t, y, failure.status, failure.message, steps)
    return Propagation(t, y, STATUS_OK, "", steps)


class Crossing(NamedTuple):
    t: float
    state: Array


def _local_flow(rhs: VectorField, x: Array, dt: float) -> Array:
    if dt == 0:
        return x
    solver = DOP853(lambda t, u: rhs(u), 0.0, x, dt, rtol=REFINE_RTOL, atol=REFINE_ATOL)
    with np.errstate(all="ignore"):
        while solver.status == "running":
            solver.step()
    return solver.y.copy()


def refine_crossing(
    traj: Trajectory,
    event: Union[ScalarField, Callable[[Array], float]],
    i: int,
    tol: float = 1e-10,
    rhs: Optional[VectorField] = None,
) -> Crossing:
    """Locate the zero of ``event`` between recorded steps ``i`` and ``i + 1``.

    The step is re-integrated from ``states[i]`` at tight tolerance inside a
    bisection on the elapsed time. Without a vector field (neither ``rhs``
    nor ``traj.rhs``), or when the tight re-integration ends on the same side
    of the section as it started, the recorded segment is treated as a
    straight line.

    Raises:
        DomainError: If the event does not change sign on the step, or
            vanishes at both ends
    """
    if not 0 <= i < len(traj) - 1:
        raise DomainError(f"step index {i} outside [0, {len(traj) - 1})")
    evaluate = event.func if isinstance(event, ScalarField) else event
    rhs = rhs or traj.rhs
    t_a, t_b = float(traj.times[i]), float(traj.times[i + 1])
    x_a, x_b = traj.states[i], traj.states[i + 1]
    e_a, e_b = float(evaluate(x_a)), float(evaluate(x_b))

    if e_a == 0 and e_b == 0:
        raise DomainError(f"event vanishes at both ends of step {i}; crossing is degenerate")
    if e_a == 0:
        return Crossing(t_a, x_a.copy())
    if e_b == 0:
        return Crossing(t_b, x_b.copy())
    if np.sign(e_a) == np.sign(e_b):
        raise DomainError(f"event does not change sign on step {i} ({e_a:.3g}, {e_b:.3g})")

    dt = t_b - t_a
    direction = 1.0 if dt > 0 else -1.0
    span = abs(dt)

    def segment(tau):
        return x_a + (tau / dt) * (x_b - x_a)

    state_at = segment
    if rhs is not None:
        def state_at(tau):
            return _local_flow(rhs, x_a, tau)

        e_end = float(evaluate(state_at(direction * span)))
        if not (np.isfinite(e_end) and np.sign(e_end) != np.sign(e_a)):
            # Tight re-integration ends on the starting side of the section
            LOGGER.warning(f"tight re-integration of step {i} does not cross the section "
                           f"({e_a:.3g}, {e_end:.3g}); using the recorded segment")
            state_at = segment

    # bisect needs an increasing bracket, so work in |tau|
    tau = bisect(lambda s: evaluate(state_at(direction * s)), 0.0, span,
                 xtol=REFINE_XTOL, rtol=4 * np.finfo(float).eps, maxiter=200)
    state = state_at(direction * tau)
    residual = abs(float(evaluate(state)))
    if residual > tol:
        LOGGER.warning(f"crossing on step {i} refined only to |event| = {residual:.3g}")
    return Crossing(t_a + direction * tau, state)
