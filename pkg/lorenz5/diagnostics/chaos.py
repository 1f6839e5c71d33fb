"""Numerical evidence for chaos in the perturbed mu-u system.

* ``delta_f_experiment``: energy change of the rigid-body part across one
  passage near the separatrix, compared with eps times the Melnikov function.
* ``poincare_section``: return map on the oscillator phase theta = theta*.
* ``lyapunov_mle``: largest Lyapunov exponent by the two-trajectory method.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from scipy.integrate import trapezoid
from tqdm import tqdm

from ..analytic.heteroclinic import (
    TWO_PI,
    HeteroclinicBranch,
    MelnikovSetup,
    resolve_branch,
    unperturbed_orbit,
)
from ..config import (
    DEFAULT_SEED,
    IntegratorConfig,
    LyapunovConfig,
    SectionConfig,
    integrator_config,
    lyapunov_config,
    section_config,
)
from ..exceptions import DomainError, Lorenz5Error
from ..geometry.poisson import Array, ScalarField, as_state, check_eps
from ..melnikov.melnikov import HarmonicFit, fit_harmonic, melnikov_amplitude, melnikov_closed
from ..models.lorenz import Chart, ModelParams, casimir_mu, rigid_energy
from ..numerics.integrators import STATUS_OK, Trajectory, integrate, propagate, refine_crossing

LOGGER = logging.getLogger(__name__)

STATUS_OFF_SADDLE = "off_saddle"
STATUS_INCOMPLETE = "incomplete"
STATUS_COLLAPSE = "collapse"
STATUS_REFINE_FAILED = "refine_failed"

# Endpoint |mu1| / sqrt(C) above which a passage no longer ends near a saddle
OFF_SADDLE_RATIO = 0.5


def _mu_u_rhs(eps: float):
    return ModelParams(eps, Chart.MU_U).rhs()


# Energy change across a separatrix passage

def separatrix_energy(p: ArrayLike, eps: float) -> float:
    """F corrected for the forced oscillation of the saddle it sits near.

    Near (0, +-sqrt(C), 0) the oscillator drives the periodic response
    mu3p = eps C u2 / (1 + C), mu1p = -sign(mu2) eps sqrt(C) u1 / (1 + C).
    The hyperbolic invariant of the deviation from that response is

        F_hat = F - mu3 mu3p + mu1 mu1p + (mu3p^2 - mu1p^2) / 2,

    which stays constant while the linearization holds and equals F at eps = 0.
    """
    m1, m2, m3, u1, u2 = as_state(p)
    eps = check_eps(eps)
    C = m1 * m1 + m2 * m2
    sigma = 1.0 if m2 >= 0 else -1.0
    mu3p = eps * C * u2 / (1 + C)
    mu1p = -sigma * eps * math.sqrt(C) * u1 / (1 + C)
    return rigid_energy(p) - m3 * mu3p + m1 * mu1p + 0.5 * (mu3p * mu3p - mu1p * mu1p)


def passage_window(eps: float, M: float, T: float) -> float:
    """Half-width of the time window spent shadowing the separatrix.

    After about ln(2M / sqrt(eps)) / M the distance to the saddle is of the
    order of the forced response and the orbit leaves the separatrix.
    """
    eps = abs(check_eps(eps))
    if eps == 0:
        return T
    return min(T, max(math.log(2 * M / math.sqrt(eps)) / M, 1.0 / M))


def flux_integral(trajectories: List[Trajectory], eps: float) -> float:
    """Trapezoidal integral of dF/dt along recorded trajectories.

    dF/dt = eps {F, H1} + eps^2 {F, mu3^2 / 2} = -eps mu1 mu2 u2 + eps^2 mu1 mu2 mu3.
    Each trajectory contributes F(end) - F(start) in its own time direction,
    so backward runs enter with the opposite sign of the forward ones.
    """
    eps = check_eps(eps)
    total = 0.0
    for traj in trajectories:
        m1, m2, m3, _, u2 = traj.states[:, :5].T
        rate = -eps * m1 * m2 * u2 + eps ** 2 * m1 * m2 * m3
        total += float(trapezoid(rate, traj.times))
    return total


@dataclass
class DeltaFResult:
    """One separatrix passage at fixed (eps, M, k, theta0).

    ``delta_f`` is the change of :func:`separatrix_energy` across the
    passage, unscaled. ``scaled`` and ``raw_scaled`` divide by eps (NaN at
    eps = 0); ``flux_scaled`` is the independent trapezoid oracle for the
    raw change.
    """

    eps: float
    M: float
    k: float
    theta0: float
    window: float
    delta_f: float
    scaled: float
    raw_scaled: float
    flux_scaled: float
    prediction: float
    status: str = STATUS_OK
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    @property
    def relative_error(self) -> float:
        scale = melnikov_amplitude(self.M, self.k)
        return abs(self.scaled - self.prediction) / scale if scale > 0 else float("nan")

    def as_row(self) -> dict:
        return {
            "eps": self.eps, "M": self.M, "k": self.k, "theta0": self.theta0,
            "window": self.window, "delta_f": self.delta_f, "scaled": self.scaled,
            "raw_scaled": self.raw_scaled, "flux_scaled": self.flux_scaled,
            "prediction": self.prediction, "status": self.status, "message": self.message,
        }


def delta_f_experiment(
    eps: float,
    s: MelnikovSetup,
    b: Optional[HeteroclinicBranch] = None,
    T: float = 30.0,
    cfg: Optional[IntegratorConfig] = None,
) -> DeltaFResult:
    """Change of F across one passage of the perturbed flow along the separatrix.

    The perturbed system is shot forward and backward from the orbit midpoint
    (mu~(0), I = k, theta = theta0) over the passage window, and the change of
    the saddle-corrected energy between the two endpoints is compared with
    eps * M(theta0). ``T`` is an upper bound on the passage window, not the
    start time of the run.

    Raises:
        DomainError: If T is not positive
    """
    cfg = cfg or integrator_config
    eps = check_eps(eps)
    b = resolve_branch(s, b)
    if not (math.isfinite(T) and T > 0):
        raise DomainError(f"passage half-width T must be positive, got {T}")

    window = passage_window(eps, s.M, T)
    start = unperturbed_orbit(0.0, s, b).state
    rhs = _mu_u_rhs(eps)
    forward = integrate(rhs, start, (0.0, window), cfg)
    backward = integrate(rhs, start, (0.0, -window), cfg)

    end_state, begin_state = forward.final, backward.final
    delta_f = separatrix_energy(end_state, eps) - separatrix_energy(begin_state, eps)
    raw = rigid_energy(end_state) - rigid_energy(begin_state)
    flux = flux_integral([forward], eps) - flux_integral([backward], eps)

    status, message = STATUS_OK, ""
    for run in (forward, backward):
        if not run.ok:
            status, message = run.status, run.message
            break
    else:
        if eps != 0:
            ratios = [abs(x[0]) / math.sqrt(max(casimir_mu(x), 1e-300)) for x in (end_state, begin_state)]
            if max(ratios) > OFF_SADDLE_RATIO:
                status = STATUS_OFF_SADDLE
                message = f"passage ended away from the saddles (|mu1|/sqrt(C) = {max(ratios):.3g})"

    if status != STATUS_OK:
        LOGGER.warning(f"delta-F experiment eps={eps:g} theta0={s.theta0:g} flagged: {message}")

    scale = (lambda v: v / eps) if eps != 0 else (lambda v: float("nan"))
    result = DeltaFResult(
        eps=eps, M=s.M, k=s.k, theta0=s.theta0, window=window,
        delta_f=delta_f, scaled=scale(delta_f), raw_scaled=scale(raw), flux_scaled=scale(flux),
        prediction=melnikov_closed(s, b), status=status, message=message,
    )
    LOGGER.debug(f"delta-F eps={eps:g} theta0={s.theta0:.6f}: dF/eps={result.scaled:.8g}, "
                 f"prediction {result.prediction:.8g}")
    return result


@dataclass
class DeltaFFit:
    """Passage experiments over theta0 with their harmonic fit.

    Attributes:
        results: One passage per phase.
        fit: Least-squares A cos(theta0) + B sin(theta0) of the scaled changes.
        amplitude: pi sqrt(2k) sech(pi / (2M)).
        sign: Branch sign s3; the predicted A is -sign * amplitude.
    """

    results: List[DeltaFResult]
    fit: HarmonicFit
    amplitude: float
    sign: int = 1

    @property
    def predicted_A(self) -> float:
        return -self.sign * self.amplitude

    @property
    def relative_amplitude_error(self) -> float:
        return abs(self.fit.A - self.predicted_A) / self.amplitude

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.as_row() for r in self.results])


def delta_f_fit(
    eps: float,
    s: MelnikovSetup,
    b: Optional[HeteroclinicBranch] = None,
    n_phases: int = 16,
    T: float = 30.0,
    cfg: Optional[IntegratorConfig] = None,
    progress: bool = False,
    grid: Optional[ArrayLike] = None,
) -> DeltaFFit:
    """Run the passage experiment on a theta0 grid and fit A cos + B sin.

    Raises:
        DomainError: If eps is zero (dF/eps is undefined)
    """
    if check_eps(eps) == 0:
        raise DomainError("the phase fit needs eps != 0")
    b = resolve_branch(s, b)
    theta = np.linspace(0.0, TWO_PI, n_phases, endpoint=False) if grid is None else np.asarray(grid, dtype=float)
    results = [
        delta_f_experiment(eps, s.with_theta0(float(t)), b, T, cfg)
        for t in tqdm(theta, desc="delta-F", disable=not progress)
    ]
    fit = fit_harmonic(theta, [r.scaled for r in results])
    outcome = DeltaFFit(results, fit, melnikov_amplitude(s.M, s.k), b.melnikov_sign)
    LOGGER.info(f"delta-F fit eps={eps:g}: A={fit.A:.8g} B={fit.B:.3g} (predicted A={outcome.predicted_A:.8g})")
    return outcome


# Poincare sections

def section_event(theta_star: float) -> ScalarField:
    """e = u2 cos(theta*) - u1 sin(theta*) = sqrt(2I) sin(theta - theta*).

    Increases through zero exactly when theta increases through theta*.
    """
    c, s = math.cos(theta_star), math.sin(theta_star)
    return ScalarField(
        func=lambda p: p[4] * c - p[3] * s,
        gradient=lambda p: np.array([0.0, 0.0, 0.0, -s, c]),
        name="section",
    )


@dataclass
class SectionResult:
    """Crossings of theta = theta* in the increasing direction.

    Attributes:
        times: Crossing times.
        states: Full (mu, u) states at the crossings, shape (n, 5).
        theta_star: Section phase.
        min_theta_rate: Smallest d(theta)/dt seen along the run.
        status: ``ok``, ``incomplete`` or an integrator status.
    """

    times: Array
    states: Array
    theta_star: float
    min_theta_rate: float = 1.0
    status: str = STATUS_OK
    message: str = ""

    def __len__(self) -> int:
        return len(self.times)

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    @property
    def points(self) -> Array:
        """(mu1, mu2, mu3, I) at each crossing."""
        if not len(self):
            return np.empty((0, 4))
        action = 0.5 * (self.states[:, 3] ** 2 + self.states[:, 4] ** 2)
        return np.column_stack([self.states[:, :3], action])

    def series(self, name: str) -> Array:
        if name == "F":
            return np.array([rigid_energy(x) for x in self.states])
        if name == "casimir":
            return np.array([casimir_mu(x) for x in self.states])
        raise KeyError(name)

    def spread(self, name: str) -> float:
        """max - min of F or the Casimir over the crossings (0 for fewer than two)."""
        values = self.series(name)
        return float(values.max() - values.min()) if values.size > 1 else 0.0

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.points, columns=["mu1", "mu2", "mu3", "I"])
        frame.insert(0, "t", self.times)
        frame["F"] = self.series("F") if len(self) else []
        frame["casimir"] = self.series("casimir") if len(self) else []
        return frame


def _theta_rate(states: Array, eps: float) -> Array:
    # d(theta)/dt = 1 - eps mu3 u2 / (u1^2 + u2^2)
    r2 = states[:, 3] ** 2 + states[:, 4] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(r2 > 0, 1.0 - eps * states[:, 2] * states[:, 4] / r2, np.nan)


def poincare_section(
    eps: float,
    x0: ArrayLike,
    theta_star: float = 0.0,
    n: Optional[int] = None,
    cfg: Optional[IntegratorConfig] = None,
    section: Optional[SectionConfig] = None,
    progress: bool = False,
) -> SectionResult:
    """Collect ``n`` upward crossings of theta = theta* (mod 2pi).

    The flow is integrated in chunks; each sign change of the section event
    is refined by re-integration to |event| < 1e-10. Running out of the
    time horizon returns the crossings found so far with status
    ``incomplete``; a crossing that cannot be refined ends the run with
    status ``refine_failed``.
    """
    cfg = cfg or integrator_config
    section = section or section_config
    eps = check_eps(eps)
    n = section.crossings if n is None else int(n)
    if n < 0:
        raise DomainError(f"number of crossings must be non-negative, got {n}")
    state = as_state(x0)
    event = section_event(theta_star)

    times: List[float] = []
    states: List[Array] = []
    status, message = STATUS_OK, ""
    min_rate = 1.0
    if n == 0:
        return SectionResult(np.empty(0), np.empty((0, 5)), theta_star)

    rhs = _mu_u_rhs(eps)
    horizon = section.horizon()
    t = 0.0
    bar = tqdm(total=n, desc="Poincare", disable=not progress)
    while len(times) < n and t < horizon:
        t_next = min(t + section.chunk, horizon)
        traj = integrate(rhs, state, (t, t_next), cfg)
        min_rate = min(min_rate, float(np.nanmin(_theta_rate(traj.states, eps), initial=1.0)))
        values = np.array([event.func(x) for x in traj.states])
        for i in np.flatnonzero((values[:-1] < 0) & (values[1:] >= 0)):
            try:
                crossing = refine_crossing(traj, event, int(i))
            except (Lorenz5Error, ValueError) as e:
                status, message = STATUS_REFINE_FAILED, f"crossing {len(times) + 1} could not be refined: {e}"
                break
            times.append(crossing.t)
            states.append(crossing.state)
            bar.update(1)
            if len(times) == n:
                break
        if status != STATUS_OK:
            break
        if not traj.ok:
            status, message = traj.status, traj.message
            break
        state, t = traj.final, t_next
    bar.close()

    if status == STATUS_OK and len(times) < n:
        status = STATUS_INCOMPLETE
        message = f"found {len(times)} of {n} crossings before t={horizon:g}"
    if min_rate <= 0:
        LOGGER.warning(f"theta stopped increasing along the section run (min rate {min_rate:.3g})")
    if status != STATUS_OK:
        LOGGER.warning(f"Poincare section eps={eps:g}: {message}")
    return SectionResult(
        times=np.array(times),
        states=np.array(states) if states else np.empty((0, 5)),
        theta_star=theta_star,
        min_theta_rate=min_rate,
        status=status,
        message=message,
    )


# Largest Lyapunov exponent

@dataclass
class LyapunovEstimate:
    """Running average of log separation growth per unit time.

    Attributes:
        lambda_max: Final running average (1/time).
        series: Running average after each renormalization.
        times: End time of each renormalization interval.
        renorm_interval, total_time, delta0: Estimator settings.
        tail_variation: max - min of the last tenth of the series.
    """

    lambda_max: float
    series: Array
    times: Array
    renorm_interval: float
    total_time: float
    delta0: float
    tail_variation: float
    status: str = STATUS_OK
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "lambda": self.series})


def _stacked(rhs):
    def pair(y):
        return np.concatenate([rhs(y[:5]), rhs(y[5:])])
    return pair


def lyapunov_mle(
    eps: float,
    x0: ArrayLike,
    config: Optional[LyapunovConfig] = None,
    cfg: Optional[IntegratorConfig] = None,
    seed: int = DEFAULT_SEED,
    progress: bool = False,
) -> LyapunovEstimate:
    """Benettin estimate of the largest Lyapunov exponent of the mu-u flow.

    A reference and a perturbed copy (offset delta0 along a seeded random
    unit direction) are integrated together; every renormalization interval
    the log growth of their separation is accumulated and the offset is
    rescaled back to delta0.

    Inside the separatrix layer one seed gives a noisy estimate; compare
    couplings through the mean over several seed phases theta0.
    """
    config = config or lyapunov_config
    cfg = cfg or integrator_config
    eps = check_eps(eps)
    reference = as_state(x0)

    direction = np.random.default_rng(seed).standard_normal(5)
    direction /= np.linalg.norm(direction)
    y = np.concatenate([reference, reference + config.delta0 * direction])

    pair = _stacked(_mu_u_rhs(eps))
    intervals = max(1, int(round(config.total_time / config.renorm_interval)))
    tau = config.renorm_interval
    log_sum = 0.0
    series, times = [], []
    status, message = STATUS_OK, ""

    for n in tqdm(range(1, intervals + 1), desc="Lyapunov", disable=not progress):
        step = propagate(pair, y, ((n - 1) * tau, n * tau), cfg)
        if step.status != STATUS_OK:
            status, message = step.status, step.message
            break
        y = step.state
        separation = y[5:] - y[:5]
        distance = float(np.linalg.norm(separation))
        if not distance > 0 or not math.isfinite(distance):
            status = STATUS_COLLAPSE
            message = f"separation collapsed to {distance:g} at t={n * tau:g}"
            break
        log_sum += math.log(distance / config.delta0)
        series.append(log_sum / (n * tau))
        times.append(n * tau)
        y = np.concatenate([y[:5], y[:5] + (config.delta0 / distance) * separation])

    if status != STATUS_OK:
        LOGGER.warning(f"Lyapunov run eps={eps:g} flagged: {message}")
    series = np.array(series)
    tail = series[-max(1, len(series) // 10):] if series.size else series
    estimate = LyapunovEstimate(
        lambda_max=float(series[-1]) if series.size else float("nan"),
        series=series,
        times=np.array(times),
        renorm_interval=tau,
        total_time=config.total_time,
        delta0=config.delta0,
        tail_variation=float(tail.max() - tail.min()) if tail.size else float("nan"),
        status=status,
        message=message,
    )
    LOGGER.info(f"Lyapunov eps={eps:g}: lambda_max={estimate.lambda_max:.6g} "
                f"(tail variation {estimate.tail_variation:.3g})")
    return estimate
