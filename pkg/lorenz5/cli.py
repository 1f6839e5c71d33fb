import contextlib
import dataclasses
import logging
import sys
from pathlib import Path

import click
import numpy as np
import pandas as pd

from lorenz5.analytic.heteroclinic import (
    HeteroclinicBranch,
    MelnikovSetup,
    regular_seed,
    separatrix_seed,
    unperturbed_orbit,
)
from lorenz5.config import (
    DEFAULT_SEED,
    INTEGRATOR_METHODS,
    IntegratorConfig,
    LyapunovConfig,
    QuadConfig,
    SectionConfig,
)
from lorenz5.csv_generator.generate import FORMATS, render_table, write_table
from lorenz5.diagnostics.chaos import delta_f_fit, lyapunov_mle, poincare_section
from lorenz5.diagnostics.sweep import TASKS, SweepGrid, SweepSettings, sweep
from lorenz5.exceptions import ConfigurationError, DomainError
from lorenz5.geometry.poisson import R5, R5_FAULTY
from lorenz5.melnikov.melnikov import melnikov_profile
from lorenz5.models.checks import checks_frame, run_checks
from lorenz5.models.lorenz import Chart, ModelParams, phi, phi_inv, tracked_fields
from lorenz5.numerics.integrators import integrate
from lorenz5.parsers import ConfigFileParser, parse_grid, parse_number, parse_span, parse_state, parse_values

LOGGER = logging.getLogger(__name__)

# Config-file keys whose parameter name differs from the lower-cased flag
PARAM_ALIASES = {
    "M": "big_m", "T": "big_t", "M-values": "m_values", "M_values": "m_values",
    "format": "fmt", "tol": "quad_tol",
}


def _param_name(key: str) -> str:
    return PARAM_ALIASES.get(key, key.replace("-", "_").lower())


def _load_config(ctx: click.Context, param: click.Parameter, value):
    """Install a key = value file as click's default_map so explicit flags win."""
    if value is None:
        return value
    try:
        parsed = ConfigFileParser.parse(Path(value).read_text(encoding="utf-8"))
    except ConfigurationError as e:
        raise click.BadParameter(f"{value}: {e}", ctx=ctx, param=param)
    known = {p.name for p in ctx.command.params}
    defaults = {}
    for key, item in parsed.items():
        name = _param_name(key)
        if name not in known or name == "config":
            raise click.BadParameter(f"{value}: unknown key '{key}' for '{ctx.command.name}'", ctx=ctx, param=param)
        defaults[name] = item
    ctx.default_map = {**(ctx.default_map or {}), **defaults}
    return value


def common_options(func):
    """Flags shared by every command."""
    options = [
        click.option("--config", type=click.Path(exists=True, dir_okay=False), callback=_load_config,
                     is_eager=True, expose_value=False, help="key = value file with defaults for these flags"),
        click.option("--eps", type=float, default=None, help="Coupling eps"),
        click.option("--M", "big_m", type=float, default=1.0, show_default=True, help="Casimir radius M"),
        click.option("--k", type=float, default=0.5, show_default=True, help="Action level k"),
        click.option("--theta0", default="0", show_default=True, help="Oscillator phase (pi allowed)"),
        click.option("--branch", default="+++", show_default=True, help="Heteroclinic branch: +++, +--, -+-, --+"),
        click.option("--T", "big_t", type=float, default=None, help="Truncation / passage half-width"),
        click.option("--method", type=click.Choice(INTEGRATOR_METHODS), default="rk45", show_default=True),
        click.option("--rtol", type=float, default=1e-10, show_default=True),
        click.option("--atol", type=float, default=1e-12, show_default=True),
        click.option("--step", type=float, default=1e-3, show_default=True, help="RK4 step"),
        click.option("--grid", default=None, help="theta0 grid start:stop:count"),
        click.option("--out", "-o", default="-", show_default=True, help="Output file, '-' for stdout"),
        click.option("--format", "fmt", type=click.Choice(FORMATS), default="csv", show_default=True),
        click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@contextlib.contextmanager
def usage_errors():
    """Report invalid input as a usage error (exit status 2)."""
    try:
        yield
    except (DomainError, ConfigurationError) as e:
        raise click.UsageError(str(e))


def _progress(ctx: click.Context) -> bool:
    return not ctx.obj.get("quiet", False) and sys.stderr.isatty()


def _integrator(params) -> IntegratorConfig:
    return IntegratorConfig(method=params["method"], step=params["step"], rtol=params["rtol"], atol=params["atol"])


def _setup(params) -> MelnikovSetup:
    return MelnikovSetup(params["big_m"], params["k"], parse_number(params["theta0"]))


def _branch(params) -> HeteroclinicBranch:
    return HeteroclinicBranch.from_string(params["branch"], params["big_m"])


def _metadata(ctx: click.Context, **sections) -> dict:
    params = {key: value for key, value in ctx.params.items() if key not in ("out",)}
    metadata = {"command": ctx.command.name, "params": params}
    for name, section in sections.items():
        metadata[name] = dataclasses.asdict(section) if dataclasses.is_dataclass(section) else section
    return metadata


def _emit(params, frame: pd.DataFrame, metadata: dict, extra=None, failure=None) -> None:
    if params["out"] == "-":
        click.echo(render_table(frame, params["fmt"], metadata, extra, failure), nl=False)
    else:
        write_table(frame, params["out"], params["fmt"], metadata, extra, failure)
        LOGGER.info(f"wrote {params['out']}")
    if failure:
        click.echo(f"FAILED: {failure}", err=True)


@click.group()
@click.option("--verbose", "-v", count=True, help="Repeat for more detail")
@click.option("--quiet", is_flag=True, help="Hide progress bars")
@click.pass_context
def cli(ctx: click.Context, verbose: int, quiet: bool) -> None:
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("lorenz5").setLevel(level)
    ctx.ensure_object(dict)
    ctx.obj["quiet"] = quiet


@cli.command("verify", help="Structural checks of both Poisson structures and the chart change")
@common_options
@click.option("--inject-fault", is_flag=True, help="Flip the sign of {x1, x3} to exercise the failure path")
@click.pass_context
def verify(ctx: click.Context, inject_fault: bool, **params) -> None:
    structure = R5_FAULTY if inject_fault else R5
    results = run_checks(structure, seed=params["seed"])
    frame = checks_frame(results)
    failed = [f"{r.check}[{r.target}]" for r in results if not r.passed]
    failure = f"checks failed: {', '.join(failed)}" if failed else None
    _emit(params, frame, _metadata(ctx), failure=failure)
    if failed:
        ctx.exit(1)


@cli.command("simulate", help="Integrate the model and record conserved quantities")
@common_options
@click.option("--chart", type=click.Choice([c.value for c in Chart]), default=Chart.MU_U.value, show_default=True)
@click.option("--x0", default=None, help="Initial state, five comma separated values (default: heteroclinic seed)")
@click.option("--t-span", default="-10:10", show_default=True, help="t0:t1")
@click.option("--compare", is_flag=True, help="Report the deviation from the eps = 0 closed-form orbit")
@click.option("--tolerance", type=float, default=1e-6, show_default=True, help="Pass threshold for --compare at eps = 0")
@click.pass_context
def simulate(ctx: click.Context, chart: str, x0, t_span: str, compare: bool, tolerance: float, **params) -> None:
    with usage_errors():
        eps = 0.0 if params["eps"] is None else params["eps"]
        model = ModelParams(eps, chart)
        cfg = _integrator(params)
        t0, t1 = parse_span(t_span)
        setup, branch = _setup(params), _branch(params)
        if x0 is None:
            start = unperturbed_orbit(t0, setup, branch).state
            if model.chart is Chart.X:
                start = phi_inv(start, eps)
        else:
            start = parse_state(x0)

    traj = integrate(model.rhs(), start, (t0, t1), cfg, tracked_fields(model))
    columns = ["x1", "x2", "x3", "x4", "x5"] if model.chart is Chart.X else ["mu1", "mu2", "mu3", "u1", "u2"]
    frame = traj.to_frame(columns)
    summary = {"steps": len(traj) - 1, "status": traj.status}
    summary.update({f"drift.{name}": traj.drift(name) for name in traj.tracked})

    failure = None if traj.ok else traj.message
    if compare:
        reference = np.array([unperturbed_orbit(t, setup, branch).state for t in traj.times])
        states = traj.states if model.chart is Chart.MU_U else np.array([phi(s, eps) for s in traj.states])
        deviation = np.max(np.abs(states - reference), axis=1)
        frame["deviation"] = deviation
        summary["max_deviation"] = float(deviation.max())
        if failure is None and eps == 0 and summary["max_deviation"] >= tolerance:
            failure = f"max deviation {summary['max_deviation']:.3g} from the closed-form orbit exceeds {tolerance:g}"
    _emit(params, frame, _metadata(ctx, integrator=cfg, summary=summary), failure=failure)
    if failure:
        ctx.exit(1)


@cli.command("melnikov", help="Melnikov function on a theta0 grid against its closed form")
@common_options
@click.option("--tol", "quad_tol", type=float, default=1e-10, show_default=True, help="Quadrature absolute tolerance")
@click.option("--tolerance", type=float, default=1e-8, show_default=True, help="Pass threshold on |numeric - closed|")
@click.option("--workers", type=int, default=1, show_default=True)
@click.pass_context
def melnikov(ctx: click.Context, quad_tol: float, tolerance: float, workers: int, **params) -> None:
    with usage_errors():
        quad = QuadConfig(T=params["big_t"], tol=quad_tol)
        setup, branch = _setup(params), _branch(params)
        grid = parse_grid(params["grid"] or "0:2pi:128")
        profile = melnikov_profile(setup, branch, grid, quad, workers=workers, progress=_progress(ctx))

    summary = {"max_abs_err": profile.max_abs_err, "degenerate": profile.degenerate,
               "zeros": len(profile.zeros), "satisfies_hypotheses": setup.satisfies_hypotheses}
    failure = None
    if not np.all(profile.converged):
        failure = "quadrature did not converge at some grid points"
    elif not profile.passed(tolerance):
        failure = f"max |numeric - closed| = {profile.max_abs_err:.3g} or a non-simple zero"
    if profile.degenerate:
        LOGGER.info("Melnikov function vanishes identically; no simple zeros")
    _emit(params, profile.to_frame(), _metadata(ctx, quad=quad, summary=summary),
          extra={"zeros": profile.zeros_frame()}, failure=failure)
    if failure:
        ctx.exit(1)


@cli.command("deltaf", help="Energy change across a separatrix passage versus eps * M(theta0)")
@common_options
@click.option("--tolerance", type=float, default=0.05, show_default=True, help="Pass threshold on the relative amplitude error")
@click.pass_context
def deltaf(ctx: click.Context, tolerance: float, **params) -> None:
    with usage_errors():
        eps = 1e-3 if params["eps"] is None else params["eps"]
        cfg = _integrator(params)
        setup, branch = _setup(params), _branch(params)
        grid = parse_grid(params["grid"] or "0:2pi:16")
        T = 30.0 if params["big_t"] is None else params["big_t"]
        result = delta_f_fit(eps, setup, branch, T=T, cfg=cfg, progress=_progress(ctx), grid=grid)

    summary = {"A": result.fit.A, "B": result.fit.B, "predicted_A": result.predicted_A,
               "relative_amplitude_error": result.relative_amplitude_error}
    failure = None
    if not result.ok:
        failure = "; ".join(sorted({r.message for r in result.results if not r.ok}))
    elif result.relative_amplitude_error > tolerance:
        failure = f"fitted amplitude off by {result.relative_amplitude_error:.3g} (tolerance {tolerance:g})"
    _emit(params, result.to_frame(), _metadata(ctx, integrator=cfg, summary=summary), failure=failure)
    if failure:
        ctx.exit(1)


def _start_state(start: str, x0, setup: MelnikovSetup, branch: HeteroclinicBranch):
    if x0 is not None:
        return parse_state(x0)
    if start == "regular":
        return regular_seed(setup.M, setup.k, setup.theta0)
    return separatrix_seed(setup, branch)


@cli.command("lyapunov", help="Largest Lyapunov exponent by the two-trajectory method")
@common_options
@click.option("--start", type=click.Choice(["separatrix", "regular"]), default="separatrix", show_default=True)
@click.option("--x0", default=None, help="Initial (mu, u) state; overrides --start")
@click.option("--total-time", type=float, default=1000.0, show_default=True)
@click.option("--renorm-interval", type=float, default=1.0, show_default=True)
@click.option("--delta0", type=float, default=1e-8, show_default=True)
@click.pass_context
def lyapunov(ctx: click.Context, start: str, x0, total_time: float, renorm_interval: float, delta0: float,
             **params) -> None:
    with usage_errors():
        eps = 0.1 if params["eps"] is None else params["eps"]
        cfg = _integrator(params)
        config = LyapunovConfig(total_time, renorm_interval, delta0)
        setup, branch = _setup(params), _branch(params)
        state = _start_state(start, x0, setup, branch)
        estimate = lyapunov_mle(eps, state, config, cfg, seed=params["seed"], progress=_progress(ctx))

    summary = {"lambda_max": estimate.lambda_max, "tail_variation": estimate.tail_variation,
               "status": estimate.status}
    failure = None if estimate.ok else estimate.message
    _emit(params, estimate.to_frame(), _metadata(ctx, integrator=cfg, lyapunov=config, summary=summary),
          failure=failure)
    if failure:
        ctx.exit(1)


@cli.command("poincare", help="Poincare section at theta = theta*")
@common_options
@click.option("--theta-star", default="0", show_default=True, help="Section phase (pi allowed)")
@click.option("--crossings", type=int, default=200, show_default=True)
@click.option("--max-time", type=float, default=None, help="Integration horizon")
@click.option("--start", type=click.Choice(["separatrix", "regular"]), default="separatrix", show_default=True)
@click.option("--x0", default=None, help="Initial (mu, u) state; overrides --start")
@click.pass_context
def poincare(ctx: click.Context, theta_star: str, crossings: int, max_time, start: str, x0, **params) -> None:
    with usage_errors():
        eps = 0.1 if params["eps"] is None else params["eps"]
        cfg = _integrator(params)
        section = SectionConfig(crossings=crossings, max_time=max_time)
        setup, branch = _setup(params), _branch(params)
        state = _start_state(start, x0, setup, branch)
        result = poincare_section(eps, state, parse_number(theta_star), crossings, cfg, section,
                                  progress=_progress(ctx))

    summary = {"crossings": len(result), "F_spread": result.spread("F"),
               "casimir_spread": result.spread("casimir"), "min_theta_rate": result.min_theta_rate}
    failure = None if result.ok else result.message
    _emit(params, result.to_frame(), _metadata(ctx, integrator=cfg, section=section, summary=summary),
          failure=failure)
    if failure:
        ctx.exit(1)


@cli.command("sweep", help="Evaluate a diagnostic over a parameter grid")
@common_options
@click.option("--task", type=click.Choice(TASKS), default="none", show_default=True)
@click.option("--eps-values", default="0", show_default=True, help="Comma separated eps values")
@click.option("--k-values", default="0.5", show_default=True, help="Comma separated k values")
@click.option("--M-values", "m_values", default="1", show_default=True, help="Comma separated M values")
@click.option("--workers", type=int, default=1, show_default=True)
@click.pass_context
def sweep_command(ctx: click.Context, task: str, eps_values: str, k_values: str, m_values: str, workers: int,
                  **params) -> None:
    with usage_errors():
        theta0 = parse_grid(params["grid"]) if params["grid"] else [parse_number(params["theta0"])]
        grid = SweepGrid(parse_values(eps_values), parse_values(k_values), parse_values(m_values), theta0, task)
        settings = SweepSettings(
            integrator=_integrator(params),
            quad=QuadConfig(T=params["big_t"]),
            T=30.0 if params["big_t"] is None else params["big_t"],
            seed=params["seed"],
        )
    frame = sweep(grid, settings, workers=workers, progress=_progress(ctx))
    failed = int((frame["status"] != "ok").sum())
    failure = f"{failed} of {len(frame)} cells failed" if failed else None
    _emit(params, frame, _metadata(ctx, summary={"cells": len(frame), "failed": failed}), failure=failure)
    if failure:
        ctx.exit(1)


if __name__ == "__main__":
    cli()
