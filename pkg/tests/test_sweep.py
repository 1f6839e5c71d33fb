import math

import numpy as np
import pytest

import lorenz5.diagnostics.sweep as sweep_module
from lorenz5.config import IntegratorConfig, LyapunovConfig, QuadConfig, SectionConfig
from lorenz5.diagnostics.sweep import KEYS, SweepGrid, SweepSettings, sweep
from lorenz5.exceptions import ConfigurationError
from lorenz5.numerics.quadrature import QuadResult


def test_grid_validation():
    with pytest.raises(ConfigurationError):
        SweepGrid(eps_values=[])
    with pytest.raises(ConfigurationError):
        SweepGrid(k_values=[0.5, math.nan])
    with pytest.raises(ConfigurationError):
        SweepGrid(task="bifurcation")
    grid = SweepGrid(eps_values=np.array([0.0, 0.1]), M_values=[1, 2], theta0_values=[0.0, 1.0, 2.0])
    assert len(grid) == 12
    assert len(list(grid.cells())) == 12
    assert grid.M_values == (1.0, 2.0)


def test_empty_task_on_a_single_cell():
    frame = sweep(SweepGrid())
    assert len(frame) == 1
    assert list(frame.columns) == KEYS + ["status", "error"]
    assert frame.loc[0, "status"] == "ok"


def test_amplitude_sweep_increases_with_the_radius():
    frame = sweep(SweepGrid(M_values=[2.0, 0.5, 1.0], task="melnikov_amplitude"))
    assert list(frame["M"]) == [0.5, 1.0, 2.0]
    assert frame["amplitude"].is_monotonic_increasing
    np.testing.assert_allclose(frame["numeric_amplitude"], frame["amplitude"], atol=1e-8)
    assert frame.loc[1, "amplitude"] == pytest.approx(math.pi / math.cosh(math.pi / 2))


def test_rows_are_keyed_and_sorted():
    frame = sweep(SweepGrid(eps_values=[0.2, 0.1], theta0_values=[1.0, 0.0], task="none"))
    assert list(zip(frame["eps"], frame["theta0"])) == [(0.1, 0.0), (0.1, 1.0), (0.2, 0.0), (0.2, 1.0)]


def test_failing_cells_do_not_abort_the_sweep():
    settings = SweepSettings(quad=QuadConfig(T=1.0))
    frame = sweep(SweepGrid(theta0_values=[0.0, 1.0], task="melnikov"), settings)
    assert len(frame) == 2
    assert set(frame["status"]) == {"error"}
    assert all("truncation" in message for message in frame["error"])


def test_unexpected_errors_are_recorded_per_cell(monkeypatch):
    def fail(*args, **kwargs):
        raise ValueError("f(a) and f(b) must have different signs")

    monkeypatch.setattr(sweep_module, "poincare_section", fail)
    frame = sweep(SweepGrid(eps_values=[0.1, 0.5], task="poincare_spread"))
    assert len(frame) == 2
    assert set(frame["status"]) == {"error"}
    assert all(message.startswith("ValueError: f(a) and f(b)") for message in frame["error"])


def test_amplitude_quadrature_failure_keeps_the_best_estimate(monkeypatch):
    monkeypatch.setattr(sweep_module, "melnikov_numeric",
                        lambda s, b=None, quad=None: QuadResult(0.5, 1e-3, False, "maximum number of subdivisions"))
    frame = sweep(SweepGrid(task="melnikov_amplitude"))
    assert frame.loc[0, "status"] == "error"
    assert "maximum number of subdivisions" in frame.loc[0, "error"]
    assert "best estimate 0.5" in frame.loc[0, "error"]


@pytest.mark.slow
def test_poincare_sweep_with_a_coarse_fixed_step():
    settings = SweepSettings(integrator=IntegratorConfig(method="rk4", step=2.5), section=SectionConfig(crossings=50))
    frame = sweep(SweepGrid(eps_values=[0.1, 0.5], task="poincare_spread"), settings)
    assert len(frame) == 2
    assert (frame["status"] == "ok").all()


def test_melnikov_sweep_serial_and_parallel_agree():
    grid = SweepGrid(k_values=[0.25, 0.5], theta0_values=[0.0, math.pi / 3], task="melnikov")
    serial = sweep(grid)
    parallel = sweep(grid, workers=2)
    assert serial.equals(parallel)
    assert (serial["abs_err"] < 1e-8).all()
    assert serial["converged"].all()


def test_poincare_and_lyapunov_tasks():
    settings = SweepSettings(section=SectionConfig(crossings=3), lyapunov=LyapunovConfig(total_time=3.0), seed=1)
    section = sweep(SweepGrid(task="poincare_spread"), settings)
    assert section.loc[0, "crossings"] == 3
    assert section.loc[0, "F_spread"] < 1e-8
    lyapunov = sweep(SweepGrid(eps_values=[0.1], task="lyapunov"), settings)
    assert lyapunov.loc[0, "status"] == "ok"
    assert np.isfinite(lyapunov.loc[0, "lambda_max"])


@pytest.mark.slow
def test_delta_f_error_shrinks_with_the_coupling():
    frame = sweep(SweepGrid(eps_values=[1e-2, 1e-3, 1e-4], task="deltaf"))
    errors = frame.set_index("eps")["abs_err"]
    assert errors[1e-4] < errors[1e-3] < errors[1e-2]
    assert (frame["run_status"] == "ok").all()
