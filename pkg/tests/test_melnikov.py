import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorenz5.analytic.heteroclinic import ADMISSIBLE_SIGNS, HeteroclinicBranch, MelnikovSetup
from lorenz5.config import QuadConfig
from lorenz5.exceptions import ConfigurationError, DomainError
from lorenz5.melnikov.melnikov import (
    default_grid,
    fit_harmonic,
    integrand,
    integrand_via_bracket,
    melnikov_amplitude,
    melnikov_closed,
    melnikov_derivative_closed,
    melnikov_numeric,
    melnikov_profile,
    tail_bound,
)


def test_closed_form_reference_values():
    s = MelnikovSetup(M=1.0, k=0.5)
    assert melnikov_closed(s) == pytest.approx(-math.pi / math.cosh(math.pi / 2), rel=1e-14)
    assert melnikov_closed(s.with_theta0(math.pi / 2)) == pytest.approx(0.0, abs=1e-15)
    assert melnikov_closed(s, HeteroclinicBranch((1, -1, -1), 1.0)) == pytest.approx(
        math.pi / math.cosh(math.pi / 2), rel=1e-14)
    assert melnikov_amplitude(2.0, 2.0) == pytest.approx(2 * math.pi / math.cosh(math.pi / 4))


def test_amplitude_grows_with_the_radius():
    values = [melnikov_amplitude(M, 0.5) for M in (0.25, 0.5, 1.0, 2.0, 4.0)]
    assert all(a < b for a, b in zip(values, values[1:]))
    assert values[-1] < math.pi


def test_amplitude_vanishes_without_oscillation():
    assert melnikov_amplitude(1.0, 0.0) == 0.0
    with pytest.raises(DomainError):
        melnikov_amplitude(0.0, 0.5)


@given(st.floats(min_value=-10.0, max_value=10.0), st.floats(min_value=0.0, max_value=2 * math.pi))
def test_integrand_matches_the_bracket(t, theta0):
    s = MelnikovSetup(M=1.3, k=0.7, theta0=theta0)
    for signs in ADMISSIBLE_SIGNS:
        b = HeteroclinicBranch(signs, 1.3)
        assert integrand(t, s, b) == pytest.approx(integrand_via_bracket(t, s, b), abs=1e-12)


@pytest.mark.parametrize("signs", ADMISSIBLE_SIGNS)
@pytest.mark.parametrize("theta0", [0.0, 0.4, math.pi / 2, 2.0, math.pi, 5.5])
def test_numeric_matches_closed_form(signs, theta0):
    s = MelnikovSetup(M=1.0, k=0.5, theta0=theta0)
    b = HeteroclinicBranch(signs, 1.0)
    result = melnikov_numeric(s, b)
    assert result.converged
    assert result.value == pytest.approx(melnikov_closed(s, b), abs=1e-8)
    assert result.error < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.3, max_value=3.0), st.floats(min_value=0.05, max_value=2.0),
       st.floats(min_value=0.0, max_value=2 * math.pi))
def test_numeric_matches_closed_form_across_parameters(M, k, theta0):
    s = MelnikovSetup(M=M, k=k, theta0=theta0)
    assert melnikov_numeric(s).value == pytest.approx(melnikov_closed(s), abs=1e-8)


def test_zero_action_level_gives_a_zero_integral():
    result = melnikov_numeric(MelnikovSetup(M=1.0, k=0.0, theta0=0.3))
    assert result.value == 0.0


def test_short_truncation_is_rejected():
    with pytest.raises(DomainError):
        melnikov_numeric(MelnikovSetup(), quad=QuadConfig(T=5.0))


def test_tail_bound_decays():
    s = MelnikovSetup(M=1.0, k=0.5)
    assert tail_bound(s, 50.0) < 1e-20
    assert tail_bound(s, 10.0) > tail_bound(s, 20.0)


def test_profile_on_the_default_grid():
    profile = melnikov_profile(MelnikovSetup(M=1.0, k=0.5))
    assert profile.theta0.size == 128
    assert profile.passed()
    assert profile.max_abs_err < 1e-8
    assert not profile.degenerate
    assert len(profile.zeros) == 2
    for zero, expected in zip(profile.zeros, (math.pi / 2, 3 * math.pi / 2)):
        assert zero.theta0 == pytest.approx(expected, abs=1e-8)
        assert zero.simple
        s = MelnikovSetup(M=1.0, k=0.5, theta0=zero.theta0)
        assert zero.derivative == pytest.approx(melnikov_derivative_closed(s), rel=1e-5)

    frame = profile.to_frame()
    assert list(frame.columns) == ["theta0", "numeric", "closed", "abs_err", "error_estimate"]
    assert len(profile.zeros_frame()) == 2


@pytest.mark.parametrize("M", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("k", [0.25, 0.5, 1.0])
def test_profile_across_radii_and_actions(M, k):
    profile = melnikov_profile(MelnikovSetup(M=M, k=k))
    assert profile.max_abs_err < 1e-8
    assert profile.passed()
    assert len(profile.zeros) == 2
    slope = math.pi * math.sqrt(2 * k) / math.cosh(math.pi / (2 * M))
    for zero, expected in zip(profile.zeros, (math.pi / 2, 3 * math.pi / 2)):
        assert zero.theta0 == pytest.approx(expected, abs=1e-6)
        assert abs(zero.derivative) == pytest.approx(slope, rel=0.01)


def test_profile_zeros_on_a_grid_that_avoids_them():
    grid = np.linspace(0.1, 2 * math.pi + 0.1, 17, endpoint=False)
    profile = melnikov_profile(MelnikovSetup(M=2.0, k=1.0), HeteroclinicBranch((-1, 1, -1), 2.0), grid)
    assert [round(z.theta0, 8) for z in profile.zeros] == [round(math.pi / 2, 8), round(3 * math.pi / 2, 8)]


def test_degenerate_profile_at_zero_action():
    profile = melnikov_profile(MelnikovSetup(M=1.0, k=0.0), grid=default_grid(16))
    assert profile.degenerate
    assert profile.zeros == []
    assert profile.passed()


def test_profile_parallel_matches_serial():
    grid = default_grid(8)
    serial = melnikov_profile(MelnikovSetup(), grid=grid, locate_zeros=False)
    parallel = melnikov_profile(MelnikovSetup(), grid=grid, workers=2, locate_zeros=False)
    np.testing.assert_array_equal(serial.numeric, parallel.numeric)


def test_empty_grid():
    profile = melnikov_profile(MelnikovSetup(), grid=[])
    assert profile.theta0.size == 0
    assert profile.max_abs_err == 0.0
    assert profile.zeros == []


def test_harmonic_fit_recovers_coefficients():
    theta = default_grid(16)
    fit = fit_harmonic(theta, 1.5 * np.cos(theta) - 0.25 * np.sin(theta))
    assert fit.A == pytest.approx(1.5)
    assert fit.B == pytest.approx(-0.25, abs=1e-12)
    assert fit.residual < 1e-12


def test_harmonic_fit_rejects_bad_input():
    with pytest.raises(ConfigurationError):
        fit_harmonic([0.0, 1.0], [1.0])
    with pytest.raises(ConfigurationError):
        fit_harmonic([0.0, 1.0], [1.0, np.nan])
