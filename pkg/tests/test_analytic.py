import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lorenz5.analytic.heteroclinic import (
    ADMISSIBLE_SIGNS,
    INADMISSIBLE_SIGNS,
    HeteroclinicBranch,
    MelnikovSetup,
    action_angle_to_cart,
    cart_to_action_angle,
    heteroclinic,
    heteroclinic_residual,
    regular_seed,
    resolve_branch,
    saddle_eigenvalues,
    saddle_points,
    sech,
    separatrix_seed,
    unperturbed_orbit,
)
from lorenz5.exceptions import ConfigurationError, DomainError
from lorenz5.models.lorenz import casimir_mu, hamiltonian_eps, rigid_energy, transformed_rhs

radii = st.floats(min_value=0.1, max_value=5.0)
times = st.floats(min_value=-20.0, max_value=20.0)


def test_sign_classification():
    assert len(ADMISSIBLE_SIGNS) == 4 and len(INADMISSIBLE_SIGNS) == 4
    assert (1, 1, 1) in ADMISSIBLE_SIGNS
    assert (1, 1, -1) in INADMISSIBLE_SIGNS


@given(times, radii)
def test_admissible_branches_solve_the_equations(t, M):
    for signs in ADMISSIBLE_SIGNS:
        assert heteroclinic_residual(t, M, signs) < 1e-12 * max(1.0, M ** 3)


def test_inadmissible_branches_do_not():
    for signs in INADMISSIBLE_SIGNS:
        assert heteroclinic_residual(0.5, 1.0, signs) > 1e-3


@given(times, radii)
def test_branch_stays_on_the_cylinder_at_the_saddle_energy(t, M):
    mu = heteroclinic(t, HeteroclinicBranch((1, -1, -1), M))
    state = np.concatenate([mu, [0.0, 0.0]])
    assert casimir_mu(state) == pytest.approx(M ** 2, rel=1e-12)
    assert rigid_energy(state) == pytest.approx(M ** 2, rel=1e-12)


def test_branch_limits_are_the_saddles():
    b = HeteroclinicBranch((1, 1, 1), 2.0)
    upper, lower = saddle_points(2.0)
    np.testing.assert_allclose(heteroclinic(40.0, b), upper[:3], atol=1e-12)
    np.testing.assert_allclose(heteroclinic(-40.0, b), lower[:3], atol=1e-12)
    np.testing.assert_allclose(heteroclinic(0.0, b), [2.0, 0.0, 2.0])


def test_branch_validation():
    with pytest.raises(DomainError):
        HeteroclinicBranch((1, 1, -1))
    with pytest.raises(DomainError):
        HeteroclinicBranch((1, 1, 1), M=0.0)
    with pytest.raises(DomainError):
        HeteroclinicBranch((2, 1, 2))
    assert HeteroclinicBranch.from_string("-+-").signs == (-1, 1, -1)
    assert HeteroclinicBranch.from_string("--+").label == "--+"
    assert HeteroclinicBranch.from_string("+--").melnikov_sign == -1
    with pytest.raises(ConfigurationError):
        HeteroclinicBranch.from_string("++")
    with pytest.raises(DomainError):
        HeteroclinicBranch.from_string("++-")


def test_setup_bookkeeping():
    s = MelnikovSetup(M=2.0, k=0.5)
    assert s.h_tilde == 4.0
    assert s.h == 4.5
    assert s.l0 == pytest.approx(0.5)
    assert s.omega == 1.0
    assert s.satisfies_hypotheses
    assert not MelnikovSetup(M=1.0, k=0.0).satisfies_hypotheses
    assert s.with_theta0(1.0).theta0 == 1.0
    with pytest.raises(DomainError):
        MelnikovSetup(M=-1.0)
    with pytest.raises(DomainError):
        MelnikovSetup(k=-0.1)
    with pytest.raises(DomainError):
        MelnikovSetup(theta0=float("nan"))


def test_resolve_branch_checks_the_radius():
    s = MelnikovSetup(M=1.5)
    assert resolve_branch(s, None).M == 1.5
    with pytest.raises(DomainError):
        resolve_branch(s, HeteroclinicBranch((1, 1, 1), 1.0))


@given(st.floats(min_value=0.0, max_value=50.0), st.floats(min_value=-10.0, max_value=10.0))
def test_action_angle_round_trip(action, angle):
    u1, u2 = action_angle_to_cart(action, angle)
    back = cart_to_action_angle(u1, u2)
    assert back.action == pytest.approx(action, abs=1e-12, rel=1e-12)
    if action > 1e-6:
        assert 0.0 <= back.angle < 2 * math.pi
        delta = (back.angle - angle) % (2 * math.pi)
        assert min(delta, 2 * math.pi - delta) < 1e-9


def test_action_angle_edge_cases():
    assert cart_to_action_angle(0.0, 0.0) == (0.0, None)
    assert cart_to_action_angle(0.0, -1.0).angle == pytest.approx(1.5 * math.pi)
    with pytest.raises(DomainError):
        action_angle_to_cart(-0.5, 0.0)


def test_unperturbed_orbit_is_a_solution_at_zero_coupling():
    s = MelnikovSetup(M=1.0, k=0.5, theta0=0.3)
    for t in (-3.0, 0.0, 1.7):
        point = unperturbed_orbit(t, s)
        assert point.action == 0.5
        assert point.angle == pytest.approx((t + 0.3) % (2 * math.pi))
        h = 1e-6
        derivative = (unperturbed_orbit(t + h, s).state - unperturbed_orbit(t - h, s).state) / (2 * h)
        np.testing.assert_allclose(derivative, transformed_rhs(point.state, 0.0), atol=1e-8)
        assert hamiltonian_eps(point.state, 0.0) == pytest.approx(s.h)


def test_saddles_are_hyperbolic_in_the_mu_plane():
    for sign in (1, -1):
        np.testing.assert_allclose(saddle_eigenvalues(3.0, sign), [-3.0, 0.0, 3.0], atol=1e-12)


def test_seeds():
    s = MelnikovSetup(M=1.0, k=0.5)
    np.testing.assert_allclose(separatrix_seed(s), [1.0, 0.0, 1.0, 1.0, 0.0])
    seed = regular_seed(1.0, 0.5)
    assert rigid_energy(seed) < 1.0
    assert hamiltonian_eps(seed, 0.0) == pytest.approx(1.5)


def test_sech_handles_large_arguments():
    assert sech(0.0) == 1.0
    assert sech(1000.0) == 0.0
    np.testing.assert_allclose(sech(np.array([-1.0, 1.0])), 1 / np.cosh(1.0))
