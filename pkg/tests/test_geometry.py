import numpy as np
import pytest
from hypothesis import given, settings

from lorenz5.exceptions import ConfigurationError, DomainError
from lorenz5.geometry.poisson import (
    R5,
    SE2R2,
    ScalarField,
    bracket,
    casimir_residual,
    central_difference,
    hamiltonian_vector_field,
    jacobi_residual,
    jacobi_triples,
    max_jacobi_residual,
    sample_points,
    structure_matrix_r5,
    structure_matrix_se2r2,
)
from lorenz5.models.lorenz import (
    action_field,
    casimir_field,
    hamiltonian_eps,
    hamiltonian_eps_field,
    hamiltonian_r5_field,
    perturbation_field,
    rigid_energy_field,
)

from .conftest import couplings, states


def coord(i):
    return ScalarField.coordinate(i)


def test_r5_matrix_at_origin_only_has_the_oscillator_block():
    expected = np.zeros((5, 5))
    expected[4, 3], expected[3, 4] = 1.0, -1.0
    for eps in (0.0, 0.3, -2.0):
        np.testing.assert_array_equal(structure_matrix_r5(np.zeros(5), eps), expected)


def test_r5_matrix_along_x1():
    J = structure_matrix_r5([1, 0, 0, 0, 0], 0.0)
    expected = np.zeros((5, 5))
    expected[1, 2], expected[2, 1] = 1.0, -1.0
    expected[3, 4], expected[4, 3] = -1.0, 1.0
    np.testing.assert_array_equal(J, expected)


def test_r5_coupling_entries():
    J = structure_matrix_r5([2.0, 3.0, 0, 0, 0], 0.5)
    assert J[1, 4] == -0.5 * 2.0
    assert J[0, 4] == 0.5 * 3.0
    assert J[0, 2] == -3.0


@given(states)
def test_x5_x4_bracket_is_one_everywhere(p):
    assert bracket(R5, coord(4), coord(3), p, 0.7) == pytest.approx(1.0)


def test_se2r2_coordinate_brackets():
    p = [1.0, 2.0, 3.0, 0.0, 0.0]
    assert bracket(SE2R2, coord(1), coord(2), p) == 1.0
    assert bracket(SE2R2, coord(0), coord(1), p) == 0.0
    assert bracket(SE2R2, coord(4), coord(3), p) == 1.0
    np.testing.assert_array_equal(structure_matrix_se2r2(p), SE2R2.matrix(p))


def test_non_finite_points_are_rejected():
    with pytest.raises(DomainError):
        structure_matrix_r5([np.nan, 0, 0, 0, 0], 0.0)
    with pytest.raises(DomainError):
        structure_matrix_se2r2([0, np.inf, 0, 0, 0])
    with pytest.raises(DomainError):
        structure_matrix_r5([0, 0, 0], 0.0)


@given(states, couplings)
def test_structures_are_exactly_antisymmetric(p, eps):
    for S in (R5, SE2R2):
        J = S.matrix(p, eps)
        assert np.all(J + J.T == 0)


@given(states)
def test_bracket_of_a_field_with_itself_vanishes(p):
    H = hamiltonian_eps_field(0.3)
    assert bracket(SE2R2, H, H, p) == pytest.approx(0.0, abs=1e-9)


@given(states)
def test_rigid_energy_commutes_with_the_oscillator(p):
    assert bracket(SE2R2, rigid_energy_field(), action_field(), p) == 0.0


@given(states)
def test_melnikov_integrand_before_substitution(p):
    m1, m2, _, _, u2 = p
    value = bracket(SE2R2, rigid_energy_field(), perturbation_field(), p)
    assert value == pytest.approx(-m1 * m2 * u2, abs=1e-12)


@given(states, couplings)
@settings(max_examples=50)
def test_bracket_bilinear_and_leibniz(p, eps):
    f, g, h = coord(0) * coord(4), coord(1), coord(2) * coord(3)
    lhs = bracket(R5, f, g * h, p, eps)
    rhs = bracket(R5, f, g, p, eps) * h(p) + g(p) * bracket(R5, f, h, p, eps)
    assert lhs == pytest.approx(rhs, abs=1e-9)

    a, b = 2.5, -0.75
    combo = ScalarField(lambda q: a * g.func(q) + b * h.func(q),
                        lambda q: a * g.gradient(q) + b * h.gradient(q))
    assert bracket(R5, f, combo, p, eps) == pytest.approx(
        a * bracket(R5, f, g, p, eps) + b * bracket(R5, f, h, p, eps), abs=1e-9)
    assert bracket(R5, f, g, p, eps) == pytest.approx(-bracket(R5, g, f, p, eps), abs=1e-12)


def test_finite_difference_gradient_matches_analytic():
    eps = 0.4
    numeric = ScalarField(lambda p: hamiltonian_eps(p, eps))
    analytic = hamiltonian_eps_field(eps)
    for p in sample_points(20, seed=7):
        np.testing.assert_allclose(numeric.grad(p), analytic.grad(p), atol=1e-8)
    np.testing.assert_allclose(central_difference(lambda p: p @ p, np.ones(5)), 2 * np.ones(5), atol=1e-8)


def test_missing_gradient_without_finite_differences_is_a_configuration_error():
    field = ScalarField(lambda p: p[0], name="x1")
    with pytest.raises(ConfigurationError):
        bracket(SE2R2, field, coord(2), np.ones(5), finite_difference=False)


def test_jacobi_examples():
    p = np.random.default_rng(3).uniform(-5, 5, 5)
    assert abs(jacobi_residual(R5, p, (0, 1, 2), 0.3)) < 1e-10
    assert jacobi_residual(SE2R2, [1, 1, 1, 0, 0], (0, 1, 2)) == 0.0


def test_jacobi_rejects_repeated_or_out_of_range_indices():
    with pytest.raises(DomainError):
        jacobi_residual(R5, np.ones(5), (3, 4, 3), 0.1)
    with pytest.raises(DomainError):
        jacobi_residual(SE2R2, np.ones(5), (0, 1, 5))


def test_jacobi_holds_on_random_samples():
    assert len(list(jacobi_triples())) == 10
    for eps in (0.0, 0.1, 1.0):
        for p in sample_points(100):
            assert max_jacobi_residual(R5, p, eps) < 1e-10
            assert max_jacobi_residual(SE2R2, p, eps) < 1e-10


def test_casimir_residuals():
    C = casimir_field()
    np.testing.assert_array_equal(casimir_residual(SE2R2, C, [3, -4, 7, 1, 2]), np.zeros(5))
    assert np.any(casimir_residual(SE2R2, coord(2), [3, -4, 7, 1, 2]) != 0)
    for p in sample_points(50, seed=11):
        assert np.max(np.abs(casimir_residual(R5, C, p, 0.2))) < 1e-12


def test_hamiltonian_vector_fields():
    np.testing.assert_allclose(
        hamiltonian_vector_field(R5, hamiltonian_r5_field(), np.ones(5), 0.0), [-1, 1, -1, -1, 1])
    np.testing.assert_array_equal(
        hamiltonian_vector_field(SE2R2, hamiltonian_eps_field(0.0), [0, 0, 2.5, 0, 0]), np.zeros(5))
    constant = ScalarField.constant(4.0)
    for p in sample_points(10):
        np.testing.assert_array_equal(hamiltonian_vector_field(R5, constant, p, 0.5), np.zeros(5))


def test_sample_points_are_reproducible():
    a, b = sample_points(5, seed=1), sample_points(5, seed=1)
    np.testing.assert_array_equal(a, b)
    assert a.shape == (5, 5) and np.all(np.abs(a) <= 5)
