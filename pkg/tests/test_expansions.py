import numpy as np
import pytest

from hunter.errors import DegenerateExponent, DomainError, ResonantOrder
from hunter.models import Branch
from hunter.physics.expansions import (
    branch_data,
    frobenius_exponents,
    order_one_constraints,
    origin_exponent,
    origin_expansion,
    sonic_consistency,
    sonic_expansion,
    sonic_residue,
)


@pytest.mark.parametrize("branch", [Branch.HUNTER, Branch.LARSON_PENSTON])
@pytest.mark.parametrize("y_star", [0.8, 1.3, 2.4])
def test_branch_data_are_admissible(branch, y_star):
    _, rho1, _, u1 = branch_data(y_star, branch)
    np.testing.assert_allclose(order_one_constraints(y_star, rho1, u1), 0.0, atol=1e-13)


def test_arbitrary_first_order_data_are_not_admissible():
    assert np.max(np.abs(order_one_constraints(1.3, 0.0, 0.0))) > 1e-3


def test_branches_coincide_at_two():
    np.testing.assert_allclose(branch_data(2.0, Branch.HUNTER), branch_data(2.0, Branch.LARSON_PENSTON))


def test_far_field_is_the_hunter_expansion_at_one():
    expansion = sonic_expansion(1.0, Branch.HUNTER, order=8)
    # y^-2 = sum (-1)^n (n+1) h^n about y = 1
    expected = [(-1) ** n * (n + 1) for n in range(9)]
    np.testing.assert_allclose(expansion.coeffs_rho, expected, rtol=1e-10)
    np.testing.assert_allclose(expansion.coeffs_u, 0.0, atol=1e-10)


@pytest.mark.parametrize("y_star, branch", [(1.2, Branch.HUNTER), (0.9, Branch.HUNTER), (2.3, Branch.LARSON_PENSTON)])
def test_sonic_expansion_solves_the_system(y_star, branch):
    expansion = sonic_expansion(y_star, branch)
    assert np.max(np.abs(expansion.coefficient_residual())) <= 1e-9 * np.max(np.abs(expansion.coeffs_rho))
    assert expansion.tail_residual(expansion.radius_guard) <= 1e-14
    lo, hi = expansion.launch_points()
    assert lo < y_star < hi
    assert expansion.state(y_star).u + y_star == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("y_star, branch", [(1.01, Branch.HUNTER), (1.2, Branch.HUNTER), (2.33, Branch.LARSON_PENSTON)])
def test_series_agrees_with_integration_on_both_sides(y_star, branch):
    below, above = sonic_consistency(sonic_expansion(y_star, branch))
    assert below <= 1e-8
    assert above <= 1e-8


def test_sonic_expansion_errors():
    # Larson-Penston order n is resonant at y* = 1 + 1/n
    with pytest.raises(ResonantOrder) as info:
        sonic_expansion(1.5, Branch.LARSON_PENSTON)
    assert info.value.order == 2
    with pytest.raises(DomainError):
        sonic_expansion(3.5)
    with pytest.raises(DomainError):
        sonic_expansion(1.2, order=3)


def test_origin_expansion_isothermal_limit():
    expansion = origin_expansion(1.0, order=6, inertia=0.0)
    # e^Q and u* = -2y/3 + 2y^3/45 + ...
    np.testing.assert_allclose(expansion.coeffs_rho[:5], [1.0, 0.0, -1.0 / 3.0, 0.0, 4.0 / 45.0], atol=1e-14)
    np.testing.assert_allclose(expansion.coeffs_u[:4], [0.0, -2.0 / 3.0, 0.0, 2.0 / 45.0], atol=1e-14)


def test_origin_expansion_with_inertia():
    expansion = origin_expansion(1.0, inertia=1.0)
    assert expansion.coeffs_u[1] == pytest.approx(-2.0 / 3.0, abs=1e-15)
    assert expansion.coeffs_rho[2] == pytest.approx(-1.0 / 3.0 + 1.0 / 9.0, abs=1e-14)
    np.testing.assert_allclose(expansion.coeffs_rho[1::2], 0.0, atol=1e-15)
    np.testing.assert_allclose(expansion.coeffs_u[0::2], 0.0, atol=1e-15)
    assert expansion.tail_residual(1e-3) <= 1e-12
    with pytest.raises(DomainError):
        origin_expansion(0.0)


def test_sonic_residue_eigenvalues():
    eigenvalues = np.sort(np.linalg.eigvals(sonic_residue(sonic_expansion(1.3, Branch.HUNTER))).real)
    np.testing.assert_allclose(eigenvalues, [0.0, 0.3], atol=1e-4)
    eigenvalues = np.sort(np.linalg.eigvals(sonic_residue(sonic_expansion(2.5, Branch.LARSON_PENSTON))).real)
    np.testing.assert_allclose(eigenvalues, [0.0, 1.0 / 1.5], atol=1e-4)


def test_frobenius_exponent_is_measured():
    measurement = frobenius_exponents(1.3, Branch.HUNTER)
    assert measurement.predicted == pytest.approx(0.3, abs=1e-3)
    assert measurement.measured == pytest.approx(0.3, abs=0.05)
    with pytest.raises(DegenerateExponent):
        frobenius_exponents(1.0)


def test_origin_exponent_is_minus_two():
    assert origin_exponent().measured == pytest.approx(-2.0, abs=0.1)
