import math

import numpy as np
import pytest

from hunter.errors import DomainError, SonicDegeneracy
from hunter.models import RadialState
from hunter.physics.selfsim import (
    THETA0,
    determinant,
    far_field,
    friedman,
    from_log_density,
    from_p_omega,
    linearized_farfield_residue,
    log_p_omega_field,
    relative_residual,
    residual,
    rhs,
    rhs_via_p_omega,
    to_log_density,
    to_p_omega,
)

GRID = np.geomspace(1e-2, 1e2, 200)


@pytest.mark.parametrize("reference", [far_field, friedman])
def test_reference_solutions_solve_the_system(reference):
    profile = reference().profile(1e-2, 1e2)
    r1, r2 = residual(profile, GRID)
    assert np.max(np.abs(r1)) <= 1e-12 * np.max(GRID ** -2)
    assert np.max(relative_residual(profile, GRID)) <= 1e-12
    assert np.max(np.abs(r2) * GRID) <= 1e-10


def test_residual_rejects_nonpositive_y():
    with pytest.raises(DomainError):
        residual(far_field().profile(1e-2, 1e2), np.array([0.0, 1.0]))


def test_rhs_matches_p_omega_form():
    state = RadialState(y=0.5, rho=2.0, u=-0.3)
    direct = rhs(state)
    via = rhs_via_p_omega(state)
    np.testing.assert_allclose(via, direct, rtol=1e-12)


def test_rhs_raises_inside_sonic_guard():
    with pytest.raises(SonicDegeneracy):
        rhs(RadialState(y=0.5, rho=1.0, u=0.5))


def test_p_omega_conversion():
    state = RadialState(y=3.0, rho=0.25, u=-1.5)
    back = from_p_omega(to_p_omega(state))
    assert back.rho == pytest.approx(state.rho, rel=1e-15)
    assert back.u == pytest.approx(state.u, rel=1e-15)
    logged = to_log_density(state)
    assert logged.w == pytest.approx(math.log(0.25), rel=1e-15)
    assert from_log_density(logged).rho == pytest.approx(state.rho, rel=1e-15)
    with pytest.raises(DomainError):
        to_log_density(RadialState(y=1.0, rho=0.0, u=0.0))


def test_log_p_omega_field_is_the_same_system():
    state = RadialState(y=0.7, rho=1.3, u=-0.2)
    field = log_p_omega_field(1.0)
    pw = to_p_omega(state)
    ell_t, omega_t = field(math.log(state.y), np.array([math.log(pw.p), pw.omega]))
    drho, du = rhs(state)
    y = state.y
    # t-derivatives of log(y^2 rho) and u/y + 1
    assert ell_t == pytest.approx(2.0 + y * drho / state.rho, rel=1e-12)
    assert omega_t == pytest.approx(du - state.u / y, rel=1e-12)


def test_far_field_linearization():
    residue = linearized_farfield_residue()
    np.testing.assert_allclose(residue.eigenvalues[0], complex(-0.5, math.sqrt(7) / 2), atol=1e-14)
    assert residue.frequency == pytest.approx(math.sqrt(7) / 2, rel=1e-14)
    assert residue.theta0 == pytest.approx(THETA0, abs=1e-12)
    assert THETA0 == pytest.approx(3.8643, abs=1e-4)


def random_states(n=100, seed=7):
    rng = np.random.default_rng(seed)
    states = []
    while len(states) < n:
        y = math.exp(rng.uniform(math.log(0.05), math.log(5.0)))
        state = RadialState(y=y, rho=math.exp(rng.uniform(-4.0, 2.5)), u=rng.uniform(-3.0, 3.0))
        if abs(determinant(state)) > 0.05:
            states.append(state)
    return states


def test_formulations_agree_on_random_states():
    for state in random_states():
        back = from_p_omega(to_p_omega(state))
        assert back.rho == pytest.approx(state.rho, rel=1e-13)
        assert back.u == pytest.approx(state.u, rel=1e-13, abs=1e-13 * state.y)
        assert from_log_density(to_log_density(state)).rho == pytest.approx(state.rho, rel=1e-13)

        drho, du = rhs(state)
        via_drho, via_du = rhs_via_p_omega(state)
        y, rho, u = state.y, state.rho, state.u
        assert via_drho == pytest.approx(drho, rel=1e-10, abs=1e-12 * (2.0 * rho / y + abs(drho)))
        assert via_du == pytest.approx(du, rel=1e-10, abs=1e-12 * (abs(u) / y + abs(du)))

        v = u + y
        matrix = np.array([[v, rho], [1.0 / rho, v]])
        assert determinant(state) == pytest.approx(np.linalg.det(matrix), rel=1e-12, abs=1e-13 * max(v * v, 1.0))
