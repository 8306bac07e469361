import math

import mpmath
import numpy as np
import pytest

from hunter.analysis import frequency_check
from hunter.errors import DomainError, PoleAtC, PoleAtNonpositiveInteger
from hunter.numerics.hypergeom import (
    A_PARAM,
    B_PARAM,
    GAMMA,
    complex_gamma,
    cross_check_delta,
    fit_connection_constants,
    fundamental_matrices,
    g1_derivatives,
    g3,
    g4,
    g5,
    g6,
    gauss_2f1,
    phom_closed,
    phom_eval,
    taylor_at_one,
    xi_of,
)
from hunter.numerics.ode import SQRT7_2, fit_log_sinusoid
from hunter.physics.selfsim import THETA0


def mp_complex(value):
    return complex(value.real, value.imag)


@pytest.mark.parametrize("x", [-1e4, -50.0, -2.0, -0.7, -0.3, 0.2, 0.6, 0.9, 0.999])
def test_gauss_2f1_against_mpmath(x):
    for a, b, c in ((A_PARAM, B_PARAM, 1), (A_PARAM + 1, B_PARAM + 1, 2), (1 + GAMMA / 2, 1 + GAMMA.conjugate() / 2, 2.5)):
        ours = gauss_2f1(a, b, c, x)
        expected = mp_complex(mpmath.hyp2f1(a, b, c, x))
        assert abs(ours - expected) <= 1e-10 * max(1.0, abs(expected))


def test_gauss_2f1_errors():
    with pytest.raises(PoleAtC):
        gauss_2f1(1.0, 1.0, -1, 0.2)
    with pytest.raises(DomainError):
        gauss_2f1(1.0, 1.0, 2.0, 1.0)


@pytest.mark.parametrize("z", [1.5, -1.5, 0.5 + 1.3j, 1 + GAMMA / 2, -GAMMA / 2, 10.25 - 3j])
def test_complex_gamma_against_mpmath(z):
    expected = mp_complex(mpmath.gamma(z))
    assert abs(complex_gamma(z) - expected) <= 1e-12 * abs(expected)


def test_complex_gamma_poles():
    assert complex_gamma(-1.5).real == pytest.approx(4 * math.sqrt(math.pi) / 3, rel=1e-12)
    with pytest.raises(PoleAtNonpositiveInteger):
        complex_gamma(-2)


def test_connection_constants_against_mpmath(constants):
    g, gb = GAMMA, GAMMA.conjugate()
    mu3 = mpmath.gamma(1.5) / (mpmath.gamma(1 + g / 2) * mpmath.gamma(1 + gb / 2))
    mu4 = -1.5 * mpmath.gamma(-1.5) / (mpmath.gamma(-g / 2) * mpmath.gamma(-gb / 2))
    half = mpmath.gamma((g - gb) / 2) / (mpmath.gamma(-gb / 2) * mpmath.gamma(1 + g / 2))
    assert constants.mu3 == pytest.approx(float(mpmath.re(mu3)), rel=1e-12)
    assert constants.mu4 == pytest.approx(float(mpmath.re(mu4)), rel=1e-12)
    assert constants.mu5 == pytest.approx(2 * float(mpmath.re(half)), rel=1e-12)
    assert constants.mu6 == pytest.approx(2 * float(mpmath.im(half)), rel=1e-12)
    assert constants.c1 > 0
    assert constants.c1 * math.sin(constants.d1) == pytest.approx(constants.mu5, rel=1e-12)
    assert constants.c1 * math.cos(constants.d1) == pytest.approx(constants.mu6, rel=1e-12)
    assert constants.theta0 == pytest.approx(THETA0, abs=1e-14)
    assert constants.frequency == pytest.approx(SQRT7_2, rel=1e-15)


def test_connection_identity_near_infinity(constants):
    for xi in np.linspace(0.02, 0.98, 50):
        g1 = g1_derivatives(xi)[0]
        combined = constants.mu3 * g3(xi)[0] + constants.mu4 * g4(xi)[0]
        assert combined == pytest.approx(g1, abs=1e-10 * max(1.0, abs(g1)))


def test_connection_identity_near_zero(constants):
    for xi in -np.geomspace(1e-2, 1e4, 50):
        g1 = g1_derivatives(xi)[0]
        combined = constants.mu5 * g5(xi)[0] + constants.mu6 * g6(xi)[0]
        assert combined == pytest.approx(g1, abs=1e-10 * max(1.0, abs(g1)))


def test_wronskians():
    zero, infinity = fundamental_matrices()
    for z in (0.1, 0.3, 0.6, 0.9):
        expected = zero.wronskian(xi_of(z))
        assert zero.numeric_wronskian(z) == pytest.approx(expected, rel=1e-10)
        np.testing.assert_allclose(zero.inverse(z) @ zero.matrix(z), np.eye(2), atol=1e-9)
    for z in (1.1, 2.0, 5.0, 40.0):
        expected = infinity.wronskian(xi_of(z))
        assert infinity.numeric_wronskian(z) == pytest.approx(expected, rel=1e-10)
        np.testing.assert_allclose(infinity.inverse(z) @ infinity.matrix(z), np.eye(2), atol=1e-9)
    with pytest.raises(DomainError):
        zero.matrix(2.0)


def test_homogeneous_solution_normalization():
    p, omega, _, _ = phom_closed(1.0)
    assert p == 1.0
    assert omega == -1.0
    coef_p, coef_omega = taylor_at_one()
    z = 1.0005
    h = z - 1.0
    closed = phom_closed(z)
    assert np.polynomial.polynomial.polyval(h, coef_p) == pytest.approx(closed[0], abs=1e-13)
    assert np.polynomial.polynomial.polyval(h, coef_omega) == pytest.approx(closed[1], abs=1e-13)


def test_closed_form_matches_integration(homogeneous_ode, constants):
    assert cross_check_delta(homogeneous_ode) <= 1e-8
    fitted = fit_connection_constants(homogeneous_ode)
    for name in ("mu3", "mu4", "mu5", "mu6"):
        assert fitted[name] == pytest.approx(getattr(constants, name), rel=1e-6)


def test_small_z_oscillation(constants):
    z = np.geomspace(1e-8, 1e-3, 200)
    closed = np.array([phom_closed(s)[:2] for s in z]).T
    density = fit_log_sinusoid(z, np.sqrt(z) * closed[0], corrections=False)
    velocity = fit_log_sinusoid(z, np.sqrt(z) * closed[1], corrections=False)
    assert density.amplitude == pytest.approx(constants.c1, rel=1e-5)
    assert density.phase == pytest.approx(constants.d1, abs=1e-5)
    assert velocity.amplitude == pytest.approx(constants.c1, rel=1e-5)
    offset = (velocity.phase - density.phase - constants.theta0 + math.pi) % (2 * math.pi) - math.pi
    assert abs(offset) <= 1e-5

    fit = frequency_check(z, np.sqrt(z) * closed[0], min_periods=2.0, corrections=False)
    assert fit.omega == pytest.approx(SQRT7_2, abs=1e-5)


def test_phom_evaluation_paths_agree(homogeneous_ode):
    for z in np.geomspace(0.05, 20.0, 15):
        closed = phom_eval(z)
        integrated = phom_eval(z, homogeneous_ode)
        np.testing.assert_allclose(integrated, closed, atol=1e-8)
