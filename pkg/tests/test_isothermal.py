import math

import numpy as np
import pytest

from hunter.analysis import frequency_check, growth_exponent
from hunter.errors import DomainError
from hunter.numerics.ode import SQRT7_2
from hunter.physics.isothermal import (
    USTAR_TOL,
    Y_LAUNCH,
    ScaledIsothermal,
    apply_S,
    apply_T,
    compute_ustar,
    first_order_interior,
    fit_interior_constants,
    forcing_first_order,
    h_residual,
    kernel_amplitude_relation,
    mass_flux_residual,
    origin_slope,
    q_series,
    solve_Q,
    wronskian,
)
from hunter.physics.selfsim import THETA0


def circular_distance(a, b):
    return abs((a - b + math.pi) % (2 * math.pi) - math.pi)


def test_q_near_origin(tables):
    assert tables.Q(0.1)[0] == pytest.approx(-0.0033300042, abs=1e-10)
    assert tables.Q(0.0)[0] == 0.0
    # series and dense output agree across the launch point
    y = np.array([0.999 * Y_LAUNCH, 1.001 * Y_LAUNCH])
    np.testing.assert_allclose(tables.Q(y), q_series(y)[0], rtol=0.0, atol=1e-14)


def test_q_approaches_singular_sphere(tables):
    y = np.array([1e4, 1e5, 1e6])
    assert np.all(np.abs(y ** 2 * tables.eQ(y) - 1.0) < 0.05)


def test_solve_q_rejects_short_range():
    with pytest.raises(DomainError):
        solve_Q(10.0)


def test_static_velocity(tables):
    assert origin_slope(tables) == pytest.approx(-2.0 / 3.0, abs=1e-8)
    y = np.geomspace(1e-2, 1e5, 60)
    assert np.max(mass_flux_residual(tables, y)) <= 1e-7
    image = compute_ustar(tables)
    assert image.error <= USTAR_TOL
    assert np.max(np.abs(image(y) - tables.ustar(y)) / y) <= USTAR_TOL
    # origin branch keeps the y^3 term
    near = np.array([0.25, 0.5, 0.9]) * Y_LAUNCH
    np.testing.assert_allclose(image(near), tables.ustar(near), rtol=1e-9)
    assert tables.dustar(0.0)[0] == pytest.approx(-2.0 / 3.0)


def test_kernel_elements(tables):
    y = np.geomspace(0.1, 1e5, 200)
    assert np.max(np.abs(y ** 2 * wronskian(tables, y) - 1.0)) <= 1e-8
    assert tables.kernel.nodes
    assert tables.kernel.quadrature_error <= 1e-7
    check = np.geomspace(2.0, 1e4, 40)
    assert np.max(h_residual(tables, tables.v1, check)) <= 1e-8
    assert np.max(h_residual(tables, tables.v2, check)) <= 1e-8
    # v1 vanishes at each recorded node
    np.testing.assert_allclose(tables.v1(np.array(tables.kernel.nodes[:3])), 0.0, atol=1e-9)


def test_apply_S_inverts_H(tables):
    f = lambda y: np.exp(-np.asarray(y, dtype=float))
    w = apply_S(tables, f)
    y = np.geomspace(0.5, 50.0, 40)
    assert np.max(h_residual(tables, w, y, rhs=f)) <= 1e-6
    # regular at the origin: w ~ -f(0) y^2 / 6
    assert w(1e-4)[0] == pytest.approx(-1e-8 / 6.0, rel=2e-3)


def test_apply_T_is_a_divergence_inverse(tables):
    f = lambda y: 1.0 / (1.0 + np.asarray(y, dtype=float) ** 2)
    u = apply_T(tables, f)
    y = np.geomspace(0.1, 1e3, 40)
    h = 1e-3 * y
    flux = lambda s: s * s * tables.eQ(s) * u(s)
    divergence = (flux(y + h) - flux(y - h)) / (2 * h) / y ** 2
    np.testing.assert_allclose(divergence, -f(y), rtol=1e-5)
    assert u(1e-4)[0] == pytest.approx(-1e-4 / 3.0, rel=1e-5)


def test_density_oscillation_frequency(tables):
    y = np.geomspace(1e3, 1e6, 600)
    g = np.sqrt(y) * (y ** 2 * tables.eQ(y) - 1.0)
    fit = frequency_check(y, g, min_periods=1.0)
    assert fit.omega == pytest.approx(SQRT7_2, abs=2e-3)


def test_fitted_constants(tables):
    fits = tables.fits
    assert fits.c2 > 0
    assert 0.0 <= fits.d2 < 2 * math.pi
    assert fits.ustar_amplitude == pytest.approx(fits.c2, rel=1e-2)
    assert circular_distance(fits.phase_offset, THETA0) <= 1e-2
    relation = kernel_amplitude_relation(fits)
    assert abs(relation["c3_relative_error"]) <= 1e-2
    assert abs(relation["d3_error"]) <= 1e-2


def test_first_order_interior_growth(tables):
    assert forcing_first_order(tables, np.array([0.0]))[0] == pytest.approx(-2.0 / 3.0)
    first = first_order_interior(tables)
    y = np.geomspace(1e2, 1e4, 400)
    assert growth_exponent(y, first.w1(y)).exponent == pytest.approx(1.5, abs=0.1)
    assert growth_exponent(y, first.u1(y)).exponent == pytest.approx(2.5, abs=0.1)
    assert first.u1(1e-4)[0] == pytest.approx(-2.0 / 3.0 * 1e-12 / 45.0, rel=1e-3)


def test_scaled_isothermal(tables):
    lam = 1e-3
    scaled = ScaledIsothermal(lam, tables)
    y = np.array([1e-3, 1e-2, 0.5])
    np.testing.assert_allclose(scaled.eQ(y), lam ** -2 * tables.eQ(y / lam), rtol=1e-15)
    np.testing.assert_allclose(scaled.Q(y), np.log(scaled.eQ(y)), rtol=1e-12)
    np.testing.assert_allclose(scaled.ustar(y), lam * tables.ustar(y / lam), rtol=1e-15)
    with pytest.raises(DomainError):
        ScaledIsothermal(0.0, tables)


@pytest.mark.parametrize("lam", [1.0 / 3.0, 1.0, 7.0])
def test_scaled_isothermal_is_a_rescaling(tables, lam):
    scaled = ScaledIsothermal(lam, tables)
    y = np.geomspace(1e-3, 0.3, 25)
    np.testing.assert_array_equal(scaled.eQ(y), lam ** -2 * tables.eQ(y / lam))
    np.testing.assert_array_equal(scaled.ustar(y), lam * tables.ustar(y / lam))
    np.testing.assert_array_equal(scaled.v1(y), tables.v1(y / lam))


def test_fitted_constants_do_not_depend_on_window(tables):
    original = tables.fits
    try:
        low = fit_interior_constants(tables, (1e3, 1e5))
        high = fit_interior_constants(tables, (1e4, 1e6))
    finally:
        tables.fits = original
    assert low.c2 == pytest.approx(high.c2, rel=1e-3)
    assert circular_distance(low.d2, high.d2) <= 5e-3
