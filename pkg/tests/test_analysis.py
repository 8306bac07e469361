import math

import numpy as np
import pytest

from hunter.analysis import (
    classify_sonic,
    count_intersections,
    count_sonic_points,
    frequency_check,
    growth_exponent,
    phase_difference,
    profile_grid,
    residual_max,
    velocity_bounds,
    verify_profile,
)
from hunter.errors import DomainError, IllConditioned, TailUncertain
from hunter.models import Branch, ProfileSegment, RadialProfile
from hunter.physics.selfsim import far_field, friedman


def test_friedman_crosses_far_field_once():
    result = count_intersections(friedman().profile(0.1, 10.0))
    assert result.count == 1
    assert result.roots[0] == pytest.approx(math.sqrt(3.0), abs=1e-10)
    assert result.tail_certified


def test_far_field_has_no_intersections():
    result = count_intersections(far_field().profile(0.1, 10.0))
    assert result.count == 0
    assert result.tail_certified


def test_uncertain_tail():
    def evaluate(y):
        y = np.asarray(y, dtype=float)
        return y ** -2 * (1.0 + 1e-3 * (y - 5.0)), np.zeros_like(y)

    profile = RadialProfile([ProfileSegment(0.5, 5.0, evaluate)])
    with pytest.raises(TailUncertain):
        count_intersections(profile)
    assert not count_intersections(profile, strict=False).tail_certified


def test_sonic_points_of_reference_solutions():
    points = count_sonic_points(far_field().profile(0.1, 10.0))
    assert len(points) == 1
    assert points[0].y == pytest.approx(1.0, abs=1e-12)
    assert points[0].branch == Branch.HUNTER
    assert points[0].degenerate

    points = count_sonic_points(friedman().profile(0.1, 10.0))
    assert len(points) == 1
    assert points[0].y == pytest.approx(3.0, abs=1e-12)
    assert points[0].branch == Branch.HUNTER
    assert not points[0].degenerate


def test_classification():
    y_star = 2.4
    assert classify_sonic(y_star, 1 / y_star, -1 / y_star ** 2, upper=True)[0] == Branch.LARSON_PENSTON
    assert classify_sonic(y_star, 1 / y_star, 0.3, upper=True)[0] == Branch.UNCLASSIFIED
    assert classify_sonic(y_star, 1 / y_star, -1 / y_star ** 2, upper=False)[0] == Branch.UNCLASSIFIED
    branch, degenerate, _ = classify_sonic(2.0, 0.5, -0.25, upper=True)
    assert branch in (Branch.HUNTER, Branch.LARSON_PENSTON)
    assert degenerate


def test_profile_grid_includes_seams():
    a = ProfileSegment(0.1, 1.234, far_field().values, far_field().derivatives)
    b = ProfileSegment(1.234, 10.0, far_field().values, far_field().derivatives)
    grid = profile_grid(RadialProfile([a, b]), per_decade=10)
    assert 1.234 in grid
    assert grid[0] == pytest.approx(0.1) and grid[-1] == pytest.approx(10.0)
    with pytest.raises(DomainError):
        RadialProfile([ProfileSegment(0.1, 1.0, far_field().values), ProfileSegment(1.1, 2.0, far_field().values)])


def test_residual_of_references():
    assert residual_max(far_field().profile(1e-3, 1e3)) <= 1e-12
    assert residual_max(friedman().profile(1e-3, 1e3)) <= 1e-12


def test_frequency_check_on_synthetic_trace():
    y = np.geomspace(1e1, 1e8, 500)
    t = np.log(y)
    g = 2.0 * np.sin(1.3 * t + 0.5) + 0.1 * y ** -0.5 * np.sin(2.6 * t)
    fit = frequency_check(y, g)
    assert fit.omega == pytest.approx(1.3, abs=1e-8)
    assert fit.amplitude == pytest.approx(2.0, rel=1e-8)
    assert fit.phase == pytest.approx(0.5, abs=1e-8)
    with pytest.raises(IllConditioned):
        frequency_check(y[:40], g[:40])


def test_growth_exponent():
    y = np.geomspace(1e2, 1e4, 300)
    g = y ** 1.5 * np.sin(math.sqrt(7) / 2 * np.log(y) + 1.0)
    assert growth_exponent(y, g).exponent == pytest.approx(1.5, abs=1e-6)


def test_phase_difference_wraps():
    assert phase_difference(0.1, 6.2) == pytest.approx(0.1 - 6.2 + 2 * math.pi, abs=1e-12)


def test_velocity_bounds_of_far_field():
    lower, upper = velocity_bounds(far_field().profile(0.1, 10.0), 0.5)
    assert lower == pytest.approx(1.0)
    assert upper == pytest.approx(0.5)


def test_verify_far_field():
    profile = far_field().profile(0.1, 10.0)
    report = verify_profile(profile, expect_intersections=0, expect_sonic=1)
    assert report.passed
    assert report.sonic_count == 1
    report = verify_profile(profile, expect_intersections=2)
    assert not report.passed
    assert report.checks["intersections"] is False
