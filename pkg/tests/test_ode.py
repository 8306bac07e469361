import math

import numpy as np
import pytest

from hunter.config import IntegratorConfig
from hunter.errors import DomainError, IllConditioned, MaxStepsExceeded, NoSignChange
from hunter.numerics.ode import SQRT7_2, Event, bisect, fit_log_sinusoid, integrate

TIGHT = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)


def decay(t, state):
    return -state


def oscillator(t, state):
    return np.array([state[1], -state[0]])


def test_exponential_decay_and_dense_output():
    solution, log = integrate(decay, 0.0, [1.0], 1.0, TIGHT)
    assert log == []
    assert solution.final_state[0] == pytest.approx(math.exp(-1.0), rel=1e-11)
    ts = np.linspace(0.0, 1.0, 37)
    np.testing.assert_allclose(solution(ts)[0], np.exp(-ts), rtol=1e-10)


def test_backward_integration():
    solution, _ = integrate(decay, 1.0, [math.exp(-1.0)], 0.0, TIGHT)
    assert solution.t_min == 0.0 and solution.t_max == 1.0
    assert solution.final_state[0] == pytest.approx(1.0, rel=1e-11)


def test_halving_tolerance_does_not_increase_error():
    errors = []
    for tol in (1e-6, 1e-8, 1e-10, 1e-12):
        solution, _ = integrate(decay, 0.0, [1.0], 5.0, IntegratorConfig(rel_tol=tol, abs_tol=tol * 1e-2))
        errors.append(abs(solution.final_state[0] - math.exp(-5.0)))
    assert all(b <= max(a * 1.5, 1e-15) for a, b in zip(errors, errors[1:]))


def test_events_are_located_and_terminal_events_stop():
    crossing = Event(lambda t, s: s[0], name="zero")
    solution, log = integrate(oscillator, 0.0, [1.0, 0.0], 10.0, TIGHT, [crossing])
    roots = [rec.t for rec in log]
    expected = [math.pi / 2 + n * math.pi for n in range(len(roots))]
    assert len(roots) == 3
    np.testing.assert_allclose(roots, expected, atol=1e-11)

    stop = Event(lambda t, s: s[0], direction=-1, terminal=True, name="stop")
    solution, log = integrate(oscillator, 0.0, [1.0, 0.0], 10.0, TIGHT, [stop])
    assert solution.t_end == pytest.approx(math.pi / 2, abs=1e-11)
    assert [rec.name for rec in log] == ["stop"]


def test_step_budget():
    with pytest.raises(MaxStepsExceeded):
        integrate(oscillator, 0.0, [1.0, 0.0], 100.0, IntegratorConfig(max_steps=5, max_step_factor=0.01))


def test_degenerate_span_and_out_of_range_evaluation():
    with pytest.raises(DomainError):
        integrate(decay, 1.0, [1.0], 1.0)
    solution, _ = integrate(decay, 0.0, [1.0], 1.0)
    with pytest.raises(DomainError):
        solution(1.5)


def test_bisect():
    assert bisect(math.cos, (0.0, 2.0)) == pytest.approx(math.pi / 2, abs=1e-12)
    with pytest.raises(NoSignChange):
        bisect(lambda x: x * x + 1.0, (-1.0, 1.0))


def test_log_sinusoid_fit_recovers_amplitude_and_phase():
    y = np.geomspace(1e2, 1e6, 300)
    g = 0.8 * np.sin(SQRT7_2 * np.log(y) + 2.1)
    fit = fit_log_sinusoid(y, g, corrections=False)
    assert fit.amplitude == pytest.approx(0.8, rel=1e-12)
    assert fit.phase == pytest.approx(2.1, abs=1e-12)
    np.testing.assert_allclose(fit(y), g, atol=1e-12)


def test_log_sinusoid_fit_with_decaying_corrections():
    y = np.geomspace(1e1, 1e5, 400)
    t = np.log(y)
    g = 1.5 * np.sin(SQRT7_2 * t + 0.4) + 0.3 * y ** -0.5 * np.cos(2 * SQRT7_2 * t)
    fit = fit_log_sinusoid(y, g)
    assert fit.corrections
    assert fit.amplitude == pytest.approx(1.5, rel=1e-10)
    assert fit.phase == pytest.approx(0.4, abs=1e-10)


def test_log_sinusoid_fit_needs_a_period():
    with pytest.raises(IllConditioned):
        fit_log_sinusoid(np.geomspace(1.0, 2.0, 50), np.ones(50))
    with pytest.raises(IllConditioned):
        fit_log_sinusoid(np.geomspace(1.0, 1e6, 4), np.ones(4))


def test_log_sinusoid_fit_over_two_decades():
    # [1e3, 1e5] is just under one period of log y
    y = np.geomspace(1e3, 1e5, 200)
    g = 1.1 * np.sin(SQRT7_2 * np.log(y) + 5.0)
    fit = fit_log_sinusoid(y, g, corrections=False)
    assert fit.amplitude == pytest.approx(1.1, rel=1e-10)
    assert fit.phase == pytest.approx(5.0, abs=1e-10)
