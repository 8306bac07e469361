"""Adaptive integration with dense output and events, bracketing roots, log-periodic fits."""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import DOP853, RK45
from scipy.optimize import brentq

from hunter.config import IntegratorConfig
from hunter.errors import (
    DomainError,
    IllConditioned,
    MaxStepsExceeded,
    NoSignChange,
    StepSizeUnderflow,
)

logger = logging.getLogger(__name__)

SQRT7_2 = float(np.sqrt(7.0) / 2.0)
EPS = float(np.finfo(float).eps)
MIN_PERIODS = 0.5  # span of a fixed-frequency fit, in periods of log y

_SOLVERS = {"DOP853": DOP853, "RK45": RK45}

VectorField = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Event:
    """Scalar event g(t, state); direction +1 / -1 filters rising / falling crossings."""
    fn: Callable[[float, np.ndarray], float]
    direction: int = 0
    terminal: bool = False
    name: str = "event"


@dataclass(frozen=True)
class EventRecord:
    name: str
    t: float
    state: np.ndarray


class DenseSolution:
    """Piecewise interpolant over the accepted integrator steps.

    Breakpoints are stored in ascending order whatever the direction of
    integration; evaluating exactly at a breakpoint returns the stored state.
    """

    def __init__(self, ts: np.ndarray, states: np.ndarray, interpolants: Sequence):
        ts = np.asarray(ts, dtype=float)
        states = np.asarray(states, dtype=float)
        if ts.size < 2 or len(interpolants) != ts.size - 1:
            raise DomainError("dense solution needs at least one step")
        self.t_start = float(ts[0])
        self.t_end = float(ts[-1])
        if ts[-1] < ts[0]:
            ts = ts[::-1]
            states = states[::-1]
            interpolants = list(interpolants)[::-1]
        self.ts = ts
        self.states = states
        self._interpolants = list(interpolants)

    @property
    def t_min(self) -> float:
        return float(self.ts[0])

    @property
    def t_max(self) -> float:
        return float(self.ts[-1])

    @property
    def n_steps(self) -> int:
        return len(self._interpolants)

    @property
    def final_state(self) -> np.ndarray:
        """State at the end of integration (direction aware)."""
        return self.states[-1] if self.t_end >= self.t_start else self.states[0]

    def __call__(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        slack = 1e-12 * max(1.0, abs(self.t_min), abs(self.t_max))
        if np.any(t_arr < self.t_min - slack) or np.any(t_arr > self.t_max + slack):
            raise DomainError(
                f"t outside dense range [{self.t_min}, {self.t_max}]: "
                f"{t_arr.min()}..{t_arr.max()}"
            )
        t_arr = np.clip(t_arr, self.t_min, self.t_max)
        idx = np.searchsorted(self.ts, t_arr, side="right") - 1
        idx = np.clip(idx, 0, len(self._interpolants) - 1)
        out = np.empty((self.states.shape[1], t_arr.size))
        for j in np.unique(idx):
            mask = idx == j
            out[:, mask] = np.reshape(self._interpolants[j](t_arr[mask]), (-1, mask.sum()))

        pos = np.clip(np.searchsorted(self.ts, t_arr), 0, self.ts.size - 1)
        exact = self.ts[pos] == t_arr
        if np.any(exact):
            out[:, exact] = self.states[pos[exact]].T
        return out[:, 0] if np.ndim(t) == 0 else out


def _crossed(g_old: float, g_new: float, direction: int) -> bool:
    rising = g_old < 0.0 <= g_new
    falling = g_old > 0.0 >= g_new
    if direction > 0:
        return rising
    if direction < 0:
        return falling
    return rising or falling


def _locate(event: Event, interp, t_a: float, t_b: float) -> float:
    """Root of the event function on one step, using the step interpolant."""
    def g(s: float) -> float:
        return event.fn(s, interp(s))

    lo, hi = min(t_a, t_b), max(t_a, t_b)
    g_lo, g_hi = g(lo), g(hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if np.sign(g_lo) == np.sign(g_hi):
        # interpolant and stored endpoint disagree in the last bits
        return t_b
    return brentq(g, lo, hi, xtol=1e-15, rtol=4 * EPS, maxiter=200)


def integrate(
    fun: VectorField,
    t0: float,
    state0: Sequence[float],
    t_end: float,
    config: Optional[IntegratorConfig] = None,
    events: Sequence[Event] = (),
) -> Tuple[DenseSolution, List[EventRecord]]:
    """Integrate state' = fun(t, state) from t0 to t_end (either direction).

    Terminal events truncate the solution at the located root; the event log
    lists every located root up to the stopping point.
    """
    config = config or IntegratorConfig()
    span = t_end - t0
    if span == 0.0 or not np.isfinite(span):
        raise DomainError(f"degenerate integration span [{t0}, {t_end}]")
    direction = np.sign(span)

    solver = _SOLVERS[config.method](
        fun,
        t0,
        np.asarray(state0, dtype=float),
        t_end,
        rtol=config.rel_tol,
        atol=config.abs_tol,
        max_step=config.max_step_factor * abs(span),
    )

    ts = [float(t0)]
    states = [solver.y.copy()]
    interpolants = []
    g_prev = [ev.fn(t0, solver.y) for ev in events]
    log: List[EventRecord] = []

    while solver.status == "running":
        if len(interpolants) >= config.max_steps:
            raise MaxStepsExceeded(f"{config.max_steps} steps reached at t={solver.t}")
        message = solver.step()
        if solver.status == "failed":
            raise StepSizeUnderflow(f"integration failed at t={solver.t}: {message}")
        y_new = solver.y.copy()
        if not np.all(np.isfinite(y_new)):
            raise StepSizeUnderflow(f"non-finite state at t={solver.t}")

        t_old, t_new = float(solver.t_old), float(solver.t)
        interp = solver.dense_output()

        stop_at = None
        for i, ev in enumerate(events):
            g_new = ev.fn(t_new, y_new)
            if _crossed(g_prev[i], g_new, ev.direction):
                t_root = _locate(ev, interp, t_old, t_new)
                log.append(EventRecord(ev.name, t_root, np.asarray(interp(t_root))))
                if ev.terminal and (stop_at is None or direction * (t_root - stop_at) < 0):
                    stop_at = t_root
            g_prev[i] = g_new

        if stop_at is not None:
            if stop_at != t_old:
                ts.append(stop_at)
                states.append(np.asarray(interp(stop_at)))
                interpolants.append(interp)
            log = [rec for rec in log if direction * (rec.t - stop_at) <= 0]
            logger.debug(f"terminal event at t={stop_at:.15g} after {len(interpolants)} steps")
            break

        if config.min_step and solver.status == "running" and abs(t_new - t_old) < config.min_step:
            raise StepSizeUnderflow(f"step {abs(t_new - t_old):.3e} below min_step at t={t_new}")

        ts.append(t_new)
        states.append(y_new)
        interpolants.append(interp)

    if len(interpolants) == 0:
        raise StepSizeUnderflow(f"terminal event at the initial point t={t0}")
    return DenseSolution(np.array(ts), np.array(states), interpolants), log


def bisect(
    f: Callable[[float], float],
    bracket: Tuple[float, float],
    tol: float = 1e-12,
    maxiter: int = 200,
) -> float:
    """Bracketing root finder (Brent). Each abscissa is evaluated once."""
    cache: Dict[float, float] = {}

    def g(x: float) -> float:
        if x not in cache:
            cache[x] = float(f(x))
        return cache[x]

    a, b = bracket
    fa, fb = g(a), g(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise NoSignChange(f"no sign change on [{a}, {b}]: f={fa:.3e}, {fb:.3e}")
    return float(brentq(g, a, b, xtol=tol, rtol=4 * EPS, maxiter=maxiter))


# ============ LOG-PERIODIC FITS ============

@dataclass(frozen=True)
class LogSinusoidFit:
    """g ~ amplitude * sin(omega log y + phase) [+ y^-1/2 corrections]."""
    amplitude: float
    phase: float
    residual: float
    omega: float
    corrections: Tuple[float, ...] = ()

    def __call__(self, y) -> np.ndarray:
        t = np.log(np.asarray(y, dtype=float))
        out = self.amplitude * np.sin(self.omega * t + self.phase)
        if self.corrections:
            basis = _correction_basis(t, self.omega)
            out = out + basis @ np.asarray(self.corrections)
        return out


def _correction_basis(t: np.ndarray, omega: float) -> np.ndarray:
    decay = np.exp(-0.5 * t)
    return np.column_stack(
        [decay, decay * np.cos(2 * omega * t), decay * np.sin(2 * omega * t)]
    )


def linear_log_fit(
    t: np.ndarray, g: np.ndarray, omega: float, with_corrections: bool
) -> LogSinusoidFit:
    """Linear least squares at fixed frequency; A = c sin d, B = c cos d."""
    columns = [np.cos(omega * t), np.sin(omega * t)]
    basis = np.column_stack(columns)
    if with_corrections:
        basis = np.hstack([basis, _correction_basis(t, omega)])
    coef, *_ = np.linalg.lstsq(basis, g, rcond=None)
    resid = g - basis @ coef
    a, b = coef[0], coef[1]
    return LogSinusoidFit(
        amplitude=float(np.hypot(a, b)),
        phase=float(np.mod(np.arctan2(a, b), 2 * np.pi)),
        residual=float(np.sqrt(np.mean(resid ** 2))),
        omega=float(omega),
        corrections=tuple(float(c) for c in coef[2:]),
    )


def fit_log_sinusoid(
    y: Sequence[float],
    g: Sequence[float],
    omega: float = SQRT7_2,
    corrections: Optional[bool] = None,
) -> LogSinusoidFit:
    """Fit g(y) = c sin(omega log y + d) at fixed omega.

    With corrections=None the y^-1/2 correction terms are added only when the
    plain fit leaves an RMS residual above 1e-3 * c.
    """
    y = np.asarray(y, dtype=float)
    g = np.asarray(g, dtype=float)
    if y.size < 8:
        raise IllConditioned(f"need at least 8 samples, got {y.size}")
    t = np.log(y)
    periods = (t.max() - t.min()) * omega / (2 * np.pi)
    if periods < MIN_PERIODS:
        raise IllConditioned(f"samples span {periods:.2f} periods in log y")
    if periods < 2.0:
        logger.warning(f"fit window spans only {periods:.2f} periods")

    fit = linear_log_fit(t, g, omega, with_corrections=bool(corrections))
    if corrections is None and fit.residual > 1e-3 * fit.amplitude:
        logger.debug(f"refitting with corrections (residual {fit.residual:.2e})")
        fit = linear_log_fit(t, g, omega, with_corrections=True)
    return fit
