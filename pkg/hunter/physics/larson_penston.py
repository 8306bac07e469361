"""Larson-Penston profile by shooting on the sonic point y* in (2, 3)."""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from hunter.config import MatchConfig
from hunter.errors import NoBracket, NumericalError, OriginSeriesFailure
from hunter.models import Branch, ProfileSegment, RadialProfile
from hunter.numerics.ode import Event, bisect, integrate
from hunter.physics.expansions import OriginExpansion, SonicExpansion, origin_expansion, sonic_expansion
from hunter.physics.matcher import dense_segment, sonic_events, to_log_p_omega
from hunter.physics.selfsim import log_p_omega_field

logger = logging.getLogger(__name__)

SCAN = (2.01, 2.99)
SCAN_POINTS = 50
INNER_END = 1e-2
RUNAWAY = 1e8
SHOOTING_GUARD = 1e-12


@dataclass
class ShootingSample:
    y_star: float
    value: float
    y_end: float
    stopped_by: str


@dataclass
class LarsonPenstonSolution:
    y_star: float
    rho0: float
    profile: RadialProfile
    expansion: SonicExpansion
    far_field_p: float
    far_field_u: float
    seam_u: float
    scan: List[ShootingSample] = field(default_factory=list)


def _inward(y_star: float, config: MatchConfig, y_end: float = INNER_END):
    expansion = sonic_expansion(y_star, Branch.LARSON_PENSTON, config.series_order,
                                config.radius_guard * max(1.0, y_star))
    lo, _ = expansion.launch_points()
    start = expansion.state(lo)
    runaway = Event(lambda t, s: abs(s[1]) - RUNAWAY, terminal=True, name="runaway")
    solution, log = integrate(log_p_omega_field(1.0, SHOOTING_GUARD), math.log(lo),
                              to_log_p_omega(lo, start.rho, start.u), math.log(y_end), config.integrator,
                              sonic_events() + [runaway])
    return expansion, solution, log


def regular_fit(y: float, rho: float, order: int = 10) -> OriginExpansion:
    """Origin series whose density matches rho at y."""
    rho0 = bisect(lambda r: float(origin_expansion(r, order).evaluate(y)[0]) - rho, (0.5 * rho, 2.0 * rho),
                  tol=1e-15 * rho)
    return origin_expansion(rho0, order)


def shooting_value(y_star: float, config: Optional[MatchConfig] = None) -> ShootingSample:
    """Coefficient of the y^-2 velocity mode where the inward integration stops.

    On reaching INNER_END the value is y^2 (u - u_reg) against the regular
    origin series of the same density. A stop at a second sonic point or a
    runaway is dominated by the singular mode, and y^3 (omega - 1/3) carries
    its sign.
    """
    config = config or MatchConfig()
    try:
        _, solution, log = _inward(y_star, config)
        t_stop = solution.t_end
        ell, omega = (float(v) for v in solution.final_state)
        stopped_by = log[-1].name if log and log[-1].t == t_stop else "end"
        y = math.exp(t_stop)
        if stopped_by == "end":
            _, u_reg = regular_fit(y, math.exp(ell) / y ** 2, config.series_order).evaluate(y)
            value = y * y * (y * (omega - 1.0) - float(u_reg))
        else:
            value = y ** 3 * (omega - 1.0 / 3.0)
    except NumericalError as exc:
        logger.debug(f"y*={y_star:.6f}: inward integration broke down ({type(exc).__name__}: {exc})")
        return ShootingSample(y_star=y_star, value=float("nan"), y_end=float("nan"), stopped_by="failure")
    return ShootingSample(y_star=y_star, value=value, y_end=y, stopped_by=stopped_by)


def _scan(config: MatchConfig, bounds: Tuple[float, float], n: int) -> List[ShootingSample]:
    return [shooting_value(y_star, config) for y_star in np.linspace(bounds[0], bounds[1], n)]


def larson_penston_solve(
    config: Optional[MatchConfig] = None,
    y_max: float = 1e3,
    bounds: Tuple[float, float] = SCAN,
    n: int = SCAN_POINTS,
) -> LarsonPenstonSolution:
    """Scan the shooting value over y* for sign changes and bisect the first one that reaches the origin region.

    The profile is closed to y = 0 by the origin series matched in density at INNER_END.
    """
    config = config or MatchConfig()
    scan = _scan(config, bounds, n)
    candidates = [(a, b) for a, b in zip(scan[:-1], scan[1:])
                  if np.isfinite(a.value) and np.isfinite(b.value) and np.sign(a.value) != np.sign(b.value)]
    if not candidates:
        raise NoBracket(f"shooting function has no sign change on {bounds}", interval=bounds)

    y_star = None
    for a, b in candidates:
        root = bisect(lambda s: shooting_value(s, config).value, (a.y_star, b.y_star), tol=1e-13)
        sample = shooting_value(root, config)
        if sample.stopped_by == "end":
            y_star = root
            break
        logger.debug(f"sign change near y*={root:.6f} is a switch of stopping event, skipped")
    if y_star is None:
        raise NoBracket("no sign change of the shooting function leads to a regular origin", interval=bounds)

    expansion, inward, _ = _inward(y_star, config)
    y_c = math.exp(inward.t_min)
    ell, omega = (float(v) for v in inward(inward.t_min))
    series = regular_fit(y_c, math.exp(ell) / y_c ** 2, config.series_order)
    tail = series.tail_residual(y_c)
    if tail > 1e-10:
        raise OriginSeriesFailure(f"origin series tail {tail:.2e} at y={y_c}")
    _, u_reg = series.evaluate(y_c)
    seam_u = abs(y_c * (omega - 1.0) - float(u_reg)) / y_c

    lo, hi = expansion.launch_points()
    start = expansion.state(hi)
    outward, _ = integrate(log_p_omega_field(1.0, config.sonic_guard), math.log(hi),
                           to_log_p_omega(hi, start.rho, start.u), math.log(y_max), config.integrator)
    profile = RadialProfile(
        [
            ProfileSegment(0.0, y_c, series.evaluate, series.derivative, label="lp-origin-series"),
            dense_segment(inward, y_c, lo, 1.0, "lp-inward"),
            expansion.segment(),
            dense_segment(outward, hi, y_max, 1.0, "lp-outward"),
        ],
        {"kind": "larson_penston", "y_star": y_star, "rho0": series.rho0},
    )
    ell, omega = outward.final_state
    far_p = math.exp(ell)
    far_u = y_max * (omega - 1.0)
    logger.info(f"Larson-Penston sonic point y*={y_star:.12f}, rho(0)={series.rho0:.9f}, "
                f"y^2 rho -> {far_p:.6f}, u -> {far_u:.6f}")
    return LarsonPenstonSolution(y_star=y_star, rho0=series.rho0, profile=profile, expansion=expansion,
                                 far_field_p=far_p, far_field_u=far_u, seam_u=seam_u, scan=scan)
