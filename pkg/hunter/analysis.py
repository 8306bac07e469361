"""Intersection and sonic-point counting, weighted norms, frequency fits and the verification report."""
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import OptimizeWarning, brentq, curve_fit, minimize_scalar

from hunter.errors import DomainError, IllConditioned, TailUncertain
from hunter.models import Branch, RadialProfile
from hunter.numerics.ode import EPS, SQRT7_2, linear_log_fit
from hunter.physics.expansions import branch_data
from hunter.physics.selfsim import relative_residual

logger = logging.getLogger(__name__)

ZERO_TOL = 1e-12
TAIL_MARGIN = 1e-10
INTERIOR_NORM_X_MIN = 1.0


# ============ GRIDS ============

def profile_grid(profile: RadialProfile, per_decade: int = 200, floor: float = 1e-12) -> np.ndarray:
    """Log-spaced samples over the positive part of the profile, seams included."""
    lo = profile.y_min if profile.y_min > 0 else max(floor, floor * profile.y_max)
    hi = profile.y_max
    n = max(16, int(per_decade * math.log10(hi / lo)) + 1)
    grid = np.geomspace(lo, hi, n)
    seams = [b for b in profile.breakpoints if lo < b < hi]
    return np.unique(np.concatenate([grid, seams]))


def residual_max(profile: RadialProfile, per_decade: int = 200) -> float:
    """Largest relative residual of both rows on the profile grid."""
    ys = profile_grid(profile, per_decade)
    return float(np.max(relative_residual(profile, ys)))


# ============ INTERSECTIONS ============

@dataclass
class IntersectionCount:
    count: int
    roots: List[float]
    tail_certified: bool


def _refine(fn: Callable[[float], float], a: float, b: float) -> float:
    return float(brentq(fn, a, b, xtol=1e-14 * max(1.0, b), rtol=4 * EPS))


def count_intersections(
    profile: RadialProfile,
    per_decade: int = 200,
    zero_tol: float = ZERO_TOL,
    margin: float = TAIL_MARGIN,
    strict: bool = True,
) -> IntersectionCount:
    """Sign changes of y^2 rho - 1, roots isolated on the dense evaluator.

    Samples with |f| <= zero_tol count as zero and never start a crossing. The
    tail beyond y_max is certified when f stays away from zero and is not
    heading towards it; strict mode raises TailUncertain otherwise.
    """
    ys = profile_grid(profile, per_decade)

    def f(y):
        p, _ = profile.p_omega(y)
        return p - 1.0

    values = np.asarray(f(ys))
    values = np.where(np.abs(values) <= zero_tol, 0.0, values)
    nonzero = np.flatnonzero(values)
    if nonzero.size == 0:
        logger.debug("trace identically zero within tolerance")
        return IntersectionCount(count=0, roots=[], tail_certified=True)

    roots = []
    for i, j in zip(nonzero[:-1], nonzero[1:]):
        if np.sign(values[i]) != np.sign(values[j]):
            roots.append(_refine(lambda y: float(f(y)), ys[i], ys[j]))

    y_end = profile.y_max
    f_end = float(f(y_end))
    rho, _ = profile.evaluate(y_end)
    drho, _ = profile.derivative(y_end)
    df_end = 2.0 * y_end * rho + y_end ** 2 * drho
    certified = abs(f_end) > margin and (f_end * df_end >= 0 or abs(y_end * df_end) < 0.5 * abs(f_end))
    if not certified:
        message = f"tail not certified at y_max={y_end:.3g}: f={f_end:.3e}, y f'={y_end * df_end:.3e}"
        if strict:
            raise TailUncertain(message)
        logger.warning(message)
    return IntersectionCount(count=len(roots), roots=roots, tail_certified=certified)


# ============ SONIC POINTS ============

@dataclass
class SonicPoint:
    y: float
    branch: Branch
    degenerate: bool
    residual: float
    deviation: Dict[str, float] = field(default_factory=dict)


def classify_sonic(y_star: float, rho: float, drho: float, upper: bool, tol: float = 1e-4) -> Tuple[Branch, bool, Dict[str, float]]:
    """Compare (rho, rho') at a sonic point against both branch formulas.

    Deviations are measured relative to rho/y*. The flag is set where the
    branch data coincide (y* = 2) or the Frobenius exponents do (y* = 1).
    """
    scale = 1.0 / y_star ** 2
    deviation: Dict[str, float] = {}
    if not upper:
        return Branch.UNCLASSIFIED, False, deviation
    for branch in (Branch.HUNTER, Branch.LARSON_PENSTON):
        rho0, rho1, _, _ = branch_data(y_star, branch)
        deviation[branch.value] = max(abs(rho - rho0) * y_star, abs(drho - rho1) / scale)
    matches = [b for b in (Branch.HUNTER, Branch.LARSON_PENSTON) if deviation[b.value] <= tol]
    degenerate = abs(y_star - 1.0) <= tol or abs(y_star - 2.0) <= tol
    if not matches:
        return Branch.UNCLASSIFIED, degenerate, deviation
    best = min(matches, key=lambda b: deviation[b.value])
    return best, degenerate or len(matches) > 1, deviation


def count_sonic_points(profile: RadialProfile, per_decade: int = 400, tol: float = 1e-4) -> List[SonicPoint]:
    """Roots of (u + y)^2 - 1, each classified Hunter / Larson-Penston / unclassified."""
    ys = profile_grid(profile, per_decade)

    def g(y):
        _, u = profile.evaluate(y)
        return (u + y) ** 2 - 1.0

    values = np.asarray(g(ys))
    points = []
    for i in range(values.size - 1):
        a, b = values[i], values[i + 1]
        if a == 0.0 or (b != 0.0 and np.sign(a) != np.sign(b)):
            y_star = ys[i] if a == 0.0 else _refine(lambda y: float(g(y)), ys[i], ys[i + 1])
            rho, u = profile.evaluate(y_star)
            drho, _ = profile.derivative(y_star)
            branch, degenerate, deviation = classify_sonic(y_star, rho, drho, u + y_star > 0, tol)
            points.append(SonicPoint(y=y_star, branch=branch, degenerate=degenerate,
                                     residual=abs(float(g(y_star))), deviation=deviation))
    logger.debug(f"{len(points)} sonic point(s): {[round(p.y, 10) for p in points]}")
    return points


# ============ WEIGHTED NORMS ============

def exterior_norms(solution, n: int = 2000) -> Dict[str, float]:
    """Weighted sups of the deviation from the far field on [y0, 1] and [1, y_max]."""
    profile = solution.profile
    inner = np.geomspace(solution.y0, 1.0, n)
    outer = np.geomspace(1.0, profile.y_max, n)
    rho_in, u_in = profile.evaluate(inner)
    rho_out, u_out = profile.evaluate(outer)
    return {
        "rho_inner": float(np.max(inner ** 2.5 * np.abs(rho_in - inner ** -2))),
        "u_inner": float(np.max(inner ** -0.5 * np.abs(u_in))),
        "rho_outer": float(np.max(outer ** 2 * np.abs(rho_out - outer ** -2))),
        "u_outer": float(np.max(np.abs(u_out))),
        "scale": abs(solution.epsilon) * solution.y0 ** -0.5,
    }


def interior_norms(solution, tables, n: int = 2000) -> Dict[str, float]:
    """Deviation from (e^Q, u*) in the scaled variable x = y / lambda, weighted by lambda^2.

    Sampled on x >= INTERIOR_NORM_X_MIN: below it the O(lambda^2 x^2) deviation
    sinks under the rounding of the tables as lambda decreases.
    """
    lam = solution.lam
    x_hi = min(solution.y0 / lam, tables.y_max)
    x = np.geomspace(INTERIOR_NORM_X_MIN, x_hi, n)
    rho, u = solution.profile.evaluate(lam * x)
    rho_bar = lam ** 2 * rho
    u_bar = u / lam
    bracket = np.sqrt(1.0 + x * x)
    return {
        "rho": float(np.max(np.abs(rho_bar - tables.eQ(x)) / (lam ** 2 * x ** 2 * bracket ** -2.5))),
        "u": float(np.max(np.abs(u_bar - tables.ustar(x)) / (lam ** 2 * x ** 3 * bracket ** -0.5))),
        "scale": lam ** 2,
    }


def weighted_norms(solution, tables=None, n: int = 2000) -> Dict[str, float]:
    """Norm table for an exterior (has epsilon) or interior (has lam) solution."""
    if hasattr(solution, "epsilon"):
        return exterior_norms(solution, n)
    if tables is None:
        raise DomainError("interior norms need the isothermal tables")
    return interior_norms(solution, tables, n)


# ============ FITS ============

@dataclass
class FrequencyFit:
    omega: float
    uncertainty: float
    amplitude: float
    phase: float
    periods: float


def _fit_model(t, omega, a, b, k1, k2, k3):
    decay = np.exp(-0.5 * t)
    return (a * np.cos(omega * t) + b * np.sin(omega * t)
            + decay * (k1 + k2 * np.cos(2 * omega * t) + k3 * np.sin(2 * omega * t)))


def _plain_model(t, omega, a, b):
    return a * np.cos(omega * t) + b * np.sin(omega * t)


def frequency_check(
    y,
    g,
    guess: float = SQRT7_2,
    half_width: float = 0.3,
    min_periods: float = 3.0,
    corrections: bool = True,
) -> FrequencyFit:
    """Free-frequency fit of g ~ c sin(omega log y + d), with y^-1/2 corrections unless disabled."""
    y = np.asarray(y, dtype=float)
    g = np.asarray(g, dtype=float)
    t = np.log(y)
    periods = (t.max() - t.min()) * guess / (2 * math.pi)
    if y.size < 16 or periods < min_periods:
        raise IllConditioned(f"trace spans {periods:.2f} periods with {y.size} samples")

    def objective(omega: float) -> float:
        return linear_log_fit(t, g, omega, with_corrections=corrections).residual

    best = minimize_scalar(objective, bounds=(guess - half_width, guess + half_width), method="bounded",
                           options={"xatol": 1e-12})
    start = linear_log_fit(t, g, best.x, with_corrections=corrections)
    a0 = start.amplitude * math.sin(start.phase)
    b0 = start.amplitude * math.cos(start.phase)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OptimizeWarning)
        if corrections:
            params, cov = curve_fit(_fit_model, t, g, p0=[best.x, a0, b0, *start.corrections])
        else:
            params, cov = curve_fit(_plain_model, t, g, p0=[best.x, a0, b0])
    uncertainty = float(math.sqrt(abs(cov[0, 0]))) if np.all(np.isfinite(cov)) else float("inf")
    a, b = params[1], params[2]
    logger.debug(f"fitted frequency {params[0]:.8f} +- {uncertainty:.2e} over {periods:.1f} periods")
    return FrequencyFit(
        omega=float(params[0]),
        uncertainty=uncertainty,
        amplitude=float(math.hypot(a, b)),
        phase=float(math.atan2(a, b) % (2 * math.pi)),
        periods=float(periods),
    )


@dataclass
class GrowthFit:
    exponent: float
    amplitude: float
    relative_residual: float


def growth_exponent(y, g, omega: float = SQRT7_2, bounds: Tuple[float, float] = (0.0, 4.0)) -> GrowthFit:
    """Power alpha such that g y^-alpha is a constant-amplitude log-sinusoid."""
    y = np.asarray(y, dtype=float)
    g = np.asarray(g, dtype=float)
    t = np.log(y)

    def objective(alpha: float) -> float:
        scaled = g * y ** -alpha
        fit = linear_log_fit(t, scaled, omega, with_corrections=True)
        return fit.residual / (np.sqrt(np.mean(scaled ** 2)) + 1e-300)

    best = minimize_scalar(objective, bounds=bounds, method="bounded", options={"xatol": 1e-10})
    fit = linear_log_fit(t, g * y ** -best.x, omega, with_corrections=True)
    return GrowthFit(exponent=float(best.x), amplitude=fit.amplitude, relative_residual=float(best.fun))


def phase_difference(velocity_phase: float, density_phase: float) -> float:
    return (velocity_phase - density_phase) % (2 * math.pi)


# ============ REPORT ============

@dataclass
class VerificationReport:
    residual_max: float
    intersection_count: int
    tail_certified: bool
    sonic_points: List[SonicPoint]
    velocity_bounds: Optional[Tuple[float, float]]
    fits: Dict[str, Dict[str, float]]
    norms: Dict[str, Dict[str, float]]
    checks: Dict[str, bool]
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def sonic_count(self) -> int:
        return len(self.sonic_points)


def velocity_bounds(profile: RadialProfile, y0: float, n: int = 2000) -> Tuple[float, float]:
    """(min (u+y)' on [y0, y_max], max |u+y| on [y_min, y0])."""
    outer = np.geomspace(y0, profile.y_max, n)
    _, du = profile.derivative(outer)
    inner_lo = profile.y_min if profile.y_min > 0 else 1e-9 * y0
    inner = np.concatenate([[profile.y_min], np.geomspace(inner_lo, y0, n)])
    _, u = profile.evaluate(inner)
    return float(np.min(du + 1.0)), float(np.max(np.abs(u + inner)))


def _interior_fit(profile: RadialProfile, lam: float, y0: float) -> Optional[FrequencyFit]:
    lo, hi = 100.0 * lam, 0.2 * y0
    if hi <= lo:
        return None
    y = np.geomspace(lo, hi, 600)
    p, _ = profile.p_omega(y)
    try:
        return frequency_check(y, np.sqrt(y / lam) * (p - 1.0), min_periods=1.0)
    except IllConditioned:
        return None


def verify_profile(
    profile: RadialProfile,
    expect_intersections: Optional[int] = None,
    expect_sonic: Optional[int] = None,
    residual_tol: float = 1e-8,
    sonic_tol: float = 1e-4,
    norms: Optional[Dict[str, Dict[str, float]]] = None,
) -> VerificationReport:
    """Consolidated checks on one profile.

    Velocity bounds and interior fits are evaluated when the profile metadata
    carries y0 (and lam).
    """
    meta = profile.metadata
    res = residual_max(profile)
    intersections = count_intersections(profile, strict=False)
    sonic = count_sonic_points(profile, tol=sonic_tol)

    checks = {"residual": res <= residual_tol, "tail_certified": intersections.tail_certified}
    if expect_intersections is not None:
        checks["intersections"] = intersections.count == expect_intersections
    if expect_sonic is not None:
        checks["sonic_count"] = len(sonic) == expect_sonic
    checks["sonic_residuals"] = all(pt.residual <= sonic_tol for pt in sonic)

    bounds = None
    fits: Dict[str, Dict[str, float]] = {}
    if meta.get("y0") is not None:
        bounds = velocity_bounds(profile, float(meta["y0"]))
        checks["exterior_velocity"] = bounds[0] >= 0.5
        checks["interior_velocity"] = bounds[1] <= 0.5
        if meta.get("lam"):
            fit = _interior_fit(profile, float(meta["lam"]), float(meta["y0"]))
            if fit is not None:
                fits["interior_density"] = {"c": fit.amplitude, "d": fit.phase, "omega": fit.omega}

    report = VerificationReport(
        residual_max=res,
        intersection_count=intersections.count,
        tail_certified=intersections.tail_certified,
        sonic_points=sonic,
        velocity_bounds=bounds,
        fits=fits,
        norms=dict(norms or {}),
        checks=checks,
        metadata=dict(meta),
    )
    logger.info(f"verification: residual {res:.2e}, {intersections.count} intersection(s), "
                f"{len(sonic)} sonic point(s), passed={report.passed}")
    return report
