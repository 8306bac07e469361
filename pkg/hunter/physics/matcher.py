"""Exterior and interior solutions, the matching functions F and G, and the matched family lambda_k.

Both regions are integrated in (log p, omega) with t = log(y / scale). The
exterior is shot from a Hunter-type sonic point at y* = 1 + epsilon; the
interior from the regular origin in x = y / lambda with inertia lambda^2.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from hunter.analysis import count_intersections, count_sonic_points, residual_max, velocity_bounds
from hunter.config import MatchConfig
from hunter.errors import (
    BlowupBeforeY0,
    CountMismatch,
    DomainError,
    HunterError,
    MaxStepsExceeded,
    NoBracket,
    NumericalError,
    OriginSeriesFailure,
    PrecisionFloor,
    ResidualTooLarge,
    SeamMismatch,
    SonicDegeneracy,
    SonicGuardHit,
    StepSizeUnderflow,
    VelocityBoundViolated,
)
from hunter.models import Branch, ProfileSegment, RadialProfile
from hunter.numerics.hypergeom import HypergeomConstants, phom_closed
from hunter.numerics.ode import SQRT7_2, DenseSolution, Event, bisect, integrate
from hunter.physics.expansions import OriginExpansion, SonicExpansion, origin_expansion, sonic_expansion
from hunter.physics.isothermal import IsothermalFits, IsothermalTables
from hunter.physics.selfsim import log_p_omega_field, log_p_omega_slopes

logger = logging.getLogger(__name__)

DENSE_REL_STEP = 1e-3
EPSILON_DOUBLINGS = 6
SONIC_BAND = 1e-5


@dataclass
class MatchContext:
    """Constants and tables every matching step needs."""
    constants: HypergeomConstants
    fits: IsothermalFits
    tables: Optional[IsothermalTables] = None
    config: MatchConfig = field(default_factory=MatchConfig)


# ============ HELPERS ============

def sonic_events(inertia: float = 1.0, band: float = SONIC_BAND) -> List[Event]:
    """Stop on D = inertia e^{2t} omega^2 - 1 crossing zero or entering |D| <= band.

    A second sonic point is usually met tangentially, so D never changes sign
    and only the band stops the integration before the step size collapses.
    """
    def det(t, s):
        return inertia * math.exp(2.0 * t) * s[1] * s[1] - 1.0

    return [
        Event(det, terminal=True, name="sonic"),
        Event(lambda t, s: abs(det(t, s)) - band, direction=-1, terminal=True, name="sonic"),
    ]


def to_log_p_omega(y: float, rho: float, u: float) -> np.ndarray:
    return np.array([math.log(y * y * rho), u / y + 1.0])


def dense_segment(solution: DenseSolution, lo: float, hi: float, scale: float, label: str) -> ProfileSegment:
    """(rho, u) from a (log p, omega) dense solution in t = log(y / scale).

    Derivatives come from the vector field at the interpolated state; in
    physical variables s2 = y^2 whatever the scale.
    """
    t_lo, t_hi = solution.t_min, solution.t_max

    def state(y):
        y = np.asarray(y, dtype=float)
        ell, omega = solution(np.clip(np.log(y / scale), t_lo, t_hi))
        return y, ell, omega

    def evaluate(y):
        y, ell, omega = state(y)
        return np.exp(ell) / y ** 2, y * (omega - 1.0)

    def derivative(y):
        y, ell, omega = state(y)
        p = np.exp(ell)
        dell, domega = log_p_omega_slopes(y * y, p, omega)
        return p / y ** 3 * (dell - 2.0), omega - 1.0 + domega

    return ProfileSegment(lo, hi, evaluate, derivative, label=label, rel_step=DENSE_REL_STEP)


def _p_omega_at(solution: DenseSolution, t: float) -> Tuple[float, float]:
    ell, omega = solution(t)
    return math.exp(float(ell)), float(omega)


# ============ Y0 ============

@dataclass(frozen=True)
class Y0Choice:
    y0: float
    m: int
    deviation: float


def choose_y0(constants: HypergeomConstants, target_scale: float = 0.02) -> Y0Choice:
    """y0 with sin(sqrt7/2 log y0 + d1) = 1, nearest target_scale in log."""
    if not 1e-3 <= target_scale <= 1e-1:
        raise DomainError(f"target scale {target_scale} outside [1e-3, 1e-1]")
    base = math.pi / 2 - constants.d1
    m = round((base - SQRT7_2 * math.log(target_scale)) / (2 * math.pi))
    y0 = math.exp((base - 2 * math.pi * m) / SQRT7_2)
    deviation = abs(math.sin(SQRT7_2 * math.log(y0) + constants.d1) - 1.0)
    logger.debug(f"y0={y0:.12g} (m={m}), wiggle deviation {deviation:.2e}")
    return Y0Choice(y0=y0, m=int(m), deviation=deviation)


# ============ EXTERIOR ============

@dataclass
class ExteriorSolution:
    epsilon: float
    y0: float
    y_max: float
    expansion: SonicExpansion
    inward: DenseSolution
    outward: Optional[DenseSolution]
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def y_star(self) -> float:
        return self.expansion.y_star

    def trace_at_y0(self) -> Tuple[float, float]:
        """(p, omega) at y0."""
        return _p_omega_at(self.inward, math.log(self.y0))

    @property
    def profile(self) -> RadialProfile:
        lo, hi = self.expansion.launch_points()
        segments = [dense_segment(self.inward, self.y0, lo, 1.0, "exterior-inward"), self.expansion.segment()]
        if self.outward is not None:
            segments.append(dense_segment(self.outward, hi, self.y_max, 1.0, "exterior-outward"))
        return RadialProfile(segments, {"kind": "exterior", "epsilon": self.epsilon, "y0": self.y0,
                                        "y_star": self.y_star})


def _shoot(field_fn, t0: float, state0: np.ndarray, t1: float, config: MatchConfig, events: Sequence[Event]):
    try:
        return integrate(field_fn, t0, state0, t1, config.integrator, events)
    except (SonicDegeneracy, StepSizeUnderflow, MaxStepsExceeded) as exc:
        raise SonicGuardHit(f"integration from t={t0:.6g} towards t={t1:.6g} broke down: {exc}") from exc


def exterior_solve(
    epsilon: float,
    y0: float,
    y_max: Optional[float] = None,
    config: Optional[MatchConfig] = None,
    outward: bool = True,
    strict: bool = False,
) -> ExteriorSolution:
    """Hunter expansion at y* = 1 + epsilon, integrated inward to y0 and outward to y_max."""
    config = config or MatchConfig()
    y_max = y_max or config.exterior_y_max
    if not 0 < y0 < 1 < y_max:
        raise DomainError(f"need 0 < y0 < 1 < y_max, got y0={y0}, y_max={y_max}")
    y_star = 1.0 + epsilon
    expansion = sonic_expansion(y_star, Branch.HUNTER, config.series_order, config.radius_guard * max(1.0, y_star))
    lo, hi = expansion.launch_points()
    if not y0 < lo:
        raise DomainError(f"y0={y0} inside the sonic launch neighbourhood of y*={y_star}")
    field_fn = log_p_omega_field(1.0, config.sonic_guard)

    start = expansion.state(lo)
    inward, log = _shoot(field_fn, math.log(lo), to_log_p_omega(lo, start.rho, start.u), math.log(y0), config,
                         sonic_events())
    if log:
        raise SonicGuardHit(f"second sonic point at y={math.exp(log[0].t):.6g} inside [{y0}, {lo}]")

    outer = None
    if outward:
        start = expansion.state(hi)
        outer, log = _shoot(field_fn, math.log(hi), to_log_p_omega(hi, start.rho, start.u), math.log(y_max), config,
                            sonic_events())
        if log:
            raise SonicGuardHit(f"second sonic point at y={math.exp(log[0].t):.6g} inside [{hi}, {y_max}]")

    solution = ExteriorSolution(epsilon=epsilon, y0=y0, y_max=y_max, expansion=expansion, inward=inward,
                                outward=outer)
    if outward:
        profile = solution.profile
        ys = np.geomspace(y0, y_max, 2000)
        _, du = profile.derivative(ys)
        solution.diagnostics["min_velocity_slope"] = float(np.min(du + 1.0))
        if solution.diagnostics["min_velocity_slope"] < 0.5:
            message = f"(u+y)' = {solution.diagnostics['min_velocity_slope']:.4f} < 1/2 at epsilon={epsilon:.3e}"
            if strict:
                raise VelocityBoundViolated(message)
            logger.warning(message)
    return solution


@dataclass
class LinearResponse:
    y: np.ndarray
    dp: np.ndarray
    domega: np.ndarray
    p_hom: np.ndarray
    omega_hom: np.ndarray

    @property
    def max_error(self) -> float:
        return float(max(np.max(np.abs(self.dp - self.p_hom)), np.max(np.abs(self.domega - self.omega_hom))))


def exterior_linear_response(
    ys: Sequence[float],
    step: float = 1e-6,
    y0: float = 0.05,
    y_max: float = 20.0,
    config: Optional[MatchConfig] = None,
) -> LinearResponse:
    """Central difference in epsilon of the exterior (p, omega), against (p_hom, omega_hom)."""
    ys = np.asarray(ys, dtype=float)
    plus = exterior_solve(step, y0, y_max, config).profile
    minus = exterior_solve(-step, y0, y_max, config).profile
    p_plus, w_plus = plus.p_omega(ys)
    p_minus, w_minus = minus.p_omega(ys)
    closed = np.array([phom_closed(y)[:2] for y in ys]).T
    return LinearResponse(
        y=ys,
        dp=(p_plus - p_minus) / (2 * step),
        domega=(w_plus - w_minus) / (2 * step),
        p_hom=closed[0],
        omega_hom=closed[1],
    )


# ============ INTERIOR ============

@dataclass
class InteriorSolution:
    lam: float
    y0: float
    expansion: OriginExpansion
    x_launch: float
    solution: DenseSolution
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def trace_at_y0(self) -> Tuple[float, float]:
        return _p_omega_at(self.solution, math.log(self.y0 / self.lam))

    @property
    def profile(self) -> RadialProfile:
        lam, expansion = self.lam, self.expansion

        def series(y):
            rho_bar, u_bar = expansion.evaluate(np.asarray(y, dtype=float) / lam)
            return rho_bar / lam ** 2, lam * u_bar

        def series_derivative(y):
            drho_bar, du_bar = expansion.derivative(np.asarray(y, dtype=float) / lam)
            return drho_bar / lam ** 3, du_bar

        y_launch = lam * self.x_launch
        segments = [
            ProfileSegment(0.0, y_launch, series, series_derivative, label="origin-series"),
            dense_segment(self.solution, y_launch, self.y0, lam, "interior"),
        ]
        return RadialProfile(segments, {"kind": "interior", "lam": lam, "y0": self.y0})


def interior_solve(lam: float, y0: float, config: Optional[MatchConfig] = None, strict: bool = False) -> InteriorSolution:
    """Regular solution with rho(0) = lambda^-2, integrated in x = y / lambda up to y0."""
    config = config or MatchConfig()
    if not 0 < lam <= y0 / 10:
        raise DomainError(f"need 0 < lambda <= y0/10, got lambda={lam}, y0={y0}")
    inertia = lam * lam
    expansion = origin_expansion(1.0, config.series_order, inertia)
    x0 = config.origin_launch
    tail = expansion.tail_residual(x0)
    if tail > 1e-10:
        raise OriginSeriesFailure(f"origin series tail {tail:.2e} at x={x0}")
    rho_bar, u_bar = expansion.evaluate(x0)
    state0 = to_log_p_omega(x0, float(rho_bar), float(u_bar))
    try:
        solution, log = integrate(log_p_omega_field(inertia, config.sonic_guard), math.log(x0), state0,
                                  math.log(y0 / lam), config.integrator, sonic_events(inertia))
    except (SonicDegeneracy, StepSizeUnderflow, MaxStepsExceeded) as exc:
        raise BlowupBeforeY0(f"interior integration failed for lambda={lam:.3e}: {exc}") from exc
    if log:
        raise BlowupBeforeY0(f"sonic point at y={lam * math.exp(log[0].t):.6g} before y0={y0}")

    result = InteriorSolution(lam=lam, y0=y0, expansion=expansion, x_launch=x0, solution=solution)
    ys = np.geomspace(lam * x0, y0, 1000)
    _, u = result.profile.evaluate(ys)
    result.diagnostics["max_sonic_distance"] = float(np.max(np.abs(u + ys)))
    if result.diagnostics["max_sonic_distance"] > 0.5:
        message = f"|u+y| = {result.diagnostics['max_sonic_distance']:.4f} > 1/2 for lambda={lam:.3e}"
        if strict:
            raise VelocityBoundViolated(message)
        logger.warning(message)
    return result


# ============ MATCHING ============

def predicted_epsilon(lam: float, context: MatchContext) -> float:
    c, f = context.constants, context.fits
    return (f.c2 / c.c1) * math.sqrt(lam) * math.cos(SQRT7_2 * math.log(lam) + c.d1 - f.d2)


@dataclass
class EpsilonMatch:
    lam: float
    epsilon: float
    predicted: float
    bracket: Tuple[float, float]
    mismatch: float
    exterior: ExteriorSolution
    interior: InteriorSolution


def match_epsilon(
    lam: float,
    y0: float,
    context: MatchContext,
    interior: Optional[InteriorSolution] = None,
) -> EpsilonMatch:
    """Root in epsilon of F = p_ext(y0) - p_int(y0) at fixed lambda."""
    config = context.config
    interior = interior or interior_solve(lam, y0, config)
    p_int, _ = interior.trace_at_y0()
    predicted = predicted_epsilon(lam, context)
    c = context.fits.c2 / context.constants.c1

    def mismatch(epsilon: float) -> float:
        p_ext, _ = exterior_solve(epsilon, y0, config=config, outward=False).trace_at_y0()
        value = p_ext - p_int
        logger.debug(f"lambda={lam:.6e} epsilon={epsilon:.15e} F={value:.3e}")
        return value

    def endpoint(epsilon: float) -> Tuple[float, float]:
        # pull a failing endpoint back towards the prediction
        for _ in range(8):
            try:
                return epsilon, mismatch(epsilon)
            except (SonicGuardHit, DomainError):
                epsilon = 0.5 * (epsilon + predicted)
        return epsilon, mismatch(epsilon)

    half = 3.0 * abs(predicted) + max(config.epsilon_floor, 0.1 * c * math.sqrt(lam))
    interval = (predicted - half, predicted + half)
    for attempt in range(EPSILON_DOUBLINGS + 1):
        a, fa = endpoint(predicted - half)
        b, fb = endpoint(predicted + half)
        interval = (a, b)
        if np.sign(fa) != np.sign(fb):
            break
        half *= 2.0
        logger.info(f"widening epsilon bracket to +-{half:.3e} (lambda={lam:.3e})")
    else:
        raise NoBracket(f"no sign change of F for lambda={lam:.3e}", predicted=predicted, interval=interval)

    epsilon = bisect(mismatch, interval, tol=1e-15)
    exterior = exterior_solve(epsilon, y0, config=config, outward=False)
    p_ext, _ = exterior.trace_at_y0()
    return EpsilonMatch(lam=lam, epsilon=epsilon, predicted=predicted, bracket=interval,
                        mismatch=p_ext - p_int, exterior=exterior, interior=interior)


@dataclass
class GEvaluation:
    lam: float
    value: float
    epsilon: float
    match: EpsilonMatch


def matching_G(lam: float, y0: float, context: MatchContext) -> GEvaluation:
    """G = (u_ext - u_int)(y0) / (c2 sqrt(y0 lambda) sin theta0) at the matched epsilon."""
    match = match_epsilon(lam, y0, context)
    _, w_ext = match.exterior.trace_at_y0()
    _, w_int = match.interior.trace_at_y0()
    scale = context.fits.c2 * math.sqrt(y0 * lam) * math.sin(context.constants.theta0)
    value = y0 * (w_ext - w_int) / scale
    logger.debug(f"G({lam:.6e}) = {value:.6f}")
    return GEvaluation(lam=lam, value=value, epsilon=match.epsilon, match=match)


def lambda_bracket(k: int, context: MatchContext, half_width: float) -> Tuple[float, float]:
    """(lambda_k-, lambda_k+) around the zero -(k + 2) pi of sqrt7/2 log lambda + d1 - d2.

    With this labelling the k-th matched profile crosses y^-2 exactly k + 1 times.
    """
    centre = (-(k + 2) * math.pi - context.constants.d1 + context.fits.d2) / SQRT7_2
    return math.exp(centre - half_width / SQRT7_2), math.exp(centre + half_width / SQRT7_2)


def glue(exterior: ExteriorSolution, interior: InteriorSolution, metadata: Optional[Dict[str, Any]] = None) -> RadialProfile:
    """Interior on [0, y0] followed by the exterior on [y0, y_max]."""
    if exterior.outward is None:
        raise DomainError("exterior solution has no outward branch")
    if abs(exterior.y0 - interior.y0) > 1e-14 * exterior.y0:
        raise DomainError(f"seams differ: {exterior.y0} vs {interior.y0}")
    segments = interior.profile.segments + exterior.profile.segments
    meta = {"kind": "hunter", "lam": interior.lam, "epsilon": exterior.epsilon, "y0": exterior.y0,
            "y_star": exterior.y_star}
    meta.update(metadata or {})
    return RadialProfile(segments, meta)


@dataclass
class MatchResult:
    k: int
    lam: float
    epsilon: float
    y_star: float
    y0: float
    profile: RadialProfile
    intersection_count: int
    sonic_count: int
    residual_max: float
    seam: Dict[str, float]
    bounds: Tuple[float, float]
    predicted_epsilon: float
    bracket: Tuple[float, float]
    inflated: bool = False
    sonic_branches: List[str] = field(default_factory=list)

    @property
    def intersection_offset(self) -> int:
        """Measured count minus k + 1."""
        return self.intersection_count - (self.k + 1)


def find_lambda_k(k: int, y0: float, context: MatchContext) -> MatchResult:
    """Bisect G on the k-th bracket, then glue and count."""
    config = context.config
    bracket = lambda_bracket(k, context, config.bracket_halfwidth)
    if bracket[1] > y0 / 10:
        raise NoBracket(f"lambda_{k}+ = {bracket[1]:.3e} exceeds y0/10", interval=bracket)
    if bracket[0] < config.lambda_floor:
        raise PrecisionFloor(f"lambda_{k} ~ {bracket[0]:.3e} below the double-precision floor", lam=bracket[0])

    cache: Dict[float, GEvaluation] = {}

    def g(log_lam: float) -> float:
        if log_lam not in cache:
            cache[log_lam] = matching_G(math.exp(log_lam), y0, context)
        return cache[log_lam].value

    inflated = False
    lo, hi = math.log(bracket[0]), math.log(bracket[1])
    if np.sign(g(lo)) == np.sign(g(hi)):
        wide = lambda_bracket(k, context, config.bracket_inflated)
        lo, hi = math.log(wide[0]), math.log(min(wide[1], y0 / 10))
        inflated = True
        logger.info(f"k={k}: inflating lambda bracket to [{wide[0]:.3e}, {math.exp(hi):.3e}]")
        if np.sign(g(lo)) == np.sign(g(hi)):
            raise NoBracket(f"G has no sign change for k={k}", interval=(math.exp(lo), math.exp(hi)))

    log_lam = bisect(g, (lo, hi), tol=1e-13)
    lam = math.exp(log_lam)
    match = match_epsilon(lam, y0, context)
    exterior = exterior_solve(match.epsilon, y0, config=config, strict=True)
    profile = glue(exterior, match.interior, {"k": k})

    rho_int, u_int = match.interior.profile.evaluate(y0)
    rho_ext, u_ext = exterior.profile.evaluate(y0)
    seam = {"rho": abs(rho_ext - rho_int) * y0 ** 2, "u": abs(u_ext - u_int) / y0}
    intersections = count_intersections(profile)
    sonic = count_sonic_points(profile, tol=config.classification_tol)
    result = MatchResult(
        k=k,
        lam=lam,
        epsilon=match.epsilon,
        y_star=exterior.y_star,
        y0=y0,
        profile=profile,
        intersection_count=intersections.count,
        sonic_count=len(sonic),
        residual_max=residual_max(profile),
        seam=seam,
        bounds=velocity_bounds(profile, y0),
        predicted_epsilon=match.predicted,
        bracket=(math.exp(lo), math.exp(hi)),
        inflated=inflated,
        sonic_branches=[pt.branch.value for pt in sonic],
    )
    logger.info(f"k={k}: lambda={lam:.10e} epsilon={match.epsilon:.10e} "
                f"intersections={result.intersection_count} sonic={result.sonic_count}")
    return accept(result, config)


def accept(result: MatchResult, config: MatchConfig) -> MatchResult:
    """Raise unless a glued profile meets the seam, bound, residual and count invariants."""
    seam = max(result.seam.values())
    if seam > config.match_tol:
        raise SeamMismatch(f"k={result.k}: seam mismatch {seam:.2e} > {config.match_tol:.0e} at y0={result.y0}")
    if result.bounds[0] < 0.5:
        raise VelocityBoundViolated(f"k={result.k}: exterior (u+y)' = {result.bounds[0]:.4f} < 1/2")
    if result.bounds[1] > 0.5:
        raise VelocityBoundViolated(f"k={result.k}: interior |u+y| = {result.bounds[1]:.4f} > 1/2")
    if result.residual_max > config.residual_tol:
        raise ResidualTooLarge(f"k={result.k}: residual {result.residual_max:.2e} > {config.residual_tol:.0e}")
    if result.sonic_count != 1 or result.intersection_offset != 0:
        raise CountMismatch(f"k={result.k}: {result.intersection_count} intersections (expected {result.k + 1}), "
                            f"{result.sonic_count} sonic points")
    return result


@dataclass
class KOutcome:
    k: int
    result: Optional[MatchResult] = None
    error: Optional[HunterError] = None

    @property
    def reason(self) -> Optional[str]:
        return type(self.error).__name__ if self.error is not None else None


def match_family(ks: Sequence[int], y0: float, context: MatchContext) -> List[KOutcome]:
    """find_lambda_k for each k; failures are recorded per k."""
    outcomes = []
    for k in ks:
        try:
            outcomes.append(KOutcome(k=k, result=find_lambda_k(k, y0, context)))
        except HunterError as exc:
            logger.warning(f"k={k}: {type(exc).__name__}: {exc}")
            outcomes.append(KOutcome(k=k, error=exc))
    return outcomes


def sweep_G(y0: float, lambdas: Sequence[float], context: MatchContext) -> List[Tuple[float, float, float]]:
    """(lambda, G, epsilon) on a grid; lambdas where matching fails are skipped with a warning."""
    rows = []
    for lam in lambdas:
        try:
            evaluation = matching_G(float(lam), y0, context)
        except (NumericalError, NoBracket) as exc:
            logger.warning(f"G sweep: lambda={lam:.3e} skipped ({type(exc).__name__}: {exc})")
            continue
        rows.append((evaluation.lam, evaluation.value, evaluation.epsilon))
    return rows
