"""Series launch data at the sonic point and at the origin, and Frobenius exponent checks.

Both expansions substitute truncated power series into the polynomial form of
the system

    E1 = y (u+y) rho' + y rho u' + 2 rho (u+y)
    E2 = rho' + kappa rho (u+y) u' + 2 rho^2 (u+y)

(kappa = 1 physically, lambda^2 in the interior scaled coordinate) and solve
one 2x2 linear system per order.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from hunter.config import TIGHT, IntegratorConfig
from hunter.errors import DegenerateExponent, DomainError, InsufficientSeparation, ResonantOrder
from hunter.models import Branch, ProfileSegment, RadialState
from hunter.numerics.ode import integrate
from hunter.physics.selfsim import rhs

logger = logging.getLogger(__name__)

RESONANCE_COND = 1e12


# ============ POWER SERIES ARITHMETIC ============

def _mul(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n + 1)
    prod = np.convolve(a, b)[: n + 1]
    out[: prod.size] = prod
    return out


def _der(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    out[:-1] = np.arange(1, a.size) * a[1:]
    return out


def _pad(a: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n + 1)
    out[: min(a.size, n + 1)] = a[: n + 1]
    return out


def equations(
    rho_c: np.ndarray, u_c: np.ndarray, center: float, inertia: float, n: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Coefficients of E1, E2 through order n for series in h = y - center."""
    size = n + 1
    rho = _pad(rho_c, size)
    u = _pad(u_c, size)
    y = _pad(np.array([center, 1.0]), size)
    v = u + y
    drho, du = _der(rho), _der(u)
    e1 = _mul(_mul(y, v, size), drho, size) + _mul(_mul(y, rho, size), du, size) + 2.0 * _mul(rho, v, size)
    e2 = drho + inertia * _mul(_mul(rho, v, size), du, size) + 2.0 * _mul(_mul(rho, rho, size), v, size)
    return e1[: n + 1], e2[: n + 1]


def _solve_order(
    rho_c: np.ndarray,
    u_c: np.ndarray,
    n: int,
    center: float,
    inertia: float,
    rows: Sequence[Tuple[Tuple[float, float], int]],
) -> Tuple[float, float, float]:
    """Solve for (rho_n, u_n); rows pick (weights on E1, E2) at a given order."""
    def picked(rc: np.ndarray, uc: np.ndarray) -> np.ndarray:
        e1, e2 = equations(rc, uc, center, inertia, n)
        return np.array([w[0] * e1[k] + w[1] * e2[k] for w, k in rows])

    base_r = rho_c.copy()
    base_u = u_c.copy()
    base_r[n:] = 0.0
    base_u[n:] = 0.0
    f0 = picked(base_r, base_u)
    columns = []
    for target in (0, 1):
        r, u = base_r.copy(), base_u.copy()
        (r if target == 0 else u)[n] = 1.0
        columns.append(picked(r, u) - f0)
    matrix = np.column_stack(columns)
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > RESONANCE_COND:
        raise ResonantOrder(f"order {n} system singular (cond={cond:.3e}) at center {center}", order=n, y_star=center)
    a_n, b_n = np.linalg.solve(matrix, -f0)
    return float(a_n), float(b_n), float(cond)


# ============ SONIC POINT ============

def branch_data(y_star: float, branch: Branch) -> Tuple[float, float, float, float]:
    """(rho, rho', u, u') at a sonic point for either branch."""
    rho0 = 1.0 / y_star
    u0 = 1.0 - y_star
    if branch == Branch.HUNTER:
        return rho0, 1.0 / y_star - 3.0 / y_star ** 2, u0, 1.0 / y_star - 1.0
    if branch == Branch.LARSON_PENSTON:
        return rho0, -1.0 / y_star ** 2, u0, -1.0 / y_star
    raise DomainError(f"no first-order data for branch {branch}")


def left_null_vector(y_star: float) -> np.ndarray:
    """Left null vector of the leading matrix [[y*, 1], [1, 1/y*]] (via SVD)."""
    a0 = np.array([[y_star, 1.0], [1.0, 1.0 / y_star]])
    u_mat, _, _ = np.linalg.svd(a0)
    return u_mat[:, -1]


def order_one_constraints(y_star: float, rho1: float, u1: float) -> np.ndarray:
    """Solvability constraints at a sonic point for first-order data (rho', u').

    Returns (E1_0, E2_0, l.E_1): the order-0 rows and the left-null-vector
    projection of order 1. All vanish for admissible branch data.
    """
    rho_c = np.array([1.0 / y_star, rho1, 0.0])
    u_c = np.array([1.0 - y_star, u1, 0.0])
    e1, e2 = equations(rho_c, u_c, y_star, 1.0, 1)
    ell = left_null_vector(y_star)
    return np.array([e1[0], e2[0], ell[0] * e1[1] + ell[1] * e2[1]])


@dataclass(frozen=True)
class SonicExpansion:
    """Taylor data of (rho, u) at a sonic point y*."""
    branch: Branch
    y_star: float
    coeffs_rho: np.ndarray
    coeffs_u: np.ndarray
    radius_guard: float
    max_condition: float = 1.0

    @property
    def order(self) -> int:
        return self.coeffs_rho.size - 1

    def evaluate(self, y) -> Tuple[np.ndarray, np.ndarray]:
        h = np.asarray(y, dtype=float) - self.y_star
        return (np.polynomial.polynomial.polyval(h, self.coeffs_rho),
                np.polynomial.polynomial.polyval(h, self.coeffs_u))

    def derivative(self, y) -> Tuple[np.ndarray, np.ndarray]:
        h = np.asarray(y, dtype=float) - self.y_star
        return (np.polynomial.polynomial.polyval(h, np.polynomial.polynomial.polyder(self.coeffs_rho)),
                np.polynomial.polynomial.polyval(h, np.polynomial.polynomial.polyder(self.coeffs_u)))

    def state(self, y: float) -> RadialState:
        rho, u = self.evaluate(y)
        return RadialState(y=float(y), rho=float(rho), u=float(u))

    def launch_points(self) -> Tuple[float, float]:
        return self.y_star - self.radius_guard, self.y_star + self.radius_guard

    def segment(self) -> ProfileSegment:
        lo, hi = self.launch_points()
        return ProfileSegment(lo, hi, self.evaluate, self.derivative, label=f"sonic-{self.branch.value}")

    def coefficient_residual(self) -> np.ndarray:
        """Coefficients of E1, E2 through order M-1; roundoff-small when solved."""
        e1, e2 = equations(self.coeffs_rho, self.coeffs_u, self.y_star, 1.0, self.order - 1)
        return np.concatenate([e1, e2])

    def tail_residual(self, h: float) -> float:
        """Truncation part of the residual at |y - y*| = h (orders >= M)."""
        full = 3 * self.order + 2
        e1, e2 = equations(self.coeffs_rho, self.coeffs_u, self.y_star, 1.0, full)
        powers = np.abs(h) ** np.arange(full + 1)
        tail = slice(self.order, full + 1)
        return float(np.sum(np.abs(e1[tail]) * powers[tail]) + np.sum(np.abs(e2[tail]) * powers[tail]))


def sonic_expansion(
    y_star: float,
    branch: Branch = Branch.HUNTER,
    order: int = 10,
    radius_guard: Optional[float] = None,
) -> SonicExpansion:
    """Taylor expansion at a sonic point, order by order.

    Order n uses the row E1 at order n-1 (where (rho_n, u_n) enter through the
    leading matrix) and the left-null-vector projection of order n (where the
    order n+1 unknowns drop out).
    """
    if not 0.5 < y_star < 3.0:
        raise DomainError(f"y* = {y_star} outside (1/2, 3)")
    if order < 4:
        raise DomainError(f"order must be >= 4, got {order}")
    rho0, rho1, u0, u1 = branch_data(y_star, branch)
    rho_c = np.zeros(order + 1)
    u_c = np.zeros(order + 1)
    rho_c[:2] = (rho0, rho1)
    u_c[:2] = (u0, u1)
    ell = left_null_vector(y_star)

    worst = 1.0
    for n in range(2, order + 1):
        rows = [((1.0, 0.0), n - 1), ((float(ell[0]), float(ell[1])), n)]
        rho_c[n], u_c[n], cond = _solve_order(rho_c, u_c, n, y_star, 1.0, rows)
        worst = max(worst, cond)

    guard = radius_guard if radius_guard is not None else 1e-3 * max(1.0, y_star)
    logger.debug(f"{branch.value} expansion at y*={y_star:.12g}, order {order}, max cond {worst:.2e}")
    return SonicExpansion(branch, float(y_star), rho_c, u_c, float(guard), worst)


# ============ ORIGIN ============

@dataclass(frozen=True)
class OriginExpansion:
    """Taylor data at the origin: rho even, u odd, u'(0) = -2/3."""
    rho0: float
    coeffs_rho: np.ndarray
    coeffs_u: np.ndarray
    inertia: float = 1.0

    @property
    def order(self) -> int:
        return self.coeffs_rho.size - 1

    def evaluate(self, x) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        return (np.polynomial.polynomial.polyval(x, self.coeffs_rho),
                np.polynomial.polynomial.polyval(x, self.coeffs_u))

    def derivative(self, x) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        return (np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyder(self.coeffs_rho)),
                np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyder(self.coeffs_u)))

    def tail_residual(self, x: float) -> float:
        full = 3 * self.order + 2
        e1, e2 = equations(self.coeffs_rho, self.coeffs_u, 0.0, self.inertia, full)
        powers = np.abs(x) ** np.arange(full + 1)
        return float(np.sum(np.abs(e1[self.order + 1:]) * powers[self.order + 1:])
                     + np.sum(np.abs(e2[self.order:]) * powers[self.order:]))


def origin_expansion(rho0: float, order: int = 10, inertia: float = 1.0) -> OriginExpansion:
    """Regular expansion at y = 0 with rho(0) = rho0, u(0) = 0.

    Order n solves E1 at order n (only u_n enters) and E2 at order n-1 (only
    rho_n enters), so the system is triangular and never resonant.
    """
    if rho0 <= 0:
        raise DomainError(f"rho0 must be positive, got {rho0}")
    rho_c = np.zeros(order + 1)
    u_c = np.zeros(order + 1)
    rho_c[0] = rho0
    for n in range(1, order + 1):
        rows = [((1.0, 0.0), n), ((0.0, 1.0), n - 1)]
        rho_c[n], u_c[n], _ = _solve_order(rho_c, u_c, n, 0.0, inertia, rows)
    return OriginExpansion(float(rho0), rho_c, u_c, float(inertia))


# ============ SERIES / INTEGRATION CONSISTENCY ============

def _sonic_field(y_star: float, sign: float) -> Callable[[float, np.ndarray], np.ndarray]:
    """(rho, u) field in t = log|y - y*|; the factor y - y* cancels the sonic pole."""
    def field(t: float, state: np.ndarray) -> np.ndarray:
        h = sign * math.exp(t)
        drho, du = rhs(RadialState(y_star + h, state[0], state[1]), guard=0.0)
        return h * np.array([drho, du])

    return field


def sonic_consistency(
    expansion: SonicExpansion,
    outer: Optional[float] = None,
    config: IntegratorConfig = TIGHT,
) -> Tuple[float, float]:
    """Series against integration on each side of y*.

    From the series at y* -/+ outer the regularised field is integrated back to
    the launch points y* -/+ radius_guard; returns the largest relative
    mismatch below and above y*.
    """
    y_star, guard = expansion.y_star, expansion.radius_guard
    outer = outer or 10.0 * guard
    if outer <= guard:
        raise DomainError(f"outer radius {outer} inside the guard band {guard}")
    errors = []
    for sign in (-1.0, 1.0):
        start = expansion.state(y_star + sign * outer)
        solution, _ = integrate(_sonic_field(y_star, sign), math.log(outer), np.array([start.rho, start.u]),
                                math.log(guard), config)
        rho, u = solution.final_state
        edge = expansion.state(y_star + sign * guard)
        errors.append(max(abs(rho - edge.rho) / edge.rho, abs(u - edge.u) / max(abs(edge.u), edge.y)))
    logger.debug(f"sonic series vs integration at y*={y_star:.6g}: below {errors[0]:.2e}, above {errors[1]:.2e}")
    return errors[0], errors[1]


# ============ FROBENIUS EXPONENTS ============

@dataclass(frozen=True)
class ExponentMeasurement:
    """Predicted (residue eigenvalue) and measured (log-log slope) separation exponent."""
    predicted: float
    measured: float
    window: Tuple[float, float]
    residue_eigenvalues: Tuple[float, float]


def _jacobian(state: RadialState, step: float = 1e-7) -> np.ndarray:
    jac = np.empty((2, 2))
    base = np.array([state.rho, state.u])
    for j in range(2):
        dx = step * max(1.0, abs(base[j]))
        plus, minus = base.copy(), base.copy()
        plus[j] += dx
        minus[j] -= dx
        fp = rhs(RadialState(state.y, plus[0], plus[1]), guard=0.0)
        fm = rhs(RadialState(state.y, minus[0], minus[1]), guard=0.0)
        jac[:, j] = (np.array(fp) - np.array(fm)) / (2 * dx)
    return jac


def sonic_residue(expansion: SonicExpansion, h: float = 1e-4) -> np.ndarray:
    """lim (y - y*) J(y) along the analytic solution, two-sided average."""
    y_star = expansion.y_star
    right = h * _jacobian(expansion.state(y_star + h))
    left = -h * _jacobian(expansion.state(y_star - h))
    return 0.5 * (right + left)


def _slope(x: np.ndarray, d: np.ndarray) -> float:
    if d.max() / max(d.min(), 1e-300) < 2.0:
        raise InsufficientSeparation(f"difference varies only by {d.max() / d.min():.3f} over the window")
    return float(np.polyfit(np.log(x), np.log(d), 1)[0])


def frobenius_exponents(
    y_star: float,
    branch: Branch = Branch.HUNTER,
    eta: float = 1e-6,
    h_start: float = 1e-5,
    h_end: float = 5e-2,
    config: IntegratorConfig = TIGHT,
) -> ExponentMeasurement:
    """Measure the non-analytic exponent at a sonic point.

    A second solution is launched at y* + h_start along the nonzero-eigenvalue
    direction of the residue; the slope of log|difference| against
    log(y - y*) is the measured exponent.
    """
    if abs(y_star - 1.0) < 1e-6:
        raise DegenerateExponent("exponents coincide at y* = 1")
    expansion = sonic_expansion(y_star, branch)
    residue = sonic_residue(expansion)
    eigenvalues, eigenvectors = np.linalg.eig(residue)
    eigenvalues = eigenvalues.real
    pick = int(np.argmax(np.abs(eigenvalues)))
    direction = eigenvectors[:, pick].real
    direction /= np.linalg.norm(direction)

    field = _sonic_field(y_star, 1.0)
    start = expansion.state(y_star + h_start)
    base = np.array([start.rho, start.u])
    t0, t1 = math.log(h_start), math.log(h_end)
    analytic, _ = integrate(field, t0, base, t1, config)
    perturbed, _ = integrate(field, t0, base + eta * direction, t1, config)

    ts = np.linspace(t0 + math.log(10.0), t1, 40)
    diff = np.linalg.norm(perturbed(ts) - analytic(ts), axis=0)
    measured = _slope(np.exp(ts), diff)
    logger.info(f"sonic exponent at y*={y_star}: predicted {eigenvalues[pick]:.4f}, measured {measured:.4f}")
    return ExponentMeasurement(
        predicted=float(eigenvalues[pick]),
        measured=measured,
        window=(10.0 * h_start, h_end),
        residue_eigenvalues=tuple(float(e) for e in sorted(eigenvalues)),
    )


def origin_exponent(
    eta: float = 1e-9,
    y_launch: float = 5e-2,
    y_end: float = 2e-3,
    rho0: float = 1.0,
    config: IntegratorConfig = TIGHT,
) -> ExponentMeasurement:
    """Perturb u at y_launch off the regular solution and integrate inward.

    The singular y^-2 mode dominates the difference, so the slope is -2.
    """
    expansion = origin_expansion(rho0)

    def field(t: float, state: np.ndarray) -> np.ndarray:
        y = math.exp(t)
        drho, du = rhs(RadialState(y, state[0], state[1]), guard=0.0)
        return y * np.array([drho, du])

    rho_s, u_s = expansion.evaluate(y_launch)
    base = np.array([float(rho_s), float(u_s)])
    t0, t1 = math.log(y_launch), math.log(y_end)
    regular, _ = integrate(field, t0, base, t1, config)
    perturbed, _ = integrate(field, t0, base + np.array([0.0, eta]), t1, config)

    ts = np.linspace(t1, t0 - math.log(10.0), 30)
    diff = np.abs(perturbed(ts)[1] - regular(ts)[1])
    measured = _slope(np.exp(ts), diff)
    logger.info(f"origin exponent measured {measured:.4f}")
    return ExponentMeasurement(predicted=-2.0, measured=measured, window=(y_end, y_launch / 10.0),
                               residue_eigenvalues=(-2.0, 0.0))
