"""Gauss hypergeometric function for real argument and the homogeneous far-field solution.

The linearization of the mass form about (p, omega) = (1, 1) in z = y is

    (p, omega)' = -1/(z (z^2 - 1)) [[-2, -2], [2, z^2 + 1]] (p, omega)

and with xi = 1 - 1/z^2 its solutions are p = g(xi), omega = -g + xi g'(xi)
where g solves the hypergeometric equation with a = -gamma/2, b = -conj(gamma)/2,
c = 1 and gamma = 1/2 + i sqrt(7)/2.
"""
import cmath
import logging
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.special import gamma as _gamma
from scipy.special import rgamma

from hunter.config import TIGHT, IntegratorConfig
from hunter.errors import (
    DomainError,
    PoleAtC,
    PoleAtNonpositiveInteger,
    SlowConvergence,
)
from hunter.numerics.ode import SQRT7_2, DenseSolution, integrate

logger = logging.getLogger(__name__)

GAMMA = complex(0.5, SQRT7_2)
A_PARAM = -GAMMA / 2
B_PARAM = -GAMMA.conjugate() / 2
SERIES_TERMS = 2_000
SLOW_TERMS = 200_000


# ============ SPECIAL FUNCTIONS ============

def _is_nonpositive_integer(z: complex) -> bool:
    z = complex(z)
    return z.imag == 0.0 and z.real <= 0.0 and z.real == round(z.real)


def _near_integer(s: complex, tol: float = 1e-12) -> bool:
    s = complex(s)
    return abs(s.imag) < tol and abs(s.real - round(s.real)) < tol


def complex_gamma(z: complex) -> complex:
    """Gamma function at a complex point."""
    if _is_nonpositive_integer(z):
        raise PoleAtNonpositiveInteger(f"Gamma has a pole at {z}")
    return complex(_gamma(complex(z)))


def _series(a: complex, b: complex, c: complex, x: float, max_terms: int = SERIES_TERMS) -> complex:
    term = 1.0 + 0.0j
    total = term
    small = 0
    for n in range(max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * x
        total += term
        if term == 0:
            return total
        # two consecutive negligible terms
        small = small + 1 if abs(term) <= 1e-17 * abs(total) else 0
        if small >= 2:
            return total
    raise SlowConvergence(f"2F1({a}, {b}; {c}; {x}) not converged after {max_terms} terms")


def _connection(a: complex, b: complex, c: complex, x: float, y: Optional[float] = None) -> complex:
    """x in (1/2, 1) through the standard 1 - x connection formula; y = 1 - x if known exactly."""
    s = c - a - b
    if _near_integer(s):
        logger.debug(f"integer c-a-b at x={x}; summing the slow series")
        return _series(a, b, c, x, SLOW_TERMS)
    y = 1.0 - x if y is None else y
    first = _gamma(c) * _gamma(s) * rgamma(c - a) * rgamma(c - b) * _series(a, b, 1 - s, y)
    second = (
        cmath.exp(s * math.log(y)) * _gamma(c) * _gamma(-s) * rgamma(a) * rgamma(b)
        * _series(c - a, c - b, 1 + s, y)
    )
    return complex(first + second)


def gauss_2f1(a: complex, b: complex, c: complex, x: float) -> complex:
    """Principal branch of 2F1(a, b; c; x) for real x < 1."""
    if _is_nonpositive_integer(c):
        raise PoleAtC(f"c = {c} is a nonpositive integer")
    x = float(x)
    if not x < 1.0:
        raise DomainError(f"argument {x} outside (-inf, 1)")
    if abs(x) <= 0.5:
        return _series(a, b, c, x)
    if x > 0.5:
        return _connection(a, b, c, x)
    # Pfaff: x/(x-1) lies in (1/3, 1)
    w = x / (x - 1.0)
    prefactor = cmath.exp(-a * math.log(1.0 - x))
    if x >= -1.0:
        return prefactor * _series(a, c - b, c, w)
    return prefactor * _connection(a, c - b, c, w, 1.0 / (1.0 - x))


# ============ CONSTANTS ============

@dataclass(frozen=True)
class HypergeomConstants:
    """Connection constants of the homogeneous solution."""
    gamma_const: complex
    theta0: float
    mu3: float
    mu4: float
    mu5: float
    mu6: float
    c1: float
    d1: float

    @property
    def frequency(self) -> float:
        return float(self.gamma_const.imag)

    def as_dict(self) -> Dict[str, float]:
        out = asdict(self)
        out.pop("gamma_const")
        return out


def build_constants() -> HypergeomConstants:
    g, gb = GAMMA, GAMMA.conjugate()
    mu3 = complex_gamma(1.5) / (complex_gamma(1 + g / 2) * complex_gamma(1 + gb / 2))
    mu4 = -1.5 * complex_gamma(-1.5) / (complex_gamma(-g / 2) * complex_gamma(-gb / 2))
    half = complex_gamma((g - gb) / 2) / (complex_gamma(-gb / 2) * complex_gamma(1 + g / 2))
    mu5, mu6 = 2.0 * half.real, 2.0 * half.imag
    c1 = math.hypot(mu5, mu6)
    d1 = math.atan2(mu5, mu6) % (2 * math.pi)
    theta0 = math.atan(math.sqrt(7.0) / 3.0) + math.pi
    logger.debug(f"mu3={mu3.real:.15g} mu4={mu4.real:.15g} mu5={mu5:.15g} mu6={mu6:.15g}")
    return HypergeomConstants(
        gamma_const=g,
        theta0=theta0,
        mu3=float(mu3.real),
        mu4=float(mu4.real),
        mu5=float(mu5),
        mu6=float(mu6),
        c1=float(c1),
        d1=float(d1),
    )


# ============ SOLUTIONS IN XI ============

def g1_derivatives(xi: float) -> Tuple[float, float, float]:
    """g1 = 2F1(a, b; 1; xi) and its first two xi-derivatives."""
    a, b = A_PARAM, B_PARAM
    value = gauss_2f1(a, b, 1, xi)
    first = a * b * gauss_2f1(a + 1, b + 1, 2, xi)
    second = a * b * (a + 1) * (b + 1) / 2 * gauss_2f1(a + 2, b + 2, 3, xi)
    return float(value.real), float(first.real), float(second.real)


def g3(xi: float) -> Tuple[float, float]:
    """Regular solution at xi = 1, with its xi-derivative."""
    if not 0.0 < xi < 1.0:
        raise DomainError(f"g3 needs xi in (0, 1), got {xi}")
    a, b = A_PARAM, B_PARAM
    x = 1.0 - xi
    value = gauss_2f1(a, b, -0.5, x)
    deriv = 2 * a * b * gauss_2f1(a + 1, b + 1, 0.5, x)
    return float(value.real), float(deriv.real)


def g4(xi: float) -> Tuple[float, float]:
    """Solution vanishing like (1 - xi)^(3/2), normalized by -2/3."""
    if not 0.0 < xi < 1.0:
        raise DomainError(f"g4 needs xi in (0, 1), got {xi}")
    big_a, big_b = 1 + GAMMA / 2, 1 + GAMMA.conjugate() / 2
    x = 1.0 - xi
    f = gauss_2f1(big_a, big_b, 2.5, x)
    fp = gauss_2f1(big_a + 1, big_b + 1, 3.5, x)
    value = -(2.0 / 3.0) * x ** 1.5 * f
    deriv = math.sqrt(x) * f + (2.0 / 3.0) * x ** 1.5 * (2 * big_a * big_b / 5) * fp
    return float(value.real), float(deriv.real)


def _g_infinity(xi: float) -> Tuple[complex, complex]:
    a = -GAMMA / 2
    c = 1 - 1j * SQRT7_2
    x = 1.0 / xi
    power = cmath.exp((GAMMA / 2) * math.log(-xi))
    f = gauss_2f1(a, a, c, x)
    fp = a * a / c * gauss_2f1(a + 1, a + 1, c + 1, x)
    return power * f, power * ((GAMMA / 2) * f / xi - fp / xi ** 2)


def g5(xi: float) -> Tuple[float, float]:
    if not xi < 0.0:
        raise DomainError(f"g5 needs xi < 0, got {xi}")
    value, deriv = _g_infinity(xi)
    return float(value.real), float(deriv.real)


def g6(xi: float) -> Tuple[float, float]:
    if not xi < 0.0:
        raise DomainError(f"g6 needs xi < 0, got {xi}")
    value, deriv = _g_infinity(xi)
    return float(-value.imag), float(-deriv.imag)


def wronskian_infinity(xi: float) -> float:
    """Wronskian of (g3, g4)."""
    return math.sqrt(1.0 - xi) / xi


def wronskian_zero(xi: float) -> float:
    """Wronskian of (g5, g6)."""
    return -(math.sqrt(7.0) / 4.0) * math.sqrt(1.0 - xi) / xi


# ============ HOMOGENEOUS SOLUTION ============

def xi_of(z: float) -> float:
    if z <= 0:
        raise DomainError(f"z must be positive, got {z}")
    return 1.0 - 1.0 / (z * z)


def phom_closed(z: float) -> Tuple[float, float, float, float]:
    """(p_hom, omega_hom, p_hom', omega_hom') in closed form."""
    xi = xi_of(z)
    g, gp, gpp = g1_derivatives(xi)
    return g, -g + xi * gp, 2.0 * gp / z ** 3, 2.0 * xi * gpp / z ** 3


def taylor_at_one(order: int = 8) -> Tuple[np.ndarray, np.ndarray]:
    """Coefficients of (p_hom, omega_hom) in powers of z - 1."""
    xi = np.array([0.0] + [(-1.0) ** (k + 1) * (k + 1) for k in range(1, order + 1)])
    p = np.zeros(order + 1)
    omega = np.zeros(order + 1)
    power = np.zeros(order + 1)
    power[0] = 1.0
    coef = 1.0 + 0.0j
    for n in range(order + 1):
        if n > 0:
            coef *= (A_PARAM + n - 1) * (B_PARAM + n - 1) / (n * n)
            power = np.convolve(power, xi)[: order + 1]
        p += coef.real * power
        omega += (n - 1) * coef.real * power
    return p, omega


def homogeneous_field(s: float, state: np.ndarray) -> np.ndarray:
    """(p, omega) field in s = log z."""
    z2 = math.exp(2.0 * s)
    p, omega = state
    return -np.array([-2.0 * p - 2.0 * omega, 2.0 * p + (z2 + 1.0) * omega]) / (z2 - 1.0)


class HomogeneousODE:
    """(p_hom, omega_hom) by integration from the Taylor data at z = 1."""

    def __init__(
        self,
        z_lo: float = 1e-4,
        z_hi: float = 1e4,
        launch: float = 1e-3,
        config: IntegratorConfig = TIGHT,
    ):
        if not 0 < z_lo < 1 - launch or z_hi <= 1 + launch:
            raise DomainError(f"bad range [{z_lo}, {z_hi}] for launch offset {launch}")
        self.launch = launch
        self.z_lo, self.z_hi = z_lo, z_hi
        self._p, self._omega = taylor_at_one()
        self.upper = self._branch(1.0 + launch, z_hi, config)
        self.lower = self._branch(1.0 - launch, z_lo, config)
        logger.debug(f"homogeneous ODE: {self.upper.n_steps} + {self.lower.n_steps} steps")

    def _taylor(self, z: np.ndarray) -> np.ndarray:
        h = z - 1.0
        return np.vstack([np.polynomial.polynomial.polyval(h, self._p),
                          np.polynomial.polynomial.polyval(h, self._omega)])

    def _branch(self, z_start: float, z_end: float, config: IntegratorConfig) -> DenseSolution:
        start = self._taylor(np.array([z_start]))[:, 0]
        solution, _ = integrate(homogeneous_field, math.log(z_start), start, math.log(z_end), config)
        return solution

    def __call__(self, z) -> np.ndarray:
        """2 x n array of (p, omega) at z."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if np.any(z < self.z_lo) or np.any(z > self.z_hi):
            raise DomainError(f"z outside [{self.z_lo}, {self.z_hi}]")
        out = np.empty((2, z.size))
        near = np.abs(z - 1.0) <= self.launch
        above = (z > 1.0) & ~near
        below = (z < 1.0) & ~near
        if np.any(near):
            out[:, near] = self._taylor(z[near])
        if np.any(above):
            out[:, above] = self.upper(np.log(z[above]))
        if np.any(below):
            out[:, below] = self.lower(np.log(z[below]))
        return out


def phom_eval(z: float, ode: Optional[HomogeneousODE] = None) -> Tuple[float, float]:
    """(p_hom, omega_hom) at z > 0; closed form unless an integrated solution is passed."""
    if ode is not None:
        p, omega = ode(z)[:, 0]
        return float(p), float(omega)
    p, omega, _, _ = phom_closed(z)
    return p, omega


# ============ FUNDAMENTAL MATRICES ============

class Region(str, Enum):
    ZERO_SIDE = "zero_side"
    INFINITY_SIDE = "infinity_side"


@dataclass(frozen=True)
class FundamentalMatrix:
    """Columns are (p, omega) solutions built from a pair of solutions in xi."""
    region: Region
    pair: Tuple[Callable[[float], Tuple[float, float]], Callable[[float], Tuple[float, float]]]
    wronskian: Callable[[float], float]

    def _check(self, z: float) -> float:
        inside = 0 < z < 1 if self.region == Region.ZERO_SIDE else z > 1
        if not inside:
            raise DomainError(f"z = {z} outside the {self.region.value} region")
        return xi_of(z)

    def xi_matrix(self, z: float) -> np.ndarray:
        """[[g_a, g_b], [g_a', g_b']] at xi(z)."""
        xi = self._check(z)
        (ga, dga), (gb, dgb) = self.pair[0](xi), self.pair[1](xi)
        return np.array([[ga, gb], [dga, dgb]])

    def matrix(self, z: float) -> np.ndarray:
        xi = self._check(z)
        return np.array([[1.0, 0.0], [-1.0, xi]]) @ self.xi_matrix(z)

    def inverse(self, z: float) -> np.ndarray:
        xi = self._check(z)
        v = self.xi_matrix(z)
        v_inv = np.array([[v[1, 1], -v[0, 1]], [-v[1, 0], v[0, 0]]]) / self.wronskian(xi)
        return v_inv @ np.array([[1.0, 0.0], [1.0 / xi, 1.0 / xi]])

    def numeric_wronskian(self, z: float) -> float:
        v = self.xi_matrix(z)
        return float(v[0, 0] * v[1, 1] - v[0, 1] * v[1, 0])


def fundamental_matrices() -> Tuple[FundamentalMatrix, FundamentalMatrix]:
    """(U_0 on 0 < z < 1, U_inf on z > 1)."""
    zero = FundamentalMatrix(Region.ZERO_SIDE, (g5, g6), wronskian_zero)
    infinity = FundamentalMatrix(Region.INFINITY_SIDE, (g3, g4), wronskian_infinity)
    return zero, infinity


# ============ CROSS-CHECKS ============

def cross_check_delta(ode: HomogeneousODE, z_lo: float = 0.05, z_hi: float = 20.0, n: int = 200) -> float:
    """Max discrepancy between closed-form and integrated (p_hom, omega_hom)."""
    zs = np.geomspace(z_lo, z_hi, n)
    closed = np.array([phom_closed(z)[:2] for z in zs]).T
    return float(np.max(np.abs(closed - ode(zs))))


def fit_connection_constants(ode: HomogeneousODE) -> Dict[str, float]:
    """(mu3, mu4) and (mu5, mu6) by least squares of integrated data on the fundamental columns."""
    zero, infinity = fundamental_matrices()

    def solve(fm: FundamentalMatrix, zs) -> np.ndarray:
        rows = np.vstack([fm.matrix(z) for z in zs])
        target = np.concatenate([ode(z)[:, 0] for z in zs])
        coef, *_ = np.linalg.lstsq(rows, target, rcond=None)
        return coef

    mu3, mu4 = solve(infinity, (2.0, 3.0, 5.0, 10.0))
    mu5, mu6 = solve(zero, (0.1, 0.2, 0.4))
    return {"mu3": float(mu3), "mu4": float(mu4), "mu5": float(mu5), "mu6": float(mu6)}
