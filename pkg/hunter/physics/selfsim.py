"""The self-similar Euler-Poisson system in its three formulations.

Radial form (y, rho, u):

    [[u+y, rho], [1/rho, u+y]] (rho', u')^T + (2 rho (u+y)/y, 2 rho (u+y))^T = 0

with determinant D = (u+y)^2 - 1 vanishing at sonic points. The mass form uses
p = y^2 rho and omega = u/y + 1; the log-density form uses w = log rho.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from hunter.errors import DomainError, SonicDegeneracy
from hunter.models import (
    LogDensityState,
    POmegaState,
    RadialProfile,
    RadialState,
    ReferenceKind,
    ReferenceSolution,
)

logger = logging.getLogger(__name__)

DEFAULT_GUARD = 1e-8


# ============ RIGHT-HAND SIDES ============

def determinant(state: RadialState) -> float:
    v = state.u + state.y
    return v * v - 1.0


def rhs(state: RadialState, guard: float = DEFAULT_GUARD) -> Tuple[float, float]:
    """(rho', u') from the inverted 2x2 system."""
    y, rho, u = state.y, state.rho, state.u
    if y <= 0 or rho <= 0:
        raise DomainError(f"inadmissible state y={y}, rho={rho}")
    v = u + y
    det = determinant(state)
    if abs(det) < guard:
        raise SonicDegeneracy(f"|D|={abs(det):.3e} below guard at y={y}")
    drho = -(2.0 * rho * v / det) * (v / y - rho)
    du = -(2.0 * v / det) * (rho * v - 1.0 / y)
    return drho, du


def rhs_p_omega(state: POmegaState, guard: float = DEFAULT_GUARD) -> Tuple[float, float]:
    """(p', omega') from the mass form

        (p omega y)' - p = 0
        omega (y (omega - 1))' + p'/(y p) + 2 (p omega - 1)/y^2 = 0
    """
    y, p, omega = state.y, state.p, state.omega
    if y <= 0 or p <= 0:
        raise DomainError(f"inadmissible state y={y}, p={p}")
    matrix = np.array([[omega * y, p * y], [1.0 / (y * p), omega * y]])
    if abs(np.linalg.det(matrix)) < guard:
        raise SonicDegeneracy(f"sonic point at y={y}")
    b = np.array([p - p * omega, -omega * (omega - 1.0) - 2.0 * (p * omega - 1.0) / y ** 2])
    dp, domega = np.linalg.solve(matrix, b)
    return float(dp), float(domega)


def log_p_omega_slopes(s2, p, omega):
    """(d log p/dt, d omega/dt) where s2 = inertia e^{2t}; works on arrays."""
    det = s2 * omega * omega - 1.0
    return (
        2.0 - 2.0 * omega * (s2 * omega - p) / det,
        -2.0 * omega * (p * omega - 1.0) / det - (omega - 1.0),
    )


def log_p_omega_field(inertia: float = 1.0, guard: float = DEFAULT_GUARD) -> Callable:
    """Vector field for (log p, omega) in t = log(y / scale).

    inertia is scale^2: 1 for the physical system, lambda^2 for the interior
    system in x = y / lambda, 0 for the isothermal limit.
    """
    def field(t: float, state: np.ndarray) -> np.ndarray:
        ell, omega = state[0], state[1]
        s2 = inertia * math.exp(2.0 * t)
        if abs(s2 * omega * omega - 1.0) < guard:
            raise SonicDegeneracy(f"sonic point reached at t={t}")
        return np.array(log_p_omega_slopes(s2, math.exp(ell), omega))

    return field


# ============ FORMULATION CHANGES ============

def to_p_omega(state: RadialState) -> POmegaState:
    if state.y <= 0:
        raise DomainError(f"y must be positive, got {state.y}")
    return POmegaState(y=state.y, p=state.y ** 2 * state.rho, omega=state.u / state.y + 1.0)


def from_p_omega(state: POmegaState) -> RadialState:
    if state.y <= 0:
        raise DomainError(f"y must be positive, got {state.y}")
    return RadialState(y=state.y, rho=state.p / state.y ** 2, u=state.y * (state.omega - 1.0))


def to_log_density(state: RadialState) -> LogDensityState:
    if state.rho <= 0:
        raise DomainError(f"rho must be positive, got {state.rho}")
    return LogDensityState(y=state.y, w=math.log(state.rho), u=state.u)


def from_log_density(state: LogDensityState) -> RadialState:
    return RadialState(y=state.y, rho=math.exp(state.w), u=state.u)


def rhs_via_p_omega(state: RadialState) -> Tuple[float, float]:
    """rhs computed through the mass form and converted back."""
    dp, domega = rhs_p_omega(to_p_omega(state))
    y = state.y
    return dp / y ** 2 - 2.0 * state.rho / y, (state.u / y) + y * domega


# ============ REFERENCE SOLUTIONS ============

def far_field() -> ReferenceSolution:
    """(y^-2, 0)."""
    return ReferenceSolution(
        kind=ReferenceKind.FAR_FIELD,
        evaluator=lambda y: RadialState(y=y, rho=y ** -2, u=0.0),
        values=lambda y: (np.asarray(y, dtype=float) ** -2, np.zeros_like(np.asarray(y, dtype=float))),
        derivatives=lambda y: (-2.0 * np.asarray(y, dtype=float) ** -3, np.zeros_like(np.asarray(y, dtype=float))),
    )


def friedman() -> ReferenceSolution:
    """(1/3, -2y/3)."""
    return ReferenceSolution(
        kind=ReferenceKind.FRIEDMAN,
        evaluator=lambda y: RadialState(y=y, rho=1.0 / 3.0, u=-2.0 * y / 3.0),
        values=lambda y: (np.full_like(np.asarray(y, dtype=float), 1.0 / 3.0), -2.0 * np.asarray(y, dtype=float) / 3.0),
        derivatives=lambda y: (np.zeros_like(np.asarray(y, dtype=float)), np.full_like(np.asarray(y, dtype=float), -2.0 / 3.0)),
    )


# ============ RESIDUALS ============

def residual_terms(y, rho, u, drho, du) -> Tuple[Tuple[np.ndarray, ...], Tuple[np.ndarray, ...]]:
    """Individual terms of both rows; their sums are the residuals."""
    row1 = (y * drho, 2.0 * rho, drho * u + rho * du, 2.0 * rho * u / y)
    row2 = (drho / rho, (u + y) * du, 2.0 * rho * (u + y))
    return row1, row2


def residual(profile: RadialProfile, y) -> Tuple[np.ndarray, np.ndarray]:
    """r1 = y rho' + 2 rho + div(rho u), r2 = rho'/rho + (u+y) u' + 2 rho (u+y)."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("residual needs y > 0")
    rho, u = profile.evaluate(y)
    drho, du = profile.derivative(y)
    row1, row2 = residual_terms(y, rho, u, drho, du)
    return sum(row1), sum(row2)


def relative_residual(profile: RadialProfile, y) -> np.ndarray:
    """Each row's residual divided by the sum of its term magnitudes; max of both rows."""
    y = np.asarray(y, dtype=float)
    rho, u = profile.evaluate(y)
    drho, du = profile.derivative(y)
    row1, row2 = residual_terms(y, rho, u, drho, du)
    r1 = np.abs(sum(row1)) / (sum(np.abs(t) for t in row1) + 1e-300)
    r2 = np.abs(sum(row2)) / (sum(np.abs(t) for t in row2) + 1e-300)
    return np.maximum(r1, r2)


# ============ LINEARIZATION AT THE FAR FIELD ============

@dataclass(frozen=True)
class FarFieldResidue:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    theta0: float

    @property
    def frequency(self) -> float:
        return float(abs(self.eigenvalues[0].imag))


def linearized_farfield_residue() -> FarFieldResidue:
    """Residue (-2, -2; 2, 1) of the linearization about (p, omega) = (1, 1).

    theta0 is the phase of the omega component relative to the p component of
    the eigenvector with positive imaginary eigenvalue.
    """
    matrix = np.array([[-2.0, -2.0], [2.0, 1.0]])
    eigenvalues, eigenvectors = np.linalg.eig(matrix)
    order = np.argsort(-eigenvalues.imag)
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]
    v = eigenvectors[:, 0]
    theta0 = float(np.mod(np.angle(v[1] / v[0]), 2 * np.pi))
    logger.debug(f"far-field residue eigenvalues {eigenvalues}, theta0={theta0:.6f}")
    return FarFieldResidue(matrix=matrix, eigenvalues=eigenvalues, eigenvectors=eigenvectors, theta0=theta0)


THETA0 = float(math.atan(math.sqrt(7.0) / 3.0) + math.pi)
