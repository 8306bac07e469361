"""Pydantic schemas for every JSON artifact the CLI writes."""
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from hunter.models import Branch


# ============ CONSTANTS SCHEMAS ============

class ConstantsRead(BaseModel):
    """Connection constants of the homogeneous solution."""
    theta0: float
    mu3: float
    mu4: float
    mu5: float
    mu6: float
    c1: float
    d1: float
    cross_check_delta: float
    mu_fit_deltas: Dict[str, float]  # |least-squares fit - closed form| per mu
    model_config = ConfigDict(from_attributes=True)


class IsothermalFitsRead(BaseModel):
    """Fitted amplitudes and phases of the isothermal traces."""
    c2: float
    d2: float
    c3: float
    d3: float
    c4: float
    d4: float
    fit_residuals: Dict[str, float]
    window: Tuple[float, float]
    y_max: float
    kernel_relation: Dict[str, float]  # c3 vs sqrt(2) c2, d3 vs d2 + shift
    wronskian_error: float
    model_config = ConfigDict(from_attributes=True)


# ============ MATCH SCHEMAS ============

class MatchRow(BaseModel):
    """One k of the matched family, or the reason it failed."""
    k: int
    lambda_k: Optional[float] = None
    epsilon_k: Optional[float] = None
    y_star: Optional[float] = None
    intersections: Optional[int] = None
    intersection_offset: Optional[int] = None
    sonic_count: Optional[int] = None
    residual_max: Optional[float] = None
    predicted_epsilon: Optional[float] = None
    inflated: Optional[bool] = None
    failure: Optional[str] = None  # e.g. "NoBracket"
    message: Optional[str] = None


class MatchSummary(BaseModel):
    """Summary of a match run."""
    y0: float
    y0_deviation: Optional[float] = None  # None when y0 was given explicitly
    rows: List[MatchRow]
    found: int


class LPSummary(BaseModel):
    """Larson-Penston shooting result."""
    y_star: float
    rho0: float  # central density of the closed profile
    seam_u: float  # |u jump|/y where the origin series takes over
    far_field_p: float
    far_field_u: float
    intersections: int
    sonic_count: int
    residual_max: float
    u_sign: int  # sign of u on the profile


# ============ VERIFICATION SCHEMAS ============

class SonicPointRead(BaseModel):
    y: float
    branch: Branch
    degenerate: bool
    residual: float
    model_config = ConfigDict(from_attributes=True)


class VerificationReportRead(BaseModel):
    """Serialized VerificationReport."""
    residual_max: float
    intersection_count: int
    tail_certified: bool
    sonic_points: List[SonicPointRead]
    velocity_bounds: Optional[Tuple[float, float]] = None
    fits: Dict[str, Dict[str, float]]
    norms: Dict[str, Dict[str, float]]
    checks: Dict[str, bool]
    passed: bool
    model_config = ConfigDict(from_attributes=True)


class ProfileSidecar(BaseModel):
    """JSON written next to every profile CSV."""
    kind: str
    y_star: Optional[float] = None
    y0: Optional[float] = None
    epsilon: Optional[float] = None
    lam: Optional[float] = None
    k: Optional[int] = None
    intersections: Optional[int] = None
    sonic_count: Optional[int] = None
    residual_max: Optional[float] = None


# ============ SWEEP SCHEMAS ============

class SweepSummary(BaseModel):
    """G on a log-lambda grid and its measured period."""
    y0: float
    points: int
    skipped: int
    period: Optional[float] = None
    period_uncertainty: Optional[float] = None
