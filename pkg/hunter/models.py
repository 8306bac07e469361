"""Numerical value types: states in the three formulations and piecewise radial profiles."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from hunter.errors import DomainError

Pair = Tuple[np.ndarray, np.ndarray]


# ============ STATES ============

@dataclass(frozen=True)
class RadialState:
    """(y, rho~, u~) of the self-similar system."""
    y: float
    rho: float
    u: float


@dataclass(frozen=True)
class POmegaState:
    """Mass variable p = y^2 rho and omega = u/y + 1."""
    y: float
    p: float
    omega: float


@dataclass(frozen=True)
class LogDensityState:
    """w = log rho alongside u."""
    y: float
    w: float
    u: float


class ReferenceKind(str, Enum):
    FAR_FIELD = "far_field"
    FRIEDMAN = "friedman"


class Branch(str, Enum):
    """First-order data at a sonic point."""
    HUNTER = "hunter"
    LARSON_PENSTON = "larson_penston"
    UNCLASSIFIED = "unclassified"


# ============ PROFILES ============

def fd_derivative(
    fn: Callable[[np.ndarray], Pair],
    y: np.ndarray,
    lo: float,
    hi: float,
    rel_step: float = 1e-2,
) -> Pair:
    """Fourth-order finite differences of a pair-valued function, stencils kept inside [lo, hi]."""
    y = np.asarray(y, dtype=float)
    h = np.minimum(rel_step * np.abs(y), (hi - lo) / 8.0)
    h = np.where(h > 0, h, (hi - lo) / 8.0)
    d_rho = np.empty_like(y)
    d_u = np.empty_like(y)
    forward = y - 2 * h < lo
    backward = (y + 2 * h > hi) & ~forward
    central = ~(forward | backward)

    def apply(mask: np.ndarray, weights: Tuple[int, ...], offsets: Tuple[int, ...], sign: int) -> None:
        if not np.any(mask):
            return
        ym, hm = y[mask], h[mask]
        acc_rho = np.zeros_like(ym)
        acc_u = np.zeros_like(ym)
        for w, k in zip(weights, offsets):
            rho, u = fn(ym + sign * k * hm)
            acc_rho += w * rho
            acc_u += w * u
        d_rho[mask] = sign * acc_rho / (12 * hm)
        d_u[mask] = sign * acc_u / (12 * hm)

    apply(central, (1, -8, 8, -1), (-2, -1, 1, 2), 1)
    apply(forward, (-25, 48, -36, 16, -3), (0, 1, 2, 3, 4), 1)
    # backward: mirror of the forward stencil through y - k h
    apply(backward, (-25, 48, -36, 16, -3), (0, 1, 2, 3, 4), -1)
    return d_rho, d_u


@dataclass(frozen=True)
class ProfileSegment:
    """One piece of a profile: evaluator on [lo, hi] and optional exact derivative."""
    lo: float
    hi: float
    evaluate: Callable[[np.ndarray], Pair]
    derivative: Optional[Callable[[np.ndarray], Pair]] = None
    label: str = ""
    rel_step: float = 1e-2

    def d(self, y: np.ndarray) -> Pair:
        if self.derivative is not None:
            return self.derivative(y)
        return fd_derivative(self._clipped, y, self.lo, self.hi, self.rel_step)

    def _clipped(self, y: np.ndarray) -> Pair:
        return self.evaluate(np.clip(y, self.lo, self.hi))


class RadialProfile:
    """Piecewise solution (rho~, u~) on [y_min, y_max] built from contiguous segments."""

    def __init__(self, segments: Sequence[ProfileSegment], metadata: Optional[Dict[str, Any]] = None):
        segs = sorted(segments, key=lambda s: s.lo)
        if not segs:
            raise DomainError("profile needs at least one segment")
        for left, right in zip(segs[:-1], segs[1:]):
            if abs(left.hi - right.lo) > 1e-12 * max(1.0, abs(right.lo)):
                raise DomainError(f"segments not contiguous: {left.hi} vs {right.lo}")
        self.segments: List[ProfileSegment] = list(segs)
        self.metadata: Dict[str, Any] = dict(metadata or {})
        self._starts = np.array([s.lo for s in segs])

    @property
    def y_min(self) -> float:
        return self.segments[0].lo

    @property
    def y_max(self) -> float:
        return self.segments[-1].hi

    @property
    def breakpoints(self) -> List[float]:
        """Interior seams between segments."""
        return [s.lo for s in self.segments[1:]]

    def _dispatch(self, y, method: str) -> Pair:
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        slack = 1e-12 * max(1.0, self.y_max)
        if np.any(y_arr < self.y_min - slack) or np.any(y_arr > self.y_max + slack):
            raise DomainError(f"y outside profile range [{self.y_min}, {self.y_max}]")
        y_arr = np.clip(y_arr, self.y_min, self.y_max)
        idx = np.clip(np.searchsorted(self._starts, y_arr, side="right") - 1, 0, len(self.segments) - 1)
        a = np.empty_like(y_arr)
        b = np.empty_like(y_arr)
        for j in np.unique(idx):
            mask = idx == j
            seg = self.segments[j]
            fa, fb = seg.evaluate(y_arr[mask]) if method == "value" else seg.d(y_arr[mask])
            a[mask] = fa
            b[mask] = fb
        if np.ndim(y) == 0:
            return float(a[0]), float(b[0])
        return a, b

    def evaluate(self, y) -> Pair:
        """(rho~, u~) at y."""
        return self._dispatch(y, "value")

    def derivative(self, y) -> Pair:
        """(rho~', u~') at y."""
        return self._dispatch(y, "derivative")

    def p_omega(self, y) -> Pair:
        y = np.asarray(y, dtype=float)
        rho, u = self.evaluate(y)
        return y ** 2 * rho, u / y + 1.0

    def restrict(self, lo: float, hi: float) -> "RadialProfile":
        """Same profile on [lo, hi]."""
        lo = max(lo, self.y_min)
        hi = min(hi, self.y_max)
        out = []
        for seg in self.segments:
            if seg.hi <= lo or seg.lo >= hi:
                continue
            out.append(ProfileSegment(max(seg.lo, lo), min(seg.hi, hi), seg.evaluate, seg.derivative, seg.label, seg.rel_step))
        return RadialProfile(out, self.metadata)


@dataclass(frozen=True)
class ReferenceSolution:
    """Closed-form solutions: far field (y^-2, 0) and Friedman (1/3, -2y/3)."""
    kind: ReferenceKind
    evaluator: Callable[[float], RadialState] = field(repr=False)
    values: Callable[[np.ndarray], Pair] = field(repr=False)
    derivatives: Callable[[np.ndarray], Pair] = field(repr=False)

    def profile(self, lo: float, hi: float) -> RadialProfile:
        seg = ProfileSegment(lo, hi, self.values, self.derivatives, label=self.kind.value)
        return RadialProfile([seg], {"reference": self.kind.value})
