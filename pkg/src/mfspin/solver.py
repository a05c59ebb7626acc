"""Scalar mean-field equation: roots, stability, branches, transition point.

All solutions of m = g'(J m) at fixed J are located by a sign-change scan
refined with bracketing bisection; a root m is dynamically stable (candidate
local minimum of the scalar free energy) iff J g''(J m) < 1.  Branches are
traced over J with continuation seeding, and the first-order transition point
J_MF is located by bisecting the degeneracy gap

    dphi(J) = phi_J(m+(J)) - phi_J(0),

which is strictly decreasing in J on a valid bracket because
d(phi)/dJ = -m^2/2 along stationary branches.  On a stationary branch the
free energy has the dual closed form phi_J(m) = (J/2) m^2 - g(J m) + g(0) -
phi_J(0)-offset, which is what the bisection evaluates (no numerical Legendre
transform in the inner loop).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy import optimize

from .errors import BracketInvalid, NoAsymmetricBranch, ScanTooCoarse
from .models import ModelSpec

__all__ = [
    "BranchPoint", "BranchSet", "TransitionPoint", "TraceResult",
    "solve_branches", "trace_max_branch", "trace_global_branch",
    "find_transition", "barrier_height",
]

STABLE = "stable"
UNSTABLE = "unstable"

_ROOT_XTOL = 1e-12
_MERGE_TOL = 1e-8
_TIE_BAND = 1e-9


@dataclass(frozen=True)
class BranchPoint:
    """One solution of the scalar mean-field equation at coupling J."""

    J: float
    m: float
    stability: str          # "stable" iff J g''(Jm) < 1
    phi: float              # scalar free energy phi_J(m)
    marginal: bool = False  # |J g''(Jm) - 1| inside the tie tolerance band

    def as_dict(self):
        return {"J": self.J, "m": self.m, "stability": self.stability,
                "phi": self.phi}


@dataclass
class BranchSet:
    """All mean-field-equation roots found at one coupling."""

    model: ModelSpec
    J: float
    points: List[BranchPoint]

    def stable(self, nonnegative: bool = False) -> List[BranchPoint]:
        out = [p for p in self.points if p.stability == STABLE]
        if nonnegative:
            out = [p for p in out if p.m >= -_MERGE_TOL]
        return out

    def unstable(self) -> List[BranchPoint]:
        return [p for p in self.points if p.stability == UNSTABLE]

    def max_stable_root(self) -> Optional[BranchPoint]:
        cand = self.stable()
        return max(cand, key=lambda p: p.m) if cand else None

    def global_minimum(self) -> Optional[BranchPoint]:
        """Stable root of lowest phi, restricted to the physical m >= 0 family."""
        cand = self.stable(nonnegative=True)
        return min(cand, key=lambda p: p.phi) if cand else None


@dataclass(frozen=True)
class TransitionPoint:
    """Coupling at which the symmetric and asymmetric minima are degenerate."""

    J_MF: float
    m_c: float
    degeneracy_residual: float

    def as_dict(self):
        return {"J_MF": self.J_MF, "m_c": self.m_c,
                "degeneracy_residual": self.degeneracy_residual}


@dataclass
class TraceResult:
    """Branch values over a J grid, with spinodal bookkeeping.

    J1 is the first grid J at which a positive stable root exists; J2 the last
    grid J at which m = 0 is stable.  ``jumps`` lists grid indices where the
    traced magnetization moved by more than ``jump_threshold`` between
    neighbouring J points (reported, never asserted away).
    """

    model: ModelSpec
    points: List[BranchPoint]
    J1: Optional[float] = None
    J2: Optional[float] = None
    jumps: List[int] = field(default_factory=list)


def _phi_on_branch(model: ModelSpec, J: float, m: float) -> float:
    """phi_J(m) for a stationary m, via the dual form (J/2)m^2 - g(Jm)."""
    return J * m * m / 2.0 - model.g(J * m)


def _classify(model: ModelSpec, J: float, m: float) -> Tuple[str, bool]:
    crit = J * model.g_second(J * m)
    marginal = abs(crit - 1.0) < _TIE_BAND
    return (STABLE if crit < 1.0 else UNSTABLE), marginal


def solve_branches(model: ModelSpec, J: float,
                   scan_resolution: int = 400) -> BranchSet:
    """Find all roots of m = g'(J m) on the model's scalar interval.

    Sign changes on the scan grid are refined by bisection (brentq) to well
    below 1e-10 in m; roots closer than two grid cells trigger a
    ScanTooCoarse warning.  m = 0 is always included when g'(0) = 0.
    """
    if J < 0:
        raise ValueError("J must be non-negative")
    lo, hi = model.m_bounds()
    eps = 1e-9 * (hi - lo)
    grid = np.linspace(lo + eps, hi - eps, int(scan_resolution))
    if model.kind == "nematic":
        f_vals = np.array([model.g_prime(J * m) - m for m in grid])
    else:
        f_vals = model.g_prime(J * grid) - grid

    f = lambda m: model.g_prime(J * m) - m
    roots: List[float] = []
    for i in range(len(grid) - 1):
        a, b = grid[i], grid[i + 1]
        fa, fb = f_vals[i], f_vals[i + 1]
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0.0:
            roots.append(float(optimize.brentq(f, a, b, xtol=_ROOT_XTOL,
                                               rtol=8.9e-16)))
    if f_vals[-1] == 0.0:
        roots.append(float(grid[-1]))

    # the symmetric solution exists whenever g'(0) = 0; the grid straddles it
    if abs(model.g_prime(0.0)) < 1e-14 and not any(abs(r) < _MERGE_TOL for r in roots):
        roots.append(0.0)

    roots.sort()
    merged: List[float] = []
    for r in roots:
        if merged and abs(r - merged[-1]) < _MERGE_TOL:
            continue
        merged.append(r)
    cell = (hi - lo) / max(scan_resolution - 1, 1)
    for r1, r2 in zip(merged, merged[1:]):
        if r2 - r1 < 2.0 * cell:
            warnings.warn(f"roots {r1:.6g} and {r2:.6g} closer than two grid "
                          f"cells at J={J}; raise scan_resolution",
                          ScanTooCoarse)
            break

    pts = []
    for r in merged:
        stab, marg = _classify(model, J, r)
        pts.append(BranchPoint(J=float(J), m=r, stability=stab,
                               phi=_phi_on_branch(model, J, r),
                               marginal=marg))
    return BranchSet(model=model, J=float(J), points=pts)


def _refine_near(model: ModelSpec, J: float, seed: float,
                 width: float) -> Optional[float]:
    """Locate a root of m = g'(Jm) near ``seed`` by expanding a local bracket."""
    lo_b, hi_b = model.m_bounds()
    f = lambda m: model.g_prime(J * m) - m
    w = max(width, 1e-6)
    for _ in range(12):
        a = max(seed - w, lo_b + 1e-12)
        b = min(seed + w, hi_b - 1e-12)
        fa, fb = f(a), f(b)
        if fa == 0.0:
            return a
        if fb == 0.0:
            return b
        if fa * fb < 0.0:
            return float(optimize.brentq(f, a, b, xtol=_ROOT_XTOL, rtol=8.9e-16))
        w *= 2.0
        if a <= lo_b + 1e-12 and b >= hi_b - 1e-12:
            break
    return None


def max_stable_root(model: ModelSpec, J: float, seed: Optional[float] = None,
                    scan_resolution: int = 400) -> Optional[BranchPoint]:
    """Largest stable root at J; a seed enables cheap local continuation."""
    if seed is not None and seed > _MERGE_TOL:
        r = _refine_near(model, J, seed, width=0.02 * max(abs(seed), 0.1))
        if r is not None and r > _MERGE_TOL:
            stab, marg = _classify(model, J, r)
            if stab == STABLE:
                return BranchPoint(J=float(J), m=float(r), stability=stab,
                                   phi=_phi_on_branch(model, J, r),
                                   marginal=marg)
    return solve_branches(model, J, scan_resolution).max_stable_root()


def trace_max_branch(model: ModelSpec, J_range: Tuple[float, float],
                     steps: int, scan_resolution: int = 400,
                     jump_threshold: float = 0.1) -> TraceResult:
    """Largest stable root m_MF(J) over a J grid, with continuation seeding.

    A seeded solve that lands further than 10x the previous step's |dm| from
    its seed is treated as a basin escape and restarted from a dense scan.
    """
    Js = np.linspace(J_range[0], J_range[1], int(steps))
    pts: List[BranchPoint] = []
    J1 = None
    J2 = None
    jumps: List[int] = []
    seed = None
    prev_dm = None
    for i, J in enumerate(Js):
        bp = None
        if seed is not None:
            bp = max_stable_root(model, float(J), seed=seed,
                                 scan_resolution=scan_resolution)
            if (bp is not None and prev_dm is not None
                    and abs(bp.m - seed) > 10.0 * max(prev_dm, 1e-6)):
                bp = solve_branches(model, float(J), scan_resolution).max_stable_root()
        else:
            bp = solve_branches(model, float(J), scan_resolution).max_stable_root()
        if bp is None:  # no stable root at all (cannot happen away from J2)
            bp = BranchPoint(J=float(J), m=0.0, stability=UNSTABLE,
                             phi=_phi_on_branch(model, float(J), 0.0))
        pts.append(bp)
        if J1 is None and bp.m > _MERGE_TOL and bp.stability == STABLE:
            J1 = float(J)
        zero_stab, _ = _classify(model, float(J), 0.0)
        if zero_stab == STABLE:
            J2 = float(J)
        if i > 0:
            dm = abs(bp.m - pts[-2].m)
            if dm > jump_threshold:
                jumps.append(i)
            prev_dm = dm
        seed = bp.m if bp.m > _MERGE_TOL else None
    return TraceResult(model=model, points=pts, J1=J1, J2=J2, jumps=jumps)


def trace_global_branch(model: ModelSpec, J_range: Tuple[float, float],
                        steps: int, scan_resolution: int = 400,
                        jump_threshold: float = 0.1) -> TraceResult:
    """Magnetization of the global scalar minimizer over a J grid."""
    Js = np.linspace(J_range[0], J_range[1], int(steps))
    pts: List[BranchPoint] = []
    jumps: List[int] = []
    for i, J in enumerate(Js):
        bs = solve_branches(model, float(J), scan_resolution)
        bp = bs.global_minimum()
        if bp is None:
            bp = BranchPoint(J=float(J), m=0.0, stability=UNSTABLE,
                             phi=_phi_on_branch(model, float(J), 0.0))
        pts.append(bp)
        if i > 0 and abs(bp.m - pts[-2].m) > jump_threshold:
            jumps.append(i)
    return TraceResult(model=model, points=pts, jumps=jumps)


def _degeneracy_gap(model: ModelSpec, J: float,
                    seed: Optional[float]) -> Tuple[Optional[float], Optional[float]]:
    """(phi(m+) - phi(0), m+) via the dual closed form; (None, None) if no m+."""
    bp = max_stable_root(model, J, seed=seed)
    if bp is None or bp.m <= _MERGE_TOL:
        return None, None
    m = bp.m
    gap = (J / 2.0) * m * m - model.g(J * m) + model.g(0.0)
    return gap, m


def find_transition(model: ModelSpec, bracket: Tuple[float, float],
                    tol_J: float = 1e-10) -> TransitionPoint:
    """Locate J_MF by bisecting dphi(J) = phi_J(m+) - phi_J(0) on a bracket.

    Requires the asymmetric stable branch to exist and lie above phi(0) at
    J_lo, and below at J_hi; dphi is strictly decreasing in J there, so the
    root is unique.
    """
    J_lo, J_hi = float(bracket[0]), float(bracket[1])
    if not (0 <= J_lo < J_hi):
        raise BracketInvalid(f"bad bracket {bracket}")
    gap_lo, m_lo = _degeneracy_gap(model, J_lo, seed=None)
    if gap_lo is None:
        raise NoAsymmetricBranch(
            f"no nonzero stable branch at J_lo={J_lo} for {model}")
    gap_hi, m_hi = _degeneracy_gap(model, J_hi, seed=m_lo)
    if gap_hi is None:
        raise NoAsymmetricBranch(
            f"no nonzero stable branch at J_hi={J_hi} for {model}")
    if not (gap_lo > 0.0 > gap_hi):
        raise BracketInvalid(
            f"dphi does not straddle 0 on {bracket}: ({gap_lo}, {gap_hi})")

    seed = m_lo
    a, b = J_lo, J_hi
    gap_mid, m_mid = gap_lo, m_lo
    while b - a > tol_J:
        mid = 0.5 * (a + b)
        gap_mid, m_mid = _degeneracy_gap(model, mid, seed=seed)
        if gap_mid is None:
            # asymmetric branch vanished: transition lies above
            a = mid
            continue
        seed = m_mid
        if gap_mid > 0.0:
            a = mid
        else:
            b = mid
    J_star = 0.5 * (a + b)
    gap, m_c = _degeneracy_gap(model, J_star, seed=seed)
    if gap is None:
        gap, m_c = gap_mid, m_mid
    return TransitionPoint(J_MF=float(J_star), m_c=float(m_c),
                           degeneracy_residual=float(gap))


def barrier_height(model: ModelSpec, J: float,
                   scan_resolution: int = 800) -> float:
    """Barrier Delta(J) on the full-Phi scale; 0 when a single minimum.

    Delta(J) is the gap between the unstable ridge separating the symmetric
    (smallest nonnegative) and asymmetric (largest) stable minima and the
    HIGHER of the two minima, multiplied by |omega|^2 to live on the same
    scale as the infrared error budget.
    """
    bs = solve_branches(model, J, scan_resolution)
    mins = bs.stable(nonnegative=True)
    if len(mins) < 2:
        return 0.0
    mins = sorted(mins, key=lambda p: p.m)
    p_lo, p_hi = mins[0], mins[-1]
    ridge = [p for p in bs.unstable() if p_lo.m + _MERGE_TOL < p.m < p_hi.m - _MERGE_TOL]
    if not ridge:
        return 0.0
    phi_sep = max(p.phi for p in ridge)
    delta = phi_sep - max(p_lo.phi, p_hi.phi)
    return float(model.omega_norm_sq * max(delta, 0.0))
