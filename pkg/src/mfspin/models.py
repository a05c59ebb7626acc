"""Single-spin model data and exact on-axis scalar thermodynamics.

Three model families are supported:

* ``potts(q)``   -- q states embedded as hypertetrahedron vertices, so that
  (S_x, S_y) = delta - 1/q.  The scalar magnetization m parametrizes the
  occupation vector x_1 = 1/q + m, x_k = 1/q - m/(q-1) for k >= 2.
* ``cubic(r)``   -- spins are +-e_k in R^r; the scalar m is the component
  along one axis.
* ``nematic(N)`` -- spins are traceless rank-one projectors built from unit
  vectors in R^N; the scalar lambda is the top eigenvalue of the order
  parameter along omega = diag(1, -1/(N-1), ..., -1/(N-1)).

Every model exposes the on-axis cumulant function g(h) = |omega|^-2 G(h omega)
and its first two derivatives.  The scalar free energy used throughout the
package is

    phi_J(m) = -J m^2 / 2 - s(m),      s(m) = inf_h { g(h) - m h },

whose stationary points are exactly the solutions of m = g'(J m), and along
any smooth stationary branch d(phi)/dJ = -m^2/2.  The full-scale free energy
(the one entering the infrared error budget) is |omega|^2 * phi_J(m).

Additive conventions: the cubic g carries the constant -log 2 of its source
formula (g(0) = -log 2), and the Potts simplex formula `potts_phi` is raw
(potts_phi(q, J, 0) = -J/(2q) - log q).  Constants are never normalized away;
they cancel in every difference the solvers and certificates take.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy import integrate, optimize

from .errors import BoundaryMagnetization, OutOfSimplex, QuadratureFailure

__all__ = [
    "ModelSpec", "potts", "cubic", "nematic",
    "potts_phi", "potts_g", "potts_g_prime", "potts_g_second",
    "cubic_g", "cubic_g_prime", "cubic_g_second", "cubic_g_third",
    "nematic_g", "nematic_g_prime", "nematic_g_second",
    "ising_theta", "ising_rho",
    "legendre_entropy", "scalar_phi", "phi_full_scale",
]

_XLOGX_FLOOR = 1e-300


def _xlogx(x):
    """x*log(x) with the 0*log(0) = 0 convention, ndarray-safe."""
    x = np.asarray(x, dtype=float)
    out = np.where(x > 0.0, x * np.log(np.maximum(x, _XLOGX_FLOOR)), 0.0)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# model descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelSpec:
    """Which model, plus the constants entering the infrared error budget.

    n is the dimension of the spin vector space E_Omega, kappa the maximal
    squared spin norm, omega_norm_sq the squared norm of the on-axis
    direction.  The J-independent error-budget factor is n*kappa/2.
    """

    kind: str          # "potts" | "cubic" | "nematic"
    param: int         # q, r or N

    def __post_init__(self):
        if self.kind == "potts":
            if self.param < 2:
                raise ValueError("potts requires q >= 2")
        elif self.kind == "cubic":
            if self.param < 1:
                raise ValueError("cubic requires r >= 1")
        elif self.kind == "nematic":
            if self.param < 3:
                raise ValueError("nematic requires N >= 3")
        else:
            raise ValueError(f"unknown model kind {self.kind!r}")

    # -- constants -----------------------------------------------------
    @property
    def n(self) -> int:
        if self.kind == "potts":
            return self.param - 1
        if self.kind == "cubic":
            return self.param
        return self.param * (self.param - 1) // 2

    @property
    def kappa(self) -> float:
        if self.kind == "potts":
            return (self.param - 1) / self.param
        if self.kind == "cubic":
            return 1.0
        return (self.param - 1) / self.param

    @property
    def omega_norm_sq(self) -> float:
        if self.kind == "potts":
            return self.param / (self.param - 1)
        if self.kind == "cubic":
            return 1.0
        return self.param / (self.param - 1)

    @property
    def delta_factor(self) -> float:
        """n*kappa/2: multiply by I_d to get the J-independent slack factor."""
        return self.n * self.kappa / 2.0

    # -- scalar magnetization interval ----------------------------------
    def m_bounds(self) -> Tuple[float, float]:
        # nematic: eigenvalues of a convex combination of the projector spins
        # constrain the on-axis coefficient to [-1/N, (N-1)/N], which is also
        # the closure of the range of g'.
        p = self.param
        if self.kind == "potts":
            return (-1.0 / p, (p - 1.0) / p)
        if self.kind == "cubic":
            return (-1.0, 1.0)
        return (-1.0 / p, (p - 1.0) / p)

    def check_magnetization(self, m: float) -> float:
        lo, hi = self.m_bounds()
        if not (lo - 1e-12 <= m <= hi + 1e-12):
            raise OutOfSimplex(
                f"scalar magnetization {m} outside [{lo}, {hi}] for {self}")
        return float(min(max(m, lo), hi))

    # -- on-axis cumulant function --------------------------------------
    def g(self, h):
        if self.kind == "potts":
            return potts_g(self.param, h)
        if self.kind == "cubic":
            return cubic_g(self.param, h)
        return nematic_g(self.param, h)

    def g_prime(self, h):
        if self.kind == "potts":
            return potts_g_prime(self.param, h)
        if self.kind == "cubic":
            return cubic_g_prime(self.param, h)
        return nematic_g_prime(self.param, h)

    def g_second(self, h):
        if self.kind == "potts":
            return potts_g_second(self.param, h)
        if self.kind == "cubic":
            return cubic_g_second(self.param, h)
        return nematic_g_second(self.param, h)

    def g_prime_range(self) -> Tuple[float, float]:
        """Open interval swept by g' as h runs over the real line."""
        lo, hi = self.m_bounds()
        return lo, hi

    def entropy(self, m: float) -> Tuple[float, float]:
        """s(m) and the minimizing dual field h (g'(h) = m)."""
        if self.kind == "potts":
            return _potts_entropy(self.param, m)
        if self.kind == "cubic":
            return _cubic_entropy(self.param, m)
        return legendre_entropy(self.g, self.g_prime, m)

    def __str__(self):
        letter = {"potts": "q", "cubic": "r", "nematic": "N"}[self.kind]
        return f"{self.kind}({letter}={self.param})"


def potts(q: int) -> ModelSpec:
    return ModelSpec("potts", int(q))


def cubic(r: int) -> ModelSpec:
    return ModelSpec("cubic", int(r))


def nematic(N: int) -> ModelSpec:
    return ModelSpec("nematic", int(N))


# ---------------------------------------------------------------------------
# Potts: exact simplex free energy and on-axis g
# ---------------------------------------------------------------------------

def potts_occupations(q: int, m):
    """Occupation vector (x_1, x_k) of the on-axis parametrization."""
    m = np.asarray(m, dtype=float)
    return 1.0 / q + m, 1.0 / q - m / (q - 1.0)


def potts_phi(q: int, J: float, m):
    """Simplex mean-field free energy sum_k(-J/2 x_k^2 + x_k log x_k).

    Raw additive convention: potts_phi(q, J, 0) = -J/(2q) - log q.
    """
    x1, xk = potts_occupations(q, m)
    bad = (np.minimum(x1, xk) < -1e-12)
    if np.any(bad):
        raise OutOfSimplex(f"occupation left the simplex for m={m}")
    x1 = np.clip(x1, 0.0, 1.0)
    xk = np.clip(xk, 0.0, 1.0)
    val = (-J / 2.0 * (x1 ** 2 + (q - 1) * xk ** 2)
           + _xlogx(x1) + (q - 1) * _xlogx(xk))
    return val if np.ndim(m) else float(val)


def potts_g(q: int, h):
    """On-axis cumulant function (q-1)/q * log[(e^h + (q-1)e^{-h/(q-1)})/q]."""
    h = np.asarray(h, dtype=float)
    # log(e^h + (q-1) e^{-h/(q-1)}) computed via logaddexp for stability
    val = (q - 1.0) / q * (np.logaddexp(h, np.log(q - 1.0) - h / (q - 1.0))
                           - np.log(q))
    return val if val.ndim else float(val)


def potts_g_prime(q: int, h):
    """(q-1)/q * (e^t - 1)/(e^t + q - 1) with t = h q/(q-1).

    Composed as m -> potts_g_prime(q, J*m) this is the fixed-point right-hand
    side of the scalar mean-field equation.
    """
    t = np.asarray(h, dtype=float) * q / (q - 1.0)
    # (e^t - 1)/(e^t + q - 1) = (1 - e^{-t})/(1 + (q-1)e^{-t}),  stable for t>0
    with np.errstate(over="ignore"):
        em = np.exp(-np.abs(t))
    pos = (1.0 - em) / (1.0 + (q - 1.0) * em)
    neg = (em - 1.0) / (em + q - 1.0)
    val = (q - 1.0) / q * np.where(t >= 0, pos, neg)
    return val if val.ndim else float(val)


def potts_g_second(q: int, h):
    """q e^t/(e^t + q - 1)^2 with t = h q/(q-1)."""
    t = np.asarray(h, dtype=float) * q / (q - 1.0)
    with np.errstate(over="ignore"):
        em = np.exp(-np.abs(t))
    # q e^t/(e^t+q-1)^2 = q e^{-t}/(1+(q-1)e^{-t})^2 for t >= 0
    pos = q * em / (1.0 + (q - 1.0) * em) ** 2
    neg = q * em / (em + q - 1.0) ** 2
    val = np.where(t >= 0, pos, neg)
    return val if val.ndim else float(val)


def _potts_entropy(q: int, m):
    """Closed-form s(m) = (q-1)/q * (-sum x_k log x_k - log q), with h*."""
    x1, xk = potts_occupations(q, m)
    if np.minimum(x1, xk) < -1e-12:
        raise BoundaryMagnetization(f"m={m} outside the Potts interval")
    s = (q - 1.0) / q * (-_xlogx(x1) - (q - 1) * _xlogx(xk) - np.log(q))
    # dual field: g'(h) = m  <=>  e^{hq/(q-1)} = x1/xk (interior only)
    if x1 <= 0.0 or xk <= 0.0:
        return float(s), np.inf if m > 0 else -np.inf
    h = (q - 1.0) / q * np.log(x1 / xk)
    return float(s), float(h)


# ---------------------------------------------------------------------------
# cubic: closed forms
# ---------------------------------------------------------------------------

def cubic_g(r: int, h):
    """-log(2r) + log(r - 1 + cosh h); additive convention g(0) = -log 2."""
    h = np.abs(np.asarray(h, dtype=float))
    # log(r-1+cosh h) = h - log 2 + log1p((2(r-1) + e^{-h}) e^{-h})  (h >= 0)
    small = h < 30.0
    with np.errstate(over="ignore"):
        direct = np.log(r - 1.0 + np.cosh(np.where(small, h, 0.0)))
    em = np.exp(-h)
    big = h - np.log(2.0) + np.log1p((2.0 * (r - 1.0) + em) * em)
    val = np.where(small, direct, big) - np.log(2.0 * r)
    return val if val.ndim else float(val)


def cubic_g_prime(r: int, h):
    """sinh h / (r - 1 + cosh h)."""
    h = np.asarray(h, dtype=float)
    a = np.abs(h)
    small = a < 30.0
    with np.errstate(over="ignore"):
        direct = np.sinh(np.where(small, a, 0.0)) / (r - 1.0 + np.cosh(np.where(small, a, 0.0)))
    em = np.exp(-a)
    big = (1.0 - em ** 2) / (1.0 + 2.0 * (r - 1.0) * em + em ** 2)
    val = np.sign(h) * np.where(small, direct, big)
    return val if val.ndim else float(val)


def cubic_g_second(r: int, h):
    """((r-1) cosh h + 1)/(r - 1 + cosh h)^2; strictly positive."""
    a = np.abs(np.asarray(h, dtype=float))
    small = a < 30.0
    with np.errstate(over="ignore"):
        ch = np.cosh(np.where(small, a, 0.0))
        direct = ((r - 1.0) * ch + 1.0) / (r - 1.0 + ch) ** 2
    em = np.exp(-a)
    # exact rewrite in e^{-a}: 2e^{-a}((r-1)(1+e^{-2a}) + 2e^{-a}) / (...)^2
    c = r - 1.0
    big = (2.0 * em * (c * (1.0 + em ** 2) + 2.0 * em)
           / (1.0 + 2.0 * c * em + em ** 2) ** 2)
    val = np.where(small, direct, big)
    return val if val.ndim else float(val)


def cubic_g_third(r: int, h):
    """sinh h * ((r-1)^2 - (r-1) cosh h - 2)/(r-1+cosh h)^3.

    For r >= 4 this changes sign at cosh h = ((r-1)^2 - 2)/(r-1): the point
    where g' switches from convex to concave.
    """
    h = np.asarray(h, dtype=float)
    c = r - 1.0
    val = np.sinh(h) * (c * c - c * np.cosh(h) - 2.0) / (c + np.cosh(h)) ** 3
    return val if val.ndim else float(val)


def _cubic_entropy(r: int, m):
    """Closed-form Legendre data for the cubic chain.

    Inverts g'(h) = m: u = e^h solves (1-m)u^2 - 2m(r-1)u - (1+m) = 0.
    """
    if abs(m) >= 1.0:
        raise BoundaryMagnetization(f"|m|={abs(m)} at/beyond the cubic range")
    c = r - 1.0
    u = (m * c + np.sqrt(m * m * c * c + 1.0 - m * m)) / (1.0 - m)
    h = float(np.log(u))
    s = cubic_g(r, h) - m * h
    return float(s), h


# ---------------------------------------------------------------------------
# Ising building block
# ---------------------------------------------------------------------------

def ising_theta(J: float, mu):
    """Ising mean-field free energy with bias mu at coupling J.

    Theta_J(mu) = -J mu^2/4 + ((1+mu)/2) log((1+mu)/2) + ((1-mu)/2) log((1-mu)/2).
    Stationarity gives mu = tanh(J mu / 2), so the critical coupling is J = 2.
    Theta_J(0) = -log 2 at every J; endpoints use 0*log 0 = 0.
    """
    mu = np.asarray(mu, dtype=float)
    if np.any(np.abs(mu) > 1.0 + 1e-12):
        raise ValueError("|mu| must not exceed 1")
    mu = np.clip(mu, -1.0, 1.0)
    val = (-J / 4.0 * mu ** 2
           + _xlogx((1.0 + mu) / 2.0) + _xlogx((1.0 - mu) / 2.0))
    return val if val.ndim else float(val)


def ising_rho(J: float) -> float:
    """Largest non-negative solution of rho = tanh(J rho / 2); 0 for J <= 2."""
    if J < 0:
        raise ValueError("J must be non-negative")
    if J <= 2.0:
        return 0.0
    f = lambda rho: np.tanh(J * rho / 2.0) - rho
    return float(optimize.brentq(f, 1e-12, 1.0 - 1e-15, xtol=1e-14))


# ---------------------------------------------------------------------------
# nematic: quadrature-backed g
# ---------------------------------------------------------------------------

@lru_cache(maxsize=200000)
def _nematic_raw_moments(N: int, h: float):
    """(log of shifted Z, shift, <x^2>, <x^4>) under the tilted sphere marginal.

    Weight (1-x^2)^((N-3)/2) exp(a x^2) on [0,1], a = h N/(N-1).  The whole
    integrand is rescaled by its maximum so the quadrature stays in range even
    for a ~ thousands (large-N scaling runs).
    """
    ex = (N - 3.0) / 2.0
    a = h * N / (N - 1.0)

    if ex > 0.0:
        def logw(x):
            return ex * np.log1p(-(x * x)) + a * x * x
        xm = np.sqrt(1.0 - ex / a) if a > ex else 0.0
    else:  # N == 3: flat weight
        def logw(x):
            return a * x * x
        xm = 1.0 - 1e-13 if a > 0 else 0.0

    M = logw(min(xm, 1.0 - 1e-13))
    pts = [min(max(xm, 1e-12), 1.0 - 1e-12)]
    kw = dict(epsabs=1e-13, epsrel=1e-12, limit=500, points=pts)
    with np.errstate(over="ignore", under="ignore"):
        z0, e0 = integrate.quad(lambda x: np.exp(logw(x) - M), 0.0, 1.0, **kw)
        z2, e2 = integrate.quad(lambda x: x * x * np.exp(logw(x) - M), 0.0, 1.0, **kw)
        z4, e4 = integrate.quad(lambda x: x ** 4 * np.exp(logw(x) - M), 0.0, 1.0, **kw)
    if z0 <= 0.0 or e0 > 1e-7 * z0 + 1e-13:
        raise QuadratureFailure(f"nematic moment quadrature failed at N={N}, h={h}")
    return np.log(z0) + M, z2 / z0, z4 / z0


def nematic_g(N: int, h: float) -> float:
    """(N-1)/N * log of the tilted/untilted partition ratio, g(0) = 0."""
    logzt, _, _ = _nematic_raw_moments(N, float(h))
    logz0, _, _ = _nematic_raw_moments(N, 0.0)
    a = h * N / (N - 1.0)
    return (N - 1.0) / N * (logzt - logz0 - a / N)


def nematic_g_prime(N: int, h: float) -> float:
    """<x^2>_h - 1/N: the right-hand side of the scalar mean-field equation."""
    _, m2, _ = _nematic_raw_moments(N, float(h))
    return m2 - 1.0 / N


def nematic_g_second(N: int, h: float) -> float:
    """N/(N-1) * Var_h(x^2), by differentiation under the integral."""
    _, m2, m4 = _nematic_raw_moments(N, float(h))
    return N / (N - 1.0) * (m4 - m2 * m2)


# ---------------------------------------------------------------------------
# Legendre machinery and the scalar free energy
# ---------------------------------------------------------------------------

def legendre_entropy(g: Callable[[float], float],
                     g_prime: Callable[[float], float],
                     m: float,
                     search_interval: Tuple[float, float] = (-1.0, 1.0),
                     bracket_growth: float = 2.0,
                     h_cap: float = 1e6) -> Tuple[float, float]:
    """s(m) = inf_h {g(h) - m h} by solving the convex dual equation g'(h) = m.

    Returns (s, argmin_h).  The initial bracket is expanded geometrically up
    to |h| = h_cap; BoundaryMagnetization is raised when m is outside the
    reachable range of g' (there s = -infinity).
    """
    lo, hi = float(search_interval[0]), float(search_interval[1])
    if lo >= hi:
        lo, hi = -1.0, 1.0
    flo, fhi = g_prime(lo) - m, g_prime(hi) - m
    while flo > 0.0:  # need smaller h
        lo = lo * bracket_growth if lo < -1e-3 else lo - 1.0
        if lo < -h_cap:
            raise BoundaryMagnetization(f"m={m} below the range of g'")
        flo = g_prime(lo) - m
        if not np.isfinite(flo):
            raise BoundaryMagnetization(f"m={m} below the range of g'")
    while fhi < 0.0:
        hi = hi * bracket_growth if hi > 1e-3 else hi + 1.0
        if hi > h_cap:
            raise BoundaryMagnetization(f"m={m} above the range of g'")
        fhi = g_prime(hi) - m
        if not np.isfinite(fhi):
            raise BoundaryMagnetization(f"m={m} above the range of g'")
    if flo == 0.0:
        h = lo
    elif fhi == 0.0:
        h = hi
    else:
        h = optimize.brentq(lambda x: g_prime(x) - m, lo, hi, xtol=1e-13, rtol=8.9e-16)
    return float(g(h) - m * h), float(h)


def scalar_phi(model: ModelSpec, J: float, m: float) -> float:
    """Scalar free energy phi_J(m) = -J m^2/2 - s(m).

    Normalized so that stationary points solve m = g'(Jm) and
    d(phi)/dJ = -m^2/2 along stationary branches.  For Potts this delegates
    to the exact simplex closed form (no numerical Legendre transform).
    """
    model.check_magnetization(m)
    s, _ = model.entropy(m)
    return -J * m * m / 2.0 - s


def phi_full_scale(model: ModelSpec, J: float, m: float) -> float:
    """Free energy on the full-Phi scale, |omega|^2 * phi_J(m).

    This is the scale on which the infrared error budget J * n * kappa/2 * I_d
    lives; for Potts it differs from `potts_phi` only by an m-independent
    constant, so differences at fixed J agree exactly.
    """
    return model.omega_norm_sq * scalar_phi(model, J, m)
