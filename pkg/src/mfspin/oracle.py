"""Brute-force minimizers over the full (unreduced) variational domains.

These oracles gate the correctness of the one-component reductions used
everywhere else: they search gridded versions of the full Potts simplex, the
cubic (occupation, bias) domain and the nematic dual (traceless diagonal
field) space, with no symmetry assumptions beyond the domains themselves.
They run at coarse resolution by design; tolerances scale like 1/resolution.

Deterministic by construction: grids are enumerated in lexicographic order,
ties in the minimum resolve to the first (lexicographically smallest) grid
index, and the nematic sphere sampling uses a fixed-seed scrambled Sobol
sequence, so outputs are reproducible bit-for-bit for fixed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import optimize
from scipy.special import logsumexp
from scipy.stats import qmc
import warnings

from .errors import BudgetExceeded, SamplingNoise
from .models import _xlogx, ising_theta

__all__ = ["potts_fullspace_min", "cubic_fullspace_min", "nematic_dual_min",
           "OracleResult"]

_MAX_GRID_POINTS = 3_000_000


@dataclass
class OracleResult:
    """Minimizer found by a brute-force grid search plus local polish."""

    minimizer: np.ndarray      # simplex point / (y, mu) stack / diagonal field
    value: float
    grid_value: float          # before polish
    meta: dict

    def as_dict(self):
        return {"minimizer": np.asarray(self.minimizer).tolist(),
                "value": self.value, "grid_value": self.grid_value,
                "meta": self.meta}


def _compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of length `parts` summing to `total`,
    in lexicographic order; shape (n, parts)."""
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    if parts == 2:
        a = np.arange(total + 1, dtype=np.int64)
        return np.stack([a, total - a], axis=1)
    if parts == 3:
        sizes = np.arange(total + 1, 0, -1, dtype=np.int64)
        a = np.repeat(np.arange(total + 1, dtype=np.int64), sizes)
        b = np.concatenate([np.arange(total - l + 1, dtype=np.int64)
                            for l in range(total + 1)])
        return np.stack([a, b, total - a - b], axis=1)
    blocks = []
    for lead in range(total + 1):
        rest = _compositions(total - lead, parts - 1)
        lead_col = np.full((rest.shape[0], 1), lead, dtype=np.int64)
        blocks.append(np.hstack([lead_col, rest]))
    return np.vstack(blocks)


def _n_compositions(total: int, parts: int) -> int:
    from math import comb
    return comb(total + parts - 1, parts - 1)


# ---------------------------------------------------------------------------
# Potts simplex
# ---------------------------------------------------------------------------

def potts_fullspace_min(q: int, J: float, resolution: int = 200,
                        polish: bool = True) -> OracleResult:
    """Minimize sum_k(-J/2 x_k^2 + x_k log x_k) over the full q-simplex."""
    if q > 6:
        raise BudgetExceeded(f"exhaustive simplex search limited to q <= 6, got {q}")
    if resolution < 20:
        raise ValueError("resolution must be at least 20")
    if _n_compositions(resolution, q) > _MAX_GRID_POINTS:
        raise BudgetExceeded(
            f"simplex grid would have {_n_compositions(resolution, q)} points")

    comps = _compositions(resolution, q)
    xs = np.arange(resolution + 1) / resolution
    t_energy = -J / 2.0 * xs ** 2
    t_entropy = _xlogx(xs)
    vals = (t_energy[comps] + t_entropy[comps]).sum(axis=1)
    i0 = int(np.argmin(vals))
    x0 = comps[i0] / resolution
    grid_val = float(vals[i0])

    x_star, val = x0, grid_val
    if polish:
        def fun(x):
            return float(np.sum(-J / 2.0 * x ** 2 + _xlogx(np.clip(x, 0, 1))))
        res = optimize.minimize(
            fun, x0, method="SLSQP",
            bounds=[(0.0, 1.0)] * q,
            constraints=[{"type": "eq", "fun": lambda x: np.sum(x) - 1.0}],
            options={"ftol": 1e-14, "maxiter": 300})
        if res.success and res.fun <= grid_val + 1e-12:
            x_star, val = np.clip(res.x, 0.0, 1.0), float(res.fun)
    return OracleResult(minimizer=np.asarray(x_star), value=val,
                        grid_value=grid_val,
                        meta={"q": q, "J": J, "resolution": resolution})


# ---------------------------------------------------------------------------
# cubic (occupations, biases)
# ---------------------------------------------------------------------------

def cubic_fullspace_min(r: int, J: float, resolution: int = 200,
                        mu_resolution: Optional[int] = None,
                        polish: bool = True) -> OracleResult:
    """Minimize K_J(y, mu) = sum_k (y_k log y_k + y_k Theta_{2J y_k}(mu_k)).

    The domain has no cross terms between the mu_k, so for each gridded
    occupation vector the per-component bias optimum is exact; this keeps the
    search exhaustive over the product grid without any structural ansatz.
    """
    if r > 4:
        raise BudgetExceeded(f"exhaustive cubic search limited to r <= 4, got {r}")
    if resolution < 20:
        raise ValueError("resolution must be at least 20")
    if _n_compositions(resolution, r) > _MAX_GRID_POINTS:
        raise BudgetExceeded(
            f"occupation grid would have {_n_compositions(resolution, r)} points")
    if mu_resolution is None:
        mu_resolution = 2 * resolution + 1

    mus = np.linspace(-1.0, 1.0, mu_resolution)
    ys = np.arange(resolution + 1) / resolution
    # theta_table[c, j] = Theta_{2 J y_c}(mu_j)
    theta = np.vstack([ising_theta(2.0 * J * y, mus) for y in ys])
    j_best = np.argmin(theta, axis=1)
    theta_min = theta[np.arange(resolution + 1), j_best]
    mu_best = mus[j_best]

    comps = _compositions(resolution, r)
    vals = (_xlogx(ys)[comps] + ys[comps] * theta_min[comps]).sum(axis=1)
    i0 = int(np.argmin(vals))
    y0 = comps[i0] / resolution
    mu0 = mu_best[comps[i0]]
    grid_val = float(vals[i0])

    y_star, mu_star, val = y0, mu0, grid_val
    if polish:
        def fun(z):
            y = np.clip(z[:r], 0.0, 1.0)
            mu = np.clip(z[r:], -1.0, 1.0)
            return float(np.sum(_xlogx(y) + y * (
                -(2.0 * J * y) / 4.0 * mu ** 2
                + _xlogx((1.0 + mu) / 2.0) + _xlogx((1.0 - mu) / 2.0))))
        z0 = np.concatenate([y0, mu0])
        res = optimize.minimize(
            fun, z0, method="SLSQP",
            bounds=[(0.0, 1.0)] * r + [(-1.0, 1.0)] * r,
            constraints=[{"type": "eq", "fun": lambda z: np.sum(z[:r]) - 1.0}],
            options={"ftol": 1e-14, "maxiter": 300})
        if res.success and res.fun <= grid_val + 1e-12:
            y_star = np.clip(res.x[:r], 0.0, 1.0)
            mu_star = np.clip(res.x[r:], -1.0, 1.0)
            val = float(res.fun)
    m_induced = y_star * mu_star
    return OracleResult(
        minimizer=np.vstack([y_star, mu_star]), value=val, grid_value=grid_val,
        meta={"r": r, "J": J, "resolution": resolution,
              "mu_resolution": mu_resolution,
              "m_induced": np.asarray(m_induced).tolist()})


# ---------------------------------------------------------------------------
# nematic dual field
# ---------------------------------------------------------------------------

def _sphere_x2_nodes(N: int, sphere_samples: int, seed: int = 20240913
                     ) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
    """(squared-coordinate nodes, weights, batch index) on the unit sphere.

    N = 3 uses a deterministic product quadrature (u = cos psi Gauss-Legendre
    x uniform periodic angle); other N use a fixed-seed scrambled Sobol
    sequence mapped through the Gaussian-normalization construction.
    """
    if N == 3:
        n_u, n_th = 48, 48
        u, wu = np.polynomial.legendre.leggauss(n_u)
        th = (np.arange(n_th) + 0.5) * (2 * np.pi / n_th)
        U, TH = np.meshgrid(u, th, indexing="ij")
        v1 = np.sqrt(1 - U ** 2) * np.cos(TH)
        v2 = np.sqrt(1 - U ** 2) * np.sin(TH)
        v3 = U
        X2 = np.stack([v1 ** 2, v2 ** 2, v3 ** 2], axis=-1).reshape(-1, 3)
        W = (np.outer(wu, np.full(n_th, 1.0 / n_th)) / 2.0).reshape(-1)
        return X2, W, None
    sob = qmc.Sobol(d=N, scramble=True, seed=seed)
    m = int(np.ceil(np.log2(max(sphere_samples, 64))))
    pts = sob.random_base2(m)
    from scipy.special import ndtri
    g = ndtri(np.clip(pts, 1e-12, 1 - 1e-12))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    X2 = g ** 2
    W = np.full(X2.shape[0], 1.0 / X2.shape[0])
    batches = np.arange(X2.shape[0]) % 8
    return X2, W, batches


def _g_diag(h: np.ndarray, X2: np.ndarray, W: np.ndarray) -> np.ndarray:
    """G(diag h) = log E[exp(sum_a h_a v_a^2)] for a batch of h rows."""
    expo = h @ X2.T  # (n_h, n_nodes)
    return logsumexp(expo, axis=1, b=W[None, :])


def nematic_dual_min(N: int, J: float, resolution: int = 120,
                     sphere_samples: int = 4096,
                     polish: bool = True) -> OracleResult:
    """Minimize Psi_J(h) = |h|^2/(2J) - G(h) over traceless diagonal h.

    The first N-1 diagonal entries run over a box covering the on-axis
    stationary family (h_1 = J*lambda with lambda < 1, subdominant entries
    down to -J/(N-1)); the last entry closes the trace.
    """
    if N > 4:
        raise BudgetExceeded(f"dual grid search limited to N <= 4, got {N}")
    if resolution ** (N - 1) > _MAX_GRID_POINTS:
        raise BudgetExceeded(
            f"dual grid would have {resolution ** (N - 1)} points")

    X2, W, batches = _sphere_x2_nodes(N, sphere_samples)
    lo, hi = -1.3 * J / (N - 1), 1.1 * J
    axes = [np.linspace(lo, hi, resolution)] * (N - 1)
    mesh = np.meshgrid(*axes, indexing="ij")
    hfree = np.stack([m.ravel() for m in mesh], axis=-1)
    h_all = np.hstack([hfree, -hfree.sum(axis=1, keepdims=True)])

    vals = np.empty(h_all.shape[0])
    chunk = 4000
    for i in range(0, h_all.shape[0], chunk):
        H = h_all[i:i + chunk]
        vals[i:i + chunk] = (H * H).sum(axis=1) / (2.0 * J) - _g_diag(H, X2, W)
    i0 = int(np.argmin(vals))
    h0 = h_all[i0]
    grid_val = float(vals[i0])

    noise = 0.0
    if batches is not None:
        # spread of batch estimates of G at the grid minimizer
        ests = [float(_g_diag(h0[None, :], X2[batches == b],
                              np.full((batches == b).sum(), 1.0 / (batches == b).sum()))[0])
                for b in range(8)]
        noise = float(np.std(ests) / np.sqrt(8))
        cell = (hi - lo) / (resolution - 1)
        if noise > max(cell, 1e-6):
            warnings.warn(
                f"G sampling stderr {noise:.2e} exceeds grid scale {cell:.2e}",
                SamplingNoise)

    h_star, val = h0, grid_val
    if polish:
        def fun(hf):
            h = np.concatenate([hf, [-np.sum(hf)]])
            return float((h * h).sum() / (2.0 * J) - _g_diag(h[None, :], X2, W)[0])
        res = optimize.minimize(fun, h0[:-1], method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-13,
                                         "maxiter": 4000})
        if res.success and res.fun <= grid_val + 1e-12:
            h_star = np.concatenate([res.x, [-np.sum(res.x)]])
            val = float(res.fun)
    return OracleResult(minimizer=np.asarray(h_star), value=val,
                        grid_value=grid_val,
                        meta={"N": N, "J": J, "resolution": resolution,
                              "sphere_samples": int(X2.shape[0]),
                              "sampling_stderr": noise})
