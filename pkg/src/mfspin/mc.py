"""Metropolis / heat-bath Monte Carlo on the complete graph.

Hamiltonian (inverse temperature absorbed into J, external field zero):

    beta H_N(S) = -(J/N) * sum_{1 <= x < y <= N} (S_x, S_y)

For Potts and cubic spins the single-site conditional is sampled exactly
(heat bath); nematic spins are unit vectors updated by Metropolis proposals
with a step size auto-tuned to 30-50% acceptance during burn-in.  Every
sweep costs O(N) thanks to maintained field sums (state counts for Potts,
per-axis magnetizations for cubic, the second-moment matrix for nematic).

The empirical magnetization is projected onto a scalar per model: Potts uses
the fraction of the most-populated state minus 1/q (matching the x_1 = 1/q+m
parametrization), cubic the signed component of largest magnitude, nematic
the top eigenvalue of the empirical order-parameter matrix.  Results are
deterministic functions of the configuration, including the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .models import ModelSpec

__all__ = ["MCConfig", "MCResult", "run_mc", "estimate_rate_function",
           "RateFunctionEstimate"]


@dataclass(frozen=True)
class MCConfig:
    model: ModelSpec
    J: float
    N: int                  # number of vertices
    sweeps: int
    burn_in: int = 0
    seed: int = 0
    histogram_bins: int = 100

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if not (self.sweeps > self.burn_in >= 0):
            raise ValueError("need sweeps > burn_in >= 0")
        if self.J < 0:
            raise ValueError("J must be non-negative")


@dataclass
class MCResult:
    config: MCConfig
    mean_scalar_m: float
    histogram: np.ndarray          # counts per bin, sums to n_samples
    bin_edges: np.ndarray
    pair_correlation: float        # <(S_x,S_y)> over distinct pairs
    pair_correlation_stderr: float
    mean_vector_norm_sq: float     # |<S>|^2 from the sample-averaged vector
    n_samples: int
    rate_estimates: Optional[np.ndarray] = None   # -(1/N) log(freq) per bin
    extras: Dict = field(default_factory=dict)

    def as_dict(self):
        out = {
            "model": str(self.config.model), "J": self.config.J,
            "N": self.config.N, "sweeps": self.config.sweeps,
            "burn_in": self.config.burn_in, "seed": self.config.seed,
            "mean_scalar_m": self.mean_scalar_m,
            "pair_correlation": self.pair_correlation,
            "pair_correlation_stderr": self.pair_correlation_stderr,
            "mean_vector_norm_sq": self.mean_vector_norm_sq,
            "n_samples": self.n_samples,
            "histogram": self.histogram.tolist(),
            "bin_edges": self.bin_edges.tolist(),
        }
        out.update(self.extras)
        return out


def _batch_stderr(x: np.ndarray, n_batches: int = 50) -> float:
    """Standard error via batch means (guards against autocorrelation)."""
    n = len(x)
    if n < 2 * n_batches:
        return float(np.std(x, ddof=1) / np.sqrt(max(n, 2)))
    usable = (n // n_batches) * n_batches
    means = x[:usable].reshape(n_batches, -1).mean(axis=1)
    return float(np.std(means, ddof=1) / np.sqrt(n_batches))


# ---------------------------------------------------------------------------
# Potts heat bath
# ---------------------------------------------------------------------------

def _run_potts(cfg: MCConfig, record_joint: bool):
    q, J, N = cfg.model.param, cfg.J, cfg.N
    rng = np.random.default_rng(cfg.seed)
    sigma = rng.integers(0, q, size=N).tolist()
    counts = [sigma.count(k) for k in range(q)]
    table = np.exp((J / N) * np.arange(N, dtype=np.float64)).tolist()

    n_meas = cfg.sweeps - cfg.burn_in
    scalar = np.empty(n_meas)
    sumsq = np.empty(n_meas)
    mean_frac = np.zeros(q)
    joint: Dict[int, int] = {} if record_joint else None

    inv_q = 1.0 / q
    for sweep in range(cfg.sweeps):
        us = rng.random(N)
        for x in range(N):
            a = sigma[x]
            counts[a] -= 1
            tot = 0.0
            cum = [0.0] * q
            for k in range(q):
                tot += table[counts[k]]
                cum[k] = tot
            r = us[x] * tot
            k = 0
            while cum[k] < r:
                k += 1
            counts[k] += 1
            sigma[x] = k
            if joint is not None:
                code = 0
                for s in sigma:
                    code = code * q + s
                joint[code] = joint.get(code, 0) + 1
        if sweep >= cfg.burn_in:
            i = sweep - cfg.burn_in
            fr = [c / N for c in counts]
            scalar[i] = max(fr) - inv_q
            sumsq[i] = sum(f * f for f in fr)
            for k in range(q):
                mean_frac[k] += fr[k]
    mean_frac /= n_meas
    kappa = (q - 1.0) / q
    msq_samples = sumsq - inv_q                   # |m_N|^2 per sample
    pair = (N * N * msq_samples - N * kappa) / (N * (N - 1.0))
    mean_vec_sq = float(np.sum(mean_frac ** 2) - inv_q)
    extras = {}
    if joint is not None:
        extras["joint_counts"] = joint
    return scalar, pair, mean_vec_sq, extras


# ---------------------------------------------------------------------------
# cubic heat bath
# ---------------------------------------------------------------------------

def _run_cubic(cfg: MCConfig):
    r, J, N = cfg.model.param, cfg.J, cfg.N
    rng = np.random.default_rng(cfg.seed)
    axis = rng.integers(0, r, size=N).tolist()
    sign = (2 * rng.integers(0, 2, size=N) - 1).tolist()
    M = [0] * r
    for k, s in zip(axis, sign):
        M[k] += s
    # weight for candidate state s*e_k given field F_k: exp((J/N) s F_k)
    table = np.exp((J / N) * np.arange(-N, N + 1, dtype=np.float64)).tolist()

    n_meas = cfg.sweeps - cfg.burn_in
    scalar = np.empty(n_meas)
    sumsq = np.empty(n_meas)
    mean_vec = np.zeros(r)

    for sweep in range(cfg.sweeps):
        us = rng.random(N)
        for x in range(N):
            k0, s0 = axis[x], sign[x]
            M[k0] -= s0
            tot = 0.0
            cum = [0.0] * (2 * r)
            i = 0
            for k in range(r):
                f = M[k]
                tot += table[N + f]
                cum[i] = tot
                i += 1
                tot += table[N - f]
                cum[i] = tot
                i += 1
            rr = us[x] * tot
            i = 0
            while cum[i] < rr:
                i += 1
            k_new, s_new = divmod(i, 2)
            s_new = 1 if s_new == 0 else -1
            M[k_new] += s_new
            axis[x], sign[x] = k_new, s_new
        if sweep >= cfg.burn_in:
            i = sweep - cfg.burn_in
            mhat = [m / N for m in M]
            k_star = max(range(r), key=lambda k: abs(mhat[k]))
            scalar[i] = mhat[k_star]
            sumsq[i] = sum(m * m for m in mhat)
            for k in range(r):
                mean_vec[k] += mhat[k]
    mean_vec /= n_meas
    pair = (N * N * sumsq - N * 1.0) / (N * (N - 1.0))
    return scalar, pair, float(np.sum(mean_vec ** 2)), {}


# ---------------------------------------------------------------------------
# nematic Metropolis
# ---------------------------------------------------------------------------

def _run_nematic(cfg: MCConfig):
    Ns, J, N = cfg.model.param, cfg.J, cfg.N
    rng = np.random.default_rng(cfg.seed)
    v = rng.normal(size=(N, Ns))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    T = v.T @ v
    step = 0.5
    accepted = 0
    proposed = 0

    n_meas = cfg.sweeps - cfg.burn_in
    scalar = np.empty(n_meas)
    sumsq = np.empty(n_meas)
    mean_Q = np.zeros((Ns, Ns))
    eye = np.eye(Ns)

    for sweep in range(cfg.sweeps):
        noise = rng.normal(size=(N, Ns))
        us = rng.random(N)
        for x in range(N):
            vx = v[x]
            w = vx + step * noise[x]
            w /= np.linalg.norm(w)
            # energy against the field of the other spins:
            # sum_y!=x (v.v_y)^2 = v^T (T - vx vx^T) v
            Tw = T @ w
            Tv = T @ vx
            e_new = w @ Tw - (vx @ w) ** 2
            e_old = vx @ Tv - 1.0
            dE = -(J / N) * (e_new - e_old)
            proposed += 1
            if dE <= 0.0 or us[x] < np.exp(-dE):
                accepted += 1
                T += np.outer(w, w) - np.outer(vx, vx)
                v[x] = w
        if sweep < cfg.burn_in and sweep % 25 == 24:
            rate = accepted / proposed
            if rate > 0.5:
                step = min(step * 1.25, 5.0)
            elif rate < 0.3:
                step = max(step * 0.8, 1e-3)
            accepted = proposed = 0
        if sweep >= cfg.burn_in:
            i = sweep - cfg.burn_in
            Qbar = T / N - eye / Ns
            scalar[i] = float(np.linalg.eigvalsh(Qbar)[-1])
            sumsq[i] = float(np.sum(Qbar * Qbar))
            mean_Q += Qbar
    mean_Q /= n_meas
    kappa = (Ns - 1.0) / Ns
    pair = (N * N * sumsq - N * kappa) / (N * (N - 1.0))
    extras = {"acceptance_rate": accepted / max(proposed, 1), "step": step}
    return scalar, pair, float(np.sum(mean_Q ** 2)), extras


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

def run_mc(config: MCConfig, record_joint_states: bool = False) -> MCResult:
    """Run one chain and collect the scalar-magnetization statistics."""
    if config.model.kind == "potts":
        scalar, pair, vecsq, extras = _run_potts(config, record_joint_states)
    elif config.model.kind == "cubic":
        scalar, pair, vecsq, extras = _run_cubic(config)
    else:
        scalar, pair, vecsq, extras = _run_nematic(config)
    lo, hi = config.model.m_bounds()
    hist, edges = np.histogram(scalar, bins=config.histogram_bins,
                               range=(lo, hi))
    with np.errstate(divide="ignore"):
        freq = hist / len(scalar)
        rate = np.where(hist > 0, -np.log(np.maximum(freq, 1e-300)) / config.N,
                        np.nan)
    return MCResult(
        config=config,
        mean_scalar_m=float(scalar.mean()),
        histogram=hist, bin_edges=edges,
        pair_correlation=float(pair.mean()),
        pair_correlation_stderr=_batch_stderr(pair),
        mean_vector_norm_sq=vecsq,
        n_samples=len(scalar),
        rate_estimates=rate,
        extras=extras,
    )


@dataclass
class RateFunctionEstimate:
    """Per-bin rate values extrapolated linearly in 1/N."""

    bin_centers: np.ndarray
    rate: np.ndarray               # intercept of -(1/N) log freq vs 1/N
    adequate: np.ndarray           # bool: >= min_count samples at largest N
    Ns: Sequence[int]
    per_N_rate: np.ndarray         # raw -(1/N) log freq, shape (len(Ns), bins)
    results: List[MCResult]

    def shifted_rate(self) -> np.ndarray:
        """Rate minus its minimum over adequately sampled bins."""
        vals = self.rate[self.adequate]
        base = np.nanmin(vals) if len(vals) else np.nan
        return self.rate - base


def estimate_rate_function(model: ModelSpec, J: float, Ns: Sequence[int],
                           sweeps: int, burn_in: int, seed: int = 0,
                           histogram_bins: int = 100,
                           min_count: int = 10) -> RateFunctionEstimate:
    """Estimate the large-deviation rate of the scalar magnetization.

    Runs one chain per vertex count, computes per-bin -(1/N) log(frequency)
    and extrapolates linearly in 1/N.  Bins with fewer than ``min_count``
    samples at the largest N are flagged inadequate and excluded from the
    extrapolation (never filled in).
    """
    Ns = sorted(int(n) for n in Ns)
    if len(Ns) < 3:
        raise ValueError("need at least three values of N for extrapolation")
    results = []
    for i, n in enumerate(Ns):
        cfg = MCConfig(model=model, J=J, N=n, sweeps=sweeps, burn_in=burn_in,
                       seed=seed + 1000 * i, histogram_bins=histogram_bins)
        results.append(run_mc(cfg))
    edges = results[0].bin_edges
    centers = 0.5 * (edges[:-1] + edges[1:])
    per_N = np.vstack([r.rate_estimates for r in results])
    largest = results[-1]
    adequate = largest.histogram >= min_count

    rate = np.full(len(centers), np.nan)
    invN = 1.0 / np.asarray(Ns, dtype=float)
    for b in range(len(centers)):
        ys = per_N[:, b]
        ok = np.isfinite(ys)
        if adequate[b] and ok.sum() >= 3:
            coef = np.polyfit(invN[ok], ys[ok], 1)
            rate[b] = coef[1]          # intercept: N -> infinity
        else:
            adequate[b] = False
    return RateFunctionEstimate(bin_centers=centers, rate=rate,
                                adequate=adequate, Ns=Ns, per_N_rate=per_N,
                                results=results)
