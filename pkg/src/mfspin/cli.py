"""Command-line interface: one entry point dispatching to every module.

Subcommands: id, profile, branches, transition, barrier, bands, certify,
oracle, mc, rate, reproduce-figures.  JSON outputs carry a schema_version
field; CSV uses header rows, '.' decimal separator and 12 significant
digits.  Identical invocations (including seeds) produce byte-identical
primary outputs.  Exit codes: 0 success, 2 usage error, 1 computational
failure (machine-readable JSON on stderr).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import lattice, mc, models, oracle, solver
from .certification import allowed_bands as _allowed_bands, certify as _certify
from .errors import MFSpinError

SCHEMA_VERSION = 1

_FIG1_JS = (2.73, 2.76, 2.77, 2.8)
_FIG2_Q = 10
_FIG2_JRANGE = (4.4, 5.6)
_FIG2_STEPS = 121
_FIG2_ID = 0.002


@dataclass
class RunConfig:
    """Validated flag record; built in full before any computation starts."""

    subcommand: str
    output_format: str            # "json" or "csv"
    output_path: Optional[str]
    threads: int
    args: argparse.Namespace


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _emit(cfg: RunConfig, text: str):
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(cfg: RunConfig, payload: dict):
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    _emit(cfg, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _emit_csv(cfg: RunConfig, header: Sequence[str], rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _emit(cfg, "\n".join(lines) + "\n")


def _model_from_args(args) -> models.ModelSpec:
    return models.ModelSpec(args.model, int(args.param))


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def _cmd_id(cfg: RunConfig):
    a = cfg.args
    est = lattice.compute_id(a.dim, a.method, a.tol)
    _emit_json(cfg, est.as_dict())


def _cmd_profile(cfg: RunConfig):
    a = cfg.args
    model = _model_from_args(a)
    lo, hi = model.m_bounds()
    eps = 1e-9 * (hi - lo)
    ms = np.linspace(max(lo, 0.0) + eps if a.nonnegative else lo + eps,
                     hi - eps, a.grid)
    rows = []
    for m in ms:
        phi1d = models.scalar_phi(model, a.J, float(m))
        if model.kind == "potts":
            phi = models.potts_phi(model.param, a.J, float(m))  # raw simplex
        else:
            phi = phi1d
        rows.append((float(m), phi, model.omega_norm_sq * phi1d))
    _emit_csv(cfg, ("m", "phi", "phi_full_scale"), rows)


def _cmd_branches(cfg: RunConfig):
    a = cfg.args
    model = _model_from_args(a)
    rows = []
    for J in np.linspace(a.Jmin, a.Jmax, a.steps):
        bs = solver.solve_branches(model, float(J), a.scan_resolution)
        for p in bs.points:
            rows.append((p.J, p.m, p.stability, p.phi))
    _emit_csv(cfg, ("J", "m", "stability", "phi"), rows)


def _auto_bracket(model: models.ModelSpec):
    """Heuristic transition bracket: just below the m=0 spinodal J2 down to
    the first coupling where the asymmetric branch still sits above phi(0)."""
    J2 = 1.0 / model.g_second(0.0)
    hi = 0.999 * J2
    lo = None
    J = hi
    for _ in range(400):
        J *= 0.997
        bs = solver.solve_branches(model, J)
        stab = [p for p in bs.stable() if p.m > 1e-6]
        if not stab:
            break
        m = max(p.m for p in stab)
        gap = (J / 2.0) * m * m - model.g(J * m) + model.g(0.0)
        if gap > 0:
            lo = J
            break
    if lo is None:
        raise MFSpinError("could not auto-bracket the transition; pass --Jlo/--Jhi")
    return lo, hi


def _cmd_transition(cfg: RunConfig):
    a = cfg.args
    model = _model_from_args(a)
    if a.Jlo is not None and a.Jhi is not None:
        bracket = (a.Jlo, a.Jhi)
    else:
        bracket = _auto_bracket(model)
    tp = solver.find_transition(model, bracket)
    _emit_json(cfg, {"model": str(model), **tp.as_dict()})


def _cmd_barrier(cfg: RunConfig):
    a = cfg.args
    model = _model_from_args(a)
    delta = solver.barrier_height(model, a.J)
    _emit_json(cfg, {"model": str(model), "J": a.J, "barrier": delta})


def _bands_rows(model, J, slack, grid):
    bands = _allowed_bands(model, J, slack, grid)
    return [(J, i, b[0], b[1]) for i, b in enumerate(bands)]


def _cmd_bands(cfg: RunConfig):
    a = cfg.args
    model = _model_from_args(a)
    slack = a.slack if a.slack is not None else a.J * model.delta_factor * a.id_value
    rows = _bands_rows(model, a.J, slack, a.grid)
    _emit_csv(cfg, ("J", "band_index", "m_lo", "m_hi"), rows)


def _cmd_certify(cfg: RunConfig):
    a = cfg.args
    model = _model_from_args(a)
    cert = _certify(model, a.dim, (a.Jlo, a.Jhi),
                     J_grid=a.J_grid, m_grid=a.m_grid)
    _emit_json(cfg, cert.as_dict())


def _cmd_oracle(cfg: RunConfig):
    a = cfg.args
    model = _model_from_args(a)
    tol = 2.0 / a.resolution
    if model.kind == "potts":
        res = oracle.potts_fullspace_min(model.param, a.J, a.resolution)
        bp = solver.solve_branches(model, a.J).global_minimum()
        scal = models.potts_phi(model.param, a.J, bp.m)
        matched = abs(res.value - scal) < tol
    elif model.kind == "cubic":
        res = oracle.cubic_fullspace_min(model.param, a.J, a.resolution)
        bp = solver.solve_branches(model, a.J).global_minimum()
        scal = models.scalar_phi(model, a.J, bp.m) - np.log(4.0 * model.param)
        matched = abs(res.value - scal) < tol
    else:
        res = oracle.nematic_dual_min(model.param, a.J, a.resolution,
                                      a.sphere_samples)
        bp = solver.solve_branches(model, a.J, 200).global_minimum()
        scal = models.phi_full_scale(model, a.J, bp.m)
        matched = abs(res.value - scal) < tol
    _emit_json(cfg, {"model": str(model), "J": a.J,
                     **res.as_dict(), "scalar_min": float(scal),
                     "matched_scalar": bool(matched)})


def _cmd_mc(cfg: RunConfig):
    a = cfg.args
    model = _model_from_args(a)
    conf = mc.MCConfig(model=model, J=a.J, N=a.N, sweeps=a.sweeps,
                       burn_in=a.burn_in, seed=a.seed,
                       histogram_bins=a.bins)
    res = mc.run_mc(conf)
    if a.hist_out:
        edges = res.bin_edges
        rows = [(0.5 * (edges[i] + edges[i + 1]), int(res.histogram[i]))
                for i in range(len(res.histogram))]
        lines = ["bin_center,count"] + [f"{_fmt(c)},{n}" for c, n in rows]
        with open(a.hist_out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    _emit_json(cfg, res.as_dict())


def _cmd_rate(cfg: RunConfig):
    a = cfg.args
    model = _model_from_args(a)
    Ns = [int(s) for s in a.Ns.split(",")]
    est = mc.estimate_rate_function(model, a.J, Ns, a.sweeps, a.burn_in,
                                    seed=a.seed, histogram_bins=a.bins)
    largest = est.results[-1]
    n_tot = largest.n_samples
    shifted = est.shifted_rate()
    phis = np.array([models.phi_full_scale(model, a.J, float(m))
                     if model.m_bounds()[0] < m < model.m_bounds()[1] else np.nan
                     for m in est.bin_centers])
    phis_shift = phis - np.nanmin(phis[est.adequate]) if est.adequate.any() else phis
    rows = []
    for b in range(len(est.bin_centers)):
        if not est.adequate[b]:
            continue
        f = largest.histogram[b] / n_tot
        stderr = np.sqrt(max(1.0 - f, 0.0) / (n_tot * f)) / Ns[-1]
        rows.append((float(est.bin_centers[b]), float(shifted[b]),
                     float(stderr), float(phis_shift[b])))
    _emit_csv(cfg, ("bin_center", "rate", "stderr", "phi_shifted"), rows)


def _cmd_reproduce_figures(cfg: RunConfig):
    a = cfg.args
    outdir = a.outdir
    os.makedirs(outdir, exist_ok=True)
    manifest = {"schema_version": SCHEMA_VERSION, "files": {}}

    # free-energy profiles of the 3-state model around its transition
    q3 = models.potts(3)
    lo, hi = q3.m_bounds()
    ms = np.linspace(0.0, hi - 1e-9, a.grid)
    lines = ["J,m,phi,phi_full_scale"]
    for J in _FIG1_JS:
        for m in ms:
            phi = models.potts_phi(3, J, float(m))
            full = q3.omega_norm_sq * models.scalar_phi(q3, J, float(m))
            lines.append(f"{_fmt(J)},{_fmt(float(m))},{_fmt(phi)},{_fmt(full)}")
    with open(os.path.join(outdir, "fig1_q3.csv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    manifest["files"]["fig1_q3.csv"] = {"model": "potts(q=3)", "J": list(_FIG1_JS),
                                        "grid": a.grid, "m_range": [0.0, hi]}

    # branch structure and allowed bands of the 10-state model
    q10 = models.potts(_FIG2_Q)
    lines = ["J,m,stability,phi"]
    band_lines = ["J,band_index,m_lo,m_hi"]
    for J in np.linspace(*_FIG2_JRANGE, _FIG2_STEPS):
        bs = solver.solve_branches(q10, float(J), 600)
        for p in bs.points:
            lines.append(f"{_fmt(p.J)},{_fmt(p.m)},{p.stability},{_fmt(p.phi)}")
        slack = float(J) * q10.delta_factor * _FIG2_ID
        for i, b in enumerate(_allowed_bands(q10, float(J), slack, 2000)):
            band_lines.append(f"{_fmt(float(J))},{i},{_fmt(b[0])},{_fmt(b[1])}")
    with open(os.path.join(outdir, "fig2_q10_branches.csv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(os.path.join(outdir, "fig2_q10_bands.csv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(band_lines) + "\n")
    manifest["files"]["fig2_q10_branches.csv"] = {
        "model": f"potts(q={_FIG2_Q})", "J_range": list(_FIG2_JRANGE),
        "steps": _FIG2_STEPS, "scan_resolution": 600}
    manifest["files"]["fig2_q10_bands.csv"] = {
        "model": f"potts(q={_FIG2_Q})", "J_range": list(_FIG2_JRANGE),
        "steps": _FIG2_STEPS, "I_d": _FIG2_ID, "m_grid": 2000}
    with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _emit_json(cfg, {"outdir": outdir, "written": sorted(manifest["files"]) + ["manifest.json"]})


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_model_flags(p):
    p.add_argument("--model", required=True, choices=("potts", "cubic", "nematic"))
    p.add_argument("--param", required=True, type=int,
                   help="q (potts), r (cubic) or N (nematic)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mfspin", description=__doc__)
    ap.add_argument("--threads", type=int,
                    default=int(os.environ.get("MFT_THREADS", "1")),
                    help="cap on worker counts (modules may run single-threaded)")
    ap.add_argument("--out", dest="out", default=None,
                    help="write primary output to this path instead of stdout")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("id", help="infrared integrals W_d and I_d")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--method", choices=lattice.METHODS, default="bessel")
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("profile", help="scalar free-energy profile at fixed J")
    _add_model_flags(p)
    p.add_argument("--J", type=float, required=True)
    p.add_argument("--grid", type=int, default=400)
    p.add_argument("--nonnegative", action="store_true",
                   help="restrict the grid to m >= 0")

    p = sub.add_parser("branches", help="mean-field-equation roots over a J grid")
    _add_model_flags(p)
    p.add_argument("--Jmin", type=float, required=True)
    p.add_argument("--Jmax", type=float, required=True)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--scan-resolution", dest="scan_resolution", type=int, default=400)

    p = sub.add_parser("transition", help="locate J_MF and m_c")
    _add_model_flags(p)
    p.add_argument("--Jlo", type=float, default=None)
    p.add_argument("--Jhi", type=float, default=None)

    p = sub.add_parser("barrier", help="barrier height Delta(J) (full-Phi scale)")
    _add_model_flags(p)
    p.add_argument("--J", type=float, required=True)

    p = sub.add_parser("bands", help="allowed magnetization bands at fixed J")
    _add_model_flags(p)
    p.add_argument("--J", type=float, required=True)
    p.add_argument("--id-value", dest="id_value", type=float, default=None,
                   help="I_d to convert into slack J*n*(kappa/2)*I_d")
    p.add_argument("--slack", type=float, default=None,
                   help="explicit slack (overrides --id-value)")
    p.add_argument("--grid", type=int, default=2000)

    p = sub.add_parser("certify", help="first-order certificate on a J window")
    _add_model_flags(p)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--Jlo", type=float, required=True)
    p.add_argument("--Jhi", type=float, required=True)
    p.add_argument("--J-grid", dest="J_grid", type=int, default=21)
    p.add_argument("--m-grid", dest="m_grid", type=int, default=2000)

    p = sub.add_parser("oracle", help="full-space brute-force minimization")
    _add_model_flags(p)
    p.add_argument("--J", type=float, required=True)
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("--sphere-samples", dest="sphere_samples", type=int, default=4096)

    p = sub.add_parser("mc", help="complete-graph Monte Carlo")
    _add_model_flags(p)
    p.add_argument("--J", type=float, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--sweeps", type=int, required=True)
    p.add_argument("--burn-in", dest="burn_in", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--hist-out", dest="hist_out", default=None)

    p = sub.add_parser("rate", help="rate-function estimate over several N")
    _add_model_flags(p)
    p.add_argument("--J", type=float, required=True)
    p.add_argument("--Ns", required=True, help="comma-separated, e.g. 50,100,200")
    p.add_argument("--sweeps", type=int, default=30000)
    p.add_argument("--burn-in", dest="burn_in", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=100)

    p = sub.add_parser("reproduce-figures", help="emit figure-reproduction data")
    p.add_argument("--outdir", required=True)
    p.add_argument("--grid", type=int, default=400)

    return ap


_DISPATCH = {
    "id": _cmd_id,
    "profile": _cmd_profile,
    "branches": _cmd_branches,
    "transition": _cmd_transition,
    "barrier": _cmd_barrier,
    "bands": _cmd_bands,
    "certify": _cmd_certify,
    "oracle": _cmd_oracle,
    "mc": _cmd_mc,
    "rate": _cmd_rate,
    "reproduce-figures": _cmd_reproduce_figures,
}

_CSV_COMMANDS = {"profile", "branches", "bands", "rate"}


def dispatch(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.subcommand == "bands" and args.id_value is None and args.slack is None:
        ap.error("bands requires --id-value or --slack")
    cfg = RunConfig(
        subcommand=args.subcommand,
        output_format="csv" if args.subcommand in _CSV_COMMANDS else "json",
        output_path=args.out,
        threads=max(int(args.threads), 1),
        args=args,
    )
    try:
        _DISPATCH[args.subcommand](cfg)
    except MFSpinError as exc:
        sys.stderr.write(json.dumps(
            {"schema_version": SCHEMA_VERSION,
             "error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
