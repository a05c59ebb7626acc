"""CLI dispatch: output formats, exit codes, figure-data reproduction."""

import json
import os

import numpy as np
import pytest

from mfspin.cli import dispatch

J_MF_Q3 = 4 * np.log(2)


def run_cli(capsys, *argv):
    code = dispatch(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    lines = [l for l in text.strip().splitlines() if l]
    header = lines[0].split(",")
    rows = [l.split(",") for l in lines[1:]]
    return header, rows


def test_id_json_contract(capsys):
    code, out, _ = run_cli(capsys, "id", "--dim", "3", "--method", "bessel",
                           "--tol", "1e-7")
    assert code == 0
    payload = json.loads(out)
    assert payload["schema_version"] == 1
    assert payload["d"] == 3
    assert payload["id"] == pytest.approx(0.5163861, abs=1e-6)
    assert payload["wd"] == pytest.approx(1.5163861, abs=1e-6)
    assert payload["err"] <= 1e-7


def test_id_quad_method(capsys):
    code, out, _ = run_cli(capsys, "id", "--dim", "3", "--method", "quad",
                           "--tol", "1e-7")
    assert code == 0
    assert json.loads(out)["id"] == pytest.approx(0.5163861, abs=1e-5)


def test_profile_csv(capsys):
    code, out, _ = run_cli(capsys, "profile", "--model", "potts", "--param",
                           "3", "--J", "2.76", "--grid", "50")
    assert code == 0
    header, rows = parse_csv(out)
    assert header == ["m", "phi", "phi_full_scale"]
    assert len(rows) == 50
    # full-scale column differs from the raw simplex column by a constant
    diffs = {round(float(r[2]) - float(r[1]), 9) for r in rows}
    assert len(diffs) == 1


def test_transition_json(capsys):
    code, out, _ = run_cli(capsys, "transition", "--model", "potts",
                           "--param", "3", "--Jlo", "2.75", "--Jhi", "2.95")
    assert code == 0
    payload = json.loads(out)
    assert payload["J_MF"] == pytest.approx(J_MF_Q3, abs=1e-6)
    assert payload["m_c"] == pytest.approx(1 / 3, abs=1e-6)


def test_transition_auto_bracket(capsys):
    code, out, _ = run_cli(capsys, "transition", "--model", "cubic", "--param", "4")
    assert code == 0
    assert json.loads(out)["J_MF"] == pytest.approx(3.7851981, abs=1e-5)


def test_barrier_json(capsys):
    code, out, _ = run_cli(capsys, "barrier", "--model", "potts", "--param",
                           "10", "--J", f"{2.25 * np.log(9)}")
    assert code == 0
    assert json.loads(out)["barrier"] == pytest.approx(0.0713807, abs=1e-6)


def test_bands_csv(capsys):
    code, out, _ = run_cli(capsys, "bands", "--model", "potts", "--param", "10",
                           "--J", f"{2.25 * np.log(9)}", "--id-value", "0.002")
    assert code == 0
    header, rows = parse_csv(out)
    assert header == ["J", "band_index", "m_lo", "m_hi"]
    assert len(rows) == 2
    gap = float(rows[1][2]) - float(rows[0][3])
    assert gap > 0.3


def test_branches_csv_unstable_between_stable(capsys):
    code, out, _ = run_cli(capsys, "branches", "--model", "potts", "--param",
                           "10", "--Jmin", "4.7", "--Jmax", "5.1", "--steps",
                           "9", "--scan-resolution", "600")
    assert code == 0
    header, rows = parse_csv(out)
    assert header == ["J", "m", "stability", "phi"]
    byJ = {}
    for r in rows:
        byJ.setdefault(r[0], []).append((float(r[1]), r[2]))
    for J, pts in byJ.items():
        stable = sorted(m for m, s in pts if s == "stable" and m > -1e-9)
        unstable = [m for m, s in pts if s == "unstable" and m > 1e-6]
        if len(stable) >= 2 and unstable:
            assert all(stable[0] < u < stable[-1] for u in unstable)


def test_mc_json_and_histogram(capsys, tmp_path):
    hist = tmp_path / "h.csv"
    code, out, _ = run_cli(capsys, "mc", "--model", "potts", "--param", "3",
                           "--J", "2.0", "--N", "50", "--sweeps", "400",
                           "--burn-in", "100", "--seed", "5",
                           "--hist-out", str(hist))
    assert code == 0
    payload = json.loads(out)
    assert payload["n_samples"] == 300
    assert sum(payload["histogram"]) == 300
    lines = hist.read_text().strip().splitlines()
    assert lines[0] == "bin_center,count"
    assert len(lines) == 101


def test_rate_csv(capsys):
    code, out, _ = run_cli(capsys, "rate", "--model", "potts", "--param", "3",
                           "--J", "0.0", "--Ns", "40,80,160", "--sweeps",
                           "3000", "--burn-in", "300", "--seed", "9")
    assert code == 0
    header, rows = parse_csv(out)
    assert header == ["bin_center", "rate", "stderr", "phi_shifted"]
    assert rows, "expected adequately sampled bins"
    for r in rows:
        assert abs(float(r[1]) - float(r[3])) < 0.25


def test_usage_error_exit_code_two(capsys):
    with pytest.raises(SystemExit) as exc:
        dispatch(["bands", "--model", "potts", "--param", "10", "--J", "1.0"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        dispatch(["no-such-command"])
    assert exc.value.code == 2


def test_computational_error_exit_code_one(capsys):
    code, out, err = run_cli(capsys, "id", "--dim", "2")
    assert code == 1
    payload = json.loads(err)
    assert payload["error"] == "DimensionTooSmall"


def test_out_flag_writes_file(capsys, tmp_path):
    target = tmp_path / "id.json"
    code, out, _ = run_cli(capsys, "--out", str(target), "id", "--dim", "4")
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text())["d"] == 4


# ---------------------------------------------------------------------------
# figure-data reproduction
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def figures_dir(tmp_path_factory):
    outdir = tmp_path_factory.mktemp("figs")
    code = dispatch(["reproduce-figures", "--outdir", str(outdir),
                     "--grid", "300"])
    assert code == 0
    return outdir


def test_reproduce_figures_file_contract(figures_dir):
    names = sorted(os.listdir(figures_dir))
    assert names == ["fig1_q3.csv", "fig2_q10_branches.csv",
                     "fig2_q10_bands.csv", "manifest.json"] or set(names) == {
        "fig1_q3.csv", "fig2_q10_branches.csv", "fig2_q10_bands.csv",
        "manifest.json"}
    manifest = json.loads((figures_dir / "manifest.json").read_text())
    assert set(manifest["files"]) == {"fig1_q3.csv", "fig2_q10_branches.csv",
                                      "fig2_q10_bands.csv"}
    assert manifest["files"]["fig2_q10_bands.csv"]["I_d"] == 0.002


def test_fig1_minima_order_switch_brackets_transition(figures_dir):
    """The two-minima order switch happens between J=2.77 and J=2.8.

    J_MF = 4 log 2 = 2.77259 lies between those two curve couplings; at 2.76
    and 2.77 the asymmetric minimum is metastable (higher), at 2.8 it is the
    global one.
    """
    text = (figures_dir / "fig1_q3.csv").read_text().strip().splitlines()
    data = {}
    for line in text[1:]:
        J, m, phi, full = (float(v) for v in line.split(","))
        data.setdefault(J, []).append((m, phi))
    sign = {}
    for J, pts in data.items():
        pts.sort()
        ms = np.array([p[0] for p in pts])
        ph = np.array([p[1] for p in pts])
        inner = np.flatnonzero((ph[1:-1] < ph[:-2]) & (ph[1:-1] < ph[2:]))
        asym = [i + 1 for i in inner if ms[i + 1] > 0.05]
        if asym:
            i = asym[0]
            sign[J] = np.sign(ph[i] - ph[0])
    assert 2.73 not in sign          # below the spinodal J1 = 2.74564
    assert sign[2.76] > 0 and sign[2.77] > 0
    assert sign[2.8] < 0


def test_fig2_bands_split_near_transition(figures_dir):
    text = (figures_dir / "fig2_q10_bands.csv").read_text().strip().splitlines()
    per_J = {}
    for line in text[1:]:
        J, idx, lo, hi = line.split(",")
        per_J.setdefault(float(J), []).append((float(lo), float(hi)))
    J_mf = 2.25 * np.log(9)
    J_near = min(per_J, key=lambda J: abs(J - J_mf))
    assert len(per_J[J_near]) == 2


def test_reproduce_figures_deterministic(figures_dir, tmp_path_factory):
    other = tmp_path_factory.mktemp("figs2")
    assert dispatch(["reproduce-figures", "--outdir", str(other),
                     "--grid", "300"]) == 0
    for name in ("fig1_q3.csv", "fig2_q10_branches.csv", "fig2_q10_bands.csv",
                 "manifest.json"):
        assert (figures_dir / name).read_bytes() == (other / name).read_bytes()
