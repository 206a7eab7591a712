import csv
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from lattice_spectra import (
    CurveCount,
    FidelityMatrix,
    GaugeCertificate,
    LatticeModel,
    PairingReport,
    SolverError,
    Spectrum,
    exact_constant_hopping,
    f12_closed_form,
)
from lattice_spectra import cli
from lattice_spectra.model import model_from_dict

from conftest import GOLDEN, MODELS, ROOT
from oracles import circulant_spectrum, match_distance

CHAIN12 = ["--n", "12", "--t", "0.1", "--tp", "0.05", "--bc", "open"]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def ok(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    assert err == ""
    return out


def table(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("# ")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def trailer(text):
    return dict(ln[2:].split("=", 1) for ln in text.splitlines() if ln.startswith("# "))


def subprocess_run(*argv, env=None):
    return subprocess.run(
        [sys.executable, "-m", "lattice_spectra", *argv],
        capture_output=True,
        text=True,
        cwd=ROOT,
        env={**os.environ, **(env or {})},
    )


# -- spectrum ------------------------------------------------------------------


def test_spectrum_chain12(capsys):
    header, rows = table(ok(capsys, "spectrum", *CHAIN12))
    assert header == ["k", "re", "im", "residual", "path"]
    assert len(rows) == 12
    assert all(abs(float(r[2])) <= 1e-10 for r in rows)
    assert {r[4] for r in rows} == {"symmetric_tridiagonal"}
    assert [int(r[0]) for r in rows] == list(range(1, 13))
    exact = exact_constant_hopping(12, 0.1, 0.05).eigenvalues
    np.testing.assert_allclose([float(r[1]) for r in rows], exact.real, atol=1e-10)


def test_spectrum_triangle_file(capsys):
    _, rows = table(ok(capsys, "spectrum", "--model", str(MODELS / "triangle.model")))
    np.testing.assert_allclose([float(r[1]) for r in rows], [-1, -1, 2], atol=1e-10)
    assert all(abs(float(r[2])) <= 1e-10 for r in rows)


def test_spectrum_dimer(capsys):
    _, rows = table(ok(capsys, "spectrum", "--n", "2", "--t", "1", "--tp", "1"))
    np.testing.assert_allclose([float(r[1]) for r in rows], [-1, 1], atol=1e-14)


def test_spectrum_ring_file(capsys):
    _, rows = table(ok(capsys, "spectrum", "--model", str(MODELS / "ring4.model")))
    z = np.array([complex(float(r[1]), float(r[2])) for r in rows])
    assert match_distance(z, circulant_spectrum(4, 1.0, 0.25)) <= 1e-10


def test_spectrum_json_round_trip(capsys):
    doc = json.loads(ok(capsys, "spectrum", *CHAIN12, "--format", "json"))
    model = model_from_dict(doc["model"])
    assert model == LatticeModel.uniform(12, 0.1, 0.05)
    spec = Spectrum.from_dict(doc["spectrum"])
    assert spec.path.value == "symmetric_tridiagonal" and len(spec) == 12


def test_complex_inline_hops(capsys):
    _, rows = table(ok(capsys, "spectrum", "--n", "5", "--t", "1", "--tp", "0.3+0.2j", "--bc", "closed"))
    z = np.array([complex(float(r[1]), float(r[2])) for r in rows])
    assert match_distance(z, circulant_spectrum(5, 1.0, 0.3 + 0.2j)) <= 1e-10


# -- densities ---------------------------------------------------------------


def test_densities_chain12(capsys):
    out = ok(capsys, "densities", *CHAIN12)
    header, rows = table(out)
    assert header == ["site"] + [f"rho_{k}" for k in range(1, 13)]
    assert len(rows) == 12
    d = np.array([[float(x) for x in r[1:]] for r in rows])
    np.testing.assert_allclose(d.sum(axis=0), 1, atol=1e-12)
    assert trailer(out) == {"distinct_curves": "6"}


def test_densities_three_sites(capsys):
    assert trailer(ok(capsys, "densities", "--n", "3", "--t", "1"))["distinct_curves"] == "2"


def test_densities_huge_tolerance(capsys):
    out = ok(capsys, "densities", *CHAIN12, "--curve-tol", "1e308")
    assert trailer(out)["distinct_curves"] == "1"


def test_densities_json(capsys):
    doc = json.loads(ok(capsys, "densities", *CHAIN12, "--format", "json"))
    c = CurveCount.from_dict(doc["curves"])
    assert c.n_distinct == 6 and len(doc["densities"]) == 12


# -- fidelity, pairing, symmetrize ------------------------------------------------


def test_fidelity_matrix_output(capsys):
    header, rows = table(ok(capsys, "fidelity", "--model", str(MODELS / "triangle.model")))
    assert header == ["k", "re", "im", "F_1", "F_2", "F_3"]
    f = np.array([[float(x) for x in r[3:]] for r in rows])
    np.testing.assert_allclose(f, np.eye(3), atol=1e-10)


def test_fidelity_json_round_trip(capsys):
    doc = json.loads(ok(capsys, "fidelity", "--model", str(MODELS / "n5_ep.model"), "--format", "json"))
    fm = FidelityMatrix.from_dict(doc["fidelity"])
    assert fm.indices == (0,)


def test_pairing_zero_mode(capsys):
    out = ok(capsys, "pairing", "--n", "13", "--t", "0.3", "--tp", "0.2")
    _, rows = table(out)
    zero = [r for r in rows if r[0] == "zero_mode"]
    assert len(zero) == 1 and float(zero[0][7]) <= 1e-10
    assert sum(r[0] == "pair" for r in rows) == 6
    assert trailer(out)["verdict"] == "true"


def test_pairing_json_round_trip(capsys):
    doc = json.loads(ok(capsys, "pairing", *CHAIN12, "--format", "json"))
    rep = PairingReport.from_dict(doc["pairing"])
    assert rep.verdict and len(rep.pairs) == 6


def test_pairing_refuses_gain_loss(capsys):
    code, out, err = run(capsys, "pairing", "--n", "4", "--t", "1", "--gamma", "0.2")
    assert code == 1 and out == ""
    assert json.loads(err)["error"] == "usage"


def test_symmetrize_chain12(capsys):
    out = ok(capsys, "symmetrize", *CHAIN12)
    header, rows = table(out)
    assert header[:3] == ["n", "q", "log_q"] and len(rows) == 12
    np.testing.assert_allclose([float(r[1]) for r in rows], 2.0 ** (-np.arange(12) / 2), rtol=1e-14)
    assert trailer(out)["applicable"] == "true"


def test_symmetrize_refusal(capsys):
    out = ok(capsys, "symmetrize", "--model", str(MODELS / "ring4.model"))
    assert trailer(out) == {"applicable": "false", "reason": "closed chain"}
    assert table(out)[1] == []


def test_symmetrize_json_round_trip(capsys):
    doc = json.loads(ok(capsys, "symmetrize", *CHAIN12, "--format", "json"))
    cert = GaugeCertificate.from_dict(doc["certificate"])
    np.testing.assert_allclose(cert.offdiag, math.sqrt(0.005), rtol=1e-14)


# -- demo and sweep --------------------------------------------------------------


def test_demo_values(capsys):
    header, rows = table(ok(capsys, "demo", "--xi", "0,-2,1"))
    assert header == ["xi", "fidelity", "closed_form", "linearly_independent"]
    assert [float(r[1]) for r in rows] == [1.0, 0.0, pytest.approx(27 / 28, abs=1e-15)]
    assert [r[3] for r in rows] == ["false", "true", "true"]


def test_demo_needs_no_model(capsys):
    code, _, err = run(capsys, "demo", "--xi=-1", "--n", "3")
    assert code == 1 and json.loads(err)["error"] == "usage"


def test_demo_json(capsys):
    doc = json.loads(ok(capsys, "demo", "--xi=-1,0.5", "--format", "json"))
    for row in doc["demo"]:
        assert abs(row["fidelity"] - f12_closed_form(row["xi"])) <= 1e-12


def test_sweep_log_grid(capsys):
    header, rows = table(ok(capsys, "sweep", "--param", "tp", "--from", "0.5", "--to", "0.001", "--count", "4", "--log", "--n", "8", "--t", "1"))
    assert header == ["param", "value", "min_fidelity", "max_fidelity", "ep_suspected", "error"]
    assert len(rows) == 4
    hi = [float(r[3]) for r in rows]
    assert hi == sorted(hi) and hi[-1] > 0.9
    np.testing.assert_allclose([float(r[1]) for r in rows], [0.5, 0.5 * 0.002 ** (1 / 3), 0.5 * 0.002 ** (2 / 3), 0.001])


def test_sweep_threads_do_not_change_output(capsys, monkeypatch):
    argv = ["sweep", "--param", "gamma", "--from", "0", "--to", "0.8", "--count", "6", "--n", "6", "--t", "1"]
    serial = ok(capsys, *argv)
    monkeypatch.setenv(cli.THREADS_ENV, "4")
    assert ok(capsys, *argv) == serial


def test_sweep_partial_failure_rows(capsys, monkeypatch):
    from lattice_spectra import analysis

    real = analysis.eigs

    def flaky(m):
        if m.gains[0] == 0.4:
            raise SolverError("forced failure")
        return real(m)

    monkeypatch.setattr(analysis, "eigs", flaky)
    _, rows = table(ok(capsys, "sweep", "--param", "gamma", "--from", "0", "--to", "0.8", "--count", "3", "--n", "4", "--t", "1"))
    assert rows[1][2] == "nan" and "forced failure" in rows[1][5]
    assert rows[0][5] == "" and rows[2][5] == ""


def test_sweep_json(capsys):
    doc = json.loads(ok(capsys, "sweep", "--param", "t", "--from", "1", "--to", "2", "--count", "2", "--n", "4", "--format", "json"))
    assert [p["value"] for p in doc["sweep"]] == [1.0, 2.0]
    # t' is fixed before the sweep starts, so only the first point is Hermitian
    assert doc["sweep"][0]["max_fidelity"] <= 1e-10 < doc["sweep"][1]["max_fidelity"]


@pytest.mark.parametrize("extra", [["--count", "0"], ["--count", "3", "--log", "--from", "0"]])
def test_sweep_grid_errors(capsys, extra):
    argv = ["sweep", "--param", "tp", "--from", "0.5", "--to", "0.1", "--n", "4", "--t", "1"]
    if "--from" in extra:
        argv = ["sweep", "--param", "tp", "--to", "0.1", "--n", "4", "--t", "1"]
    code, out, _ = run(capsys, *argv, *extra)
    assert code == 1 and out == ""


# -- error contract ----------------------------------------------------------------


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["spectrum"],
        ["spectrum", "--n", "4"],
        ["spectrum", "--n", "x", "--t", "1"],
        ["spectrum", "--model", "m.model", "--n", "3"],
        ["spectrum", "--n", "4", "--t", "1", "--format", "xml"],
        ["demo"],
        ["spectrum", "--model", "/nonexistent/file.model"],
    ],
)
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1 and out == ""
    assert json.loads(err.strip().splitlines()[-1])["error"] == "usage"


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--n", "1", "--t", "1"],
        ["spectrum", "--n", "2", "--t", "1", "--bc", "closed"],
        ["spectrum", "--n", "3", "--t", "nan"],
    ],
)
def test_invalid_model(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    doc = json.loads(err)
    assert doc["error"] == "invalid_model" and doc["violations"]


def test_broken_model_file(capsys, tmp_path):
    path = tmp_path / "bad.model"
    path.write_text('{\n  "n_sites": 3,\n  "boundary": "open",\n  "forward_hops": [\n')
    code, out, err = run(capsys, "spectrum", "--model", str(path))
    assert code == 2 and out == ""
    assert json.loads(err)["line"] is not None


def test_schema_violation_names_the_field(capsys, tmp_path):
    path = tmp_path / "bad.model"
    path.write_text(json.dumps({"n_sites": 3, "boundary": "open", "uniform_t": 1, "uniform_tp": "x"}))
    code, out, err = run(capsys, "spectrum", "--model", str(path))
    assert code == 2 and out == ""
    assert json.loads(err)["field"]


def test_solver_failure(capsys, monkeypatch):
    def boom(model):
        raise SolverError("no convergence", worst_residual=float("nan"), estimates=[1 + 2j])

    monkeypatch.setattr(cli, "eigs", boom)
    code, out, err = run(capsys, "spectrum", *CHAIN12, "--out", "never-written.csv")
    assert code == 3 and out == ""
    doc = json.loads(err)
    assert doc["error"] == "solver" and doc["message"].startswith("no convergence")
    assert doc["worst_residual"] is None and doc["estimates"] == [[1.0, 2.0]]
    assert not os.path.exists("never-written.csv")


def test_out_file(capsys, tmp_path):
    target = tmp_path / "spec.csv"
    assert ok(capsys, "spectrum", *CHAIN12, "--out", str(target)) == ""
    assert target.read_text() == ok(capsys, "spectrum", *CHAIN12)


def test_subprocess_contract():
    good = subprocess_run("demo", "--xi", "0,-2,1")
    assert good.returncode == 0 and good.stderr == ""
    assert good.stdout.splitlines()[1:] == ["0,1,1,false", "-2,0,0,true", "1,0.9642857142857143,0.9642857142857143,true"]
    bad = subprocess_run("spectrum", "--n", "1", "--t", "1")
    assert bad.returncode == 2 and bad.stdout == ""
    usage = subprocess_run("spectrum")
    assert usage.returncode == 1 and usage.stdout == ""


def test_output_is_deterministic_across_processes():
    a = subprocess_run("fidelity", *CHAIN12, "--format", "json")
    b = subprocess_run("fidelity", *CHAIN12, "--format", "json", env={cli.THREADS_ENV: "3"})
    assert a.returncode == 0 and a.stdout == b.stdout


# -- golden files ------------------------------------------------------------------

GOLDEN_RUNS = {
    "chain12_spectrum.csv": ["spectrum", *CHAIN12],
    "chain12_densities.csv": ["densities", *CHAIN12],
    "chain12_symmetrize.csv": ["symmetrize", *CHAIN12],
    "triangle_spectrum.csv": ["spectrum", "--model", "models/triangle.model"],
    "ring4_spectrum.csv": ["spectrum", "--model", "models/ring4.model"],
    "n13_pairing.csv": ["pairing", "--n", "13", "--t", "0.3", "--tp", "0.2"],
    "demo.csv": ["demo", "--xi", "0,-2,1,-1"],
    "trend_sweep.csv": ["sweep", "--param", "tp", "--from", "0.5", "--to", "0.001", "--count", "4", "--log", "--n", "8", "--t", "1"],
    "ep5_spectrum.json": ["spectrum", "--model", "models/n5_ep.model", "--format", "json"],
}


@pytest.mark.parametrize("name", sorted(GOLDEN_RUNS))
def test_golden(name, capsys, monkeypatch):
    monkeypatch.chdir(ROOT)
    out = ok(capsys, *GOLDEN_RUNS[name])
    path = GOLDEN / name
    if os.environ.get("LATTICE_SPECTRA_REGEN_GOLDEN"):
        path.write_text(out, newline="")
    assert out == path.read_text()


def test_golden_values_agree_with_oracles():
    _, rows = table((GOLDEN / "chain12_spectrum.csv").read_text())
    exact = exact_constant_hopping(12, 0.1, 0.05).eigenvalues.real
    np.testing.assert_allclose([float(r[1]) for r in rows], exact, atol=1e-10)

    _, rows = table((GOLDEN / "ring4_spectrum.csv").read_text())
    z = np.array([complex(float(r[1]), float(r[2])) for r in rows])
    assert match_distance(z, np.array([1.25, -1.25, 0.75j, -0.75j])) <= 1e-10

    _, rows = table((GOLDEN / "demo.csv").read_text())
    assert [float(r[1]) for r in rows] == [1.0, 0.0, pytest.approx(27 / 28, abs=1e-15), pytest.approx(0.75, abs=1e-15)]

    _, rows = table((GOLDEN / "trend_sweep.csv").read_text())
    for r in rows:
        v = exact_constant_hopping(8, 1.0, float(r[1])).vectors
        f = np.abs(v.conj() @ v.T) ** 2
        np.fill_diagonal(f, 0)
        assert abs(f.max() - float(r[3])) <= 1e-10

    doc = json.loads((GOLDEN / "ep5_spectrum.json").read_text())
    spec = Spectrum.from_dict(doc["spectrum"])
    assert np.max(np.abs(spec.eigenvalues)) <= 1e-9
    assert trailer((GOLDEN / "chain12_densities.csv").read_text())["distinct_curves"] == "6"
