import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from kvn import cli
from kvn import quantum_graph as qg
from kvn.errors import ConvergenceError, TolTooCoarse

STAR3 = {"vertices": ["c", "x", "y", "z"],
         "edges": [{"tail": "c", "head": h} for h in "xyz"]}
P2 = {"vertices": ["a", "b"], "edges": [{"tail": "a", "head": "b", "weight": 1}]}


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, doc in (("star3", STAR3), ("p2", P2)):
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(doc))
        out[name] = str(p)
    return out


def run(*argv):
    return cli.run(list(argv))


def test_graph_json(files):
    code, text = run("graph", "--input", files["p2"], "--format", "json")
    assert code == 0
    doc = json.loads(text)
    assert doc["tables"]["L"] == [[1, -1], [-1, 1]]
    assert doc["provenance"]["tool"] == "kvn"


def test_missing_file_exit_2(tmp_path):
    code, text = run("graph", "--input", str(tmp_path / "nope.json"))
    assert code == 2 and "cannot read" in text


def test_csv_and_json_agree(files):
    _, js = run("graph", "--input", files["star3"], "--format", "json")
    _, cs = run("graph", "--input", files["star3"], "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(cs)))
    assert list(rows[0]) == list(cli.CSV_COLUMNS)
    doc = json.loads(js)
    want = [r["value"] for r in doc["results"] if r["quantity"] == "eigenvalue_L"]
    got = [float(r["value"]) for r in rows if r["quantity"] == "eigenvalue_L"]
    np.testing.assert_allclose(got, want, rtol=1e-11, atol=1e-12)


def test_qg_kernel_star(files):
    code, text = run("qg", "kernel", "--input", files["star3"], "--extension", "krein")
    assert code == 0
    assert "kernel_dim: 4, |V|: 4, margin: 0, verdict: PASS" in text


def test_qg_semigroup_krein_violates():
    code, text = run("qg", "semigroup", "--extension", "krein", "--t", "0.5")
    assert "positivity[0.5]: VIOLATED" in text
    assert code == 0  # the expected outcome for the Krein condition


def test_qg_spectrum_neumann():
    code, text = run("qg", "spectrum", "--extension", "friedrichs", "--mesh", "64", "-k", "3",
                     "--format", "json")
    assert code == 0
    doc = json.loads(text)
    vals = [r["value"] for r in doc["results"] if r["quantity"] == "eigenvalue"]
    np.testing.assert_allclose(vals, [0, 9.87, 39.48], atol=0.05)
    assert all(r["verdict"] == "PASS" for r in doc["results"] if r["quantity"] == "order")


def test_qg_probe_seeded(files):
    code, text = run("qg", "probe", "--input", files["star3"], "--seed", "1", "--mesh", "16")
    assert code == 0 and "random SPD (seed 1)" in text


def test_lambda_file(tmp_path, files):
    lam = tmp_path / "lam.json"
    lam.write_text(json.dumps({"lambda": [[1, -1], [-1, 1]]}))
    code, text = run("qg", "kernel", "--input", files["p2"], "--extension", f"lambda:{lam}",
                     "--mesh", "16")
    assert code == 0 and "kernel_dim: 2" in text
    code, _ = run("qg", "kernel", "--extension", "lambda:" + str(tmp_path / "none.json"))
    assert code == 2


def test_interval_commands():
    code, text = run("interval", "--kind", "krein", "-k", "4", "--format", "json")
    assert code == 0
    vals = [r["value"] for r in json.loads(text)["results"] if r["quantity"] == "eigenvalue"]
    np.testing.assert_allclose(vals, [0, 0, 39.478, 80.76], atol=5e-3)
    code, text = run("interval", "--kind", "robin", "--q", "-1", "-k", "1", "--format", "json")
    vals = [r["value"] for r in json.loads(text)["results"] if r["quantity"] == "eigenvalue"]
    assert code == 0 and vals[0] < 0


def test_wentzell_command():
    code, text = run("wentzell", "--eta2", "1", "--extension", "krein", "--mesh", "64", "-k", "5")
    assert code == 0
    assert "kernel_dim: 2" in text
    for name in ("krein_below_friedrichs", "reduced_krein_dominates"):
        assert f"{name}:" in text
    assert "FAIL" not in text
    code, text = run("wentzell", "--eta2", "0")
    assert code == 2 and "strictly positive" in text


def test_compare_command(files):
    code, text = run("compare", "--input", files["star3"], "--mesh", "16", "-k", "6")
    assert code == 0 and text.count("verdict: PASS") == 8


def test_rerun_is_byte_identical(files):
    a = run("compare", "--input", files["star3"], "--mesh", "16", "--format", "json")
    b = run("compare", "--input", files["star3"], "--mesh", "16", "--format", "json")
    assert a == b
    assert "timestamp" not in a[1]


def test_source_date_epoch(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    _, text = run("graph", "--format", "json")
    assert json.loads(text)["provenance"]["timestamp"] == "1970-01-01T00:00:00+00:00"


def test_json_uses_17_digits():
    _, text = run("interval", "--kind", "dirichlet", "-k", "1", "--format", "json")
    assert "9.8696044010893580" in text or "9.869604401089358" in text
    vals = [r["value"] for r in json.loads(text)["results"] if r["quantity"] == "eigenvalue"]
    assert vals[0] == np.pi**2


def test_out_file(tmp_path):
    out = tmp_path / "r.csv"
    code, text = run("graph", "--format", "csv", "--out", str(out))
    assert code == 0 and text == ""
    assert out.read_text().startswith("quantity,k,value")


def test_exit_codes_for_failures(monkeypatch, files):
    monkeypatch.setattr(qg, "kernel_dimension", lambda *a, **k: 3)
    assert run("qg", "kernel", "--input", files["star3"], "--extension", "krein")[0] == 1

    def coarse(*a, **k):
        raise TolTooCoarse("ambiguous")
    monkeypatch.setattr(qg, "kernel_dimension", coarse)
    code, text = run("qg", "kernel")
    assert code == 4 and "--tol" in text

    def diverge(*a, **k):
        raise ConvergenceError("no luck")
    monkeypatch.setattr(qg, "kernel_dimension", diverge)
    assert run("qg", "kernel")[0] == 3


def test_tol_flag_reaches_kernel_detection():
    # a threshold sitting on the first nonzero eigenvalue is ambiguous
    code, _ = run("qg", "kernel", "--extension", "friedrichs", "--mesh", "16", "--tol", "2.5e-3")
    assert code == 4


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "kvn.cli", "graph"], capture_output=True,
                          text=True, check=False)
    assert proc.returncode == 0 and "kernel_dim_L" in proc.stdout
