import csv
import io
import json
import subprocess
import sys

import jsonschema
import pytest

from ttscore.cli import main
from ttscore.encoder import exact_weighted_count, loads_weighted_dimacs
from ttscore.fixtures import parallel_2, unit_link
from ttscore.model import FaultModel, save_scenario
from ttscore.report import ScoreReport, load_schema


@pytest.fixture
def scen(tmp_path):
    def write(s, name="s.json"):
        path = tmp_path / name
        save_scenario(s, path)
        return str(path)
    return write


def call(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def check_schema(doc):
    jsonschema.validate(doc, load_schema())


def test_score_wmc(capsys, scen):
    code, out, err = call(capsys, "score", scen(unit_link()), "--method", "wmc")
    assert code == 0
    doc = json.loads(out)
    check_schema(doc)
    assert doc["score"] == pytest.approx(0.855, abs=1e-9)
    assert "wmc" in err


def test_score_monte_carlo(capsys, scen):
    path = scen(unit_link())
    argv = ["score", path, "--method", "monte-carlo", "--epsilon", "0.01", "--delta", "0.99", "--seed", "7",
            "--workers", "1"]
    code, out, _ = call(capsys, *argv)
    doc = json.loads(out)
    check_schema(doc)
    assert code == 0
    assert doc["parameters"]["n"] == 23026
    assert abs(doc["score"] - 0.855) <= 0.01
    _, again, _ = call(capsys, *argv)
    assert json.loads(again)["score"] == doc["score"]


def test_score_iterative_reports_interval(capsys, scen):
    s = parallel_2(p_crash=0.1, fault_model=FaultModel.PERMANENT)
    code, out, _ = call(capsys, "score", scen(s), "--method", "iterative", "--epsilon", "0.001")
    doc = json.loads(out)
    check_schema(doc)
    assert "score" not in doc
    assert doc["interval"]["lower"] <= 0.99 + 1e-12 <= doc["interval"]["upper"] + 2e-12
    assert doc["parameters"]["k_trace"]


def test_default_method_is_monte_carlo(capsys, scen):
    code, out, _ = call(capsys, "score", scen(unit_link()), "--n", "100", "--workers", "1")
    assert json.loads(out)["method"] == "monte-carlo"


def test_trace_dump(capsys, scen):
    code, _, err = call(capsys, "score", scen(unit_link()), "--method", "enumerate", "--trace")
    assert code == 0
    assert "0: u" in err


def test_invalid_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    save_scenario(unit_link(), bad)
    doc = json.loads(bad.read_text())
    doc["edges"][0]["p_crash"] = 1.5
    bad.write_text(json.dumps(doc))
    code, out, _ = call(capsys, "score", bad, "--method", "wmc")
    assert code != 0
    err = json.loads(out)["error"]
    assert err["type"] == "ScenarioValidationError"
    assert any("p_crash" in v for v in err["violations"])


def test_cap_exceeded_exit_code(capsys, scen):
    code, out, _ = call(capsys, "score", scen(unit_link()), "--method", "chain", "--cap", "1")
    assert code == 3
    assert json.loads(out)["error"]["type"] == "CapExceeded"


def test_compare_exact_engines(capsys, scen):
    code, out, _ = call(capsys, "compare", scen(unit_link()), "--methods", "enumerate,chain,wmc")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["method"] for r in rows] == ["enumerate", "chain", "wmc"]
    assert all(float(r["error"]) <= 1e-9 for r in rows)


def test_compare_with_monte_carlo(capsys, scen):
    code, out, _ = call(capsys, "compare", scen(unit_link()), "--methods", "enumerate,monte-carlo",
                        "--seed", "3", "--workers", "1")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[1]["error"]) <= 0.01


def test_generate_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    call(capsys, "generate", "--vertices", 4, "--seed", 1, "--out", a)
    call(capsys, "generate", "--vertices", 4, "--seed", 1, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    code, out, _ = call(capsys, "validate", a)
    assert code == 0 and json.loads(out)["valid"]


def test_reduce_then_score(capsys, tmp_path):
    cnf = tmp_path / "clause.cnf"
    cnf.write_text("p cnf 3 1\n1 2 3 0\n")
    out_path = tmp_path / "r.json"
    assert call(capsys, "reduce-3cnf", cnf, "--out", out_path)[0] == 0
    code, out, _ = call(capsys, "score", out_path, "--method", "enumerate")
    assert json.loads(out)["score"] == pytest.approx(0.125, abs=1e-12)


def test_emit_cnf(capsys, scen):
    code, out, _ = call(capsys, "emit-cnf", scen(unit_link()))
    wf = loads_weighted_dimacs(out)
    assert wf.gamma * exact_weighted_count(wf) == pytest.approx(0.855, abs=1e-9)


def test_validate_reports_violations(capsys, tmp_path):
    path = tmp_path / "v.json"
    save_scenario(unit_link(), path)
    doc = json.loads(path.read_text())
    doc["guarantee"] = 2
    path.write_text(json.dumps(doc))
    code, out, _ = call(capsys, "validate", path)
    assert code == 1
    assert any("guarantee" in v for v in json.loads(out)["violations"])


def test_report_invariant():
    with pytest.raises(Exception):
        ScoreReport("wmc", "sha256:" + "0" * 64, score=0.5, interval=(0.1, 0.2))


def test_console_entry_point(scen):
    proc = subprocess.run([sys.executable, "-m", "ttscore.cli", "score", scen(unit_link()), "--method", "enumerate"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["score"] == pytest.approx(0.855)
