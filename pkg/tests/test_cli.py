import io
import json
import shutil
import subprocess
import sys
from importlib import resources
from pathlib import Path

from hompres.cli import main

DATA = Path(str(resources.files("hompres") / "data"))


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv):
    code, out, err = run("--json", *argv)
    return code, json.loads(out) if out else None, err


def d(name):
    return str(DATA / name)


def test_treedepth_prints_bare_number():
    code, out, _ = run("treedepth", d("p7.graph"))
    assert code == 0 and out.strip() == "3"
    code, out, _ = run("treewidth", d("grid3.graph"))
    assert out.strip() == "3"
    code, out, _ = run("longestpath", d("c5.graph"))
    assert out.strip() == "5"


def test_report_shape_and_hashes():
    code, rep, _ = run_json("treedepth", d("p7.graph"))
    assert code == 0 and set(rep) == {"command", "inputs", "results", "status"}
    assert rep["command"] == "treedepth" and rep["status"] == "ok"
    (inp,) = rep["inputs"]
    assert inp["path"].endswith("p7.graph") and len(inp["sha256"]) == 64
    code, rep, _ = run_json("--timing", "treedepth", d("p7.graph"))
    assert "seconds" in rep["timing"]


def test_flags_after_subcommand():
    code, rep, _ = run("treedepth", d("p7.graph"), "--json")
    assert json.loads(rep)["results"]


def test_pipeline_command():
    code, rep, _ = run_json("hpt", "pipeline", "--formula", d("triangle.fo"),
                            "--max-size", "3", "--verify-size", "3")
    assert code == 0
    res = rep["results"]
    assert res["equivalent"] is True and res["qr_psi"] == 3


def test_pipeline_failure_exit_code():
    code, rep, _ = run_json("hpt", "pipeline", "--formula", d("no_edge.fo"), "--max-size", "2",
                            "--verify-size", "2")
    assert code == 1 and rep["status"] == "failure"
    cex = rep["results"]["counterexample"]
    assert cex["A"]["relations"]["R"] == [] and cex["B"]["relations"]["R"]


def test_eval_and_check_preserved():
    code, out, _ = run("eval", "--formula", d("taut.fo"), "--structure", d("any.struct"))
    assert code == 0 and "true" in out.lower()
    code, rep, _ = run_json("check-preserved", d("no_edge.fo"), "--max-size", "2")
    assert code == 1 and rep["status"] == "failure"
    code, rep, _ = run_json("check-preserved", d("edge.fo"), "--max-size", "2")
    assert code == 0


def test_structure_core_and_mincores():
    code, rep, _ = run_json("core", d("c4.struct"))
    assert code == 0 and rep["results"]["core"]["size"] == 2
    code, rep, _ = run_json("mincores", d("k3.struct"), d("dc3.struct"), d("c4.struct"))
    # K3 is above both the directed triangle and the edge, which are incomparable
    assert code == 0 and rep["results"]["count"] == 2
    code, rep, _ = run_json("structure", d("any.struct"))
    assert rep["results"]["num_tuples"] == 2


def test_graph_commands():
    code, rep, _ = run_json("minor", d("k4.graph"), d("c5.graph"))
    assert code == 0 and rep["results"]["minor"] is False
    code, rep, _ = run_json("trichotomy", d("p7.graph"), "--ell", "2")
    assert code == 0 and rep["results"]["holds"] == ["btree_minor", "long_path"]


def test_formula_and_compile():
    code, rep, _ = run_json("formula", d("mixed.fo"))
    assert rep["results"]["qr"] == 1
    code, out, _ = run("compile", "--formula", d("edge.fo"), "--n", "2", "--max-fanin", "none")
    assert code == 0 and "output" in out
    code, out, _ = run("compile", "--formula", d("edge.fo"), "--n", "2", "--max-fanin", "x")
    assert code == 2


def test_sub_commands():
    code, rep, _ = run_json("sub", "solve", "--graph", d("p3.graph"), "--n", "2",
                            "--instance", d("p3_n2_yes.bits"), "--solver", "dp")
    assert code == 0 and rep["results"]["sub"] is True
    code, rep, _ = run_json("sub", "solve", "--graph", d("p3.graph"), "--n", "2",
                            "--instance", d("p3_n2_no.bits"), "--solver", "formula")
    assert rep["results"]["sub"] is False
    code, rep, _ = run_json("sub", "reduce-path", "--graph", d("k4.graph"), "--n", "2")
    assert code == 0 and rep["results"]["k"] == 4
    code, rep, _ = run_json("sub", "reduce-minor", "--graph", d("c5.graph"), "--minor",
                            d("btree2.graph"), "--n", "1")
    assert code == 0
    code, rep, _ = run_json("sub", "hpt-reduce", "--structure", d("dc3.struct"), "--n", "2",
                            "--formula", d("triangle.fo"))
    assert code == 0


def test_usage_errors(tmp_path):
    assert run("frobnicate")[0] == 2
    assert run("treedepth", str(tmp_path / "missing.graph"))[0] == 2
    bad = tmp_path / "bad.graph"
    bad.write_text("n 3\ne 0 7\n")
    code, _, err = run("treedepth", str(bad))
    assert code == 2 and "bad.graph" in err
    bad_fo = tmp_path / "bad.fo"
    bad_fo.write_text("EX x. (R(x,x)\n")
    assert run("formula", str(bad_fo))[0] == 2
    assert run("sub", "solve", "--graph", d("p3.graph"), "--n", "0")[0] == 2


def test_bound_exceeded_is_a_domain_failure():
    code, _, err = run("--max-bits", "8", "check-preserved", d("edge.fo"), "--max-size", "3")
    assert code == 1 and "bits" in err


def test_env_budget(monkeypatch):
    monkeypatch.setenv("HOMPRES_MAX_BITS", "8")
    code, _, _ = run("check-preserved", d("edge.fo"), "--max-size", "3")
    assert code == 1
    monkeypatch.setenv("HOMPRES_MAX_BITS", "lots")
    assert run("treedepth", d("p7.graph"))[0] == 2


def test_json_is_deterministic():
    a = run("--json", "selftest", "--level", "quick", "--seed", "7")
    b = run("--json", "selftest", "--level", "quick", "--seed", "7")
    assert a == b and a[0] == 0
    rep = json.loads(a[1])
    assert rep["results"]["ok"] and rep["results"]["seed"] == 7


def test_selftest_names_the_broken_invariant(tmp_path):
    fixtures = tmp_path / "fixtures"
    shutil.copytree(DATA, fixtures)
    p7 = fixtures / "p7.graph"
    p7.write_text(p7.read_text().replace("treedepth=3", "treedepth=4"))
    code, rep, _ = run_json("selftest", "--fixtures", str(fixtures))
    assert code == 1 and rep["status"] == "failure"
    inv = rep["results"]["invariants"]
    assert inv["fixture_expectations"]["failed"] >= 1
    assert "p7.graph" in inv["fixture_expectations"]["first_failure"]
    assert all(t["failed"] == 0 for k, t in inv.items() if k != "fixture_expectations")


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hompres", "treedepth", d("p7.graph")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.strip() == "3"
