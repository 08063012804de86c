import csv
import io
import json
import subprocess
import sys

import pytest

from implicert.cli import main, run


@pytest.fixture
def models(tmp_path):
    paths = {}
    for name, src in {
        "parity": "(xor x3 x7) d=10",
        "or3": "(or x0 x1 x2) d=3",
        "const": "(const +1) d=4",
    }.items():
        p = tmp_path / f"{name}.sexp"
        p.write_text(src + "\n")
        paths[name] = str(p)
    return paths


def report(argv, capsys):
    code, rep = run(argv)
    out = capsys.readouterr().out
    assert code == 0, out
    return rep


def test_certify_parity(models, capsys):
    rep = report(["certify", "--model", models["parity"], "--instance", "1010110010",
                  "--epsilon", "0.1", "--delta", "0.1", "--depth", "2", "--mode", "exact",
                  "--seed", "7"], capsys)
    cert = rep["results"]["certificate"]
    assert cert["verdict"] == "certificate"
    assert cert["features"] == [3, 7]
    assert cert["values"] == [-1, -1]
    assert cert["empirical_error"] == 0.0
    assert cert["queries"] > 0
    assert rep["schema_version"] == "1"
    assert rep["seed"] == 7


def test_certify_constant_depth_zero(models, capsys):
    rep = report(["certify", "--model", models["const"], "--instance", "0110", "--depth", "0"], capsys)
    assert rep["results"]["certificate"]["features"] == []
    assert rep["results"]["certificate"]["verdict"] == "certificate"


def test_bottom_is_not_a_failure(models, capsys):
    rep = report(["certify", "--model", models["parity"], "--instance", "1010110010",
                  "--depth", "1", "--mode", "exact"], capsys)
    assert rep["results"]["certificate"]["verdict"] == "bottom"


def test_certify_with_baseline(models, capsys):
    rep = report(["certify", "--model", "(xor x4 x5) d=6", "--instance", "101100",
                  "--depth", "2", "--mode", "exact", "--baseline"], capsys)
    assert rep["results"]["baseline"]["size"] == 6
    assert rep["results"]["certificate"]["size"] == 2


@pytest.mark.parametrize("argv", [
    ["certify", "--model", "(xor x3 x7) d=10", "--instance", "101", "--depth", "2"],
    ["certify", "--model", "(xor x3 x7 d=10", "--instance", "1010110010", "--depth", "2"],
    ["certify", "--model", "(xor x3 x7) d=10", "--instance", "1010110010"],
    ["certify", "--model", "(xor x3 x7) d=10", "--instance", "1010110010", "--depth", "2",
     "--epsilon", "1.5"],
    ["bench", "parity", "--grid", ""],
    ["oracle", "score", "--model", "x0 d=2"],
    ["oracle", "dt-complexity", "--model", "(const +1) d=15"],
    ["frobnicate"],
])
def test_usage_and_validation_errors_exit_1(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err


def test_syntax_error_reports_position(capsys):
    assert main(["oracle", "ns", "--model", "(and x1\n (nope x2)) d=3"]) == 1
    assert "line 2, column 3" in capsys.readouterr().err


@pytest.mark.parametrize("argv, value", [
    (["oracle", "dt-complexity", "--model", "OR3", "--epsilon", "0"], 3),
    (["oracle", "avg-cert-complexity", "--model", "OR3", "--epsilon", "0"], 1.25),
    (["oracle", "ns", "--model", "CONST", "--p", "0.3"], 0.0),
    (["oracle", "cert-complexity", "--model", "OR3", "--instance", "000"], 3),
    (["oracle", "precision", "--model", "OR3", "--instance", "000", "--cert", "0,1"], 0.5),
])
def test_oracle_values(argv, value, models, capsys):
    argv = [models["or3"] if a == "OR3" else models["const"] if a == "CONST" else a for a in argv]
    rep = report(argv, capsys)
    assert rep["results"]["value"] == pytest.approx(value, abs=1e-12)


def test_oracle_score_and_greedy_tree(models, capsys):
    rep = report(["oracle", "score", "--model", models["parity"], "--feature", "3", "--p", "0.1"], capsys)
    assert rep["results"]["value"] == pytest.approx(0.045)
    rep = report(["oracle", "greedy-tree", "--model", models["parity"], "--depth", "2"], capsys)
    assert rep["results"]["value"]["feature"] == 3
    assert rep["results"]["dsl"].startswith("(tree 3 (tree 7")


def test_bench_parity_exact(capsys):
    rep = report(["bench", "parity", "--grid", "6,8,10", "--mode", "exact"], capsys)
    table = rep["results"]["table"]
    assert [r["implicit_size_max"] for r in table] == [2, 2, 2]
    assert [r["baseline_size_min"] for r in table] == [6, 8, 10]
    assert [r["exact_certificate_complexity"] for r in table] == [2, 2, 2]
    assert all(r["implicit_bottom_rate"] == 0 for r in table)


def test_bench_parity_monte_carlo(capsys):
    rep = report(["bench", "parity", "--grid", "6", "--mode", "mc", "--seeds", "50"], capsys)
    assert rep["results"]["table"][0]["implicit_size2_rate"] >= 0.9


def test_bench_csv(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    assert main(["bench", "parity", "--grid", "6", "--format", "csv", "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert rows[0]["d"] == "6"
    assert rows[0]["baseline_size_min"] == "6"


def test_certify_batch(models, tmp_path, capsys):
    inst = tmp_path / "inst.txt"
    inst.write_text("1010110010\n0001000100\n")
    rep = report(["certify-batch", "--model", models["parity"], "--instances", str(inst),
                  "--depth", "2", "--mode", "exact"], capsys)
    assert rep["results"]["summary"]["bottom_rate"] == 0
    assert [r["features"] for r in rep["results"]["instances"]] == [[3, 7], [3, 7]]
    rep = report(["certify-batch", "--model", models["or3"], "--depth", "3", "--mode", "exact"], capsys)
    assert rep["results"]["summary"]["instances"] == 8


def test_report_determinism_and_replay(models, capsys):
    argv = ["certify", "--model", "(maj x0 (xor x1 x2) x5) d=6", "--instance", "101101",
            "--depth", "3", "--seed", "11", "--eta", "0.2"]
    a = report(argv, capsys)
    b = report(argv, capsys)
    assert json.dumps(a["results"], sort_keys=True) == json.dumps(b["results"], sort_keys=True)
    job = a["job"]
    replay = ["certify", "--model", job["model"], "--instance", job["instance"], "--depth",
              str(job["depth"]), "--seed", str(job["seed"]), "--eta", str(job["eta"]),
              "--epsilon", str(job["epsilon"]), "--delta", str(job["delta"])]
    c = report(replay, capsys)
    assert c["results"] == a["results"]


def test_seed_env_fallback(models, monkeypatch, capsys):
    monkeypatch.setenv("IMPLICERT_SEED", "99")
    rep = report(["certify", "--model", models["parity"], "--instance", "1010110010", "--depth", "2"], capsys)
    assert rep["seed"] == 99
    assert rep["results"]["params"]["seed"] == 99


def test_selftest(capsys):
    rep = report(["selftest"], capsys)
    assert rep["results"]["passed"]


def test_module_entry_point(models):
    proc = subprocess.run(
        [sys.executable, "-m", "implicert", "oracle", "ns", "--model", models["const"], "--p", "0.3"],
        capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["value"] == 0.0


def test_threads_do_not_change_results(capsys):
    argv = ["certify-batch", "--model", "(maj x0 (xor x1 x2) x5) d=6", "--depth", "3",
            "--eta", "0.2", "--seed", "4"]
    serial = report(argv + ["--threads", "1"], capsys)["results"]
    parallel = report(argv + ["--threads", "4"], capsys)["results"]
    serial["params"].pop("threads"), parallel["params"].pop("threads")
    assert serial == parallel
