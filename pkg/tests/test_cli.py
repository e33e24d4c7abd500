import json

import pytest

from logtree.cli import run_command


def run(capsys, *argv):
    status = run_command(list(argv))
    out = capsys.readouterr()
    return status, out.out, out.err


def test_predict(capsys):
    status, out, _ = run(capsys, "predict", "--model", "recursive", "--n", "404960")
    assert status == 0
    assert json.loads(out)["width_level"] == 12


def test_exact_profile_csv(capsys):
    status, out, _ = run(capsys, "exact-profile", "--model", "recursive", "--n", "4", "--format", "csv")
    assert status == 0
    assert out.splitlines() == ["n,k,value", "4,0,1", "4,1,11/6", "4,2,1", "4,3,1/6"]


def test_exact_profile_float_round_trip(capsys):
    status, out, _ = run(capsys, "exact-profile", "--model", "recursive", "--n", "4", "--format",
                         "csv", "--float")
    assert float(out.splitlines()[2].split(",")[2]) == 11 / 6


def test_oracle(capsys):
    status, out, _ = run(capsys, "oracle", "--model", "port", "--n", "3")
    assert json.loads(out) == {"[1,2]": "2/3", "[1,1,1]": "1/3"}


def test_exact_moments(capsys):
    status, out, _ = run(capsys, "exact-moments", "--model", "recursive", "--n", "3", "--format",
                         "csv", "--m", "2")
    assert "3,1,1/4" in out.splitlines()


def test_simulate_histogram(capsys):
    status, out, _ = run(capsys, "simulate", "--model", "recursive", "--n", "1", "--reps", "5",
                         "--format", "csv")
    assert out.splitlines() == ["value,freq", "1,5"]


def test_generate_levels(capsys):
    status, out, _ = run(capsys, "generate", "--model", "quad:d=2", "--n", "30")
    lines = out.splitlines()
    assert lines[0] == "level,count"
    assert sum(int(x.split(",")[1]) for x in lines[1:]) == 30


def test_series_counts(capsys):
    status, out, _ = run(capsys, "series", "--model", "mobile", "--n", "5", "--counts", "--format",
                         "json")
    assert json.loads(out)["tau"] == [0, 1, 1, 2, 7, 36]


def test_constants(capsys):
    status, out, _ = run(capsys, "constants", "--model", "mary:m=2,t=1")
    rec = json.loads(out)
    assert rec["v"] == "12/7" and rec["sigma2"] == "300/343"


@pytest.mark.parametrize("argv", [["bogus"], ["predict", "--model", "recursive"],
                                  ["predict", "--model", "recursive", "--n", "5", "--nope"],
                                  ["predict", "--model", "tree", "--n", "5"],
                                  ["simulate", "--model", "recursive", "--n", "10000000",
                                   "--reps", "1000"]])
def test_usage_errors(capsys, argv):
    status, _, err = run(capsys, *argv)
    assert status == 2
    assert err


def test_atomic_output(tmp_path, capsys):
    path = tmp_path / "p.json"
    assert run_command(["predict", "--model", "port", "--n", "100", "--out", str(path)]) == 0
    assert json.loads(path.read_text(encoding="utf-8"))["v"] == 0.5
    assert [p.name for p in tmp_path.iterdir()] == ["p.json"]


def test_gate_failure_status(tmp_path, capsys):
    from logtree.montecarlo import CONFIG
    cfg = json.loads(json.dumps(CONFIG))
    cfg["suites"]["quick"]["width"]["band"] = [2.0, 3.0]
    cfg_path = tmp_path / "gates.json"
    cfg_path.write_text(json.dumps(cfg), encoding="utf-8")
    out = tmp_path / "report.json"
    status = run_command(["gates", "--level", "quick", "--gate-config", str(cfg_path),
                          "--out", str(out)])
    assert status == 1
    rep = json.loads(out.read_text(encoding="utf-8"))
    assert not rep["passed"]


def test_gates_byte_identical_across_threads(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run_command(["gates", "--level", "quick", "--threads", "1", "--out", str(a)]) == 0
    assert run_command(["gates", "--level", "quick", "--threads", "4", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_threads_from_environment(monkeypatch):
    from logtree.montecarlo import default_threads
    monkeypatch.setenv("LOGTREE_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.setenv("LOGTREE_THREADS", "zero")
    assert default_threads() >= 1
