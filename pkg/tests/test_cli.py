import json

import pytest

from rrkit.cli import main, run


@pytest.fixture
def files(tmp_path):
    cnf = tmp_path / "three.cnf"
    cnf.write_text("c three models\np cnf 2 1\n1 2 0\n")
    h = tmp_path / "h.cnf"
    h.write_text("p cnf 2 1\n1 2 0\n")
    f = tmp_path / "f.cnf"
    f.write_text("p cnf 2 1\n1 0\n")
    mat = tmp_path / "a.json"
    mat.write_text(json.dumps({"modulus": 101, "entries": [[1, 2], [3, 4]]}))
    return {"cnf": str(cnf), "h": str(h), "f": str(f), "mat": str(mat)}


def strip_runtime(report):
    return {k: v for k, v in report.items() if k != "runtime"}


def test_count_exact_three_models(files, capsys):
    assert main(["count-exact", files["cnf"], "--seed", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["outputs"]["value"] == 3
    assert set(report) == {"command", "args", "seed", "inputs_digest", "outputs", "version", "runtime"}


def test_missing_seed_is_drawn_and_echoed(files):
    code, report = run(["count-exact", files["cnf"]])
    assert code == 0 and isinstance(report["seed"], int) and 0 <= report["seed"] < 2**64


def test_audit_bounds_k4(capsys):
    main(["audit-bounds", "--k", "4", "--n", "20", "--seed", "0"])
    out = json.loads(capsys.readouterr().out)["outputs"]
    assert out["per_k"][0]["m"] == 576 and out["per_k"][0]["lying_gap"] == "48"
    assert out["pairs"][0]["certified"] and out["all_identities_hold"]


def test_perm_and_reduction_commands(files):
    _, rep = run(["perm-exact", files["mat"], "--seed", "1"])
    assert rep["outputs"]["value"] == 10
    _, rep = run(["rsr-perm", "--matrix", files["mat"], "--seed", "1"])
    assert rep["outputs"]["output"] == 10 and rep["outputs"]["rounds"] == 1
    _, rep = run(["rr-run", "--reduction", "perm-rsr", "--input", files["mat"], "--boost", "1",
                  "--fault", "0.05", "--seed", "3"])
    assert rep["outputs"]["queries"] == 24 * 3 and rep["outputs"]["success"]


def test_count_approx_report(files):
    _, rep = run(["count-approx", files["cnf"], "--factor", "2", "--delta", "0.1", "--seed", "2"])
    out = rep["outputs"]
    assert out["rounds"] == 1 and out["exact"] == 3 and out["repetitions"] == 24
    assert out["within_factor"] in (True, False)
    _, rep = run(["count-approx", files["f"], "--ratio", files["h"], "--seed", "2"])
    assert rep["outputs"]["exact"] == "2/3"


def test_am_sim_report():
    _, rep = run(["am-sim", "--k", "2", "--n", "12", "--sessions", "20", "--seed", "4"])
    out = rep["outputs"]
    assert out["m"] == 72 and set(out["per_check_failures"]) == {"1", "2", "3"}
    assert len(out["thresholds"]) == 2 and out["audit"]["pair"]["certified"]


def test_toolkit_error_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf 2 2\n1 0\n")
    assert main(["count-exact", str(bad), "--seed", "1"]) == 1
    assert "ParseError" in capsys.readouterr().err


def test_usage_errors_exit_two(capsys):
    for argv in (["no-such-command"], ["count-exact", "/no/such/file"], ["am-sim", "--fixture", "nope"]):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_no_json_mode(files, capsys):
    main(["count-exact", files["cnf"], "--no-json", "--seed", "1"])
    assert "value: 3" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["count-approx", "{cnf}", "--factor", "3/2"],
    ["rr-run", "--reduction", "perm-rsr", "--input", "{mat}", "--fault", "0.2", "--boost", "1"],
    ["am-sim", "--k", "2", "--n", "10", "--sessions", "10", "--merlin", "adversarial", "--spread"],
])
def test_same_seed_same_report_across_workers(files, argv):
    argv = [a.format(**files) for a in argv] + ["--seed", "12345"]
    _, one = run(argv + ["--workers", "1"])
    _, again = run(argv + ["--workers", "1"])
    _, two = run(argv + ["--workers", "2"])
    assert strip_runtime(one) == strip_runtime(again) == strip_runtime(two)
