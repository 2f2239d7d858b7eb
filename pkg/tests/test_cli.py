import io
import json
import subprocess
import sys

import pytest

from twocenter3d.cli import EmptyInstance, ParseError, parse_instance, run_command


def _run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def _write_csv(path, P):
    path.write_text("\n".join(",".join(repr(float(v)) for v in p) for p in P) + "\n")
    return path


def test_parse_csv():
    inst = parse_instance(io.StringIO("0,0,0\n1,2,3"), "csv")
    assert inst.points.shape == (2, 3)
    assert inst.points[1].tolist() == [1, 2, 3]


def test_parse_json():
    inst = parse_instance(io.StringIO('{"points":[[0,0,0]]}'), "json")
    assert inst.points.shape == (1, 3)


def test_parse_missing_z():
    with pytest.raises(ParseError) as e:
        parse_instance(io.StringIO("0,0"), "csv")
    assert e.value.line == 1 and "z" in str(e.value)


def test_parse_empty():
    with pytest.raises(EmptyInstance):
        parse_instance(io.StringIO(""), "csv")


def test_parse_non_numeric():
    with pytest.raises(ParseError) as e:
        parse_instance(io.StringIO("0,0,0\n1,a,3"), "csv")
    assert e.value.line == 2


def test_decide_four_pairs(tmp_path, four_pairs):
    f = _write_csv(tmp_path / "four_pairs.csv", four_pairs)
    code, out, _ = _run(["decide", "--radius", 1, f])
    assert code == 0
    rep = json.loads(out)
    assert rep["outcome"]["variant"] == "ExactlyCritical"
    assert rep["schema"].startswith("twocenter3d.report/")
    code, out, _ = _run(["decide", "--radius", 0.99, f, "--check"])
    assert code == 1
    assert json.loads(out)["oracle_check"] == "pass"


def test_solve_tetra(tmp_path, tetra):
    f = _write_csv(tmp_path / "tetra.csv", tetra)
    code, out, _ = _run(["solve", "--algorithm", "bruteforce", f])
    assert code == 0
    assert json.loads(out)["solution"]["radius"] == pytest.approx(0.5, abs=1e-12)


def test_usage_errors(tmp_path):
    assert _run(["frobnicate"])[0] == 2
    assert _run(["decide", "nope.csv"])[0] == 2  # missing --radius
    assert _run(["decide", "--radius", 1, tmp_path / "missing.csv"])[0] == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("0,0\n")
    code, _, err = _run(["solve", bad])
    assert code == 2 and "line 1" in err


@pytest.mark.parametrize("generator", ["uniform", "clustered", "planted"])
@pytest.mark.parametrize("algorithm", ["cubic", "improved", "bruteforce"])
def test_verify_after_solve(tmp_path, generator, algorithm):
    inst = tmp_path / "inst.json"
    assert _run(["gen", "--generator", generator, "--n", 8, "--seed", 3, "--format", "json", "-o", inst])[0] == 0
    code, out, _ = _run(["solve", "--algorithm", algorithm, inst, "--check"])
    assert code == 0
    rep = json.loads(out)
    assert rep["oracle_check"] == "pass"
    sol = tmp_path / "sol.json"
    sol.write_text(out)
    code, out, _ = _run(["verify", inst, sol])
    assert code == 0 and json.loads(out)["result"] == "pass"


def test_verify_rejects_bad_solution(tmp_path, four_pairs):
    f = _write_csv(tmp_path / "p.csv", four_pairs)
    sol = tmp_path / "sol.json"
    sol.write_text(json.dumps({"c1": [1, 0, 0], "c2": [11, 0, 0], "radius": 0.5, "partition": [[0, 1], [2, 3]]}))
    code, out, _ = _run(["verify", f, sol])
    assert code == 1 and json.loads(out)["result"] == "fail"


def _strip_times(obj):
    if isinstance(obj, dict):
        return {k: _strip_times(v) for k, v in obj.items() if k not in ("wall_time", "micros")}
    if isinstance(obj, list):
        return [_strip_times(v) for v in obj]
    return obj


def test_determinism(tmp_path):
    inst = tmp_path / "inst.csv"
    _run(["gen", "--n", 10, "--seed", 5, "-o", inst])
    reports = [json.loads(_run(["solve", "--algorithm", "improved", "--seed", 2, inst])[1]) for _ in range(2)]
    assert _strip_times(reports[0]) == _strip_times(reports[1])
    _run(["gen", "--n", 10, "--seed", 5, "-o", tmp_path / "again.csv"])
    assert (tmp_path / "again.csv").read_bytes() == inst.read_bytes()


def test_bench_csv():
    code, out, _ = _run(["bench", "--n", 6, "--seeds", 1, "--algorithm", "cubic", "bruteforce"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,seed,algorithm,cells,M_vertices,guesses,micros,outcome"
    assert len(lines) == 3


def test_census_report():
    code, out, _ = _run(["census", "--trials", 2000, "--seed", 7, "--runs", 1])
    assert code == 0
    rep = json.loads(out)
    assert rep["lemma"]["violations"] == 0 and rep["lemma"]["short"] > 0
    assert rep["pair_intersections"]["max"] <= 3


def test_console_entry_point(tmp_path, four_pairs):
    f = _write_csv(tmp_path / "four.csv", four_pairs)
    res = subprocess.run([sys.executable, "-c", "from twocenter3d.cli import main; main()",
                          "decide", "--radius", "1", str(f)], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["outcome"]["variant"] == "ExactlyCritical"
