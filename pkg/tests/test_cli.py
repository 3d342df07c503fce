import io
import json
import subprocess
import sys
from pathlib import Path

from deskcat import cli, kernelcalc, scenario


def write(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc), encoding="utf-8")
    return str(p)


TRACE = {"kernels": {"K": {"matrix": [[5, 1], [2, 7]]}},
         "tasks": [{"op": "trace", "args": ["K"], "expect": {"value": "12/1"}}]}

MIXED = {
    "groups": {"S3": "S3", "C2": {"cyclic": 2}},
    "groupoids": {"BS3": {"classifying": "S3"}, "X": {"discrete": ["a", "b"]}, "BC2": {"classifying": "C2"}},
    "maps": {"id": {"dom": "BS3", "cod": "BS3"}},
    "kernels": {"I": {"identity": "BS3"}, "D": {"left": "X", "right": "X", "dims": [[1, 2], [0, 3]]}},
    "tasks": [
        {"op": "tr_frob", "args": ["BS3", "id"], "expect": {"dim": 3}},
        {"op": "trace_comparison", "args": ["D"], "expect": {"ok": True, "dim": 4}},
        {"op": "trace", "args": ["I"], "expect": {"dim": 3}},
        {"op": "omega", "args": ["BC2"]},
        {"op": "convolve", "args": ["D", "D"], "expect": {"dims": [[1, 8], [0, 9]]}},
    ],
}


def test_trace_example(tmp_path):
    out = io.StringIO()
    code, rep = cli.run_scenario(write(tmp_path, TRACE), stream=out)
    assert code == 0
    assert rep["tasks"][0]["result"] == {"value": "12/1"}
    assert "12/1" in out.getvalue() and " ms " in out.getvalue()


def test_empty_task_list(tmp_path):
    out = io.StringIO()
    code, rep = cli.run_scenario(write(tmp_path, {"tasks": []}), json_out=True, stream=out)
    assert code == 0 and rep == {"status": "ok", "tasks": []}
    assert json.loads(out.getvalue()) == rep


def test_undeclared_name(tmp_path, capsys):
    doc = {"tasks": [{"op": "trace", "args": ["nope"]}]}
    code, rep = cli.run_scenario(write(tmp_path, doc), stream=io.StringIO())
    assert code == 1 and rep is None
    assert "'nope'" in capsys.readouterr().err


def test_parse_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json", encoding="utf-8")
    assert cli.run_scenario(str(p), stream=io.StringIO())[0] == 1
    assert cli.run_scenario(str(tmp_path / "missing.json"), stream=io.StringIO())[0] == 1
    doc = {"tasks": [{"op": "frobnicate", "args": []}]}
    assert cli.run_scenario(write(tmp_path, doc), stream=io.StringIO())[0] == 1


def test_validation_error_is_input_error(tmp_path):
    doc = {"enriched": {"C": {"coeff": "boolean", "objects": ["a", "b", "c"],
                              "hom": [[1, 1, 0], [0, 1, 1], [0, 0, 1]]}}, "tasks": []}
    assert cli.run_scenario(write(tmp_path, doc), stream=io.StringIO())[0] == 1


def test_mismatch_exit_2(tmp_path, capsys):
    doc = json.loads(json.dumps(TRACE))
    doc["tasks"][0]["expect"] = {"value": "13/1"}
    code, rep = cli.run_scenario(write(tmp_path, doc), json_out=True, stream=io.StringIO())
    assert code == 2 and rep["status"] == "fail"
    assert "expected" in capsys.readouterr().err


def test_mixed_scenario(tmp_path):
    code, rep = cli.run_scenario(write(tmp_path, MIXED), json_out=True, stream=io.StringIO())
    assert code == 0, rep
    assert rep["tasks"][3]["result"]["invertible"] is True


def test_report_deterministic_and_sorted(tmp_path):
    path = write(tmp_path, MIXED)
    outs = []
    for parallel in (False, False, True):
        s = io.StringIO()
        cli.run_scenario(path, json_out=True, parallel=parallel, stream=s)
        outs.append(s.getvalue())
    assert outs[0] == outs[1] == outs[2]
    doc = json.loads(outs[0])
    assert outs[0] == scenario.dumps(doc)
    assert "seconds" not in outs[0]


def test_timing_flag(tmp_path):
    s = io.StringIO()
    cli.run_scenario(write(tmp_path, TRACE), json_out=True, timing=True, stream=s)
    assert "seconds" in json.loads(s.getvalue())["tasks"][0]


def test_limits(tmp_path, monkeypatch):
    doc = {"groupoids": {"X": {"discrete": list(range(10))}}, "tasks": []}
    path = write(tmp_path, doc)
    assert cli.main(["run", path]) == 0
    assert cli.main(["run", path, "--limits", "carrier=5"]) == 1
    monkeypatch.setenv("DESKCAT_LIMITS", "carrier=5")
    assert cli.main(["run", path]) == 1
    assert cli.main(["run", path, "--limits", "carrier=20"]) == 0
    assert cli.main(["run", path, "--limits", "carrier"]) == 1
    assert cli.parse_limits("group=7")["group"] == 7


def test_selftest_passes(tmp_path):
    out = io.StringIO()
    assert cli.selftest(15, 0, str(tmp_path), out) == 0
    lines = out.getvalue().splitlines()
    assert lines[-1] == "selftest passed"
    assert all(l.rstrip().endswith("15/15") for l in lines[:-1])


def test_selftest_deterministic(tmp_path):
    a, b = io.StringIO(), io.StringIO()
    cli.selftest(5, 3, str(tmp_path), a)
    cli.selftest(5, 3, str(tmp_path), b)
    assert a.getvalue() == b.getvalue()


def test_selftest_size_zero(tmp_path):
    out = io.StringIO()
    assert cli.selftest(0, 0, str(tmp_path), out) == 0
    assert "0/0" in out.getvalue()
    assert cli.main(["selftest", "--corpus-size", "-1"]) == 1


def test_mutation_is_caught(tmp_path, monkeypatch):
    orig = kernelcalc.convolve
    monkeypatch.setattr(kernelcalc, "convolve", lambda A, B: orig(B, A))
    out = io.StringIO()
    assert cli.selftest(20, 0, str(tmp_path), out) == 2
    text = out.getvalue()
    first = text.splitlines()[0]
    assert first.startswith("convolution associativity") and not first.endswith("20/20")
    assert "FAIL" in text
    cex = tmp_path / "counterexample_0.json"
    assert cex.exists()
    code, rep = cli.run_scenario(str(cex), json_out=True, stream=io.StringIO())
    assert code == 2
    # the counterexample is minimized: no set can be shrunk further
    doc = json.loads(cex.read_text())
    assert sum(len(v["discrete"]) for v in doc["groupoids"].values()) <= 8
    # and it passes once the mutation is gone
    monkeypatch.setattr(kernelcalc, "convolve", orig)
    assert cli.run_scenario(str(cex), stream=io.StringIO())[0] == 0


def test_module_entry_point(tmp_path):
    path = write(tmp_path, TRACE)
    r = subprocess.run([sys.executable, "-m", "deskcat", "run", path, "--json"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["tasks"][0]["result"]["value"] == "12/1"


TOUR = Path(__file__).resolve().parent.parent / "demos" / "scenarios" / "tour.json"


def test_tour_covers_every_task():
    code, rep = cli.run_scenario(str(TOUR), json_out=True, stream=io.StringIO())
    assert code == 0
    assert {t["op"] for t in rep["tasks"]} == set(cli.TASKS)
    assert "Infinity" not in scenario.dumps(rep)


def test_beck_chevalley_failure_exit_2(tmp_path):
    doc = {"groupoids": {"pt": {"discrete": ["*"]}, "Y": {"discrete": [1, 2]}},
           "kernels": {"h": {"left": "Y", "right": "pt", "dims": [[1], [1]]}, "I": {"identity": "pt"}},
           "tasks": [{"op": "beck_chevalley", "args": ["h", "I", "h", "I"]}]}
    code, rep = cli.run_scenario(write(tmp_path, doc), json_out=True, stream=io.StringIO())
    assert code == 2
    assert rep["tasks"][0]["result"]["failure"]["dims"] == [2, 1]
