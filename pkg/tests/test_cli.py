import io
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings

from setlat.duality import dual_objective, primal_value, psep_identity, solve_strong
from setlat.errors import VerificationError
from setlat.fixtures import psep_fixture, running_instance
from setlat.io import InputError, dumps, emit, load_document, parse_document, parse_problem
from setlat.io import cli
from setlat.maps import DualPair
from strategies import instances


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run_command(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def running_doc():
    return emit(running_instance())


def test_running_fixture_loads(tmp_path, running_doc):
    inst = parse_problem(write(tmp_path, "running.json", running_doc))
    assert (inst.n, inst.q, inst.m) == (1, 2, 1)


def test_numbers_are_decimal_strings(running_doc):
    assert running_doc["f"]["pieces"][0]["c"] == ["0.0", "0.0"]
    assert list(running_doc) == ["version", "kind", "name", "C", "D", "f", "g"]


def test_psep_fixture_round_trips(tmp_path):
    ps = psep_fixture()
    doc = load_document(write(tmp_path, "psep.json", emit(ps)))
    again = doc.payload
    assert again.N == 2
    assert np.array_equal(again.instance.f.pieces[0].F, ps.instance.f.pieces[0].F)
    rows, ref = psep_identity(again), psep_identity(ps)
    assert len(rows) == len(ref)
    assert all(np.array_equal(a[0], b[0]) and a[1:] == b[1:] for a, b in zip(rows, ref))


def _canonical(inst):
    report, delta = solve_strong(inst)
    H, h = report.p.halfspaces
    pair = delta.pairs[0] if delta.pairs else DualPair(np.zeros(inst.m), inst.C.dual().generators[0])
    return H, h, [e.offset for e in delta.entries], dual_objective(inst, pair).halfspaces


def _bitwise_equal(a, b):
    if isinstance(a, tuple) or isinstance(a, list):
        return len(a) == len(b) and all(_bitwise_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


@settings(max_examples=15, deadline=None)
@given(instances())
def test_round_trip_is_bit_for_bit(inst):
    doc = parse_document(json.loads(dumps(emit(inst))))
    assert _bitwise_equal(_canonical(inst), _canonical(doc.payload))
    assert dumps(emit(doc.payload)) == dumps(emit(inst))


def test_upper_set_violation(tmp_path, running_doc):
    running_doc["f"]["pieces"][0]["Q_rays"] = [["1.0", "0.0"]]
    code, _, err = run(["solve", str(write(tmp_path, "bad.json", running_doc))])
    assert code == 1
    assert json.loads(err)["code"] == "UPPER_SET_VIOLATION"
    assert json.loads(err)["where"] == "f.pieces[0].Q_rays"


def test_normal_outside_dual_cone(tmp_path, running_doc):
    piece = running_doc["f"]["pieces"][0]
    del piece["Q_vertices"], piece["Q_rays"]
    piece["Q_halfspaces"] = {"A": [["1.0", "-1.0"]], "b": ["0.0"]}
    code, _, err = run(["solve", str(write(tmp_path, "bad.json", running_doc))])
    assert code == 1 and json.loads(err)["code"] == "NORMAL_OUTSIDE_DUAL_CONE"


def test_dimension_mismatch(tmp_path, running_doc):
    running_doc["f"]["pieces"][0]["c"] = ["0.0", "0.0", "0.0"]
    code, _, err = run(["solve", str(write(tmp_path, "bad.json", running_doc))])
    assert code == 1 and json.loads(err)["code"] == "DIMENSION_MISMATCH"
    assert json.loads(err)["where"] == "f.pieces[0].c"


def test_schema_violations(tmp_path, running_doc):
    bad = tmp_path / "broken.json"
    bad.write_text('{"version": "1.0",\n "kind": }')
    code, _, err = run(["solve", str(bad)])
    assert code == 1 and json.loads(err)["code"] == "SCHEMA_VIOLATION"
    assert json.loads(err)["where"].startswith("line 2")
    running_doc["extra"] = 1
    code, _, err = run(["solve", str(write(tmp_path, "extra.json", running_doc))])
    assert json.loads(err)["where"] == "extra"
    del running_doc["extra"]
    running_doc["version"] = "0.1"
    code, _, err = run(["solve", str(write(tmp_path, "v.json", running_doc))])
    assert code == 1 and json.loads(err)["where"] == "version"


def test_unknown_flag_and_missing_file():
    code, _, err = run(["solve", "--bogus", "x.json"])
    assert code == 1 and json.loads(err)["code"] == "USAGE"
    code, _, err = run(["solve", "/nonexistent/x.json"])
    assert code == 1 and json.loads(err)["code"] == "FILE_ERROR"


def test_solve_reports_orthant(tmp_path, running_doc):
    code, out, _ = run(["solve", str(write(tmp_path, "r.json", running_doc))])
    assert code == 0
    res = json.loads(out)
    assert res["tolerances"]["geom"] == "1e-09"
    p = res["result"]["p"]
    assert sorted(map(tuple, p["halfspaces"]["A"])) == [("0.0", "1.0"), ("1.0", "0.0")]
    assert p["halfspaces"]["b"] == ["0.0", "0.0"]
    assert res["result"]["strong"] is True and len(res["result"]["delta"]) == 2


def test_segment_example_solution_check(tmp_path):
    path = tmp_path / "seg.json"
    assert run(["example", "segment", "--grid", "0:5:0.1", "--out", str(path)])[0] == 0
    code, out, _ = run(["saddle", str(path), "--xbar", "0;3"])
    assert code == 0 and json.loads(out)["result"]["verdict"] == "solution"
    code, out, _ = run(["saddle", str(path), "--xbar", "0"])
    assert json.loads(out)["result"]["verdict"] == "not"


def test_verify_psep_exits_zero(tmp_path):
    path = tmp_path / "psep.json"
    run(["example", "psep", "--out", str(path)])
    code, out, _ = run(["verify", str(path)])
    assert code == 0 and json.loads(out)["result"]["passed"] is True


def test_verify_segment_and_running(tmp_path, running_doc):
    seg = tmp_path / "seg.json"
    run(["example", "segment", "--out", str(seg)])
    assert run(["verify", str(seg)])[0] == 0
    assert run(["verify", str(write(tmp_path, "r.json", running_doc))])[0] == 0


def test_scalarize_and_dual(tmp_path, running_doc):
    path = str(write(tmp_path, "r.json", running_doc))
    code, out, _ = run(["scalarize", path, "--zstar", "1,2", "--grid", "0:1:0.5"])
    table = json.loads(out)["result"]["table"]
    assert [row["phi"] for row in table] == ["0.0", "1.5", "3.0"]
    code, out, _ = run(["dual", path, "--zstar", "1,0", "--ystar", "0", "--check-delta"])
    assert code == 0 and json.loads(out)["result"]["in_delta"] is True
    code, _, err = run(["dual", path, "--zstar=-1,0"])
    assert code == 1 and json.loads(err)["code"] == "NORMAL_OUTSIDE_DUAL_CONE"


def test_saddle_on_problem(tmp_path, running_doc):
    path = str(write(tmp_path, "r.json", running_doc))
    code, out, _ = run(["saddle", path])
    assert code == 0 and json.loads(out)["result"]["saddle"] is True
    code, out, _ = run(["saddle", path, "--xbar", "0", "--vbar", "0|0.5,0.5"])
    res = json.loads(out)["result"]
    assert res["saddle"] is False and res["inf_sup_equal"] is False


def test_assertion_failure_exits_two(tmp_path, running_doc, monkeypatch):
    def broken(*args, **kwargs):
        raise VerificationError("forced", witness={"x": [1.0]})

    monkeypatch.setattr(cli, "solve_strong", broken)
    code, _, err = run(["solve", str(write(tmp_path, "r.json", running_doc))])
    assert code == 2
    assert json.loads(err)["witness"] == {"x": ["1.0"]}


def test_tolerance_is_embedded(tmp_path, running_doc):
    code, out, _ = run(["solve", str(write(tmp_path, "r.json", running_doc)), "--tol", "1e-6"])
    assert json.loads(out)["tolerances"]["report"] == "1e-06"


def test_input_error_carries_code():
    with pytest.raises(InputError) as exc:
        parse_document({"version": "1.0", "kind": "nothing"})
    assert exc.value.code == "SCHEMA_VIOLATION"


@pytest.mark.skipif(shutil.which("setlat") is None, reason="console script not installed")
def test_console_script(tmp_path):
    path = tmp_path / "running.json"
    subprocess.run(["setlat", "example", "running", "--out", str(path)], check=True)
    done = subprocess.run(["setlat", "solve", str(path)], capture_output=True, text=True)
    assert done.returncode == 0 and json.loads(done.stdout)["kind"] == "result"
    done = subprocess.run([sys.executable, "-m", "setlat.io.cli", "bogus"], capture_output=True, text=True)
    assert done.returncode == 1
