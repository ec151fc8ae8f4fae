import json
import os
from fractions import Fraction

import pytest

from operlab.cli import dumps_record, emit, main

SCEN = os.path.join(os.path.dirname(__file__), "..", "scenarios")


def _scenario(name):
    return os.path.join(SCEN, name)


def _records(out):
    with open(os.path.join(out, "result.jsonl")) as fh:
        return [json.loads(line) for line in fh]


def test_spectrum_fixture(tmp_path):
    assert main(["spectrum", "--config", _scenario("fixture.toml"), "--out", str(tmp_path)]) == 0
    recs = _records(tmp_path)
    assert recs[0]["kind"] == "scenario"
    assert sum(r["kind"] == "eigenvalue" for r in recs) == 2


def test_oper_verify_fixture(tmp_path):
    assert main(["oper-verify", "--config", _scenario("fixture.toml"), "--out", str(tmp_path)]) == 0
    recs = _records(tmp_path)
    opers = [r for r in recs if r["kind"] == "oper"]
    assert len(opers) == 2
    assert max(r["root_mismatch"] for r in opers) < 1e-10


def test_monodromy_trivial(tmp_path):
    assert main(["monodromy", "--config", _scenario("trivial.toml"), "--out", str(tmp_path)]) == 0
    recs = [r for r in _records(tmp_path) if r["kind"] == "monodromy"]
    assert recs and all(r["flags"]["trivial_pgl2"] for r in recs)


def test_bad_points_exit_code(tmp_path, capsys):
    assert main(["balanced-scan", "--config", _scenario("bad_points.toml"), "--out", str(tmp_path)]) == 2
    assert "distinct" in capsys.readouterr().err


def test_missing_file(tmp_path):
    assert main(["spectrum", "--config", str(tmp_path / "nope.toml"), "--out", str(tmp_path)]) == 2


def test_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "x.toml"
    cfg.write_text("[gaudin]\npoints = [0, 1]\nweights = [1, 1, 0]\ncolour = 3\n")
    assert main(["spectrum", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "colour" in capsys.readouterr().err


def test_empty_emit(tmp_path):
    path = emit([], str(tmp_path))
    assert os.path.getsize(path) == 0


def test_hecke_grid_header(tmp_path):
    cfg = tmp_path / "h.toml"
    cfg.write_text("[gaudin]\npoints = [0, 1, 2]\nweights = [1, 1, 1, 1]\n"
                   "[hecke]\nre = [-0.5, 2.5, 4]\nim = [0.1, 1.5, 3]\n")
    assert main(["hecke-scan", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "grids" / "beta_0.csv").read_text().splitlines()
    assert lines[0] == "x_re,x_im,beta"
    assert len(lines) == 13


def test_dumps_record_format():
    text = dumps_record({"b": 0.1, "a": 1, "c": 1 + 2j, "d": Fraction(1, 3), "e": 2.0, "f": float("nan")})
    assert text == '{"a":1,"b":0.10000000000000001,"c":{"im":2.0,"re":1.0},"d":"1/3","e":2.0,"f":null}'


def test_jobs_do_not_change_output(tmp_path):
    outs = []
    for jobs in ("1", "2"):
        out = tmp_path / jobs
        assert main(["monodromy", "--config", _scenario("fixture.toml"), "--out", str(out), "--jobs", jobs]) == 0
        outs.append((out / "result.jsonl").read_bytes())
    assert outs[0] == outs[1]


def test_unknown_pipeline():
    with pytest.raises(SystemExit):
        main(["nonsense", "--config", _scenario("fixture.toml")])
