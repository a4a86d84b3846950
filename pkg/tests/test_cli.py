import json
import math
import subprocess
import sys

import pytest

from hardylab import cli
from hardylab.grid import GridSpec, cube_indicator, from_csv, to_csv


def write(tmp_path, doc, name="f.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(p)


GRID = {"dim": 1, "box_radius": 4, "cells_per_unit": 16}


def test_eval(tmp_path, capsys):
    spec = write(tmp_path, {"grid": GRID, "family": "spike", "params": {"t": 16}})
    assert cli.main(["eval", "--function", spec, "--functional", "stein"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1 + math.log(16), rel=1e-14)


def test_eval_raw_csv(tmp_path, capsys):
    p = tmp_path / "f.csv"
    to_csv(cube_indicator(GridSpec(1, 2, 4), (1,)) * 2.0, p)
    assert cli.main(["eval", "--function", str(p), "--functional", "l1"]) == 0
    assert float(capsys.readouterr().out) == 2.0


@pytest.mark.parametrize("op", ["hl", "local", "dyadic", "smooth", "smooth-local"])
def test_maximal(tmp_path, op):
    spec = write(tmp_path, {"grid": GRID, "family": "indicator", "params": {"lo": 0, "hi": 0.5}})
    out = tmp_path / "m.csv"
    assert cli.main(["maximal", "--function", spec, "--operator", op, "--out", str(out)]) == 0
    M = from_csv(out)
    assert M.spec == GridSpec.from_dict(GRID)
    assert M.values.max() <= 1 + 1e-12


def test_decompose_and_ttheta(tmp_path, capsys):
    spec = write(tmp_path, {"grid": GRID, "family": "cube_indicator", "params": {"k": 2}})
    assert cli.main(["decompose", "--function", spec]) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("k,mu,")
    assert "log_moment=" in captured.err
    assert cli.main(["ttheta", "--function", spec, "--theta", "smooth", "--grid", "dim=1,R=4,m=16"]) == 0
    assert capsys.readouterr().out.startswith("# hardylab-grid")


def test_catalog(capsys):
    assert cli.main(["catalog"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["entries"]) >= 12


def test_verify_outputs(tmp_path, capsys):
    out, js, plots = tmp_path / "r.csv", tmp_path / "r.json", tmp_path / "plots"
    code = cli.main(["verify", "dyadic-exactness", "--count", "4", "--seed", "7", "--out", str(out),
                     "--json", str(js), "--plot-dir", str(plots)])
    assert code == 0
    assert out.read_text().startswith("experiment,param,lhs,rhs,ratio,verdict")
    assert json.loads(js.read_text())[0]["seed"] == 7
    assert (plots / "dyadic-exactness.dat").exists()
    assert "dyadic-exactness: Pass" in capsys.readouterr().err


def test_verify_failure_exit_code(capsys):
    assert cli.main(["verify", "stein-inequality", "--count", "100", "--constant", "literal"]) == 1


@pytest.mark.parametrize("argv,needle", [
    (["eval", "--functional", "stein"], "required"),
    (["verify", "nope"], "unknown suite"),
    (["eval", "--function", "/does/not/exist.json", "--functional", "l1"], "cannot read"),
])
def test_usage_errors(argv, needle, capsys):
    assert cli.main(argv) == 2
    assert needle in capsys.readouterr().err


def test_malformed_specs(tmp_path, capsys):
    cases = [
        ("{not json", "not valid JSON"),
        (json.dumps({"family": "spike"}), "'grid'"),
        (json.dumps({"grid": {"dim": 1, "box_radius": 4}, "family": "zero"}), "grid.cells_per_unit"),
        (json.dumps({"grid": GRID, "family": "martian"}), "unknown value"),
        (json.dumps({"grid": GRID, "family": "spike", "params": {"t": 256}}), "thinner"),
    ]
    for text, needle in cases:
        p = write(tmp_path, text)
        assert cli.main(["eval", "--function", p, "--functional", "l1"]) == 2
        assert needle in capsys.readouterr().err


def test_entry_point_runs():
    r = subprocess.run([sys.executable, "-m", "hardylab.cli", "catalog"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["version"] >= 1
