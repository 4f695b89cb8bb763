import io
import json
import subprocess
import sys

import pytest

from cmsiegel.cli import ConfigError, load_config, dispatch


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = dispatch(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_gsp_enumerate():
    code, out, _ = run("gsp", "enumerate", "--genus", "1", "--modulus", "2")
    assert code == 0
    data = json.loads(out)
    assert data["count"] == 6 and len(data["elements"]) == 6


def test_gsp_check_and_lift():
    code, out, _ = run("gsp", "check", "--modulus", "5", "--matrix", "[[2,0],[0,3]]")
    assert code == 0 and json.loads(out)["multiplier"] == 1
    code, out, _ = run("gsp", "lift", "--modulus", "5", "--matrix", "[[2,0],[0,3]]")
    assert code == 0
    code, _, err = run("gsp", "check", "--genus", "2", "--modulus", "5",
                       "--matrix", "[[1,1,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]")
    assert code == 2 and json.loads(err)["error"] == "mathematical"


def test_classpoly_gaussian():
    code, out, _ = run("invariant", "classpoly", "--field", "gaussian.json", "--level", "5",
                       "--function", "siegel_power")
    assert code == 0
    data = json.loads(out)
    assert data["polynomial"]["degree"] == 4
    assert all(r is not None for r in data["polynomial"]["recognized"])
    assert all("bound" in c for c in data["classes"])


def test_missing_field_file():
    code, _, err = run("cm", "xi", "--field", "data/missing.json")
    assert code == 1 and "not found" in json.loads(err)["message"]


def test_bad_level_and_function():
    code, _, err = run("rayclass", "build", "--field", "gaussian", "--level", "1")
    assert code == 1 and json.loads(err)["pointer"] == "/N"
    code, _, err = run("invariant", "value", "--field", "gaussian", "--level", "5", "--function", "nope")
    assert code == 1 and "siegel_power" in json.loads(err)["message"]
    code, _, _ = run("bogus")
    assert code == 1


def test_load_config_defaults_and_errors(tmp_path):
    cfg = load_config({"field": "gaussian", "N": 5})
    assert cfg.target == 1e-25 and cfg.denom_bound == 10**6
    assert load_config({"field": "gaussian", "level": 5}).N == 5
    assert load_config({"field": "gaussian", "N": 5, "precision": {"bits": 256}}).bits == 256
    for bad, pointer in [({"N": 1}, "/N"), ({"function": "zzz"}, "/function"), ({"N": "5"}, "/N"),
                         ({"colour": 1}, "/colour")]:
        with pytest.raises(ConfigError) as err:
            load_config(bad)
        assert err.value.pointer == pointer
    p = tmp_path / "run.json"
    p.write_text(json.dumps({"field": "eisenstein", "N": 4, "function": "siegel_power"}))
    code, out, _ = run("rayclass", "build", "--config", str(p))
    assert code == 0 and json.loads(out)["order"] == 2
    meta = json.loads(out)["meta"]["config"]
    assert meta["target"] == 1e-25 and meta["denom_bound"] == 10**6


def test_determinism_and_csv(tmp_path):
    args = ("invariant", "value", "--field", "eisenstein", "--level", "4", "--function", "siegel_power")
    a, b = run(*args), run(*args)
    assert a == b and a[0] == 0
    out = tmp_path / "v.csv"
    code, _, _ = run(*args, "--format", "csv", "--out", str(out))
    assert code == 0 and out.read_text().startswith("class,re,im,bound")


def test_family_and_cm_commands():
    code, out, _ = run("family", "eval", "--level", "5", "--function", "siegel_power", "--point", "0.1+1.2j")
    assert code == 0 and "value" in json.loads(out)
    code, out, _ = run("cm", "point", "--field", "cyclotomic5")
    assert code == 0 and json.loads(out)["point"]["genus"] == 2


def test_audit_command():
    code, out, _ = run("invariant", "audit", "--field", "gaussian", "--level", "5", "--function", "siegel_power",
                       "--kind", "ideal", "--trials", "4")
    assert code == 0 and json.loads(out)["result"] == "PASS"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cmsiegel.cli", "gsp", "enumerate", "--modulus", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["count"] == 6
