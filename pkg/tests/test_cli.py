import math
import subprocess
import sys
from fractions import Fraction

import pytest

from hrlab.cli import RunConfig, main, parse_config

FAST = {
    "exponents": [],
    "basis-verify": ["--kmax", "30"],
    "kernel-eval": ["--lambda-min", "21", "--lambda-max", "41", "--lambda-count", "2",
                    "--samples", "3"],
    "phase-report": ["--dim", "2", "--samples", "5"],
    "equivalence": [],
    "rates": ["--kind", "sup-box", "--lambda-min", "21", "--lambda-max", "161",
              "--lambda-count", "4"],
    "counterexample": ["--lambda-min", "101", "--lambda-max", "201", "--lambda-count", "2"],
}


def run(tmp_path, name, extra, tag):
    out = tmp_path / tag
    code = main([name, *FAST[name], *extra, "--out", str(out)])
    return code, {p.name: p.read_bytes() for p in sorted(out.iterdir())}


@pytest.mark.parametrize("name", sorted(FAST))
def test_runs_are_byte_identical(tmp_path, name):
    c1, a = run(tmp_path, name, ["--seed", "7"], "a")
    c2, b = run(tmp_path, name, ["--seed", "7"], "b")
    assert c1 == c2 == 0
    assert a and a == b
    for blob in a.values():
        first = blob.split(b"\r\n", 1)[0].decode()
        assert first.startswith("#schema_version=1,#seed=7,#config-hash=")


def test_seed_changes_output(tmp_path):
    _, a = run(tmp_path, "phase-report", ["--seed", "1"], "a")
    _, b = run(tmp_path, "phase-report", ["--seed", "2"], "b")
    assert a != b


def test_csv_headers(tmp_path):
    _, files = run(tmp_path, "rates", [], "r")
    assert files["rates.csv"].split(b"\r\n")[1] == b"lambda,value,log_lambda,log_value"
    assert files["fit.csv"].split(b"\r\n")[1] == b"slope,intercept,r2,expected,tol,pass"
    _, files = run(tmp_path, "exponents", ["--dim", "2"], "e")
    lines = files["exponents.csv"].decode().split("\r\n")
    assert lines[1] == "d,p,q,delta_dp,gamma_dp,p0_d,cterexam_exponent"
    assert lines[2] == "2,2,inf,0,-1/6,4,0"


def test_defaults_and_infinite_exponents():
    cfg = parse_config()
    assert cfg == RunConfig()
    assert cfg.p == 2 and cfg.q == math.inf
    cfg = parse_config(flags={"p": "inf", "q": "4", "delta": "1/2"})
    assert cfg.p == math.inf and cfg.q == 4 and cfg.delta == Fraction(1, 2)


def test_flags_override_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\ndim = 2\nseed = 3\nlambda-min = 50\n")
    with pytest.warns(UserWarning) as rec:
        cfg = parse_config(path, {"seed": 9})
    assert cfg.dim == 2 and cfg.seed == 9 and cfg.lambda_min == 50
    assert any("overrides" in str(w.message) for w in rec)
    with pytest.warns(UserWarning, match="snapped"):
        assert parse_config(flags={"lambda_min": 100}).lambda_min == 101


@pytest.mark.parametrize("flags", [{"colour": 1}, {"dim": 0}, {"p": "0.5"}, {"grid_n": 4},
                                   {"c0": 1.5}, {"kind": "nope"},
                                   {"lambda_min": 401, "lambda_max": 101}])
def test_invalid_config(flags):
    with pytest.raises(ValueError):
        parse_config(flags=flags)


def test_config_hash_tracks_values():
    a, b = parse_config(flags={"seed": 1}), parse_config(flags={"seed": 2})
    assert a.config_hash() != b.config_hash()
    assert a.config_hash() == parse_config(flags={"seed": 1, "out_path": "elsewhere"}).config_hash()


def test_exit_codes(tmp_path):
    assert main(["basis-verify", "--kmax", "20", "--tol", "1e-30", "--out", str(tmp_path)]) == 1
    with pytest.raises(SystemExit) as err:
        main(["phase-report", "--dim", "1", "--out", str(tmp_path)])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["nonsense"])
    assert err.value.code == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hrlab", "exponents", "--dim", "3",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip().endswith("exponents.csv")
