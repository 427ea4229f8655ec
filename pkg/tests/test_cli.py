import json
import os
import subprocess
import sys

import pytest

from conftest import SPECS
from superfedosov.cli import main, run_command
from superfedosov.errors import (
    DegenerateError,
    HbarDivisionError,
    JetExhaustedError,
    NoConvergenceError,
    ParseError,
    ValidationError,
)


def spec_path(name):
    return str(SPECS / f"{name}.spec")


def run(*argv):
    return run_command(list(argv))


def test_star_flat_text():
    code, out, err = run("star", spec_path("flat"), "--left", "x1", "--right", "x2")
    assert code == 0 and err == ""
    assert out == "x1*x2 + (1/2 i)*hbar | trusted: hbar^4, jet exact\n"


def test_star_json():
    code, out, _ = run("--json", "star", spec_path("super_flat"), "--left", "t", "--right", "t")
    obj = json.loads(out)
    assert code == 0
    assert obj["text"] == "(1/2 i)*hbar"
    assert obj["terms"] == [{"im": "1/2", "monomial": {"hbar": 1}, "re": "0", "text": "(1/2 i)*hbar"}]


def test_flag_positions():
    a = run("star", spec_path("flat"), "--left", "x1", "--right", "x2", "--json")
    b = run("--json", "star", spec_path("flat"), "--left", "x1", "--right", "x2")
    assert a == b


def test_degree_override():
    code, out, _ = run("--degree", "2", "star", spec_path("flat"), "--left", "x1^2", "--right", "x2^2")
    assert code == 0
    assert out == "x1^2*x2^2 + (2 i)*hbar*x1*x2 | trusted: hbar^1, jet exact\n"


def test_validate():
    code, out, _ = run("validate", spec_path("curved"))
    assert code == 0
    assert all(line.endswith(": pass") for line in out.splitlines())
    code, out, err = run("validate", spec_path("broken_torsion"))
    assert code == 3
    assert "(b) torsion-free: FAIL at (x1,x1,x2)" in out
    assert "E_VALIDATION" in err


@pytest.mark.parametrize(
    "argv, code",
    [
        (["validate", "degenerate"], 4),
        (["validate", "jet_exhausted"], 5),
        (["star", "flat", "--left", "x1/x2", "--right", "x1"], 2),
        (["quantize", "flat", "--symbol", "y[x1]"], 2),
        (["star", "flat", "--left", "x1"], 2),
        (["frobnicate", "flat"], 2),
        (["validate", "missing"], 2),
        (["--degree", "x", "validate", "flat"], 2),
    ],
)
def test_exit_codes(argv, code):
    argv = [spec_path(a) if a in ("degenerate", "jet_exhausted", "flat", "missing") else a for a in argv]
    got, out, err = run_command(argv)
    assert got == code
    assert err


def test_error_exit_codes():
    assert ParseError("x").exit_code == 2
    assert ValidationError("x").exit_code == 3
    assert DegenerateError("x").exit_code == 4
    assert JetExhaustedError("x").exit_code == 5
    assert HbarDivisionError("x").exit_code == NoConvergenceError("x").exit_code == 6


def test_parse_error_location(tmp_path):
    p = tmp_path / "bad.spec"
    p.write_text("[manifold]\neven = x1, x2\n[structure]\nm = 0, x3; -1, 0\n[truncation]\nfedosov_degree = 2\n")
    code, _, err = run("validate", str(p))
    assert code == 2 and "line 4" in err


def test_other_commands():
    code, out, _ = run("curvature", spec_path("curved"))
    assert code == 0 and out.startswith("R^") and "hamiltonian = " in out
    code, out, _ = run("--json", "curvature", spec_path("curved"))
    assert code == 0 and set(json.loads(out.splitlines()[0])) == {"riemann_up", "riemann_pair", "hamiltonian"}
    code, out, _ = run("solve-r", spec_path("curved"))
    assert code == 0 and "r_(3) = " in out and "R_D + C + omega = 0: pass" in out
    code, out, _ = run("quantize", spec_path("flat"), "--symbol", "x1")
    assert code == 0 and out == "x1 + y[x1] | trusted: hbar^4, jet exact\n"


def test_verify_deterministic():
    argv = ["verify", spec_path("flat"), "--seed", "7", "--trials", "20"]
    first = run_command(argv)
    assert first[0] == 0
    assert first == run_command(argv)
    assert all(": pass" in line for line in first[1].splitlines())
    other = run_command(["verify", spec_path("flat"), "--seed", "8", "--trials", "20"])
    assert other[0] == 0


def test_verify_json():
    code, out, _ = run("--json", "verify", spec_path("super_flat"), "--trials", "4")
    obj = json.loads(out)
    assert code == 0 and obj["passed"] and all(c["passed"] for c in obj["checks"])


def test_main_writes_streams(capsys):
    assert main(["star", spec_path("flat"), "--left", "1", "--right", "x2"]) == 0
    assert capsys.readouterr().out.startswith("x2 |")


@pytest.mark.parametrize("mutation, needle", [("koszul_p", "product = word computation: FAIL"), ("deriv_right", "right derivative = word computation: FAIL")])
@pytest.mark.parametrize("name", ["flat", "super_flat", "curved"])
def test_verify_catches_kernel_mutations(mutation, needle, name):
    env = dict(os.environ, SUPERFEDOSOV_MUTATION=mutation)
    proc = subprocess.run(
        [sys.executable, "-m", "superfedosov.cli", "verify", spec_path(name), "--trials", "5"],
        capture_output=True,
        text=True,
        env=env,
    )
    assert proc.returncode == 3
    assert needle in proc.stdout
    assert "length-2 witness" in proc.stderr


def test_console_script_matches_module():
    argv = ["star", spec_path("wick"), "--left", "x1*x2", "--right", "x2"]
    a = subprocess.run([sys.executable, "-m", "superfedosov.cli"] + argv, capture_output=True)
    b = subprocess.run([sys.executable, "-m", "superfedosov.cli"] + argv, capture_output=True)
    assert a.returncode == 0 and a.stdout == b.stdout
    assert a.stdout.decode() == run_command(argv)[1]
