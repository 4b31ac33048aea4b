import json
import os
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from topoquant.cli import main
from topoquant.report import load_schema

ROOT = Path(__file__).resolve().parents[1]
DEFS = ROOT / "definitions"


def run(capsysbinary, *argv):
    code = main(list(argv))
    out, err = capsysbinary.readouterr()
    return code, out.decode(), err.decode()


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


CYLINDER = """\
[coordinates]
t
r: 0 < r
theta: 0 < theta < pi
phi: period 2*pi

[coframe]
e0 = dt
e1 = dr
e2 = r*dtheta
e3 = r*dphi
"""


# -- required outputs ------------------------------------------------------------

def test_quantize_rn(capsysbinary):
    code, out, _ = run(capsysbinary, "quantize", "--case", "reissner-nordstrom")
    assert code == 0
    assert "condition: 2*sqrt(m^2-e^2)/e = n" in out.splitlines()


def test_quantize_monopole(capsysbinary):
    code, out, _ = run(capsysbinary, "quantize", "--case", "monopole")
    assert code == 0
    assert "condition: g = n" in out.splitlines()


def test_connection_flat_polar(capsysbinary):
    code, out, _ = run(capsysbinary, "connection", "--file", str(DEFS / "flat_polar.st"))
    assert code == 0
    lines = out.splitlines()
    assert "w[1][2] = -dphi" in lines
    assert "structure_residual: 0" in lines


# -- exit codes ----------------------------------------------------------------------

def test_golden_match_and_mismatch(capsysbinary, tmp_path):
    code, _, _ = run(capsysbinary, "connection", "--file", str(DEFS / "flat_polar.st"),
                     "--check-golden")
    assert code == 0
    bad = (DEFS / "flat_polar.st").read_text().replace("w[1][2] = -dphi", "w[1][2] = dphi")
    code, out, _ = run(capsysbinary, "connection", "--file", write(tmp_path, "bad.st", bad),
                       "--check-golden")
    assert code == 2
    assert "status: fail" in out
    # without the flag a mismatch is reported but not fatal
    code, _, _ = run(capsysbinary, "connection", "--file", str(tmp_path / "bad.st"))
    assert code == 0


def test_verify_failure_exits_2(capsysbinary, tmp_path):
    code, out, _ = run(capsysbinary, "verify", "--file", write(tmp_path, "cyl.st", CYLINDER))
    assert code == 2
    assert "vacuum field equations: fail" in out
    assert "[failing]" in out


def test_verify_pass(capsysbinary):
    code, out, _ = run(capsysbinary, "verify", "--file", str(DEFS / "schwarzschild.st"))
    assert code == 0
    assert "field_equations: vacuum field equations: pass (symbolic)" in out


def test_parse_error_reports_location(capsysbinary, tmp_path):
    text = CYLINDER.replace("e2 = r*dtheta", "e2 = r*(dtheta")
    code, out, err = run(capsysbinary, "connection", "--file", write(tmp_path, "p.st", text))
    assert code == 1 and out == ""
    assert err.startswith("error: input: ")
    assert "p.st:10:" in err and "offset" in err


def test_missing_file_and_unknown_case(capsysbinary, tmp_path):
    code, _, err = run(capsysbinary, "connection", "--file", str(tmp_path / "nope.st"))
    assert code == 1 and err.startswith("error:")
    code, _, err = run(capsysbinary, "case", "--case", "godel")
    assert code == 1 and "unknown case" in err


def test_domain_error_names_operation(capsysbinary, tmp_path):
    code, _, err = run(capsysbinary, "quantize", "--file", str(DEFS / "flat_polar.st"),
                       "--phase", "t", "--coordinate", "t")
    assert code == 1
    assert err.startswith("error: quantize: ")


def test_bad_seed(capsysbinary, monkeypatch):
    monkeypatch.setenv("CQ_SEED", "abc")
    code, _, err = run(capsysbinary, "quantize", "--case", "monopole")
    assert code == 1 and "CQ_SEED" in err


# -- reports ---------------------------------------------------------------------------

def test_json_report_validates(capsysbinary, tmp_path):
    path = tmp_path / "rn.json"
    code, _, _ = run(capsysbinary, "quantize", "--case", "reissner-nordstrom", "--json", str(path))
    assert code == 0
    doc = json.loads(path.read_text())
    jsonschema.validate(doc, load_schema())
    assert doc["record"]["condition"] == "2*sqrt(m^2-e^2)/e = n"
    assert doc["status"] == "pass"


def test_verbose_adds_timing(capsysbinary):
    _, plain, _ = run(capsysbinary, "connection", "--file", str(DEFS / "flat_polar.st"))
    _, loud, _ = run(capsysbinary, "connection", "--file", str(DEFS / "flat_polar.st"), "--verbose")
    assert "[timing]" not in plain and "[timing]" in loud
    assert loud.startswith(plain.split("status:")[0])


def test_file_quantize_with_region(capsysbinary):
    code, out, _ = run(capsysbinary, "quantize", "--file", str(DEFS / "reissner_nordstrom.st"),
                       "--phase", "e*(1/rm-1/rp)*t", "--coordinate", "t",
                       "--region", "t:0:2*pi,r:rm:rp")
    assert code == 0
    assert "condition: 2*sqrt(m^2-e^2)/e = n" in out
    assert "number: -n" in out


def test_gauge_and_atlas_commands(capsysbinary):
    code, out, _ = run(capsysbinary, "gauge", "--case", "reissner-nordstrom")
    assert code == 0 and "exp(i*(e*t/rm))" in out
    code, out, _ = run(capsysbinary, "atlas", "--case", "monopole")
    assert code == 0 and "theta=pi: GAUGE" in out


def test_invariants_golden(capsysbinary):
    code, out, _ = run(capsysbinary, "invariants", "--file", str(DEFS / "schwarzschild.st"),
                       "--check-golden")
    assert code == 0 and "kretschmann: 48*m^2/r^6" in out


def test_curvature_field_strength(capsysbinary):
    code, out, _ = run(capsysbinary, "curvature", "--file", str(DEFS / "reissner_nordstrom.st"))
    assert code == 0
    assert "field_strength: i*(e/r^2*dt^dr)" in out
    assert "bianchi_residual: 0" in out


# -- process level ---------------------------------------------------------------------------

def cli(*argv, env=None):
    e = dict(os.environ)
    e.update(env or {})
    return subprocess.run([sys.executable, "-m", "topoquant", *argv], capture_output=True,
                          env=e, cwd=ROOT)


def test_output_is_byte_identical(tmp_path):
    a = cli("quantize", "--case", "reissner-nordstrom", "--json", str(tmp_path / "a.json"))
    b = cli("quantize", "--case", "reissner-nordstrom", "--json", str(tmp_path / "b.json"))
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_all_cases_pass_golden():
    p = cli("case", "--all", "--check-golden")
    assert p.returncode == 0, p.stderr.decode()
    out = p.stdout.decode()
    assert "status: pass" in out
    sections = [l for l in out.splitlines() if l.startswith("[") and not l.startswith("[golden")]
    assert sections[:4] == ["[einstein-rosen]", "[monopole]", "[reissner-nordstrom]", "[kerr-newman]"]
