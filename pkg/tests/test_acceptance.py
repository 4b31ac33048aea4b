"""Acceptance criteria 1-9, one PASS/FAIL line each.

Criterion 8 reads the property-suite outcomes recorded by conftest when the
module suites ran earlier in the same session, and otherwise runs them in a
subprocess.
"""
import math
import subprocess
import sys
from pathlib import Path

import pytest
import sympy as sp

import conftest
from topoquant.cartan import (
    curvature,
    em_stress_energy,
    kretschmann,
    riemann_components,
    solve_connection,
    verify_field_equations,
)
from topoquant.cases import (
    PIPELINES,
    CaseParameterError,
    einstein_rosen,
    er_connection_check,
    er_quantize,
    reissner_nordstrom,
    run_case,
)
from topoquant.exterior import Coframe
from topoquant.symbolic import eval_numeric, simplify

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="module")
def results():
    return {name: run_case(name) for name in PIPELINES}


def judge(capsys, n, check):
    try:
        ok, detail = check()
    except Exception as exc:  # a crash is a failure with its reason on the line
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def golden_pass(res, keys):
    bad = [k for k in keys if res.golden.get(k) != "pass"]
    return not bad, bad


def test_criterion_1_einstein_rosen_connection(capsys):
    def check():
        rep = er_connection_check(einstein_rosen())
        comps = rep["components"]
        ok = len(comps) == 6 and all(comps.values()) and not rep["unexpected"]
        return ok, f"{sum(map(bool, comps.values()))}/6 families equivalent, no basis factor"
    judge(capsys, 1, check)


def test_criterion_2_einstein_rosen_gauge_fix(capsys):
    def check():
        q = er_quantize()
        n = q.energies[0].n
        ok = (len(q.matches) == 10 and all(q.matches.values())
              and all(v == 0 for v in q.axis_values.values())
              and str(q.condition) == "exp(-gamma0) = n"
              and simplify(q.energies[0].quantized + sp.log(n)) == 0
              and simplify(q.energies[1].quantized - (1 - q.energies[1].n ** 2)) == 0)
        return ok, f"{sum(map(bool, q.matches.values()))}/10 primed components, axis limits zero, {q.condition}"
    judge(capsys, 2, check)


def test_criterion_3_monopole(capsys, results):
    def check():
        res = results["monopole"]
        rec = res.record
        ok, bad = golden_pass(res, ["transition", "condition", "loci"])
        u2 = rec["patches"]["U2"]["loci"]
        ok = (ok and rec["transition"]["g12"] == "exp(i*(g*phi))" and rec["condition"] == "g = n"
              and [l for l in u2 if l.endswith("GAUGE")] == ["theta=pi: GAUGE"]
              and "r=0: CURVATURE" in u2)
        return ok, f"transition {rec['transition']['g12']}, {rec['condition']}, U2 loci {u2}" + (
            f", golden mismatches {bad}" if bad else "")
    judge(capsys, 3, check)


def test_criterion_4_reissner_nordstrom(capsys, results):
    def check():
        res = results["reissner-nordstrom"]
        ok, bad = golden_pass(res, ["A1_e0", "A2_e0", "transition", "condition", "extreme"])
        try:
            reissner_nordstrom(e=0)
            rejected = False
        except CaseParameterError as exc:
            rejected = "e = 0" in str(exc)
        ok = ok and rejected and res.record["extreme"] == "e = m: n = 0"
        return ok, f"{res.record['condition']}, {res.record['extreme']}, e = 0 rejected: {rejected}" + (
            f", golden mismatches {bad}" if bad else "")
    judge(capsys, 4, check)


def test_criterion_5_rn_chern(capsys, results):
    def check():
        res = results["reissner-nordstrom"]
        chern = res.record["chern"]
        ok, bad = golden_pass(res, ["printed_chern_form", "chern_number"])
        ok = (ok and chern["printed_form"] == "-e/r^2*dt^dr" and chern["number"] == "-n"
              and "4*pi*n" in chern["printed_figure"])
        return ok, (f"printed form {chern['printed_form']}, integral {chern['number']} (|n|), "
                    f"printed figure recorded as '{chern['printed_figure']}'")
    judge(capsys, 5, check)


def test_criterion_6_field_equations(capsys):
    def check():
        rn = reissner_nordstrom()
        T = em_stress_energy(curvature(rn.potential), rn.coframe)
        electrovac = verify_field_equations(rn.coframe, T).passed
        ctx = rn.ctx
        limit = rn.coframe.matrix.subs({ctx["rm"]: 0, ctx["rp"]: 2 * ctx["m"]})
        schw = verify_field_equations(Coframe.from_matrix(rn.chart, limit)).passed
        lc = verify_field_equations(einstein_rosen("a*ln(rho)", "a^2*ln(rho)").coframe).passed
        broken = verify_field_equations(einstein_rosen("a*ln(rho)", "rho").coframe)
        ok = electrovac and schw and lc and not broken.passed and bool(broken.failing)
        return ok, (f"RN electrovac {electrovac}, Schwarzschild limit vacuum {schw}, "
                    f"Levi-Civita vacuum {lc}, broken input rejected {not broken.passed}")
    judge(capsys, 6, check)


def test_criterion_7_kerr_newman(capsys, results):
    def check():
        res = results["kerr-newman"]
        ok, bad = golden_pass(res, ["a0_derived", "a0_printed", "extreme"])
        again = run_case("kerr-newman").record
        stable = again["comparison"] == res.record["comparison"] and again == res.record
        ok = ok and stable and res.record["comparison"] in ("agree", "differ")
        return ok, (f"a=0 limits {res.record['a0_limit']['derived']}, extreme n = 0, "
                    f"verdict '{res.record['comparison']}' deterministic {stable}")
    judge(capsys, 7, check)


SUITES = {
    "test_exterior.py": ["test_d_squared_is_zero", "test_graded_anticommutativity",
                         "test_leibniz", "test_property_suites_ran_500_instances"],
    "test_cartan.py": ["test_solver_residual_and_antisymmetry", "test_bianchi_identity",
                       "test_property_suites_ran_500_instances",
                       "test_connection_matches_finite_differences",
                       "test_kretschmann_is_lorentz_invariant"],
    "test_gauge.py": ["test_u1_cocycle_property", "test_so13_cocycle_property",
                      "test_cocycle_suites_ran_500_instances"],
}
COUNTED = ("d_squared", "graded", "solver", "bianchi", "cocycle_u1", "cocycle_so13")


def recorded(module, name):
    hits = [v for k, v in conftest.OUTCOMES.items()
            if k.split("::")[0].endswith(module)
            and (k.endswith("::" + name) or ("::" + name + "[") in k)]
    return hits


def test_criterion_8_property_suites(capsys):
    def check():
        missing = [f"tests/{m}::{n}" for m, names in SUITES.items() for n in names
                   if not recorded(m, n)]
        if missing:
            # not part of this session: run them now
            p = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                                *missing], cwd=ROOT, capture_output=True, text=True)
            if p.returncode != 0:
                return False, "property suites failed:\n" + p.stdout[-2000:]
        failed = [f"{m}::{n}" for m, names in SUITES.items() for n in names
                  if any(o != "passed" for o in recorded(m, n))]
        if not missing:
            short = [k for k in COUNTED if conftest.INSTANCES[k] < 500]
            if short:
                return False, f"fewer than 500 instances: {short}"
        fd = len(recorded("test_cartan.py", "test_connection_matches_finite_differences"))
        how = "subprocess" if missing else "this session"
        return not failed, (f"d^2, graded, Leibniz, solver, antisymmetry, Bianchi, cocycles "
                            f">= 500 each; FD cross-check and Kretschmann invariance ({how}"
                            f"{f', {fd} FD cases' if fd else ''})" + (f"; failed {failed}" if failed else ""))
    judge(capsys, 8, check)


def test_criterion_9_rn_kretschmann(capsys):
    def check():
        case = reissner_nordstrom()
        R = riemann_components(curvature(solve_connection(case.coframe)), case.coframe)
        K = case.ctx.expand_definitions(kretschmann(R))
        m, e = math.sqrt(2), 1.0
        rp, rm = m + math.sqrt(m * m - e * e), m - math.sqrt(m * m - e * e)
        val = lambda r: eval_numeric(K, {"m": m, "e": e, "r": r})
        k_p, k_m, k_0 = val(rp), val(rm), val(1e-3 * rp)
        ok = math.isfinite(k_p) and math.isfinite(k_m) and k_0 >= 1e6 * k_p
        return ok, f"K(r+) = {k_p:.6g}, K(r-) = {k_m:.6g}, K(1e-3 r+)/K(r+) = {k_0 / k_p:.3g}"
    judge(capsys, 9, check)
