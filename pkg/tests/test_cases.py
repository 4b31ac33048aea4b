import math

import pytest
import sympy as sp

from topoquant.cartan import (
    connection_coordinate_components,
    curvature,
    kretschmann,
    riemann_components,
    solve_connection,
)
from topoquant.cases import (
    BUILDERS,
    PIPELINES,
    CaseParameterError,
    einstein_rosen,
    er_axis_regularity,
    er_connection_check,
    er_quantize,
    kerr_newman,
    reissner_nordstrom,
    run_case,
    weak_field_monopole,
)
from topoquant.exterior import to_frame_basis
from topoquant.symbolic import equivalent, eval_numeric, simplify


@pytest.fixture(scope="module")
def results():
    return {name: run_case(name) for name in PIPELINES}


def test_every_pipeline_matches_its_golden_values(results):
    for name, res in results.items():
        assert res.golden and res.golden_ok, (name, res.golden)


def test_pipelines_are_deterministic(results):
    again = run_case("reissner-nordstrom")
    assert again.record == results["reissner-nordstrom"].record


def test_unknown_case_rejected():
    with pytest.raises(CaseParameterError):
        run_case("godel")


# -- Einstein-Rosen ----------------------------------------------------------------

def test_er_generic_connection():
    check = er_connection_check(einstein_rosen())
    assert all(check["components"].values()) and check["unexpected"] == []


def test_er_flat_limit():
    case = einstein_rosen("0", "0")
    comps = connection_coordinate_components(solve_connection(case.coframe))
    assert comps == {(1, 3, "phi"): -1, (3, 1, "phi"): 1}


def test_er_axis_regular_family():
    rep = er_axis_regularity()
    assert rep.regular, rep.failures
    assert all(v == 0 for v in rep.limits.values())


def test_er_axis_levi_civita_seed_is_singular():
    rep = er_axis_regularity("a*ln(rho)", "a^2*ln(rho)")
    assert not rep.regular
    assert any("psi'" in f for f in rep.failures)


def test_er_axis_trivial_case():
    assert er_axis_regularity("0", "0").regular


def test_er_quantize():
    q = er_quantize()
    assert all(q.matches.values()) and len(q.matches) == 10
    assert all(v == 0 for v in q.axis_values.values())
    assert str(q.condition) == "exp(-gamma0) = n"
    n = q.energies[0].n
    assert simplify(q.energies[0].quantized + sp.log(n)) == 0
    assert simplify(q.energies[1].quantized - (1 - q.energies[1].n ** 2)) == 0


def test_er_quantize_flat_axis():
    q = er_quantize(gamma0=0)
    assert str(q.condition) == "1 = n"
    assert str(q.element) == "exp((phi)*T_phi)"


# -- weak field ----------------------------------------------------------------------

def test_monopole_frame_potential():
    case = weak_field_monopole()
    comps = to_frame_basis(case.potential.real_part(), case.coframe)
    assert equivalent(comps[(0,)], case.parse("m/r"), ctx=case.ctx)
    want = case.parse("(g/2)*(1+cos(theta))/(r*sin(theta))")
    assert equivalent(comps[(3,)], want, ctx=case.ctx)


def test_monopole_record(results):
    rec = results["monopole"].record
    assert rec["condition"] == "g = n"
    assert rec["laplace_phi"] == "0"
    g12 = rec["transition"]["g12"]
    assert g12.startswith("exp(i*(")
    case = weak_field_monopole()
    assert simplify(case.parse(g12[len("exp(i*("):-2]) - case.parse("g*phi")) == 0


# -- Reissner-Nordstrom ------------------------------------------------------------------

def test_rn_record(results):
    rec = results["reissner-nordstrom"].record
    assert rec["condition"] == "2*sqrt(m^2-e^2)/e = n"
    assert rec["extreme"] == "e = m: n = 0"
    assert rec["chern"]["number"] == "-n"
    assert "4*pi*n" in rec["chern"]["printed_figure"]


def test_rn_transition_text(results):
    case = reissner_nordstrom()
    g = results["reissner-nordstrom"].record["transition"]["g12"]
    inner = case.parse(g[len("exp(i*("):-2])
    assert equivalent(inner, case.parse("e*(1/rm-1/rp)*t"), ctx=case.ctx)


@pytest.mark.parametrize("builder", [reissner_nordstrom, kerr_newman])
def test_zero_charge_rejected(builder):
    with pytest.raises(CaseParameterError, match="e = 0"):
        builder(e=0)


def test_rn_kretschmann_behaviour():
    case = reissner_nordstrom()
    R = riemann_components(curvature(solve_connection(case.coframe)), case.coframe)
    K = case.ctx.expand_definitions(kretschmann(R))
    m, e = math.sqrt(2), 1.0
    rp, rm = m + math.sqrt(m * m - e * e), m - math.sqrt(m * m - e * e)
    val = lambda r: eval_numeric(K, {"m": m, "e": e, "r": r})
    at_rp, at_rm = val(rp), val(rm)
    assert math.isfinite(at_rp) and math.isfinite(at_rm)
    assert math.isfinite(val(rp / 2))
    assert val(1e-3 * rp) >= 1e6 * at_rp


# -- Kerr-Newman ----------------------------------------------------------------------

def test_kn_limits(results):
    golden = results["kerr-newman"].golden
    assert golden["a0_derived"] == golden["a0_printed"] == "pass"
    assert golden["extreme"] == "pass"


def test_kn_verdict_is_recorded_and_stable(results):
    rec = results["kerr-newman"].record
    assert rec["comparison"] in ("agree", "differ")
    assert run_case("kerr-newman").record == rec


def test_builders_cover_declared_cases():
    assert set(PIPELINES) <= set(BUILDERS)
    assert list(PIPELINES) == ["einstein-rosen", "monopole", "reissner-nordstrom", "kerr-newman"]
