import numpy as np
import pytest
import sympy as sp

from topoquant.bundle import (
    CHART,
    CURVATURE,
    GAUGE,
    InconsistentPatchesError,
    Patch,
    QuantizationError,
    c_energy,
    chern_form,
    chern_number,
    check_transition,
    field_invariants,
    patch_regular,
    quantize,
    singular_loci,
    u1_transition,
)
from topoquant.cartan import curvature, solve_connection
from topoquant.cases import reissner_nordstrom, weak_field_monopole
from topoquant.exterior import Chart, Coframe, Form
from topoquant.gauge import U1Element, gauge_transform_connection
from topoquant.symbolic import Context, DomainError, equivalent, simplify

N = sp.Symbol("n", integer=True)


def tags(loci):
    return {(l.coordinate, simplify(l.value), l.kind) for l in loci}


@pytest.fixture(scope="module")
def rn():
    case = reissner_nordstrom()
    ctx = case.ctx
    inv = field_invariants(curvature(case.potential), case.coframe)
    t = ctx["t"]
    A1 = gauge_transform_connection(case.potential, U1Element(ctx["e"] * t / ctx["rm"]))
    A2 = gauge_transform_connection(case.potential, U1Element(ctx["e"] * t / ctx["rp"]))
    U1 = Patch("U1", case.coframe, A1, ranges={"r": (0, ctx["rp"])})
    U2 = Patch("U2", case.coframe, A2, ranges={"r": (ctx["rm"], None)})
    return case, inv, U1, U2


@pytest.fixture(scope="module")
def mono():
    case = weak_field_monopole()
    A1 = case.potential
    A2 = gauge_transform_connection(A1, U1Element(case.parse("g*phi")))
    inv = field_invariants(curvature(A1), case.coframe)
    return case, inv, Patch("U1", case.coframe, A1), Patch("U2", case.coframe, A2)


# -- singular loci ---------------------------------------------------------------

def test_rn_connection_loci(rn):
    case, inv, _, _ = rn
    ctx = case.ctx
    loci = singular_loci(Patch("U", case.coframe, case.potential), inv)
    gauge = {(l.coordinate, l.value) for l in loci if l.kind == GAUGE}
    assert gauge == {("r", ctx["rm"]), ("r", ctx["rp"])}
    assert ("r", 0, CURVATURE) in tags(loci)


def test_monopole_first_patch_loci(mono):
    case, inv, U1, _ = mono
    got = tags(singular_loci(U1, inv))
    assert ("r", 0, CURVATURE) in got
    assert ("theta", 0, GAUGE) in got
    assert not any(k == GAUGE and c == "theta" and v == sp.pi for c, v, k in got)


def test_monopole_second_patch_moves_gauge_locus(mono):
    case, inv, _, U2 = mono
    got = singular_loci(U2, inv)
    assert [(l.coordinate, l.value) for l in got if l.kind == GAUGE] == [("theta", sp.pi)]


def test_flat_polar_has_only_chart_degeneracy():
    ctx = Context().coordinate("t").coordinate("r", lower=0).coordinate("phi").coordinate("z")
    ch = Chart(ctx, ["t", "r", "phi", "z"])
    c = Coframe.from_matrix(ch, sp.diag(1, 1, ctx["r"], 1))
    loci = singular_loci(Patch("U", c, solve_connection(c)))
    assert all(l.kind == CHART for l in loci)
    assert not patch_regular(Patch("U", c, solve_connection(c)))


def test_curvature_tags_stable_under_u1_gauge(rn, mono):
    for case, inv, U1, U2 in (rn, mono):
        base = Patch("U", case.coframe, case.potential)
        ref = {x for x in tags(singular_loci(base, inv)) if x[2] == CURVATURE}
        for p in (U1, U2):
            got = {x for x in tags(singular_loci(p, inv)) if x[2] == CURVATURE}
            assert got == ref


def test_horizon_patches_are_regular(rn):
    case, inv, U1, U2 = rn
    assert patch_regular(U1, inv) == []
    assert patch_regular(U2, inv) == []
    bad = Patch("bad", case.coframe, case.potential, ranges={"r": (0, None)})
    assert len(patch_regular(bad, inv)) == 2


# -- transitions -----------------------------------------------------------------

def test_rn_transition(rn):
    case, _, U1, U2 = rn
    g = u1_transition(U1, U2)
    assert equivalent(g.element.phase, case.parse("e*(1/rm-1/rp)*t"), ctx=case.ctx)
    assert check_transition(g, {"U1": U1, "U2": U2})
    back = u1_transition(U2, U1)
    assert simplify(back.element.phase + g.element.phase) == 0


def test_monopole_transition(mono):
    case, _, U1, U2 = mono
    g = u1_transition(U2, U1)
    assert simplify(g.element.phase - case.parse("g*phi")) == 0


def test_identical_connections_give_identity(rn):
    _, _, U1, _ = rn
    assert u1_transition(U1, U1).element.phase == 0


def test_non_closed_difference_rejected(rn):
    case, _, U1, _ = rn
    other = Patch("X", case.coframe, U1.connection + Form.one_form(
        case.chart, {"t": case.ctx["r"]}, imaginary=True))
    with pytest.raises(InconsistentPatchesError):
        u1_transition(U1, other)


# -- quantization ----------------------------------------------------------------

def test_quantize_examples(rn, mono):
    case, _, U1, U2 = rn
    cond = quantize(u1_transition(U1, U2), "t", case.ctx)
    assert str(cond) == "2*sqrt(m^2-e^2)/e = n"
    assert cond.at({"e": case.ctx["m"]}, case.ctx) == 0
    mcase, _, M1, M2 = mono
    assert str(quantize(u1_transition(M2, M1), "phi", mcase.ctx)) == "g = n"


def test_quantize_errors(rn):
    case = rn[0]
    ctx = case.ctx
    with pytest.raises(QuantizationError):
        quantize(ctx["t"] ** 2, "t", ctx)
    with pytest.raises(QuantizationError):
        quantize(ctx["r"], "r", ctx)
    with pytest.raises(QuantizationError):
        quantize(ctx["r"] * ctx["t"], "t", ctx)


# -- Chern data ------------------------------------------------------------------

def test_chern_form_of_zero():
    case = reissner_nordstrom()
    c1, printed = chern_form(Form.zero(case.chart, 2, imaginary=True))
    assert c1.is_zero() and printed.is_zero()


def test_rn_chern_form_and_number(rn):
    case, _, U1, U2 = rn
    c1, printed = chern_form(curvature(case.potential))
    want = Form.basis(case.chart, "t", "r") * case.parse("-e/r^2")
    assert (printed - want).is_zero()
    assert (c1 - want.scale(1 / (2 * sp.pi))).is_zero()
    cond = quantize(u1_transition(U1, U2), "t", case.ctx)
    ctx = case.ctx
    number = chern_number(c1, [("t", 0, 2 * sp.pi), ("r", ctx["rm"], ctx["rp"])], cond)
    assert number == -N
    # without the condition: minus the condition's left-hand side
    raw = chern_number(c1, [("t", 0, 2 * sp.pi), ("r", ctx["rm"], ctx["rp"])])
    assert equivalent(raw, -cond.lhs, ctx=ctx)


def test_monopole_sphere_integral(mono):
    case, _, U1, U2 = mono
    c1, _ = chern_form(curvature(case.potential))
    total = chern_number(c1, [("theta", 0, sp.pi), ("phi", 0, 2 * sp.pi)])
    # c1 = (g/4pi) sin(theta) dtheta^dphi for A_phi = (g/2)(1+cos(theta))
    assert simplify(total - case.parse("g")) == 0
    cond = quantize(u1_transition(U2, U1), "phi", case.ctx)
    assert chern_number(c1, [("theta", 0, sp.pi), ("phi", 0, 2 * sp.pi)], cond) == N


def test_chern_number_of_zero_form():
    case = reissner_nordstrom()
    z = Form.zero(case.chart, 2)
    assert chern_number(z, [("t", 0, 1), ("r", 1, 2)]) == 0


def test_quadrature_fallback():
    ctx = Context().coordinate("u").coordinate("v").coordinate("x").coordinate("y")
    ch = Chart(ctx, ["u", "v", "x", "y"])
    c = Form.basis(ch, "u", "v") * sp.sin(sp.sin(ctx["u"] * ctx["v"]))
    with pytest.raises(ValueError):
        chern_number(c, [("u", 0, 1), ("v", 0, 1)])
    val, err = chern_number(c, [("u", 0, 1), ("v", 0, 1)], bindings={})
    # reference: midpoint rule on a fine grid
    g = (np.arange(400) + 0.5) / 400
    ref = np.sin(np.sin(np.outer(g, g))).mean()
    assert abs(float(val) - ref) < 1e-5 and err < 1e-8


# -- C-energy ----------------------------------------------------------------------

def test_c_energy_symbolic():
    g0 = sp.Symbol("gamma0")
    e1, e2 = c_energy(g0, 1), c_energy(g0, 2)
    assert e1.expression == g0
    assert simplify(e1.quantized + sp.log(e1.n)) == 0
    assert simplify(e2.expression - (1 - sp.exp(-2 * g0))) == 0
    assert simplify(e2.quantized - (1 - e2.n ** 2)) == 0


def test_c_energy_flat_axis():
    for variant in (1, 2):
        e = c_energy(0, variant)
        assert e.expression == 0 and e.quantized == 0 and e.n == 1


def test_c_energy_log_of_nonpositive():
    with pytest.raises(DomainError):
        c_energy(sp.Symbol("gamma0"), 1, n=0)
    with pytest.raises(ValueError):
        c_energy(0, 3)
