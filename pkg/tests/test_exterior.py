from itertools import combinations

import pytest
import sympy as sp
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import INSTANCES
from topoquant.exterior import (
    Chart,
    Coframe,
    Form,
    SingularCoframeError,
    exterior_derivative,
    form_text,
    from_frame_basis,
    levi_civita,
    metric_from_coframe,
    to_frame_basis,
    wedge,
)
from topoquant.symbolic import Context, simplify

CTX = Context().coordinate("t").coordinate("r", lower=0).coordinate("theta").coordinate("phi")
CTX.parameter("m", "positive")
CHART = Chart(CTX, ["t", "r", "theta", "phi"])
T, R, TH, PH = CHART.coords
M = CTX["m"]
COEFFS = [sp.S.One, sp.S(2), R, T * R, R ** 2, sp.sin(TH), sp.cos(TH) * R, sp.exp(-T),
          M / R, T + PH, sp.sin(PH) * T]

SUITE = settings(max_examples=500, deadline=None, derandomize=True,
                 suppress_health_check=[HealthCheck.too_slow])


@st.composite
def forms(draw, degree=None):
    p = draw(st.integers(0, 3)) if degree is None else degree
    idx = list(combinations(range(4), p))
    keys = draw(st.lists(st.sampled_from(idx), min_size=1, max_size=2, unique=True))
    return Form(CHART, p, {k: draw(st.sampled_from(COEFFS)) for k in keys})


def same(a: Form, b: Form) -> bool:
    return (a - b).is_zero()


# -- examples ----------------------------------------------------------------

def test_wedge_examples():
    dt, dr, dphi = Form.basis(CHART, "t"), Form.basis(CHART, "r"), Form.basis(CHART, "phi")
    assert same(wedge(dt, dr), -wedge(dr, dt))
    assert wedge(dphi, dphi).is_zero()
    f, g = sp.sin(TH), R ** 2
    assert same(wedge(dt * f, dr * g), Form.basis(CHART, "t", "r") * (f * g))


def test_derivative_examples():
    d = exterior_derivative(Form.scalar(CHART, R ** 2 * sp.sin(TH)))
    want = Form.one_form(CHART, {"r": 2 * R * sp.sin(TH), "theta": R ** 2 * sp.cos(TH)})
    assert same(d, want)
    d = exterior_derivative(Form.one_form(CHART, {"phi": R * sp.sin(TH)}))
    want = Form.basis(CHART, "r", "phi") * sp.sin(TH) + Form.basis(CHART, "theta", "phi") * (R * sp.cos(TH))
    assert same(d, want)


def test_form_text():
    f = Form.one_form(CHART, {"t": M / R, "phi": -1})
    assert form_text(f) == "m/r*dt-dphi"
    assert form_text(Form.zero(CHART, 2)) == "0"


def test_mixing_real_and_imaginary_rejected():
    a = Form.one_form(CHART, {"t": 1})
    b = Form.one_form(CHART, {"t": 1}, imaginary=True)
    with pytest.raises(ValueError):
        a + b


def test_levi_civita_orientation():
    assert levi_civita(0, 1, 2, 3) == 1
    assert levi_civita(1, 0, 2, 3) == -1
    assert levi_civita(0, 0, 2, 3) == 0


# -- frame basis ---------------------------------------------------------------

@pytest.fixture(scope="module")
def rn():
    ctx = Context().coordinate("t").coordinate("r", lower=0).coordinate("theta").coordinate("phi")
    ctx.parameter("rm", "positive").parameter("rp", "positive")
    ch = Chart(ctx, ["t", "r", "theta", "phi"])
    r, th = ctx["r"], ctx["theta"]
    h = sp.sqrt((r - ctx["rm"]) * (r - ctx["rp"])) / r
    c = Coframe([Form.one_form(ch, {"t": h}), Form.one_form(ch, {"r": 1 / h}),
                 Form.one_form(ch, {"theta": r}), Form.one_form(ch, {"phi": r * sp.sin(th)})])
    return ctx, ch, c


def test_dt_on_rn_coframe(rn):
    ctx, ch, c = rn
    r = ctx["r"]
    got = to_frame_basis(Form.basis(ch, "t"), c)
    assert list(got) == [(0,)]
    want = r / sp.sqrt((r - ctx["rm"]) * (r - ctx["rp"]))
    assert simplify(got[(0,)] - want) == 0


def test_rn_metric(rn):
    ctx, ch, c = rn
    r = ctx["r"]
    g = metric_from_coframe(c)
    assert simplify(g[0, 0] - (r - ctx["rm"]) * (r - ctx["rp"]) / r ** 2) == 0
    assert simplify(g[3, 3] + r ** 2 * sp.sin(ctx["theta"]) ** 2) == 0


def test_identity_coframe_and_minkowski():
    c = Coframe([Form.basis(CHART, n) for n in CHART.names])
    f = Form.one_form(CHART, {"t": R, "theta": sp.cos(TH)})
    assert to_frame_basis(f, c) == {(0,): R, (2,): sp.cos(TH)}
    assert metric_from_coframe(c) == sp.diag(1, -1, -1, -1)


def test_dphi_on_einstein_rosen_coframe():
    from topoquant.cases import einstein_rosen
    case = einstein_rosen()
    got = to_frame_basis(Form.basis(case.chart, "phi"), case.coframe)
    assert list(got) == [(3,)]
    assert simplify(got[(3,)] - case.parse("exp(psi)/rho")) == 0


def test_degenerate_locus_is_reported():
    ctx = Context().coordinate("t").coordinate("r").coordinate("theta").coordinate("phi")
    ch = Chart(ctx, ["t", "r", "theta", "phi"])
    c = Coframe([Form.basis(ch, "t"), Form.basis(ch, "r"), Form.one_form(ch, {"theta": ctx["r"]}),
                 Form.one_form(ch, {"phi": ctx["r"]})])
    with pytest.raises(SingularCoframeError):
        to_frame_basis(Form.basis(ch, "phi"), c, at={ctx["r"]: 0})


def test_singular_coframe_rejected():
    with pytest.raises(SingularCoframeError):
        Coframe([Form.basis(CHART, "t"), Form.basis(CHART, "t"), Form.basis(CHART, "theta"),
                 Form.basis(CHART, "phi")])


def test_weak_field_metric():
    from topoquant.cases import weak_field_monopole
    case = weak_field_monopole()
    g = metric_from_coframe(case.coframe)
    chi = case.parse("2*g*(1+cos(theta))")
    assert simplify(case.chart.normal(g[0, 3]) + chi) == 0


# -- properties ----------------------------------------------------------------

@SUITE
@given(forms())
def test_d_squared_is_zero(a):
    assert exterior_derivative(exterior_derivative(a)).is_zero()
    INSTANCES["d_squared"] += 1


@SUITE
@given(forms(), forms())
def test_graded_anticommutativity(a, b):
    sign = (-1) ** (a.degree * b.degree)
    assert same(wedge(a, b), wedge(b, a) * sign)
    INSTANCES["graded"] += 1


@SUITE
@given(forms(), forms())
def test_leibniz(a, b):
    lhs = exterior_derivative(wedge(a, b))
    rhs = wedge(exterior_derivative(a), b) + wedge(a, exterior_derivative(b)) * (-1) ** a.degree
    assert same(lhs, rhs)
    INSTANCES["leibniz"] += 1


FRAME = Coframe([Form.one_form(CHART, {"t": 1 + M / R}), Form.one_form(CHART, {"r": 1, "t": M}),
                 Form.one_form(CHART, {"theta": R}), Form.one_form(CHART, {"phi": R * sp.sin(TH)})])


@SUITE
@given(st.integers(1, 2).flatmap(lambda p: forms(p)))
def test_frame_basis_round_trip(a):
    back = from_frame_basis(to_frame_basis(a, FRAME), FRAME, a.degree)
    assert same(back, a)


def test_property_suites_ran_500_instances():
    assert all(INSTANCES[k] >= 500 for k in ("d_squared", "graded", "leibniz")), INSTANCES
