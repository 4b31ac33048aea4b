"""Patches, singular loci, transition functions, quantization conditions and
Chern data for u(1) and so(1,3) connections."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import mpmath
import numpy as np
import sympy as sp

from .cartan import SO13, U1, curvature, kretschmann, riemann_components
from .exterior import (
    Coframe,
    Form,
    MatrixForm,
    exterior_derivative,
    frame_antisymmetric,
    levi_civita,
    to_frame_basis,
)
from .gauge import U1Element, gauge_transform_connection
from .symbolic import Context, DomainError, simplify, to_text

GAUGE = "GAUGE"
CURVATURE = "CURVATURE"
CHART = "CHART"


class UnsupportedLocusError(ValueError):
    pass


class InconsistentPatchesError(ValueError):
    pass


class QuantizationError(ValueError):
    pass


@dataclass(frozen=True)
class Locus:
    """The hypersurface ``coordinate = value``."""

    coordinate: str
    value: sp.Expr
    kind: str = ""

    def __str__(self) -> str:
        s = f"{self.coordinate}={to_text(self.value)}"
        return f"{s}: {self.kind}" if self.kind else s

    def same_place(self, other: "Locus") -> bool:
        return self.coordinate == other.coordinate and simplify(self.value - other.value) == 0


@dataclass(frozen=True)
class Patch:
    """An open coordinate rectangle carrying a local connection.

    ``ranges`` narrows coordinate intervals relative to the chart (e.g.
    ``r`` in ``(0, rp)``); ``excluded`` lists removed hypersurfaces.
    """

    name: str
    coframe: Coframe
    connection: object
    excluded: tuple = ()
    ranges: Mapping = field(default_factory=dict)

    @property
    def chart(self):
        return self.coframe.chart

    @property
    def algebra(self) -> str:
        return U1 if isinstance(self.connection, Form) else SO13

    def contains(self, locus: Locus) -> bool:
        """Whether ``locus`` meets the patch (boundaries count as outside)."""
        if any(locus.same_place(x) for x in self.excluded):
            return False
        if locus.coordinate not in self.ranges:
            return True
        lo, hi = self.ranges[locus.coordinate]
        point = self.chart.ctx.sample(np.random.default_rng(0), canonical=True)
        v = _num(self.chart.ctx, locus.value, point).real
        if lo is not None and v <= _num(self.chart.ctx, sp.sympify(lo), point).real + 1e-12:
            return False
        if hi is not None and v >= _num(self.chart.ctx, sp.sympify(hi), point).real - 1e-12:
            return False
        return True


def frame_connection_components(patch_or_conn, coframe: Coframe | None = None) -> list:
    """Every frame component of a connection as a flat list of expressions."""
    if isinstance(patch_or_conn, Patch):
        coframe, conn = patch_or_conn.coframe, patch_or_conn.connection
    else:
        conn = patch_or_conn
    if isinstance(conn, Form):
        return [v for v in to_frame_basis(conn, coframe).values()]
    out = []
    for a, b, f in conn.nonzero_entries():
        if a < b:
            out.extend(to_frame_basis(f, coframe).values())
    return out


def field_invariants(F: Form, c: Coframe) -> tuple:
    """``F_ab F^ab`` and ``eps^abcd F_ab F_cd`` for a u(1) curvature."""
    f = frame_antisymmetric(F, c) if not F.is_zero() else {}
    eta = (1, -1, -1, -1)
    inv1 = sum(eta[a] * eta[b] * v**2 for (a, b), v in f.items())
    inv2 = 0
    for (a, b), v in f.items():
        for (k, l), w in f.items():
            eps = levi_civita(a, b, k, l)
            if eps:
                # raising all four indices flips the sign once
                inv2 += -eps * v * w
    return simplify(inv1), simplify(inv2)


def curvature_invariants(patch: Patch) -> tuple:
    conn = patch.connection
    if isinstance(conn, Form):
        return field_invariants(curvature(conn), patch.coframe)
    R = riemann_components(curvature(conn), patch.coframe)
    return (kretschmann(R),)


# ---------------------------------------------------------------------------
# singular loci


def _critical_factors(e) -> list:
    e = sp.sympify(e)
    out = []
    _, den = sp.fraction(sp.together(e))
    if den != 1:
        out.append(den)
    for p in e.atoms(sp.Pow):
        if p.exp.is_negative or not p.exp.is_integer:
            out.append(p.base)
    for lg in e.atoms(sp.log):
        out.append(lg.args[0])
    return out


def _domain(ctx: Context, name: str):
    lo, hi = -sp.oo, sp.oo
    for a, b in ctx.bounds(name):
        if a is not None and sp.sympify(a).is_number:
            lo = sp.Max(lo, a)
        if b is not None and sp.sympify(b).is_number:
            hi = sp.Min(hi, b)
    return sp.Interval(lo, hi)


def _solve(f, x, domain) -> list | None:
    sol = sp.solveset(f, x, domain)
    if isinstance(sol, sp.FiniteSet):
        return list(sol)
    if sol is sp.S.EmptySet:
        return []
    if isinstance(sol, sp.Intersection):
        finite = [s for s in sol.args if isinstance(s, sp.FiniteSet)]
        if finite:
            return list(finite[0])
    sol = sp.solveset(f, x, sp.S.Reals)
    if isinstance(sol, sp.FiniteSet):
        return list(sol)
    if sol is sp.S.EmptySet:
        return []
    return None


def candidate_loci(exprs: Sequence, ctx: Context, names: Sequence[str]) -> tuple[list, list]:
    """Zeros of denominators and root arguments, per coordinate.

    Returns ``(loci, unsupported)`` where ``unsupported`` lists factors whose
    zero set could not be found in closed form.
    """
    loci: list[Locus] = []
    unsupported = []
    for e in exprs:
        for f in _critical_factors(e):
            for name in names:
                x = ctx.symbols[name]
                if x not in f.free_symbols:
                    continue
                sols = _solve(f, x, _domain(ctx, name))
                if sols is None:
                    unsupported.append(f)
                    continue
                for s in sols:
                    s = simplify(s)
                    if s.has(sp.I) or not _in_range(ctx, name, s):
                        continue
                    loc = Locus(name, s)
                    if not any(loc.same_place(l) for l in loci):
                        loci.append(loc)
    return loci, unsupported


def _in_range(ctx: Context, name: str, value) -> bool:
    point = ctx.sample(np.random.default_rng(0), canonical=True)
    try:
        v = _num(ctx, value, point)
    except (ValueError, ZeroDivisionError):
        return True
    if abs(v.imag) > 1e-12:
        return False
    for lo, hi in ctx.bounds(name):
        if lo is not None and v.real < _num(ctx, sp.sympify(lo), point).real - 1e-12:
            return False
        if hi is not None and v.real > _num(ctx, sp.sympify(hi), point).real + 1e-12:
            return False
    return True


def _num(ctx: Context, e, point) -> complex:
    e = ctx.expand_definitions(sp.sympify(e))
    subs = {k: v for k, v in point.items() if getattr(k, "is_Symbol", False)}
    return complex(sp.N(e.xreplace({k: sp.Float(v, 30) for k, v in subs.items()}), 30))


def diverges_at(e, locus: Locus, ctx: Context, point: Mapping | None = None) -> bool:
    """Numerically decide whether ``|e|`` blows up approaching ``locus``.

    The magnitude is compared at distances 1e-3 and 1e-9 on both sides in
    complex arithmetic, so root branches do not matter.
    """
    e = ctx.expand_definitions(sp.sympify(e))
    if point is None:
        point = ctx.sample(np.random.default_rng(0), canonical=True)
    x = ctx.symbols[locus.coordinate]
    x0 = _num(ctx, locus.value, point)
    syms = sorted(e.free_symbols, key=sp.default_sort_key)
    if any(not s.is_Symbol for s in syms) or e.atoms(sp.Function) - e.atoms(
            sp.sin, sp.cos, sp.tan, sp.exp, sp.log, sp.sinh, sp.cosh, sp.Abs):
        raise UnsupportedLocusError(f"cannot evaluate {to_text(e)} numerically")
    fn = sp.lambdify(syms, e, modules="mpmath")
    base = {s: mpmath.mpf(point[s]) for s in syms if s != x}
    scale = max(1.0, abs(x0))
    with mpmath.workdps(40):
        for side in (1, -1):
            mags = []
            for delta in (1e-3, 1e-9):
                args = [mpmath.mpc(x0) + side * delta * scale if s == x else base[s] for s in syms]
                try:
                    mags.append(abs(fn(*args)))
                except (ZeroDivisionError, ValueError):
                    mags.append(mpmath.inf)
            if mags[1] == mpmath.inf or mags[1] > 2 * mags[0] + 1e-30:
                return True
    return False


def singular_loci(patch: Patch, invariants: Sequence | None = None) -> list[Locus]:
    """Classify divergences of the patch connection.

    A locus is CURVATURE when one of ``invariants`` diverges there and GAUGE
    when only the connection does. For so(1,3) connections, zeros of the
    coframe determinant are CHART degeneracies rather than gauge artefacts.
    """
    ctx = patch.chart.ctx
    names = patch.chart.names
    comps = frame_connection_components(patch)
    if invariants is None:
        invariants = curvature_invariants(patch)
    invariants = [sp.sympify(i) for i in invariants]
    cands, unsupported = candidate_loci(list(comps) + list(invariants), ctx, names)
    if unsupported:
        raise UnsupportedLocusError(
            "undetectable singular structure: " + ", ".join(to_text(u) for u in unsupported))
    chart_loci = []
    if patch.algebra == SO13:
        chart_loci, _ = candidate_loci([1 / patch.coframe.determinant()], ctx, names)
    out = []
    for loc in cands:
        if any(loc.same_place(x) for x in chart_loci):
            out.append(Locus(loc.coordinate, loc.value, CHART))
        elif any(diverges_at(i, loc, ctx) for i in invariants):
            out.append(Locus(loc.coordinate, loc.value, CURVATURE))
        elif any(diverges_at(c, loc, ctx) for c in comps):
            out.append(Locus(loc.coordinate, loc.value, GAUGE))
    return sorted(out, key=lambda l: (names.index(l.coordinate), sp.default_sort_key(l.value)))


def patch_regular(patch: Patch, invariants: Sequence | None = None) -> list[Locus]:
    """Divergent loci that still meet the patch; empty for a good patch."""
    return [l for l in singular_loci(patch, invariants) if l.kind != CHART and patch.contains(l)]


# ---------------------------------------------------------------------------
# transitions


@dataclass(frozen=True)
class TransitionFunction:
    """``element`` maps the connection on ``source`` to the one on ``target``
    through the gauge law, on the overlap of the two patches."""

    target: str
    source: str
    element: object
    overlap: Mapping = field(default_factory=dict)

    def __str__(self) -> str:
        return str(self.element)


def _integrate_closed(beta: Form) -> sp.Expr:
    """A potential ``chi`` with ``dchi = beta``."""
    chart = beta.chart
    chi = sp.S.Zero
    for i, x in enumerate(chart.coords):
        rest = simplify(beta.comps.get((i,), 0) - sp.diff(chi, x))
        if rest != 0:
            chi += sp.integrate(rest, x)
    chi = simplify(chi)
    check = exterior_derivative(Form.scalar(chart, chi)) - beta
    if not check.is_zero():
        raise InconsistentPatchesError("difference of the connections is not exact")
    return chi


def u1_transition(a: Patch, b: Patch) -> TransitionFunction:
    """The phase ``exp(i chi)`` taking ``A_b`` to ``A_a``.

    The gauge law ``A' = A - i dchi`` fixes ``dchi = alpha_b - alpha_a`` for
    ``A = i alpha``.
    """
    if a.algebra != U1 or b.algebra != U1:
        raise TypeError("u1_transition needs u(1) connections")
    beta = b.connection.real_part() - a.connection.real_part()
    if not exterior_derivative(beta).is_zero():
        raise InconsistentPatchesError(f"A_{a.name} - A_{b.name} is not closed")
    chi = _integrate_closed(beta) if not beta.is_zero() else sp.S.Zero
    g = U1Element(chi)
    if gauge_transform_connection(b.connection, g) != a.connection:
        raise InconsistentPatchesError("transition does not relate the patch connections")
    return TransitionFunction(a.name, b.name, g, dict(a.ranges) | dict(b.ranges))


def check_transition(t: TransitionFunction, patches: Mapping[str, Patch]) -> bool:
    a, b = patches[t.target], patches[t.source]
    return gauge_transform_connection(b.connection, t.element) == a.connection


# ---------------------------------------------------------------------------
# quantization


@dataclass(frozen=True)
class QuantizationCondition:
    """``lhs = n`` with ``lhs = kappa P / 2 pi`` for a phase ``kappa x``."""

    coefficient: sp.Expr
    coordinate: str
    period: sp.Expr
    lhs: sp.Expr
    provenance: str = ""

    def __str__(self) -> str:
        return f"{to_text(self.lhs)} = n"

    def at(self, bindings: Mapping, ctx: Context | None = None) -> sp.Expr:
        """The value ``n`` is forced to for the given parameter values."""
        e = ctx.expand_definitions(self.lhs) if ctx is not None else self.lhs
        subs = {(ctx[k] if ctx is not None and isinstance(k, str) else k): v
                for k, v in bindings.items()}
        return simplify(e.subs(subs))


def quantize(phase, coord: str, ctx: Context, provenance: str = "") -> QuantizationCondition:
    """Single-valuedness of ``exp(i phase)`` (or of a rotation by ``phase``)
    under ``coord -> coord + P``.

    The phase must be linear in ``coord``. The integer is only defined up to
    sign, so the reported left-hand side is normalized to carry no leading
    minus sign.
    """
    if isinstance(phase, TransitionFunction):
        provenance = provenance or f"g[{phase.target}][{phase.source}]"
        phase = phase.element
    if isinstance(phase, U1Element):
        phase = phase.phase
    phase = sp.sympify(phase)
    c = ctx.coordinates.get(coord)
    if c is None or c.period is None:
        raise QuantizationError(f"{coord} is not a periodic coordinate")
    x = c.symbol
    kappa = simplify(sp.diff(phase, x))
    if kappa.has(x) or simplify(sp.diff(kappa, x)) != 0:
        raise QuantizationError(f"phase {to_text(phase)} is not linear in {coord}")
    for other in ctx.coordinate_symbols():
        if other != x and kappa.has(other):
            raise QuantizationError(f"coefficient of {coord} depends on {other}")
    lhs = simplify(ctx.expand_definitions(kappa * c.period / (2 * sp.pi)))
    if lhs.could_extract_minus_sign():
        lhs = simplify(-lhs)
    return QuantizationCondition(kappa, coord, c.period, lhs, provenance)


# ---------------------------------------------------------------------------
# Chern data


@dataclass(frozen=True)
class ChernData:
    form: Form
    printed_form: Form
    region: tuple = ()
    number: sp.Expr | None = None
    orientation: tuple = ()
    method: str = ""


def chern_form(F: Form) -> tuple[Form, Form]:
    """``c1 = (i/2pi) F`` and the unnormalized ``iF``, both real.

    For ``F = i f`` with real ``f`` these are ``-f/(2 pi)`` and ``-f``.
    """
    if F.degree != 2:
        raise ValueError("a curvature is a 2-form")
    if not F.imaginary and not F.is_zero():
        raise ValueError("u(1) curvature must be imaginary-tagged")
    f = F.real_part()
    return f.scale(-1 / (2 * sp.pi)), -f


def chern_number(c: Form, region: Sequence, condition: QuantizationCondition | None = None,
                 ctx: Context | None = None, bindings: Mapping | None = None):
    """Integrate a 2-form over a coordinate rectangle.

    The remaining coordinates are held fixed, so only the component along
    the two region coordinates contributes. ``region`` is ``[(name, lo, hi), (name, lo, hi)]``; orientation follows
    the chart order of the two coordinates. With a ``condition`` the result
    is rewritten as a multiple of its integer ``n`` when possible. When no
    elementary antiderivative exists and numeric ``bindings`` are given, the
    value comes from quadrature and is returned with its error estimate.
    """
    if c.degree != 2:
        raise ValueError("chern_number integrates 2-forms")
    chart = c.chart
    (u, u0, u1), (v, v0, v1) = sorted(region, key=lambda r: chart.index(r[0]))
    ctx = ctx or chart.ctx
    # pullback to the coordinate surface keeps only the (u, v) component
    coef = c.coeff(u, v)
    if coef == 0:
        return sp.S.Zero
    xu, xv = chart.ctx.symbols[u], chart.ctx.symbols[v]
    inner = sp.integrate(coef, (xu, u0, u1))
    total = sp.integrate(inner, (xv, v0, v1))
    if total.has(sp.Integral):
        if bindings is None:
            raise ValueError("no elementary antiderivative; numeric bindings required")
        return _quadrature(coef, xu, xv, (u0, u1), (v0, v1), ctx, bindings)
    total = simplify(total, ctx)
    if condition is not None:
        ratio = simplify(ctx.expand_definitions(total) / ctx.expand_definitions(condition.lhs), ctx)
        if ratio.is_number:
            return ratio * sp.Symbol("n", integer=True)
    return total


def _quadrature(coef, xu, xv, ur, vr, ctx, bindings):
    from scipy.integrate import dblquad

    subs = {(ctx[k] if isinstance(k, str) else k): v for k, v in bindings.items()}
    e = ctx.expand_definitions(coef).subs(subs)
    f = sp.lambdify((xv, xu), e, modules="math")
    lo_u, hi_u = (float(ctx.expand_definitions(sp.sympify(b)).subs(subs)) for b in ur)
    lo_v, hi_v = (float(ctx.expand_definitions(sp.sympify(b)).subs(subs)) for b in vr)
    val, err = dblquad(f, lo_u, hi_u, lo_v, hi_v)
    return sp.Float(val), err


# ---------------------------------------------------------------------------
# C-energy


@dataclass(frozen=True)
class CEnergy:
    variant: int
    expression: sp.Expr
    quantized: sp.Expr
    n: sp.Expr


def c_energy(gamma0, variant: int, n=None) -> CEnergy:
    """Thorne's C-energy on the axis, before and after ``exp(-gamma0) = n``.

    Variant 1 is ``gamma0`` itself, variant 2 is ``1 - exp(-2 gamma0)``.
    """
    gamma0 = sp.sympify(gamma0)
    if n is None:
        if gamma0.is_number:
            n = simplify(sp.exp(-gamma0))
        else:
            n = sp.Symbol("n", integer=True, positive=True) if variant == 1 else sp.Symbol("n", integer=True)
    n = sp.sympify(n)
    if variant == 1:
        if n.is_number and not n.is_positive:
            raise DomainError("logarithm of a nonpositive integer", n)
        return CEnergy(1, gamma0, simplify(-sp.log(n)), n)
    if variant == 2:
        return CEnergy(2, 1 - sp.exp(-2 * gamma0) if not gamma0.is_number else simplify(1 - sp.exp(-2 * gamma0)), simplify(1 - n**2), n)
    raise ValueError("variant must be 1 or 2")
