"""Cartan structure equations: metric connection, curvature, Riemann and
Einstein tensors, and field-equation checks in the orthonormal frame.

Conventions: ``Omega^a_b = d omega^a_b + omega^a_c ^ omega^c_b`` and
``Omega^a_b = 1/2 R^a_{bcd} e^c ^ e^d``; Ricci ``R_bd = R^a_{bad}``;
``G_ab = R_ab - 1/2 eta_ab R``; units with ``G = 1`` so that the field
equations read ``G_ab = 8 pi T_ab``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import sympy as sp

from .exterior import (
    ETA,
    Coframe,
    Form,
    MatrixForm,
    exterior_derivative,
    frame_antisymmetric,
    frame_one_form,
    matrix_d,
    matrix_wedge,
    to_frame_basis,
)
from .symbolic import DomainError, eval_numeric, random_point, simplify, to_text

SO13 = "so(1,3)"
U1 = "u(1)"


class StructureEquationError(AssertionError):
    pass


def _eta(a: int) -> int:
    return 1 if a == 0 else -1


def structure_coefficients(c: Coframe) -> list:
    """``D[a][b][c]`` with ``de^a = 1/2 D^a_{bc} e^b ^ e^c`` (frame indices)."""
    D = [[[sp.S.Zero] * 4 for _ in range(4)] for _ in range(4)]
    for a in range(4):
        comps = to_frame_basis(exterior_derivative(c[a]), c)
        for (b, cc), v in comps.items():
            D[a][b][cc] = v
            D[a][cc][b] = -v
    return D


def solve_connection(c: Coframe, check: bool = True) -> MatrixForm:
    """The torsion-free metric connection of ``c``.

    With ``D_{abc}`` the lowered structure coefficients,
    ``omega_{abc} = 1/2 (D_{abc} + D_{bca} - D_{cab})`` solves
    ``de^a + omega^a_b ^ e^b = 0`` together with ``omega_{ab} = -omega_{ba}``.
    """
    D = structure_coefficients(c)
    low = [[[_eta(a) * D[a][b][k] for k in range(4)] for b in range(4)] for a in range(4)]
    rows = []
    for a in range(4):
        row = []
        for b in range(4):
            coeffs = {}
            for k in range(4):
                w = (low[a][b][k] + low[b][k][a] - low[k][a][b]) / 2
                w = c.chart.normal(_eta(a) * w)
                if w != 0:
                    coeffs[k] = w
            row.append(frame_one_form(c, coeffs))
        rows.append(row)
    omega = MatrixForm(rows, SO13)
    if check:
        if not all(r.is_zero() for r in verify_first_structure(c, omega)):
            raise StructureEquationError("first structure equation residual is nonzero")
        if not omega.is_antisymmetric():
            raise StructureEquationError("connection is not metric")
    return omega


def verify_first_structure(c: Coframe, omega: MatrixForm) -> tuple[Form, ...]:
    """Residuals ``de^a + omega^a_b ^ e^b``."""
    out = []
    for a in range(4):
        r = exterior_derivative(c[a])
        for b in range(4):
            if not omega[a, b].is_zero():
                r = r + (omega[a, b] ^ c[b])
        out.append(r)
    return tuple(out)


def curvature(omega):
    """``d omega + omega ^ omega``; for a u(1) connection just ``dA``."""
    if isinstance(omega, Form):
        if omega.degree != 1:
            raise ValueError("a connection is a 1-form")
        assert (omega.real_part() ^ omega.real_part()).is_zero()
        return exterior_derivative(omega)
    return matrix_d(omega) + matrix_wedge(omega, omega)


def bianchi_residual(omega: MatrixForm, Omega: MatrixForm) -> MatrixForm:
    """``dOmega + omega ^ Omega - Omega ^ omega`` (identically zero)."""
    return matrix_d(Omega) + matrix_wedge(omega, Omega) - matrix_wedge(Omega, omega)


@dataclass(frozen=True)
class Riemann:
    """Frame components ``R^a_{bcd}`` stored as ``R[a][b][c][d]``."""

    R: tuple

    def __getitem__(self, idx):
        a, b, c, d = idx
        return self.R[a][b][c][d]

    def nonzero(self):
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    for d in range(c + 1, 4):
                        v = self.R[a][b][c][d]
                        if v != 0:
                            yield (a, b, c, d), v


def riemann_components(Omega: MatrixForm, c: Coframe) -> Riemann:
    zero = sp.S.Zero
    R = [[[[zero] * 4 for _ in range(4)] for _ in range(4)] for _ in range(4)]
    for a in range(4):
        for b in range(4):
            if Omega[a, b].is_zero():
                continue
            for (k, l), v in frame_antisymmetric(Omega[a, b], c).items():
                R[a][b][k][l] = v
    return Riemann(tuple(tuple(tuple(tuple(x) for x in y) for y in z) for z in R))


def ricci(R: Riemann, normal=simplify) -> sp.Matrix:
    return sp.Matrix(4, 4, lambda b, d: normal(sum(R[a, b, a, d] for a in range(4))))


def einstein_tensor(R: Riemann, normal=simplify) -> sp.Matrix:
    Ric = ricci(R, normal)
    scalar = normal(sum(_eta(b) * Ric[b, b] for b in range(4)))
    G = sp.Matrix(4, 4, lambda a, b: normal(Ric[a, b] - (ETA[a, b] * scalar) / 2))
    return G


def kretschmann(R: Riemann, normal=simplify):
    """``R_{abcd} R^{abcd}`` with frame indices moved by ``eta``."""
    total = 0
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for d in range(4):
                    v = R[a, b, c, d]
                    if v != 0:
                        total += _eta(a) * _eta(b) * _eta(c) * _eta(d) * v**2
    return normal(total)


@dataclass(frozen=True)
class StressEnergy:
    T: sp.Matrix
    source: str


def em_stress_energy(F: Form, c: Coframe, normal=simplify) -> StressEnergy:
    """Maxwell stress of a u(1) curvature in the frame basis.

    For signature (+,-,-,-) the positive-energy form is
    ``T_ab = (1/4 pi)(-F_ac F_b^c + 1/4 eta_ab F_cd F^cd)``; the sign of the
    real field (``F`` versus ``iF``) drops out of the quadratic expression.
    """
    f = frame_antisymmetric(F, c) if not F.is_zero() else {}

    def comp(a, b):
        return f.get((a, b), sp.S.Zero)

    inv = sum(_eta(k) * _eta(l) * comp(k, l) ** 2 for k in range(4) for l in range(4))
    T = sp.Matrix(
        4, 4,
        lambda a, b: normal(
            (-sum(comp(a, k) * comp(b, k) * _eta(k) for k in range(4)) + ETA[a, b] * inv / 4)
            / (4 * sp.pi)
        ),
    )
    return StressEnergy(T, "electromagnetic")


def vacuum() -> StressEnergy:
    return StressEnergy(sp.zeros(4, 4), "vacuum")


# ---------------------------------------------------------------------------
# field equations


def reduce_jets(e, rules: Mapping) -> sp.Expr:
    """Eliminate derivative markers using ``rules`` and their derivatives.

    A rule ``Derivative(f, x) -> rhs`` also rewrites ``Derivative(f, x, y)``
    as ``d(rhs)/dy``; rules are applied until nothing changes.
    """
    for _ in range(12):
        new = e.replace(lambda x: isinstance(x, sp.Derivative), lambda x: _reduce_one(x, rules))
        if new == e:
            return e
        e = new
    return e


def _reduce_one(x, rules):
    have = _var_list(x)
    for key, rhs in rules.items():
        if key.expr != x.expr:
            continue
        need = _var_list(key)
        rest = list(have)
        try:
            for v in need:
                rest.remove(v)
        except ValueError:
            continue
        out = rhs
        for v in rest:
            out = sp.diff(out, v)
        return out
    return x


def _var_list(x):
    return [v for v, k in x.variable_count for _ in range(k)]


@dataclass
class FieldEquationReport:
    passed: bool
    method: str
    residual: sp.Matrix
    source: str
    witness: dict | None = None
    failing: list = field(default_factory=list)

    def summary(self) -> str:
        state = "pass" if self.passed else "fail"
        return f"{self.source} field equations: {state} ({self.method})"


def field_equation_residual(c: Coframe, source: StressEnergy | None = None,
                            constraints: Mapping | None = None,
                            normal=None) -> sp.Matrix:
    normal = normal or c.chart.normal
    omega = solve_connection(c)
    R = riemann_components(curvature(omega), c)
    G = einstein_tensor(R, normal)
    T = source.T if source is not None else sp.zeros(4, 4)
    res = G - 8 * sp.pi * T
    if constraints:
        res = res.applyfunc(lambda v: reduce_jets(v, constraints))
    ctx = c.chart.ctx
    return res.applyfunc(lambda v: normal(ctx.expand_definitions(v)) if v != 0 else v)


def verify_field_equations(c: Coframe, source: StressEnergy | None = None,
                           constraints: Mapping | None = None, trials: int = 20,
                           seed: int = 0) -> FieldEquationReport:
    """Check ``G_ab = 8 pi T_ab`` (vacuum when ``source`` is ``None``).

    The residual is first simplified; whatever survives is probed
    numerically at admissible points before a failure is reported.
    """
    src = source.source if source is not None else "vacuum"
    res = field_equation_residual(c, source, constraints)
    failing = [(a, b) for a in range(4) for b in range(4) if res[a, b] != 0]
    if not failing:
        return FieldEquationReport(True, "symbolic", res, src)
    rng = np.random.default_rng(seed)
    ctx = c.chart.ctx
    probe = sp.Tuple(*[res[a, b] for a, b in failing])
    done = 0
    for attempt in range(10 * trials):
        point = random_point(probe, ctx, rng, canonical=False)
        try:
            vals = [eval_numeric(v, point) for v in probe]
        except (DomainError, ZeroDivisionError, OverflowError):
            continue
        done += 1
        if any(abs(v) > 1e-9 for v in vals):
            return FieldEquationReport(False, "numeric", res, src,
                                       {to_text(k) if not getattr(k, "is_Symbol", False) else k.name: v
                                        for k, v in point.items()}, failing)
        if done >= trials:
            break
    if done == 0:
        return FieldEquationReport(False, "inconclusive", res, src, None, failing)
    return FieldEquationReport(True, "numeric", res, src)


# ---------------------------------------------------------------------------
# frame components


def connection_frame_components(omega: MatrixForm, c: Coframe) -> dict:
    """``omega^a_{bc}`` keyed by ``(a, b, c)``."""
    out = {}
    for a, b, f in omega.nonzero_entries():
        for (k,), v in to_frame_basis(f, c).items():
            out[(a, b, k)] = v
    return out


def connection_coordinate_components(omega: MatrixForm) -> dict:
    """``omega^a_{b mu}`` keyed by ``(a, b, coordinate name)``."""
    out = {}
    for a, b, f in omega.nonzero_entries():
        for (mu,), v in f.comps.items():
            out[(a, b, f.chart.names[mu])] = v
    return out
