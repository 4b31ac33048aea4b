"""Group elements, gauge transformations and the cocycle condition.

SO(1,3) elements are 4x4 matrices; u(1) elements ``exp(i chi)`` are stored
through their real phase ``chi`` and never evaluated as complex numbers.
The transformation law is ``omega' = L omega L^-1 + L dL^-1``; for
``exp(i chi)`` it reduces to ``A' = A - i dchi``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Mapping

import sympy as sp

from .exterior import ETA, Form, MatrixForm, exterior_derivative
from .symbolic import simplify, to_text


@dataclass(frozen=True)
class Generator:
    name: str
    matrix: sp.Matrix

    def __post_init__(self):
        low = ETA * self.matrix
        if not (low + low.T).is_zero_matrix:
            raise ValueError(f"{self.name} is not in so(1,3)")

    @property
    def kind(self) -> str:
        T = self.matrix
        if T**3 == -T:
            return "rotation"
        if T**3 == T:
            return "boost"
        return "general"


T_PHI = Generator("T_phi", sp.Matrix([
    [0, 0, 0, 0],
    [0, 0, 0, -1],
    [0, 0, 0, 0],
    [0, 1, 0, 0],
]))


@dataclass(frozen=True)
class SO13Element:
    matrix: sp.Matrix
    generator: Generator | None = None
    angle: sp.Expr | None = None

    def inverse(self) -> "SO13Element":
        inv = (ETA * self.matrix.T * ETA).applyfunc(simplify)
        angle = None if self.angle is None else -self.angle
        return SO13Element(inv, self.generator, angle)

    def __matmul__(self, other: "SO13Element") -> "SO13Element":
        return SO13Element((self.matrix * other.matrix).applyfunc(simplify))

    def __str__(self) -> str:
        if self.generator is not None:
            return f"exp(({to_text(self.angle)})*{self.generator.name})"
        return str(self.matrix.tolist())


@dataclass(frozen=True)
class U1Element:
    phase: sp.Expr

    def inverse(self) -> "U1Element":
        return U1Element(-self.phase)

    def __matmul__(self, other: "U1Element") -> "U1Element":
        return U1Element(simplify(self.phase + other.phase))

    def __str__(self) -> str:
        if self.phase == 0:
            return "1"
        return f"exp(i*({to_text(self.phase)}))"


def identity_so13() -> SO13Element:
    return SO13Element(sp.eye(4))


def so13_exp(T: Generator, theta) -> SO13Element:
    """Closed-form ``exp(theta T)`` for rotation (``T^3 = -T``) and boost
    (``T^3 = T``) generators."""
    theta = sp.sympify(theta)
    M = T.matrix
    kind = T.kind
    if kind == "rotation":
        L = sp.eye(4) + sp.sin(theta) * M + (1 - sp.cos(theta)) * M**2
    elif kind == "boost":
        L = sp.eye(4) + sp.sinh(theta) * M + (sp.cosh(theta) - 1) * M**2
    else:
        raise ValueError(f"no closed-form exponential for {T.name}")
    return SO13Element(L.applyfunc(simplify), T, theta)


def verify_group_membership(L: SO13Element) -> bool:
    """``L^T eta L = eta``."""
    res = (L.matrix.T * ETA * L.matrix - ETA).applyfunc(simplify)
    return res.is_zero_matrix


def _check_tag(x, L):
    if isinstance(L, U1Element) != (isinstance(x, Form)):
        raise TypeError("group element does not match the connection's algebra")


def gauge_transform_connection(omega, L):
    """``L omega L^-1 + L dL^-1`` (``A - i dchi`` for a u(1) phase)."""
    _check_tag(omega, L)
    if isinstance(L, U1Element):
        if not omega.imaginary:
            raise ValueError("u(1) connection must be imaginary-tagged")
        dchi = exterior_derivative(Form.scalar(omega.chart, L.phase))
        return Form(omega.chart, 1, {k: v for k, v in (omega.real_part() - dchi).comps.items()},
                    imaginary=True)
    Linv = L.inverse().matrix
    chart = omega.chart
    rotated = omega.left(L.matrix).right(Linv)
    dLinv = MatrixForm.constant(chart, Linv).map(exterior_derivative)
    inhom = dLinv.left(L.matrix)
    out = rotated + inhom
    return MatrixForm(out.rows, omega.algebra)


def gauge_transform_curvature(Omega, L):
    _check_tag(Omega, L)
    if isinstance(L, U1Element):
        return Omega
    return MatrixForm(Omega.left(L.matrix).right(L.inverse().matrix).rows, Omega.algebra)


@dataclass(frozen=True)
class CocycleResult:
    passed: bool
    violation: tuple | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


def _same(a, b) -> bool:
    if isinstance(a, U1Element):
        diff = simplify(a.phase - b.phase)
        if diff == 0:
            return True
        # exp(2 pi i k) = 1 for integer k
        k = simplify(diff / (2 * sp.pi))
        return k.is_integer is True
    return (a.matrix - b.matrix).applyfunc(simplify).is_zero_matrix


def cocycle_check(transitions: Mapping[tuple, object]) -> CocycleResult:
    """``g_ij g_jk = g_ik`` on every triple, plus ``g_ji = g_ij^-1``.

    ``transitions`` maps ordered patch pairs to group elements; only triples
    for which all three elements are given are checked.
    """
    for (i, j), g in transitions.items():
        back = transitions.get((j, i))
        if back is not None and not _same(back, g.inverse()):
            return CocycleResult(False, (i, j), f"g_{j}{i} is not the inverse of g_{i}{j}")
    patches = sorted({p for pair in transitions for p in pair}, key=str)
    for i, j, k in permutations(patches, 3):
        gij = transitions.get((i, j))
        gjk = transitions.get((j, k))
        gik = transitions.get((i, k))
        if gij is None or gjk is None or gik is None:
            continue
        if not _same(gij @ gjk, gik):
            return CocycleResult(False, (i, j, k), f"g_{i}{j} g_{j}{k} != g_{i}{k}")
    return CocycleResult(True)
