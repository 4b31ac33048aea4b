"""Differential forms on a coordinate chart.

A :class:`Form` stores one coefficient per strictly increasing tuple of
coordinate indices.  Coefficients are kept in normal form; on a linearized
chart every product of perturbation-tagged quantities is dropped as well.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterable, Mapping, Sequence

import sympy as sp

from .symbolic import Context, linearize, simplify, to_text

ETA = sp.diag(1, -1, -1, -1)


class SingularCoframeError(ArithmeticError):
    pass


def _perm_sign(seq: Sequence[int]) -> int:
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


class Chart:
    """An ordered set of coordinates drawn from a :class:`Context`."""

    def __init__(self, ctx: Context, names: Sequence[str], linear: bool = False):
        if len(set(names)) != len(names):
            raise ValueError("coordinate names must be unique")
        missing = [n for n in names if n not in ctx.coordinates]
        if missing:
            raise ValueError(f"undeclared coordinates {missing}")
        self.ctx = ctx
        self.names = tuple(names)
        self.coords = tuple(ctx.symbols[n] for n in names)
        self.linear = linear

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def coordinate(self, name: str):
        return self.ctx.coordinates[name]

    def normal(self, e):
        e = sp.sympify(e)
        if self.linear and self.ctx.small:
            return linearize(e, self.ctx.small)
        return simplify(e)

    def exact(self) -> "Chart":
        """The same chart without first-order truncation."""
        return Chart(self.ctx, self.names) if self.linear else self


class Form:
    """A differential form of fixed degree on a chart.

    ``imaginary`` marks a u(1)-valued form: the stored coefficients are real
    and the whole form is understood to be multiplied by the imaginary unit.
    """

    __slots__ = ("chart", "degree", "comps", "imaginary")

    def __init__(self, chart: Chart, degree: int, comps: Mapping | None = None,
                 imaginary: bool = False, normalize: bool = True):
        self.chart = chart
        self.degree = degree
        self.imaginary = imaginary
        out: dict[tuple[int, ...], sp.Expr] = {}
        if degree <= chart.dim:
            for idx, c in (comps or {}).items():
                idx = tuple(idx)
                if len(idx) != degree:
                    raise ValueError(f"index {idx} does not match degree {degree}")
                if len(set(idx)) < degree:
                    continue
                key = tuple(sorted(idx))
                out[key] = out.get(key, 0) + _perm_sign(idx) * sp.sympify(c)
        if normalize:
            out = {k: chart.normal(v) for k, v in out.items()}
        self.comps = {k: v for k, v in sorted(out.items()) if v != 0}

    # -- constructors --------------------------------------------------------
    @classmethod
    def zero(cls, chart: Chart, degree: int, imaginary: bool = False) -> "Form":
        return cls(chart, degree, {}, imaginary)

    @classmethod
    def scalar(cls, chart: Chart, f, imaginary: bool = False) -> "Form":
        return cls(chart, 0, {(): f}, imaginary)

    @classmethod
    def basis(cls, chart: Chart, *names: str) -> "Form":
        """``dx^i ^ dx^j ^ ...`` for the named coordinates."""
        return cls(chart, len(names), {tuple(chart.index(n) for n in names): 1})

    @classmethod
    def one_form(cls, chart: Chart, coeffs: Mapping[str, object], imaginary=False) -> "Form":
        return cls(chart, 1, {(chart.index(k),): v for k, v in coeffs.items()}, imaginary)

    # -- algebra -------------------------------------------------------------
    def _same(self, other: "Form"):
        if other.chart is not self.chart:
            raise ValueError("forms live on different charts")

    def __add__(self, other: "Form") -> "Form":
        if isinstance(other, (int, float)) and other == 0:
            return self
        self._same(other)
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        if other.imaginary != self.imaginary:
            raise ValueError("cannot add real and imaginary forms")
        keys = set(self.comps) | set(other.comps)
        return Form(self.chart, self.degree,
                    {k: self.comps.get(k, 0) + other.comps.get(k, 0) for k in keys},
                    self.imaginary)

    __radd__ = __add__

    def __neg__(self) -> "Form":
        return Form(self.chart, self.degree, {k: -v for k, v in self.comps.items()},
                    self.imaginary, normalize=False)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, f) -> "Form":
        return Form(self.chart, self.degree, {k: f * v for k, v in self.comps.items()},
                    self.imaginary)

    def __mul__(self, f) -> "Form":
        if isinstance(f, Form):
            raise TypeError("use wedge() for products of forms")
        return self.scale(f)

    __rmul__ = __mul__

    def __xor__(self, other: "Form") -> "Form":
        return wedge(self, other)

    def map(self, fn) -> "Form":
        return Form(self.chart, self.degree, {k: fn(v) for k, v in self.comps.items()},
                    self.imaginary)

    def real_part(self) -> "Form":
        """The stored real coefficients as an untagged form."""
        return Form(self.chart, self.degree, self.comps, normalize=False)

    def times_i(self) -> "Form":
        return Form(self.chart, self.degree, self.comps, imaginary=True, normalize=False)

    # -- queries -------------------------------------------------------------
    def coeff(self, *names: str) -> sp.Expr:
        idx = tuple(self.chart.index(n) for n in names)
        if len(set(idx)) < len(idx):
            return sp.S.Zero
        key = tuple(sorted(idx))
        return _perm_sign(idx) * self.comps.get(key, sp.S.Zero)

    def is_zero(self) -> bool:
        return not self.comps

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, float)) and other == 0:
            return self.is_zero()
        if not isinstance(other, Form):
            return NotImplemented
        return (self.chart is other.chart and self.degree == other.degree
                and self.imaginary == other.imaginary and self.comps == other.comps)

    __hash__ = None

    def free_symbols(self) -> set:
        out = set()
        for v in self.comps.values():
            out |= v.free_symbols
        return out

    def __repr__(self) -> str:
        return f"Form({self})"

    def __str__(self) -> str:
        return form_text(self)


def form_text(f: Form) -> str:
    if f.is_zero():
        return "0"
    parts = []
    for idx, c in f.comps.items():
        basis = "^".join("d" + f.chart.names[i] for i in idx)
        if not basis:
            parts.append(to_text(c))
            continue
        if c == 1:
            term = basis
        elif c == -1:
            term = "-" + basis
        else:
            ct = to_text(c)
            if c.is_Add:
                ct = f"({ct})"
            term = f"{ct}*{basis}"
        parts.append(term)
    out = parts[0]
    for p in parts[1:]:
        out += p if p.startswith("-") else "+" + p
    return f"i*({out})" if f.imaginary else out


def wedge(a: Form, b: Form) -> Form:
    """Graded-commutative exterior product."""
    a._same(b)
    if a.imaginary and b.imaginary:
        raise ValueError("product of two imaginary forms is not u(1)-valued")
    out: dict = {}
    for ia, ca in a.comps.items():
        for ib, cb in b.comps.items():
            idx = ia + ib
            if len(set(idx)) < len(idx):
                continue
            key = tuple(sorted(idx))
            out[key] = out.get(key, 0) + _perm_sign(idx) * ca * cb
    return Form(a.chart, a.degree + b.degree, out, a.imaginary or b.imaginary)


def exterior_derivative(a: Form) -> Form:
    out: dict = {}
    coords = a.chart.coords
    for idx, c in a.comps.items():
        for mu, x in enumerate(coords):
            if mu in idx:
                continue
            dc = sp.diff(c, x)
            if dc == 0:
                continue
            full = (mu,) + idx
            key = tuple(sorted(full))
            out[key] = out.get(key, 0) + _perm_sign(full) * dc
    return Form(a.chart, a.degree + 1, out, a.imaginary)


d = exterior_derivative


# ---------------------------------------------------------------------------
# matrix-valued forms


class MatrixForm:
    """A square grid of forms of common degree with a Lie-algebra tag."""

    __slots__ = ("chart", "degree", "rows", "algebra")

    def __init__(self, rows: Sequence[Sequence[Form]], algebra: str = "general"):
        self.rows = tuple(tuple(r) for r in rows)
        n = len(self.rows)
        if any(len(r) != n for r in self.rows):
            raise ValueError("matrix form must be square")
        first = self.rows[0][0]
        self.chart = first.chart
        self.degree = first.degree
        self.algebra = algebra
        for r in self.rows:
            for f in r:
                if f.degree != self.degree or f.chart is not self.chart:
                    raise ValueError("entries must share chart and degree")

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij) -> Form:
        i, j = ij
        return self.rows[i][j]

    @classmethod
    def zero(cls, chart: Chart, n: int, degree: int, algebra="general") -> "MatrixForm":
        return cls([[Form.zero(chart, degree) for _ in range(n)] for _ in range(n)], algebra)

    @classmethod
    def constant(cls, chart: Chart, m: sp.Matrix, algebra="general") -> "MatrixForm":
        """A matrix of 0-forms."""
        return cls([[Form.scalar(chart, m[i, j]) for j in range(m.cols)] for i in range(m.rows)],
                   algebra)

    @classmethod
    def from_one_form(cls, chart: Chart, m: sp.Matrix, form: Form, algebra="general"):
        """``m * form`` for a constant matrix ``m`` and scalar-valued ``form``."""
        return cls([[form.scale(m[i, j]) for j in range(m.cols)] for i in range(m.rows)], algebra)

    def map(self, fn) -> "MatrixForm":
        return MatrixForm([[fn(f) for f in r] for r in self.rows], self.algebra)

    def __add__(self, other: "MatrixForm") -> "MatrixForm":
        return MatrixForm([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)],
                          self.algebra)

    def __sub__(self, other: "MatrixForm") -> "MatrixForm":
        return MatrixForm([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)],
                          self.algebra)

    def __neg__(self) -> "MatrixForm":
        return self.map(lambda f: -f)

    def left(self, m: sp.Matrix) -> "MatrixForm":
        """``m @ self`` for a matrix of functions ``m``."""
        n = self.n
        return MatrixForm(
            [[_lin(self.chart, self.degree, [(m[i, k], self.rows[k][j]) for k in range(n)])
              for j in range(n)] for i in range(n)],
            self.algebra,
        )

    def right(self, m: sp.Matrix) -> "MatrixForm":
        """``self @ m`` for a matrix of functions ``m``."""
        n = self.n
        return MatrixForm(
            [[_lin(self.chart, self.degree, [(m[k, j], self.rows[i][k]) for k in range(n)])
              for j in range(n)] for i in range(n)],
            self.algebra,
        )

    def is_zero(self) -> bool:
        return all(f.is_zero() for r in self.rows for f in r)

    def lowered(self, eta: sp.Matrix = ETA) -> "MatrixForm":
        """Entries ``eta_ac M^c_b`` (first index lowered)."""
        return self.left(eta)

    def is_antisymmetric(self, eta: sp.Matrix = ETA) -> bool:
        low = self.lowered(eta)
        n = self.n
        return all((low[i, j] + low[j, i]).is_zero() for i in range(n) for j in range(i, n))

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatrixForm):
            return NotImplemented
        return self.rows == other.rows

    __hash__ = None

    def nonzero_entries(self):
        for i, r in enumerate(self.rows):
            for j, f in enumerate(r):
                if not f.is_zero():
                    yield i, j, f

    def __repr__(self) -> str:
        body = "; ".join(f"[{i}][{j}] = {f}" for i, j, f in self.nonzero_entries())
        return f"MatrixForm({self.algebra}: {body or '0'})"


def _lin(chart, degree, pairs) -> Form:
    out: dict = {}
    imag = False
    for c, f in pairs:
        if c == 0:
            continue
        imag = imag or f.imaginary
        for k, v in f.comps.items():
            out[k] = out.get(k, 0) + c * v
    return Form(chart, degree, out, imag)


def matrix_wedge(a: MatrixForm, b: MatrixForm) -> MatrixForm:
    n = a.n
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            acc: dict = {}
            for k in range(n):
                x, y = a.rows[i][k], b.rows[k][j]
                if x.is_zero() or y.is_zero():
                    continue
                for ia, ca in x.comps.items():
                    for ib, cb in y.comps.items():
                        idx = ia + ib
                        if len(set(idx)) < len(idx):
                            continue
                        key = tuple(sorted(idx))
                        acc[key] = acc.get(key, 0) + _perm_sign(idx) * ca * cb
            row.append(Form(a.chart, a.degree + b.degree, acc))
        rows.append(row)
    return MatrixForm(rows, a.algebra)


def matrix_d(a: MatrixForm) -> MatrixForm:
    return a.map(exterior_derivative)


# ---------------------------------------------------------------------------
# coframes


class Coframe:
    """Four orthonormal 1-forms ``e^a`` with signature (+,-,-,-)."""

    def __init__(self, forms: Sequence[Form]):
        if len(forms) != 4 or any(f.degree != 1 for f in forms):
            raise ValueError("a coframe is exactly four 1-forms")
        self.forms = tuple(forms)
        self.chart = forms[0].chart
        if self.chart.dim != 4:
            raise ValueError("coframes live on four-dimensional charts")
        self.eta = ETA
        self._inv = None
        if self.determinant() == 0:
            raise SingularCoframeError("coframe coefficient matrix is singular")

    @classmethod
    def from_matrix(cls, chart: Chart, m) -> "Coframe":
        m = sp.Matrix(m)
        return cls([Form(chart, 1, {(mu,): m[a, mu] for mu in range(4)}) for a in range(4)])

    def __getitem__(self, a: int) -> Form:
        return self.forms[a]

    @property
    def matrix(self) -> sp.Matrix:
        """``E[a, mu]`` with ``e^a = E[a, mu] dx^mu``."""
        return sp.Matrix(4, 4, lambda a, mu: self.forms[a].comps.get((mu,), sp.S.Zero))

    def determinant(self):
        return self.chart.normal(self.matrix.det(method="berkowitz"))

    @property
    def inverse(self) -> sp.Matrix:
        """``Einv[mu, a]`` with ``dx^mu = Einv[mu, a] e^a``."""
        if self._inv is None:
            inv = _invert(self.matrix)
            self._inv = inv.applyfunc(self.chart.normal)
        return self._inv


def _invert(m: sp.Matrix) -> sp.Matrix:
    """Inverse that exploits block structure (rows and columns that only
    couple among themselves are inverted separately)."""
    n = m.rows
    parent = list(range(2 * n))  # rows 0..n-1, columns n..2n-1

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(n):
            if m[i, j] != 0:
                parent[find(i)] = find(n + j)
    groups: dict = {}
    for k in range(2 * n):
        groups.setdefault(find(k), []).append(k)
    out = sp.zeros(n, n)
    for members in groups.values():
        rows = [k for k in members if k < n]
        cols = [k - n for k in members if k >= n]
        if len(rows) != len(cols):
            raise SingularCoframeError("coframe coefficient matrix is singular")
        sub = m.extract(rows, cols)
        inv = sp.Matrix([[1 / sub[0, 0]]]) if len(rows) == 1 else sub.adjugate() / sub.det()
        for a, j in enumerate(cols):
            for b, i in enumerate(rows):
                out[j, i] = inv[a, b]
    return out


def _minor(m: sp.Matrix, rows, cols):
    if not rows:
        return sp.S.One
    return m.extract(list(rows), list(cols)).det(method="berkowitz")


def to_frame_basis(a: Form, c: Coframe, at: Mapping | None = None) -> dict:
    """Coefficients of ``a`` on the basis ``e^{a1} ^ ... ^ e^{ap}`` (increasing).

    ``at`` optionally evaluates the conversion on a locus; a coframe that
    degenerates there raises :class:`SingularCoframeError`.
    """
    if at:
        det = simplify(c.matrix.det(method="berkowitz").subs(at))
        if det == 0 or det.has(sp.zoo, sp.nan):
            raise SingularCoframeError(f"coframe degenerate at {at}")
    inv = c.inverse
    n = a.chart.dim
    out = {}
    for fidx in combinations(range(n), a.degree):
        acc = 0
        for cidx, coef in a.comps.items():
            acc += coef * _minor(inv, cidx, fidx)
        acc = a.chart.normal(acc)
        if at:
            acc = simplify(acc.subs(at))
        if acc != 0:
            out[fidx] = acc
    return out


def from_frame_basis(coeffs: Mapping, c: Coframe, degree: int, imaginary=False) -> Form:
    E = c.matrix
    n = c.chart.dim
    out = {}
    for cidx in combinations(range(n), degree):
        acc = 0
        for fidx, coef in coeffs.items():
            acc += coef * _minor(E, tuple(fidx), cidx)
        out[cidx] = acc
    return Form(c.chart, degree, out, imaginary)


def frame_one_form(c: Coframe, coeffs: Mapping[int, object], imaginary=False) -> Form:
    """``sum_a coeffs[a] e^a`` as a coordinate form."""
    return from_frame_basis({(a,): v for a, v in coeffs.items()}, c, 1, imaginary)


def metric_from_coframe(c: Coframe) -> sp.Matrix:
    E = c.matrix
    g = E.T * c.eta * E
    return g.applyfunc(c.chart.normal)


def frame_antisymmetric(f: Form, c: Coframe) -> dict:
    """Fully antisymmetric frame components ``F_{ab}`` of a 2-form."""
    comps = to_frame_basis(f, c)
    out = {}
    for (a, b), v in comps.items():
        out[(a, b)] = v
        out[(b, a)] = -v
    return out


def levi_civita(*idx: int) -> int:
    """``eps_{0123} = +1``."""
    if len(set(idx)) < len(idx):
        return 0
    return _perm_sign(idx)


def all_permutations(n: int) -> Iterable[tuple]:
    return permutations(range(n))
