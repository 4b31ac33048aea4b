"""Symbolic expressions over a chart: declaration context, normal form,
differentiation, substitution, series, numeric evaluation and equivalence.

Expressions are plain (immutable) sympy trees.  Everything that needs to know
about coordinates, parameters, unknown functions or assumptions takes a
:class:`Context`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
import sympy as sp
from sympy.core.function import AppliedUndef

from .grammar import ParseError, UndeclaredSymbolError, parse, to_text

__all__ = [
    "Assumption",
    "Context",
    "Coordinate",
    "DomainError",
    "ParseError",
    "SeriesResult",
    "Simplified",
    "UndeclaredSymbolError",
    "UnsupportedExpansion",
    "Verdict",
    "differentiate",
    "equivalent",
    "eval_numeric",
    "linearize",
    "parse",
    "series_at",
    "simplify",
    "simplify_traced",
    "substitute",
    "to_text",
]


class DomainError(ArithmeticError):
    """Numeric evaluation left the real domain; ``subtree`` is the culprit."""

    def __init__(self, message: str, subtree):
        super().__init__(f"{message}: {to_text(subtree)}")
        self.subtree = subtree


class UnsupportedExpansion(ValueError):
    pass


@dataclass(frozen=True)
class Assumption:
    """A predicate on one symbol.

    ``predicate`` is one of ``positive``, ``nonzero``, ``integer``, ``range``
    (strict ``lower < symbol < upper``, either bound may be ``None``) or
    ``ne`` (``symbol != value``).
    """

    symbol: str
    predicate: str
    lower: sp.Expr | None = None
    upper: sp.Expr | None = None
    value: sp.Expr | None = None

    def __str__(self) -> str:
        if self.predicate == "range":
            lo = "-oo" if self.lower is None else _txt(self.lower)
            hi = "oo" if self.upper is None else _txt(self.upper)
            return f"{lo} < {self.symbol} < {hi}"
        if self.predicate == "ne":
            return f"{self.symbol} != {to_text(self.value)}"
        return f"{self.symbol} {self.predicate}"


def _txt(x) -> str:
    return x if isinstance(x, str) else to_text(x)


@dataclass(frozen=True)
class Coordinate:
    name: str
    symbol: sp.Symbol
    lower: sp.Expr | None = None
    upper: sp.Expr | None = None
    period: sp.Expr | None = None
    exclusions: tuple = ()


_SYMPY_FLAGS = {
    "positive": {"positive": True},
    "nonzero": {"nonzero": True, "real": True},
    "integer": {"integer": True},
}


class Context:
    """Declared coordinates, parameters, unknown functions and assumptions.

    Declaration methods return ``self`` so a context can be built fluently;
    once built it is only read.
    """

    def __init__(self):
        self.symbols: dict[str, sp.Symbol] = {}
        self.functions: dict[str, sp.Expr] = {}
        self.coordinates: dict[str, Coordinate] = {}
        self.parameters: list[str] = []
        self.assumptions: list[Assumption] = []
        self.definitions: dict[sp.Symbol, sp.Expr] = {}
        self.small: set[sp.Symbol] = set()

    # -- declarations --------------------------------------------------------
    def _fresh(self, name: str):
        if name in self.symbols or name in self.functions:
            raise ValueError(f"{name!r} already declared")

    def coordinate(self, name, lower=None, upper=None, period=None, exclude=()):
        self._fresh(name)
        s = sp.Symbol(name, real=True)
        self.symbols[name] = s
        lo, hi = _maybe(lower), _maybe(upper)
        per = _maybe(period)
        if isinstance(per, str):
            per = parse(per, self)
        if per is not None and not per.is_positive:
            raise ValueError(f"period of {name} must be positive")
        self.coordinates[name] = Coordinate(name, s, lo, hi, per, tuple(exclude))
        if lo is not None or hi is not None:
            self.assumptions.append(Assumption(name, "range", lo, hi))
        return self

    def parameter(self, name, *predicates, lower=None, upper=None, small=False):
        self._fresh(name)
        flags = {"real": True}
        for p in predicates:
            flags.update(_SYMPY_FLAGS[p])
        s = sp.Symbol(name, **flags)
        self.symbols[name] = s
        self.parameters.append(name)
        for p in predicates:
            self.assumptions.append(Assumption(name, p))
        if lower is not None or upper is not None:
            self.assumptions.append(Assumption(name, "range", _maybe(lower), _maybe(upper)))
        if small:
            self.small.add(s)
        return self

    def function(self, name, args: Iterable[str], small=False):
        self._fresh(name)
        syms = [self.symbols[a] for a in args]
        f = sp.Function(name, real=True)(*syms)
        self.functions[name] = f
        if small:
            self.small.add(f)
        return self

    def define(self, name, expr):
        """Attach a defining expression to an already declared parameter."""
        self.definitions[self.symbols[name]] = self._expr(expr)
        return self

    def assume(self, name, predicate, lower=None, upper=None, value=None):
        self.assumptions.append(
            Assumption(
                name, predicate, self._expr(lower), self._expr(upper), self._expr(value)
            )
        )
        return self

    def _expr(self, e):
        if e is None:
            return None
        if isinstance(e, str):
            return parse(e, self)
        return sp.sympify(e)

    # -- queries -------------------------------------------------------------
    def __getitem__(self, name: str):
        if name in self.symbols:
            return self.symbols[name]
        return self.functions[name]

    def parse(self, text: str, evaluate: bool = True) -> sp.Expr:
        return parse(text, self, evaluate=evaluate)

    def coordinate_symbols(self) -> list[sp.Symbol]:
        return [c.symbol for c in self.coordinates.values()]

    def expand_definitions(self, e):
        """Replace defined parameters by their definitions until none remain."""
        for _ in range(8):
            new = e.xreplace(self.definitions)
            if new == e:
                return e
            e = new
        return e

    def _ranges(self, name: str) -> list[Assumption]:
        return [a for a in self.assumptions if a.symbol == name and a.predicate == "range"]

    def resolve(self, b):
        """Bounds may be given as text naming symbols declared later."""
        if isinstance(b, str):
            return parse(b, self)
        return b

    def bounds(self, name: str):
        """Resolved ``(lower, upper)`` pairs of every range on ``name``."""
        return [(self.resolve(a.lower), self.resolve(a.upper)) for a in self._ranges(name)]

    def sign(self, f) -> tuple[int, tuple[Assumption, ...]] | None:
        """Sign of ``f`` on the admissible region, with the assumptions used."""
        f = sp.expand(f)
        if f.is_number:
            if f.is_positive:
                return 1, ()
            if f.is_negative:
                return -1, ()
            return None
        if f.is_positive:
            return 1, self._flag_assumptions(f)
        if f.is_negative:
            return -1, self._flag_assumptions(f)
        for s in f.free_symbols:
            for a in self._ranges(s.name):
                lo, hi = self.resolve(a.lower), self.resolve(a.upper)
                if lo is not None and sp.expand(f - (s - lo)) == 0:
                    return 1, (a,)
                if lo is not None and sp.expand(f + (s - lo)) == 0:
                    return -1, (a,)
                if hi is not None and sp.expand(f - (hi - s)) == 0:
                    return 1, (a,)
                if hi is not None and sp.expand(f + (hi - s)) == 0:
                    return -1, (a,)
        return None

    def nonzero(self, f) -> tuple[Assumption, ...] | None:
        """Assumptions proving ``f != 0``, or ``None`` if it cannot be shown."""
        sgn = self.sign(f)
        if sgn is not None:
            return sgn[1]
        f = sp.expand(f)
        if f.is_nonzero:
            return self._flag_assumptions(f)
        for a in self.assumptions:
            if a.predicate != "ne":
                continue
            s = self.symbols[a.symbol]
            d = sp.expand(s - a.value)
            if sp.expand(f - d) == 0 or sp.expand(f + d) == 0:
                return (a,)
        return None

    def _flag_assumptions(self, f) -> tuple[Assumption, ...]:
        names = {s.name for s in f.free_symbols}
        return tuple(
            a
            for a in self.assumptions
            if a.symbol in names and a.predicate in ("positive", "nonzero")
        )

    # -- sampling ------------------------------------------------------------
    def sample(self, rng: np.random.Generator, canonical: bool = False) -> dict:
        """Draw one admissible numeric point for every declared symbol."""
        values: dict[sp.Symbol, float] = {}
        names = list(self.parameters) + list(self.coordinates)
        pending = [self.symbols[n] for n in names]
        for _ in range(len(pending) + 2):
            left = []
            for s in pending:
                v = self._draw(s, values, rng, canonical)
                if v is None:
                    left.append(s)
                else:
                    values[s] = v
            pending = left
            if not pending:
                break
        if pending:
            raise ValueError(f"cannot sample {pending}: circular bounds")
        return values

    def _bound(self, b, values):
        if b is None:
            return None
        b = self.expand_definitions(self.resolve(b))
        if not b.free_symbols <= set(values):
            raise KeyError
        return float(b.xreplace({k: sp.Float(v) for k, v in values.items()}))

    def _draw(self, s, values, rng, canonical):
        if s in self.definitions:
            d = self.expand_definitions(self.definitions[s])
            if not d.free_symbols <= set(values):
                return None
            return eval_numeric(d, values)
        lo, hi = -math.inf, math.inf
        try:
            for a in self._ranges(s.name):
                if a.lower is not None:
                    lo = max(lo, self._bound(a.lower, values))
                if a.upper is not None:
                    hi = min(hi, self._bound(a.upper, values))
        except KeyError:
            return None
        if s.is_positive:
            lo = max(lo, 0.0)
        if s.is_integer:
            if canonical:
                return 1.0
            return float(rng.integers(1, 5))
        if math.isfinite(lo) and math.isfinite(hi):
            if canonical:
                return 0.5 * (lo + hi)
            return float(rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo)))
        if math.isfinite(lo):
            return lo + (1.0 if canonical else float(rng.uniform(0.2, 2.0)))
        if math.isfinite(hi):
            return hi - (1.0 if canonical else float(rng.uniform(0.2, 2.0)))
        if canonical:
            return 0.0 if not s.is_nonzero else 1.0
        v = float(rng.uniform(0.2, 2.0))
        if s.is_nonzero:
            return v if rng.random() < 0.5 else -v
        return float(rng.uniform(-2.0, 2.0))


def _maybe(x):
    if x is None or isinstance(x, str):
        return x
    return sp.sympify(x)


# ---------------------------------------------------------------------------
# simplification


@dataclass(frozen=True)
class Simplified:
    expr: sp.Expr
    used: frozenset = frozenset()
    blocked: tuple = ()


def simplify(e, ctx: Context | None = None) -> sp.Expr:
    """Normal form of ``e``.

    Without a context symbols are treated as generic and common factors are
    cancelled freely.  With a context every cancelled factor must be provably
    nonzero and square roots of squares are only taken on a known sign.
    """
    return simplify_traced(e, ctx).expr


def simplify_traced(e, ctx: Context | None = None) -> Simplified:
    e = sp.sympify(e)
    used: set = set()
    blocked: list = []
    for _ in range(8):
        new = _normal_pass(e, ctx, used, blocked)
        if new == e:
            break
        e = new
    return Simplified(e, frozenset(used), tuple(dict.fromkeys(blocked)))


def _normal_pass(e, ctx, used, blocked):
    if ctx is not None:
        e = _branch_pass(e, ctx, used)
    e, back = _encode_exponentials(e)
    e = e.replace(sp.tan, lambda a: sp.sin(a) / sp.cos(a))
    if e.has(sp.cosh, sp.tanh):
        e = _hyperbolic(e.replace(sp.tanh, lambda a: sp.sinh(a) / sp.cosh(a)))
    if not e.has(sp.sin, sp.cos):
        return _tidy(_rational_normal(e, ctx, used, blocked).xreplace(back))
    # two canonical representatives modulo sin^2 + cos^2 = 1; keep the shorter
    cands = []
    for kill in (sp.cos, sp.sin):
        u, b = set(), []
        r = _rational_normal(_pythagoras(e, kill), ctx, u, b)
        r = _tidy(r.xreplace(back))
        cands.append((sp.count_ops(r), r, u, b))
    best = min(cands, key=lambda c: c[0])
    used.update(best[2])
    blocked.extend(best[3])
    return best[1]


def _rational_normal(e, ctx, used, blocked):
    num, den = _num_den(e)
    if ctx is None:
        return _cancel(num / den) if den != 1 else _expand(num)
    return _cancel_with_assumptions(num, den, ctx, used, blocked)


def _hide(e, hidden: dict, radicals: bool):
    """Replace function applications (and optionally radicals) by dummies,
    rebuilding only the nodes above a replacement."""
    if isinstance(e, (sp.Function, sp.Derivative)) or (radicals and e.is_Pow and not e.exp.is_Integer):
        return hidden.setdefault(e, sp.Dummy())
    if not e.args:
        return e
    args = tuple(_hide(a, hidden, radicals) for a in e.args)
    if all(x is y for x, y in zip(args, e.args)):
        return e
    return e.func(*args)


def _shallow(op, e):
    """Apply ``op`` (expand or cancel) without touching function arguments.

    Expanding inside arguments would split them into sums of fractions that
    the next pass recombines into a larger argument, so repeated passes grow
    instead of converging.
    """
    hidden: dict = {}
    h = _hide(sp.sympify(e), hidden, False)
    if not hidden:
        return op(h)
    return op(h).xreplace({v: k for k, v in hidden.items()})


def _expand(e):
    return _shallow(sp.expand, e)


def _cancel(e):
    num, den = sp.fraction(e)
    out = _poly_cancel(num, den)
    return out if out is not None else _shallow(sp.cancel, e)


def _poly_cancel(num, den):
    """``num/den`` in lowest terms via polynomial gcd, skipping the
    expression-level preprocessing of ``sympy.cancel``."""
    hidden: dict = {}
    n, d = _hide(sp.sympify(num), hidden, False), _hide(sp.sympify(den), hidden, False)
    if any(p.is_Pow and not p.exp.is_Integer for x in (n, d) for p in sp.preorder_traversal(x)):
        return None  # radicals need sympy.cancel's own gathering
    try:
        (P, Q), _ = sp.parallel_poly_from_expr((n, d))
    except sp.PolynomialError:
        return None
    if Q.is_zero:
        return None
    P, Q = P.cancel(Q, include=True)
    out = P.as_expr() / Q.as_expr()
    return out.xreplace({v: k for k, v in hidden.items()}) if hidden else out


def _tidy(r):
    num, den = sp.fraction(r)
    num, den = _expand(num), _expand(den)
    if den == 1:
        return num
    return num / den


def _num_den(e):
    """Numerator and denominator of ``e`` without any cancellation."""
    if e.is_Add:
        nums, dens = zip(*(_num_den(a) for a in e.args))
        distinct = [d for d in dict.fromkeys(dens) if d != 1]
        if len(distinct) > 1:
            lcm = _lcm(distinct)
            if lcm is not None:
                quos = [_hidden_op(lambda P, Q: P.exquo(Q), lcm, d) if d != 1 else lcm for d in dens]
                if all(q is not None for q in quos):
                    num = sp.Add(*(n * q for n, q in zip(nums, quos)))
                    return _expand(num), lcm
        den = sp.Mul(*dict.fromkeys(dens))
        num = sp.Add(*(n * _quo_exact(den, d) for n, d in zip(nums, dens)))
        return _expand(num), den
    if e.is_Mul:
        n, d = sp.S.One, sp.S.One
        for a in e.args:
            an, ad = _num_den(a)
            n, d = n * an, d * ad
        return _expand(n), _expand(d)
    if e.is_Pow and e.exp.is_Integer:
        bn, bd = _num_den(e.base)
        k = int(e.exp)
        if k < 0:
            return _expand(bd ** (-k)), _expand(bn ** (-k))
        return _expand(bn**k), _expand(bd**k)
    if e.is_Pow:
        return sp.Pow(_rebuild(e.base), e.exp), sp.S.One
    if e.args and not isinstance(e, (AppliedUndef, sp.Derivative)):
        return e.func(*(_rebuild(a) for a in e.args)), sp.S.One
    return e, sp.S.One


def _hidden_op(op, *exprs):
    """Run a binary ``Poly`` method with functions and radicals as opaque
    generators; ``None`` when the inputs are not polynomials."""
    hidden: dict = {}
    hid = [_hide(sp.sympify(e), hidden, True) for e in exprs]
    try:
        (P, Q), _ = sp.parallel_poly_from_expr(hid)
        out = op(P, Q).as_expr()
    except (sp.PolynomialError, sp.polys.polyerrors.ExactQuotientFailed):
        return None
    return out.xreplace({v: k for k, v in hidden.items()}) if hidden else out


def _lcm(dens):
    """Polynomial lcm of expanded denominators.  No factor is divided out of
    a numerator, so the combined fraction is valid wherever every term is."""
    out = dens[0]
    for d in dens[1:]:
        out = _hidden_op(lambda P, Q: P.lcm(Q), out, d)
        if out is None:
            return None
    return _expand(out)


def _quo_exact(den, d):
    """``den / d`` where ``d`` is one of the factors multiplied into ``den``."""
    if d == 1:
        return den
    factors = list(dict.fromkeys(sp.Mul.make_args(den)))
    out = []
    removed = False
    for f in factors:
        if not removed and f == d:
            removed = True
            continue
        out.append(f)
    if removed:
        return sp.Mul(*out)
    return _cancel(den / d)


def _rebuild(e):
    n, d = _num_den(e)
    return n if d == 1 else n / d


def _cancel_with_assumptions(num, den, ctx, used, blocked):
    if den == 1:
        return _expand(num)
    g = sp.gcd(num, den)
    if g.is_number:
        return _cancel(num / den)
    _, factors = sp.factor_list(g)
    allowed = sp.S.One
    for f, k in factors:
        proof = ctx.nonzero(f)
        if proof is None:
            blocked.append(f)
            continue
        used.update(proof)
        allowed *= f**k
    if allowed != 1:
        num = sp.quo(num, _expand(allowed))
        den = sp.quo(den, _expand(allowed))
    if not any(f for f, _ in factors if f in blocked):
        return _cancel(num / den)
    # a blocked factor must survive: keep both sides expanded so that it is
    # not recombined and cancelled by construction
    cn, pn = sp.primitive(_expand(num))
    cd, pd = sp.primitive(_expand(den))
    return sp.Mul(sp.Rational(cn, cd), pn, sp.Pow(pd, -1))


def _branch_pass(e, ctx, used):
    def visit(x):
        if not x.args or isinstance(x, (AppliedUndef, sp.Derivative)):
            return x
        args = tuple(visit(a) for a in x.args)
        if args != x.args:
            x = x.func(*args)
        if x.is_Pow and x.exp.is_Rational and not x.exp.is_Integer:
            return _split_root(x, ctx, used)
        if isinstance(x, sp.Abs):
            sgn = ctx.sign(x.args[0])
            if sgn is not None:
                used.update(sgn[1])
                return sgn[0] * x.args[0]
        return x

    return visit(e)


def _split_root(x, ctx, used):
    coeff, factors = sp.factor_list(x.base)
    parts = []
    proof: list = []
    sign = 1 if coeff > 0 else -1
    for f, k in factors:
        s = ctx.sign(f)
        if s is None:
            return x
        proof.extend(s[1])
        if s[0] < 0:
            f = -f
            sign *= (-1) ** k
        parts.append((f, k))
    if sign < 0:
        return x
    used.update(proof)
    out = sp.Pow(abs(coeff), x.exp)
    for f, k in parts:
        out *= sp.Pow(f, k * x.exp)
    return out


def _exp_terms(arg):
    """Split an exponent into rational multiples of coefficient-free terms."""
    out = []
    for t in sp.Add.make_args(sp.expand(arg)):
        c, rest = t.as_coeff_Mul()
        out.append((rest, c))
    return out


def _encode_exponentials(e):
    """Replace ``exp`` by powers of positive dummies, one per exponent term.

    ``exp(2*psi - gamma)`` becomes ``E_psi**2 / E_gamma`` so that rational
    cancellation sees ``exp(a)*exp(-a) = 1``.
    """
    exps = [x for x in e.atoms(sp.exp)]
    if not exps and not e.has(sp.E):
        return e, {}
    denoms: dict = {}
    for x in exps:
        for term, c in _exp_terms(x.args[0]):
            if term == 1:
                continue
            c = sp.Rational(c)
            denoms[term] = sp.ilcm(denoms.get(term, 1), c.q)
    dummies = {
        term: sp.Dummy(f"E{i}", positive=True) for i, term in enumerate(sorted(denoms, key=sp.default_sort_key))
    }
    back = {dummies[t]: sp.exp(t / denoms[t]) for t in dummies}

    def enc(x):
        out = sp.S.One
        for term, c in _exp_terms(x.args[0]):
            if term == 1:
                out *= sp.exp(c)
                continue
            out *= dummies[term] ** (sp.Rational(c) * denoms[term])
        return out

    mapping = {x: enc(x) for x in exps}
    return e.xreplace(mapping), back


def _pythagoras(e, kill):
    """Rewrite even powers of ``kill`` (sin or cos) through the other one."""
    other = sp.cos if kill is sp.sin else sp.sin

    def fix(p):
        k = int(abs(p.exp))
        c = other(p.base.args[0])
        r = p.base ** (k % 2) * (1 - c**2) ** (k // 2)
        return r if p.exp > 0 else 1 / r

    return e.replace(
        lambda p: p.is_Pow and isinstance(p.base, kill) and p.exp.is_Integer and abs(p.exp) >= 2,
        fix,
    )


def _hyperbolic(e):
    """Even powers of cosh through sinh (cosh^2 = 1 + sinh^2)."""

    def fix(p):
        k = int(abs(p.exp))
        r = p.base ** (k % 2) * (1 + sp.sinh(p.base.args[0]) ** 2) ** (k // 2)
        return r if p.exp > 0 else 1 / r

    return e.replace(
        lambda p: p.is_Pow and isinstance(p.base, sp.cosh) and p.exp.is_Integer and abs(p.exp) >= 2,
        fix,
    )


# ---------------------------------------------------------------------------
# calculus and substitution


def differentiate(e, v, ctx: Context | None = None) -> sp.Expr:
    if ctx is not None and v not in ctx.coordinate_symbols():
        raise ValueError(f"{v} is not a declared coordinate")
    return simplify(sp.diff(e, v))


def substitute(e, bindings: Mapping, ctx: Context | None = None) -> sp.Expr:
    """Simultaneous substitution followed by simplification.

    Keys may be names (resolved in ``ctx``) or sympy objects.  An unknown
    function may only be bound to an expression in its own arguments.
    """
    table = {}
    funcs = {}
    for k, v in bindings.items():
        key = ctx[k] if isinstance(k, str) else k
        val = ctx.parse(v) if isinstance(v, str) else sp.sympify(v)
        if isinstance(key, AppliedUndef):
            coords = set(ctx.coordinate_symbols()) if ctx else set()
            extra = (val.free_symbols & coords) - set(key.args)
            if extra:
                raise ValueError(
                    f"{key.func.__name__} depends on {key.args}, binding uses {sorted(map(str, extra))}"
                )
            funcs[key] = val
        else:
            table[key] = val
    out = sp.sympify(e)
    if funcs:
        out = out.subs(funcs).doit()
    if table:
        out = out.subs(table, simultaneous=True)
    return simplify(out)


def linearize(e, small: Iterable) -> sp.Expr:
    """Drop every product of two or more ``small`` quantities."""
    eps = sp.Dummy("eps")
    small = list(small)
    if not small:
        return sp.sympify(e)
    f = sp.sympify(e).subs({s: eps * s for s in small}, simultaneous=True)
    f = f.doit()
    lin = f.subs(eps, 0) + sp.diff(f, eps).subs(eps, 0)
    return simplify(lin)


@dataclass(frozen=True)
class SeriesResult:
    polynomial: sp.Expr
    order: int
    variable: sp.Symbol
    point: sp.Expr

    @property
    def leading_power(self):
        """Lowest power of ``variable - point`` present (``None`` if zero)."""
        if self.polynomial == 0:
            return None
        x = sp.Dummy("x")
        shifted = sp.expand(self.polynomial.subs(self.variable, x + self.point))
        return min(_power_of(t, x) for t in sp.Add.make_args(shifted))

    @property
    def diverges(self) -> bool:
        lp = self.leading_power
        return lp is not None and lp < 0


def series_at(e, v, point, order: int) -> SeriesResult:
    """Truncated expansion of ``e`` about ``v = point`` through ``order``.

    Negative powers are kept (a divergent leading term is information, not
    an error); anything that is not a power of ``v - point`` is rejected.
    """
    e = sp.sympify(e)
    point = sp.sympify(point)
    try:
        s = sp.series(e, v, point, order + 1)
    except (NotImplementedError, ValueError, sp.PoleError) as exc:
        raise UnsupportedExpansion(f"cannot expand {to_text(e)} at {v}={point}") from exc
    poly = s.removeO()
    if _has_essential(poly, v):
        raise UnsupportedExpansion(f"cannot expand {to_text(e)} at {v}={point}")
    x = sp.Dummy("x")
    for t in sp.Add.make_args(sp.expand(poly.subs(v, x + point))):
        if t == 0:
            continue
        try:
            _power_of(t, x)
        except ValueError as exc:
            raise UnsupportedExpansion(
                f"non-power behaviour of {to_text(e)} at {v}={point}"
            ) from exc
    return SeriesResult(simplify(poly), order, v, point)


def _power_of(t, x) -> int:
    _, dep = t.as_independent(x, as_Add=False)
    if dep == 1:
        return 0
    if dep == x:
        return 1
    if dep.is_Pow and dep.base == x and dep.exp.is_Integer:
        return int(dep.exp)
    raise ValueError(f"{dep} is not an integer power of {x}")


def _has_essential(poly, v):
    return any(v in a.args[0].free_symbols for a in poly.atoms(sp.exp, sp.log))


# ---------------------------------------------------------------------------
# numerics


def _lookup(bindings, node):
    if node in bindings:
        return bindings[node]
    key = node.name if node.is_Symbol else to_text(node)
    if key in bindings:
        return bindings[key]
    raise KeyError(f"no value bound for {key}")


def eval_numeric(e, bindings: Mapping) -> float:
    """IEEE double value of ``e``; raises :class:`DomainError` off the real domain."""
    return float(_ev(sp.sympify(e), bindings))


def _ev(e, b) -> float:
    if e.is_Number:
        return float(e)
    if e is sp.pi:
        return math.pi
    if e is sp.E:
        return math.e
    if e.is_Symbol or isinstance(e, (AppliedUndef, sp.Derivative)):
        return float(_lookup(b, e))
    if e.is_Add:
        return math.fsum(_ev(a, b) for a in e.args)
    if e.is_Mul:
        out = 1.0
        for a in e.args:
            out *= _ev(a, b)
        return out
    if e.is_Pow:
        base = _ev(e.base, b)
        x = e.exp
        if x.is_Integer:
            k = int(x)
            if k < 0 and base == 0.0:
                raise DomainError("division by zero", e.base)
            return base**k
        xv = _ev(x, b)
        if base < 0.0:
            raise DomainError("non-integer power of a negative number", e.base)
        if base == 0.0 and xv < 0:
            raise DomainError("division by zero", e.base)
        return base**xv
    if isinstance(e, sp.log):
        a = _ev(e.args[0], b)
        if a <= 0.0:
            raise DomainError("logarithm of a nonpositive number", e.args[0])
        return math.log(a)
    if isinstance(e, sp.tan):
        a = _ev(e.args[0], b)
        if math.cos(a) == 0.0:
            raise DomainError("tangent pole", e.args[0])
        return math.tan(a)
    fn = _REAL_FUNCS.get(e.func)
    if fn is not None:
        try:
            return fn(_ev(e.args[0], b))
        except OverflowError as exc:
            raise DomainError("overflow", e) from exc
    raise TypeError(f"cannot evaluate {type(e).__name__}")


_REAL_FUNCS = {
    sp.sin: math.sin,
    sp.cos: math.cos,
    sp.exp: math.exp,
    sp.sinh: math.sinh,
    sp.cosh: math.cosh,
    sp.Abs: abs,
}


@dataclass(frozen=True)
class Verdict:
    equal: bool
    method: str
    witness: dict | None = None
    probes: int = 0

    def __bool__(self) -> bool:
        return self.equal


def jet_atoms(e) -> list:
    """Unknown-function applications and derivative markers occurring in ``e``."""
    atoms = set(e.atoms(sp.Derivative))
    atoms |= {a for a in e.atoms(AppliedUndef)}
    return sorted(atoms, key=sp.default_sort_key)


def random_point(e, ctx: Context | None, rng, canonical=False) -> dict:
    """Admissible values for every free symbol and jet variable of ``e``."""
    point: dict = {}
    if ctx is not None:
        point.update(ctx.sample(rng, canonical=canonical))
    for s in sorted(e.free_symbols, key=sp.default_sort_key):
        if s not in point:
            point[s] = 0.0 if canonical else float(rng.uniform(-2.0, 2.0))
    for j in jet_atoms(e):
        point[j] = 0.0 if canonical else float(rng.uniform(-1.0, 1.0))
    return point


def close(a: float, b: float, rtol: float, atol: float = 1e-12) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b)) + atol


def equivalent(
    a,
    b,
    trials: int = 50,
    ctx: Context | None = None,
    rtol: float = 1e-8,
    seed: int = 0,
) -> Verdict:
    """Decide ``a == b``: exactly if the difference simplifies to zero,
    otherwise by ``trials`` admissible numeric probes.

    The first probe is a canonical point (zeros, ones, interval midpoints) so
    that simple counterexamples come out as simple witnesses.
    """
    a, b = sp.sympify(a), sp.sympify(b)
    if a == b:
        return Verdict(True, "identical")
    if ctx is not None:
        a, b = ctx.expand_definitions(a), ctx.expand_definitions(b)
    diff = simplify(a - b)
    if diff == 0:
        return Verdict(True, "symbolic")
    rng = np.random.default_rng(seed)
    done = 0
    attempts = 0
    both = sp.Tuple(a, b)
    while done < trials and attempts < 10 * trials:
        canonical = attempts == 0
        attempts += 1
        point = random_point(both, ctx, rng, canonical=canonical)
        try:
            va, vb = eval_numeric(a, point), eval_numeric(b, point)
        except (DomainError, ZeroDivisionError, OverflowError):
            continue
        done += 1
        if not close(va, vb, rtol):
            return Verdict(False, "numeric", _readable(point, both), done)
    if done == 0:
        return Verdict(False, "inconclusive", None, 0)
    return Verdict(True, "numeric", None, done)


def _readable(point, e) -> dict:
    names = {s for s in e.free_symbols} | set(jet_atoms(e))
    return {
        (k.name if getattr(k, "is_Symbol", False) else to_text(k)): v
        for k, v in point.items()
        if k in names
    }
