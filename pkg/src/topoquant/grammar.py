"""Canonical infix grammar for expressions.

The grammar is deliberately small::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := postfix (('^' | '**') unary)?
    postfix := atom ("'" | '.')*
    atom    := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Unknown functions are written by bare name (``psi``) and stand for the
application to their declared arguments.  A trailing ``'`` differentiates
with respect to the last declared argument and a trailing ``.`` with respect
to the first, so for ``psi(t, rho)`` the text ``psi'.`` means d2 psi/dt drho.
Other derivative markers are written ``D(psi, z, z)``.

Decimal literals are converted to exact rationals.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

import sympy as sp
from sympy.core.function import AppliedUndef

if TYPE_CHECKING:  # pragma: no cover
    from .symbolic import Context


class ParseError(ValueError):
    """Malformed input; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UndeclaredSymbolError(ParseError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"undeclared symbol {name!r}", offset)
        self.name = name


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),'.]))"
)

FUNCTIONS = {
    "sin": sp.sin,
    "cos": sp.cos,
    "tan": sp.tan,
    "exp": sp.exp,
    "ln": sp.log,
    "log": sp.log,
    "sqrt": sp.sqrt,
    "sinh": sp.sinh,
    "cosh": sp.cosh,
    "abs": sp.Abs,
}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, ctx: "Context", evaluate: bool):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.ctx = ctx
        self.ev = evaluate

    # -- helpers -----------------------------------------------------------
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _accept(self, *ops: str) -> _Tok | None:
        t = self.tok
        if t.kind == "op" and t.text in ops:
            self.i += 1
            return t
        return None

    def _expect(self, op: str) -> _Tok:
        t = self._accept(op)
        if t is None:
            where = self.tok
            what = "end of input" if where.kind == "end" else repr(where.text)
            raise ParseError(f"expected {op!r}, found {what}", where.pos)
        return t

    def _add(self, a, b):
        return sp.Add(a, b, evaluate=self.ev)

    def _mul(self, a, b):
        return sp.Mul(a, b, evaluate=self.ev)

    def _neg(self, a):
        return sp.Mul(sp.S.NegativeOne, a, evaluate=self.ev)

    def _pow(self, a, b):
        return sp.Pow(a, b, evaluate=self.ev)

    # -- grammar -----------------------------------------------------------
    def parse(self):
        if self.tok.kind == "end":
            raise ParseError("empty expression", self.tok.pos)
        e = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return e

    def expr(self):
        e = self.term()
        while True:
            if self._accept("+"):
                e = self._add(e, self.term())
            elif self._accept("-"):
                e = self._add(e, self._neg(self.term()))
            else:
                return e

    def term(self):
        e = self.unary()
        while True:
            if self._accept("*"):
                e = self._mul(e, self.unary())
            elif self._accept("/"):
                e = self._mul(e, self._pow(self.unary(), sp.S.NegativeOne))
            else:
                return e

    def unary(self):
        if self._accept("-"):
            operand = self.unary()
            if operand.is_Number:
                return -operand
            return self._neg(operand)
        if self._accept("+"):
            return self.unary()
        return self.power()

    def power(self):
        base = self.postfix()
        if self._accept("^", "**"):
            return self._pow(base, self.unary())
        return base

    def postfix(self):
        start = self.tok.pos
        e = self.atom()
        while self.tok.kind == "op" and self.tok.text in ("'", "."):
            t = self.tok
            self.i += 1
            e = self._derivative_suffix(e, t.text, start)
        return e

    def _derivative_suffix(self, e, mark: str, pos: int):
        fn = _underlying_function(e)
        if fn is None:
            raise ParseError(f"derivative mark {mark!r} on a non-function", pos)
        args = fn.args
        var = args[-1] if mark == "'" else args[0]
        return sp.Derivative(e, var)

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return sp.Rational(Fraction(t.text))
        if t.kind == "name":
            self.i += 1
            if self._accept("("):
                return self._call(t)
            return self._name(t)
        if self._accept("("):
            e = self.expr()
            self._expect(")")
            return e
        what = "end of input" if t.kind == "end" else repr(t.text)
        raise ParseError(f"unexpected {what}", t.pos)

    def _args(self) -> list:
        args = [self.expr()]
        while self._accept(","):
            args.append(self.expr())
        self._expect(")")
        return args

    def _call(self, t: _Tok):
        name = t.text
        if name == "D":
            fpos = self.tok.pos
            args = self._args()
            f = args[0]
            if _underlying_function(f) is None:
                raise ParseError("D() expects an unknown function", fpos)
            for v in args[1:]:
                if not isinstance(v, sp.Symbol):
                    raise ParseError("D() variables must be coordinates", fpos)
                f = sp.Derivative(f, v)
            return f
        if name in FUNCTIONS:
            args = self._args()
            if len(args) != 1:
                raise ParseError(f"{name}() takes one argument", t.pos)
            return FUNCTIONS[name](args[0], evaluate=self.ev)
        fn = self.ctx.functions.get(name)
        if fn is None:
            raise UndeclaredSymbolError(name, t.pos)
        args = self._args()
        if tuple(args) != tuple(fn.args):
            raise ParseError(
                f"{name} is declared with arguments {fn.args}", t.pos
            )
        return fn

    def _name(self, t: _Tok):
        name = t.text
        if name == "pi":
            return sp.pi
        sym = self.ctx.symbols.get(name)
        if sym is not None:
            return sym
        fn = self.ctx.functions.get(name)
        if fn is not None:
            return fn
        raise UndeclaredSymbolError(name, t.pos)


def _underlying_function(e):
    if isinstance(e, AppliedUndef):
        return e
    if isinstance(e, sp.Derivative) and isinstance(e.expr, AppliedUndef):
        return e.expr
    return None


def parse(text: str, ctx: "Context", evaluate: bool = True) -> sp.Expr:
    """Parse ``text`` against the symbols and functions declared in ``ctx``.

    With ``evaluate=False`` the tree is kept exactly as written, which is
    what the assumption-aware cancellation in ``simplify`` operates on.
    """
    return _Parser(text, ctx, evaluate).parse()


# ---------------------------------------------------------------------------
# printing

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5

_FUNC_NAMES = {
    sp.sin: "sin",
    sp.cos: "cos",
    sp.tan: "tan",
    sp.exp: "exp",
    sp.log: "ln",
    sp.sinh: "sinh",
    sp.cosh: "cosh",
    sp.Abs: "abs",
}


def to_text(e) -> str:
    """Render ``e`` in the canonical grammar (no whitespace)."""
    return _print(sp.sympify(e))[0]


def _wrap(pair, prec):
    s, p = pair
    return f"({s})" if p < prec else s


def _print(e) -> tuple[str, int]:
    if e.is_Integer:
        return (str(e.p), _PREC_ATOM if e.p >= 0 else _PREC_NEG)
    if e.is_Rational:
        s = f"{e.p}/{e.q}"
        return (s, _PREC_MUL if e.p >= 0 else _PREC_NEG)
    if e is sp.pi:
        return ("pi", _PREC_ATOM)
    if e is sp.E:
        return ("exp(1)", _PREC_ATOM)
    if e.is_Symbol:
        return (e.name, _PREC_ATOM)
    if isinstance(e, AppliedUndef):
        return (e.func.__name__, _PREC_ATOM)
    if isinstance(e, sp.Derivative):
        return (_print_derivative(e), _PREC_ATOM)
    if e.is_Add:
        return (_print_add(e), _PREC_ADD)
    if e.is_Mul:
        return _print_mul(e)
    if e.is_Pow:
        return _print_pow(e)
    if isinstance(e, sp.Function) and e.func in _FUNC_NAMES:
        return (f"{_FUNC_NAMES[e.func]}({_print(e.args[0])[0]})", _PREC_ATOM)
    if e.is_Float:
        return (sp.nsimplify(e).__str__(), _PREC_ATOM)
    raise TypeError(f"cannot print {type(e).__name__}: {e}")


def _print_derivative(e) -> str:
    fn = e.expr
    first, last = fn.args[0], fn.args[-1]
    primes = dots = 0
    for v, k in e.variable_count:
        if v == last:
            primes += k
        elif v == first:
            dots += k
        else:
            break
    else:
        return fn.func.__name__ + "'" * primes + "." * dots
    vs = ",".join(v.name for v, k in e.variable_count for _ in range(k))
    return f"D({fn.func.__name__},{vs})"


def _term_sign_key(t) -> int:
    return 1 if t.could_extract_minus_sign() else 0


def _print_add(e) -> str:
    terms = sorted(e.as_ordered_terms(), key=_term_sign_key)
    out = []
    for k, t in enumerate(terms):
        if t.could_extract_minus_sign():
            s = _wrap(_print(-t), _PREC_MUL)
            out.append("-" + s)
        else:
            out.append(("+" if k else "") + _print(t)[0])
    return "".join(out)


def _print_mul(e) -> tuple[str, int]:
    coeff, factors = e.as_coeff_mul()
    if coeff.is_negative:
        inner, _ = _print_mul_positive(-coeff, factors)
        return ("-" + inner, _PREC_NEG)
    return _print_mul_positive(coeff, factors)


def _factor_key(f):
    """Constants, symbols, unknown functions and their derivatives, the rest."""
    b = f.base if f.is_Pow else f
    if b.is_number:
        rank = 0
    elif b.is_Symbol:
        rank = 1
    else:
        rank = 2 if isinstance(b, (AppliedUndef, sp.Derivative)) else 3
    return rank, sp.default_sort_key(f)


def _print_mul_positive(coeff, factors) -> tuple[str, int]:
    num, den = [], []
    for f in sorted(factors, key=_factor_key):
        if f.is_Pow and f.exp.is_Rational and f.exp.is_negative:
            den.append(sp.Pow(f.base, -f.exp))
        else:
            num.append(f)
    p, q = (coeff.p, coeff.q) if coeff.is_Rational else (coeff, 1)
    num_s = [] if p == 1 else [str(p)]
    num_s += [_wrap(_print(f), _PREC_MUL) for f in num]
    den_s = [] if q == 1 else [str(q)]
    den_s += [_wrap(_print(f), _PREC_POW) for f in den]
    top = "*".join(num_s) if num_s else "1"
    if not den_s:
        if not num_s:
            return ("1", _PREC_ATOM)
        if len(num_s) > 1:
            return (top, _PREC_MUL)
        return (top, _print(num[0])[1] if num else _PREC_ATOM)
    bottom = den_s[0] if len(den_s) == 1 else "(" + "*".join(den_s) + ")"
    return (f"{top}/{bottom}", _PREC_MUL)


def _print_pow(e) -> tuple[str, int]:
    b, x = e.base, e.exp
    if x.is_Rational and x.is_negative:
        return _print_mul_positive(sp.S.One, [e])
    if x == sp.S.Half:
        return (f"sqrt({_print(b)[0]})", _PREC_ATOM)
    base = _print(b)
    if base[1] <= _PREC_POW or (b.is_Number and b.is_negative):
        bs = f"({base[0]})"
    else:
        bs = base[0]
    if x.is_Integer:
        xs = str(x)
    else:
        xs = f"({_print(x)[0]})"
    return (f"{bs}^{xs}", _PREC_POW)
