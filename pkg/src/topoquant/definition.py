"""Reader for ``.st`` spacetime definition files.

The format is line oriented; ``#`` starts a comment and ``[name]`` opens a
section::

    [coordinates]
    t
    r: 0 < r, exclude r=0
    theta: 0 < theta < pi
    phi: period 2*pi

    [parameters]
    m: positive, small
    rm: positive = m-sqrt(m^2-e^2)

    [functions]
    psi(t, rho)

    [coframe]
    e0 = dt
    e1 = dr
    e2 = r*dtheta
    e3 = r*sin(theta)*dphi

    [potential]
    A = e/r*dt

    [expected]
    w[1][2] = -dphi
    condition = 2*sqrt(m^2-e^2)/e = n

Coordinate differentials are written ``d<name>``. The potential is the real
form ``alpha`` of the u(1) connection ``A = i alpha``. Options ``linear``
under ``[coordinates]`` switches the chart to first-order truncation in the
parameters and functions marked ``small``.
"""
from __future__ import annotations

import re
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import sympy as sp

from .exterior import Chart, Coframe, Form
from .grammar import ParseError
from .symbolic import Context

SECTIONS = ("coordinates", "parameters", "functions", "coframe", "potential", "expected")


class DefinitionError(ValueError):
    def __init__(self, message: str, source: str = "<text>", line: int = 0):
        where = f"{source}:{line}: " if line else f"{source}: "
        super().__init__(where + message)
        self.line = line


@dataclass
class SpacetimeDefinition:
    name: str
    ctx: Context
    chart: Chart
    coframe: Coframe
    potential: Form | None = None
    expected: dict = field(default_factory=dict)


@contextmanager
def _differentials(ctx: Context):
    """Temporarily declare ``d<x>`` for every coordinate ``x``."""
    added = {}
    for name in ctx.coordinates:
        d = "d" + name
        if d in ctx.symbols or d in ctx.functions:
            raise DefinitionError(f"name {d!r} clashes with a differential")
        added[d] = ctx.symbols[d] = sp.Symbol(d)
    try:
        yield added
    finally:
        for d in added:
            del ctx.symbols[d]


def parse_one_form(text: str, ctx: Context, chart: Chart, imaginary: bool = False) -> Form:
    with _differentials(ctx) as ds:
        e = sp.expand(ctx.parse(text))
    coeffs = {}
    rest = e
    for name in chart.names:
        d = ds["d" + name]
        c = e.coeff(d)
        if c.has(*ds.values()):
            raise ValueError(f"{text!r} is not linear in the differentials")
        coeffs[name] = c
        rest -= c * d
    if sp.expand(rest) != 0:
        raise ValueError(f"{text!r} has terms without a differential")
    return Form.one_form(chart, coeffs, imaginary)


_COORD = re.compile(r"^(\w+)\s*(?::\s*(.*))?$")
_FUNC = re.compile(r"^(\w+)\s*\(([^)]*)\)\s*(small)?$")
_ASSIGN = re.compile(r"^([^=]+?)\s*=\s*(.+)$")


def _split_sections(text: str, source: str):
    sections: dict[str, list] = {}
    current = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[(\w+)\]", line)
        if m:
            current = m.group(1)
            if current not in SECTIONS:
                raise DefinitionError(f"unknown section [{current}]", source, no)
            if current in sections:
                raise DefinitionError(f"duplicate section [{current}]", source, no)
            sections[current] = []
            continue
        if current is None:
            raise DefinitionError("content before the first section", source, no)
        sections[current].append((no, line))
    return sections


def _coordinate(ctx, line, no, source):
    m = _COORD.match(line)
    if not m:
        raise DefinitionError(f"bad coordinate line {line!r}", source, no)
    name, opts = m.group(1), m.group(2) or ""
    lower = upper = period = None
    exclude = []
    for part in filter(None, (p.strip() for p in opts.split(","))):
        if part.startswith("period"):
            period = part[len("period"):].strip()
        elif part.startswith("exclude"):
            exclude.append(part[len("exclude"):].strip())
        else:
            bits = [b.strip() for b in part.split("<")]
            if name not in bits:
                raise DefinitionError(f"range {part!r} does not mention {name}", source, no)
            i = bits.index(name)
            if i > 0:
                lower = bits[i - 1]
            if i + 1 < len(bits):
                upper = bits[i + 1]
    ctx.coordinate(name, lower=lower, upper=upper, period=period, exclude=tuple(exclude))


def _parameter(ctx, line, no, source, pending):
    head, _, definition = line.partition("=")
    name, _, opts = head.partition(":")
    name = name.strip()
    flags = [o.strip() for o in opts.split(",") if o.strip()]
    preds = [f for f in flags if f in ("positive", "nonzero", "integer")]
    unknown = [f for f in flags if f not in ("positive", "nonzero", "integer", "small")]
    if unknown:
        raise DefinitionError(f"unknown parameter flag {unknown[0]!r}", source, no)
    ctx.parameter(name, *preds, small="small" in flags)
    if definition.strip():
        pending.append((name, definition.strip(), no))


def read_definition(text: str, source: str = "<text>") -> SpacetimeDefinition:
    sections = _split_sections(text, source)
    for required in ("coordinates", "coframe"):
        if required not in sections:
            raise DefinitionError(f"missing section [{required}]", source)
    ctx = Context()
    linear = False
    names = []
    for no, line in sections["coordinates"]:
        if line == "linear":
            linear = True
            continue
        _coordinate(ctx, line, no, source)
        names.append(line.split(":")[0].strip())
    pending = []
    for no, line in sections.get("parameters", []):
        _parameter(ctx, line, no, source, pending)
    for no, line in sections.get("functions", []):
        m = _FUNC.match(line)
        if not m:
            raise DefinitionError(f"bad function line {line!r}", source, no)
        args = [a.strip() for a in m.group(2).split(",") if a.strip()]
        try:
            ctx.function(m.group(1), args, small=bool(m.group(3)))
        except KeyError as exc:
            raise DefinitionError(f"function argument {exc.args[0]!r} is not a coordinate", source, no)
    try:
        for name, d, no in pending:
            ctx.define(name, d)
    except ParseError as exc:
        raise DefinitionError(str(exc), source, no) from exc
    if len(names) != 4:
        raise DefinitionError(f"expected 4 coordinates, got {len(names)}", source)
    chart = Chart(ctx, names, linear=linear)
    forms = []
    for no, line in sections["coframe"]:
        m = _ASSIGN.match(line)
        if not m:
            raise DefinitionError(f"bad coframe line {line!r}", source, no)
        try:
            forms.append(parse_one_form(m.group(2), ctx, chart))
        except (ParseError, ValueError) as exc:
            raise DefinitionError(str(exc), source, no) from exc
    if len(forms) != 4:
        raise DefinitionError(f"expected exactly four coframe entries, got {len(forms)}", source)
    coframe = Coframe(forms)
    potential = None
    pot = sections.get("potential", [])
    if len(pot) > 1:
        raise DefinitionError("only one potential may be given", source, pot[1][0])
    if pot:
        no, line = pot[0]
        m = _ASSIGN.match(line)
        if not m:
            raise DefinitionError(f"bad potential line {line!r}", source, no)
        try:
            potential = parse_one_form(m.group(2), ctx, chart, imaginary=True)
        except (ParseError, ValueError) as exc:
            raise DefinitionError(str(exc), source, no) from exc
    expected = {}
    for no, line in sections.get("expected", []):
        m = _ASSIGN.match(line)
        if not m:
            raise DefinitionError(f"bad expected line {line!r}", source, no)
        expected[m.group(1).strip()] = m.group(2).strip()
    name = Path(source).stem if source != "<text>" else "definition"
    return SpacetimeDefinition(name, ctx, chart, coframe, potential, expected)


def load_definition(path) -> SpacetimeDefinition:
    path = Path(path)
    return read_definition(path.read_text(encoding="utf-8"), str(path))
