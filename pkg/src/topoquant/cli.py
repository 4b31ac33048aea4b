"""Command-line front end.

Exit codes: 0 when everything checked passes, 2 on a golden mismatch or a
failed verification, 1 on errors (bad input, engine failures).
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .bundle import (
    Patch,
    chern_form,
    chern_number,
    curvature_invariants,
    quantize,
    singular_loci,
)
from .cartan import (
    bianchi_residual,
    curvature,
    em_stress_energy,
    kretschmann,
    riemann_components,
    solve_connection,
    verify_field_equations,
    verify_first_structure,
)
from .cases import BUILDERS, PIPELINES, CaseParameterError, run_case
from .definition import DefinitionError, load_definition, parse_one_form
from .exterior import Form, form_text, to_frame_basis
from .gauge import T_PHI, U1Element, gauge_transform_connection, so13_exp
from .grammar import ParseError
from .report import report_render
from .symbolic import DomainError, equivalent, to_text

DEFAULT_GAUGE = {
    "einstein-rosen": ("angle", "exp(-gamma0)*phi"),
    "monopole": ("phase", "g*phi"),
    "reissner-nordstrom": ("phase", "e*t/rm"),
    "kerr-newman": ("phase", "e*rm/(rm^2+a^2)*t"),
}


class CommandError(Exception):
    def __init__(self, operation: str, message: str):
        super().__init__(f"{operation}: {message}")


@dataclass
class Subject:
    name: str
    ctx: object
    chart: object
    coframe: object
    potential: Form | None
    constraints: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)
    builtin: bool = False


def _subject(args) -> Subject:
    if args.case:
        if args.case not in BUILDERS:
            raise CaseParameterError(f"unknown case {args.case!r}; choose from {', '.join(BUILDERS)}")
        c = BUILDERS[args.case]()
        return Subject(c.name, c.ctx, c.chart, c.coframe, c.potential, c.constraints, {}, True)
    if args.file:
        d = load_definition(args.file)
        return Subject(d.name, d.ctx, d.chart, d.coframe, d.potential, {}, d.expected)
    raise CommandError("input", "give --case NAME or --file PATH")


def _lines_connection(omega) -> list[str]:
    return [f"w[{a}][{b}] = {form_text(f)}" for a, b, f in omega.nonzero_entries() if a < b]


def _expected_forms(subject: Subject, prefix: str, matrix) -> dict:
    golden = {}
    for key, text in subject.expected.items():
        if not key.startswith(prefix + "["):
            continue
        a, b = (int(x) for x in key[len(prefix) + 1:-1].split("]["))
        want = parse_one_form(text, subject.ctx, subject.chart) if prefix == "w" else None
        got = matrix[a, b]
        ok = all(
            equivalent(got.comps.get(k, 0), want.comps.get(k, 0), ctx=subject.ctx)
            for k in set(got.comps) | set(want.comps)
        )
        golden[key] = "pass" if ok else "fail"
    return golden


def cmd_connection(args, seed):
    s = _subject(args)
    omega = solve_connection(s.coframe)
    residual = verify_first_structure(s.coframe, omega)
    record = {
        "subject": s.name,
        "connection": _lines_connection(omega),
        "structure_residual": "0" if all(r.is_zero() for r in residual) else "nonzero",
        "antisymmetric": omega.is_antisymmetric(),
    }
    return record, _expected_forms(s, "w", omega)


def cmd_curvature(args, seed):
    s = _subject(args)
    omega = solve_connection(s.coframe)
    Om = curvature(omega)
    R = riemann_components(Om, s.coframe)
    record = {
        "subject": s.name,
        "curvature": [f"W[{a}][{b}] = {form_text(f)}" for a, b, f in Om.nonzero_entries() if a < b],
        "riemann": [f"R[{a}][{b}][{c}][{d}] = {to_text(v)}" for (a, b, c, d), v in R.nonzero() if a < b],
        "bianchi_residual": "0" if bianchi_residual(omega, Om).is_zero() else "nonzero",
    }
    if s.potential is not None:
        record["field_strength"] = form_text(curvature(s.potential))
    return record, {}


def cmd_invariants(args, seed):
    s = _subject(args)
    R = riemann_components(curvature(solve_connection(s.coframe)), s.coframe)
    K = kretschmann(R)
    record = {"subject": s.name, "kretschmann": to_text(K)}
    golden = {}
    if s.potential is not None:
        inv = curvature_invariants(Patch("U", s.coframe, s.potential))
        record["F_ab F^ab"] = to_text(inv[0])
        record["eps F F"] = to_text(inv[1])
    if "kretschmann" in s.expected:
        v = equivalent(K, s.ctx.parse(s.expected["kretschmann"]), ctx=s.ctx, seed=seed)
        golden["kretschmann"] = "pass" if v else "fail"
    return record, golden


def cmd_verify(args, seed):
    s = _subject(args)
    source = None
    if s.potential is not None:
        source = em_stress_energy(curvature(s.potential), s.coframe)
    rep = verify_field_equations(s.coframe, source, s.constraints or None, seed=seed)
    record = {"subject": s.name, "field_equations": rep.summary()}
    if not rep.passed:
        record["failing"] = [f"G[{a}][{b}]" for a, b in rep.failing]
        if rep.witness:
            record["witness"] = {k: v for k, v in rep.witness.items()}
    return record, {"field_equations": "pass" if rep.passed else "fail"}


def cmd_gauge(args, seed):
    s = _subject(args)
    kind, text = None, None
    if args.phase:
        kind, text = "phase", args.phase
    elif args.angle:
        kind, text = "angle", args.angle
    elif s.builtin and s.name in DEFAULT_GAUGE:
        kind, text = DEFAULT_GAUGE[s.name]
    else:
        raise CommandError("gauge", "give --phase (u(1)) or --angle (rotation by T_phi)")
    value = s.ctx.parse(text)
    if kind == "phase":
        if s.potential is None:
            raise CommandError("gauge", "a u(1) phase needs a potential")
        g = U1Element(value)
        A = gauge_transform_connection(s.potential, g)
        frame = to_frame_basis(A, s.coframe)
        record = {
            "subject": s.name,
            "element": str(g),
            "connection": form_text(A),
            "frame": [f"A_e{a} = i*({to_text(v)})" for (a,), v in frame.items()],
        }
    else:
        L = so13_exp(T_PHI, value)
        omega = gauge_transform_connection(solve_connection(s.coframe), L)
        record = {"subject": s.name, "element": str(L), "connection": _lines_connection(omega)}
    return record, {}


def cmd_atlas(args, seed):
    if args.case in PIPELINES:
        res = run_case(args.case, seed)
        keep = ("patches", "loci", "transition")
        return {"subject": args.case, **{k: v for k, v in res.record.items() if k in keep}}, {}
    s = _subject(args)
    conn = s.potential if s.potential is not None else solve_connection(s.coframe)
    loci = singular_loci(Patch("U", s.coframe, conn))
    return {"subject": s.name, "patches": {"U": {"loci": [str(l) for l in loci]}}}, {}


def cmd_quantize(args, seed):
    if args.case in PIPELINES:
        res = run_case(args.case, seed)
        record = {"subject": args.case, "condition": res.record["condition"]}
        for k in ("extreme", "c_energy", "chern", "printed_condition", "comparison", "a0_limit"):
            if k in res.record:
                record[k] = res.record[k]
        golden = {k: v for k, v in res.golden.items()
                  if k in ("condition", "extreme", "chern_number", "c_energy", "a0_derived", "a0_printed")}
        return record, golden
    s = _subject(args)
    if not (args.phase and args.coordinate):
        raise CommandError("quantize", "definition files need --phase and --coordinate")
    q = quantize(s.ctx.parse(args.phase), args.coordinate, s.ctx, provenance="--phase")
    record = {"subject": s.name, "condition": str(q)}
    if s.potential is not None and args.region:
        c1, printed = chern_form(curvature(s.potential))
        region = []
        for part in args.region.split(","):
            name, lo, hi = part.split(":")
            region.append((name.strip(), s.ctx.parse(lo), s.ctx.parse(hi)))
        record["chern"] = {"c1": str(c1), "printed_form": str(printed),
                           "number": to_text(chern_number(c1, region, q))}
    golden = {}
    if "condition" in s.expected:
        golden["condition"] = "pass" if s.expected["condition"] == str(q) else "fail"
    return record, golden


def _case_record(name, seed):
    res = run_case(name, seed)
    return res.record, res.golden


def cmd_case(args, seed):
    names = list(PIPELINES) if args.all else [args.case]
    if names == [None]:
        raise CommandError("case", "give --case NAME or --all")
    if len(names) == 1:
        return _case_record(names[0], seed)
    record, golden = {}, {}
    for n in names:
        r, g = _case_record(n, seed)
        record[n] = r
        golden.update({f"{n}.{k}": v for k, v in g.items()})
    return record, golden


COMMANDS = {
    "connection": (cmd_connection, "solve the first structure equation"),
    "curvature": (cmd_curvature, "curvature 2-forms and Riemann components"),
    "invariants": (cmd_invariants, "Kretschmann scalar and field invariants"),
    "verify": (cmd_verify, "check the field equations"),
    "gauge": (cmd_gauge, "apply a gauge transformation"),
    "atlas": (cmd_atlas, "patches, singular loci and transition functions"),
    "quantize": (cmd_quantize, "quantization conditions and Chern data"),
    "case": (cmd_case, "run a built-in case with golden comparison"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="topoquant", description="Cartan-calculus and topological quantization toolkit")
    p.add_argument("--version", action="version", version=f"topoquant {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp_ = sub.add_parser(name, help=help_text)
        src = sp_.add_mutually_exclusive_group()
        src.add_argument("--case", help="built-in case: " + ", ".join(BUILDERS))
        src.add_argument("--file", type=Path, help="spacetime definition (.st)")
        if name == "case":
            src.add_argument("--all", action="store_true", help="run every built-in case")
        if name in ("gauge", "quantize"):
            sp_.add_argument("--phase", help="u(1) phase chi of exp(i*chi)")
        if name == "gauge":
            sp_.add_argument("--angle", help="rotation angle for exp(angle*T_phi)")
        if name == "quantize":
            sp_.add_argument("--coordinate", help="periodic coordinate of the phase")
            sp_.add_argument("--region", help="Chern region, e.g. t:0:2*pi,r:rm:rp")
        sp_.add_argument("--json", type=Path, metavar="PATH", help="write a JSON report")
        sp_.add_argument("--check-golden", action="store_true", help="exit 2 on golden mismatch")
        sp_.add_argument("--verbose", action="store_true", help="add timing information")
    return p


def _seed() -> int:
    raw = os.environ.get("CQ_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise CommandError("environment", f"CQ_SEED must be an integer, got {raw!r}") from None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fn = COMMANDS[args.command][0]
    start = time.time()
    t0 = time.perf_counter()
    try:
        seed = _seed()
        record, golden = fn(args, seed)
    except (ParseError, DefinitionError) as exc:
        print(f"error: input: {exc}", file=sys.stderr)
        return 1
    except (CommandError, CaseParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DomainError, ArithmeticError, ValueError, TypeError, KeyError) as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # engine failures such as StructureEquationError
        print(f"error: {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    failed = any(v != "pass" for v in golden.values())
    verify_failed = args.command == "verify" and failed
    status = "fail" if failed else "pass"
    subject = getattr(args, "case", None) or (args.file.name if getattr(args, "file", None) else None)
    if getattr(args, "all", False):
        subject = "all"
    meta = {"command": args.command, "subject": subject, "status": status, "golden": golden}
    if args.verbose:
        meta["timing"] = {"started": round(start, 3), "elapsed": time.perf_counter() - t0}
    sys.stdout.buffer.write(report_render(record, "text", **meta))
    sys.stdout.flush()
    if args.json:
        args.json.write_bytes(report_render(record, "json", **meta))
    if verify_failed or (args.check_golden and failed):
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
