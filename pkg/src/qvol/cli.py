"""``qvol`` command-line driver.

Exit codes: 0 every check passed, 1 a check failed, 2 usage error or refused
input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .contfrac import SurgerySpec
from .errors import DomainError, InsufficientData, QvolError
from .hypgeom import classify, complex_volume, solve_structure
from .quantum_rt import colored_jones, rt_invariant
from .specfun import build_quantum_tables
from .verify import reproduce_appendix, report_csv_lines, run_identity_suite, verify_conjecture

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _spec_args(p):
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--twist", type=int, required=True)


def _threads_default():
    env = os.environ.get("QVOL_THREADS")
    return int(env) if env else None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qvol", description="Quantum invariants and hyperbolic volume of twist-knot fillings")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("geometry", help="hyperbolic structure, volume and CS")
    _spec_args(g)
    fmt = g.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON output (default)")
    fmt.add_argument("--csv", action="store_true")
    g.add_argument("--tol", type=float, default=1e-12, help="Newton residual tolerance")

    r = sub.add_parser("rt", help="RT_r at exp(2 pi i / r)")
    _spec_args(r)
    r.add_argument("--r", type=int, required=True)
    r.add_argument("--precision", choices=("double", "extended"), default="double")
    r.add_argument("--threads", type=int, default=_threads_default())
    r.add_argument("--deterministic", action="store_true")

    j = sub.add_parser("jones", help="normalized colored Jones polynomial at exp(4 pi i / r)")
    j.add_argument("--twist", type=int, required=True)
    j.add_argument("--color", type=int, required=True)
    j.add_argument("--r", type=int, required=True)

    v = sub.add_parser("verify", help="growth-rate fit of RT_r against the volume")
    _spec_args(v)
    v.add_argument("--r-min", type=int, default=51)
    v.add_argument("--r-max", type=int, default=301)
    v.add_argument("--threads", type=int, default=_threads_default())
    v.add_argument("--deterministic", action="store_true")
    v.add_argument("--csv", action="store_true", help="emit the r rows as CSV")
    v.add_argument("--out", help="write to FILE instead of stdout (.csv selects CSV)")

    i = sub.add_parser("identities", help="seeded identity suite")
    i.add_argument("--seed", type=int, default=42)
    i.add_argument("--samples", type=int, default=200)

    sub.add_parser("appendix", help="face maximizations and f(y0) identities")
    return ap


def _emit(text: str, out: str | None = None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _refuse(spec, reason) -> int:
    sys.stderr.write(f"qvol: K_{spec.twist}({spec.p}, {spec.q}) is not hyperbolic: {reason}\n")
    return EXIT_USAGE


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _cmd_geometry(args) -> int:
    spec = SurgerySpec(args.p, args.q, args.twist).normalized()
    cls = classify(spec)
    if not cls.hyperbolic:
        return _refuse(spec, cls.reason)
    sol = solve_structure(spec, tol=args.tol)
    vol, cs = complex_volume(spec, sol)
    if args.csv:
        lines = ["index,re,im"] + [f"{k + 1},{c.real!r},{c.imag!r}" for k, c in enumerate(sol.shapes)]
        lines.append(f"volume,{vol!r},")
        lines.append(f"cs_mod_pi2,{cs!r},")
        _emit("\n".join(lines))
    else:
        _emit(_dump({"spec": {"p": spec.p, "q": spec.q, "twist": spec.twist},
                     "volume": vol, "cs_mod_pi2": cs, "geometric": sol.geometric,
                     "shapes": [[c.real, c.imag] for c in sol.shapes],
                     "abc": [[c.real, c.imag] for c in sol.abc], "residual": sol.residual}))
    return EXIT_PASS if sol.geometric else EXIT_FAIL


def _cmd_rt(args) -> int:
    spec = SurgerySpec(args.p, args.q, args.twist)
    val = rt_invariant(spec, args.r, precision=args.precision, threads=args.threads,
                       deterministic=args.deterministic)
    _emit(_dump({"r": val.r, "re": val.value.real, "im": val.value.imag, "log_abs": val.log_abs,
                 "growth_rate": 4 * math.pi * val.log_abs / val.r,
                 "terms": val.terms_summed, "rel_error": val.rel_error, "seconds": val.seconds}))
    return EXIT_PASS


def _cmd_jones(args) -> int:
    val = colored_jones(args.twist, args.color, build_quantum_tables(args.r))
    _emit(_dump({"twist": args.twist, "color": args.color, "r": args.r, "re": val.real, "im": val.imag}))
    return EXIT_PASS


def _cmd_verify(args) -> int:
    spec = SurgerySpec(args.p, args.q, args.twist)
    cls = classify(spec.normalized())
    if not cls.hyperbolic:
        return _refuse(spec, cls.reason)
    report = verify_conjecture(spec, args.r_min, args.r_max, threads=args.threads,
                               deterministic=args.deterministic)
    as_csv = args.csv or (args.out or "").endswith(".csv")
    _emit("\n".join(report_csv_lines(report)) if as_csv else _dump(report), args.out)
    return EXIT_PASS if report["verdict"]["pass"] else EXIT_FAIL


def _cmd_identities(args) -> int:
    report = run_identity_suite(args.seed, args.samples)
    _emit(_dump(report))
    return EXIT_PASS if report["pass"] else EXIT_FAIL


def _cmd_appendix(args) -> int:
    report = reproduce_appendix()
    _emit(_dump(report))
    return EXIT_PASS if report["pass"] else EXIT_FAIL


_COMMANDS = {"geometry": _cmd_geometry, "rt": _cmd_rt, "jones": _cmd_jones, "verify": _cmd_verify,
             "identities": _cmd_identities, "appendix": _cmd_appendix}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except (DomainError, InsufficientData) as exc:
        sys.stderr.write(f"qvol: {exc}\n")
        return EXIT_USAGE
    except (QvolError, ArithmeticError) as exc:
        sys.stderr.write(f"qvol: numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
