"""Command-line front end: ``supnorm <subcommand> ...``.

Exit codes: 0 pass (flagged outcomes included), 1 a check failed, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from fractions import Fraction

from . import archimedean as arch
from . import bounds, characters, finite_gl2, hecke, lattice, local_whittaker as lw
from .padic import ConfigurationError, DomainError, TruncatedPAdic
from .suites import dumps, run_suite, verify_all

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CASE_NAMES = {"ps": "PS", "st": "St", "sc-even": "SC_even", "sc-odd": "SC_odd"}


class UsageError(Exception):
    pass


def _emit(args, payload, text: str | None = None) -> None:
    body = dumps(payload)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(body + "\n")
    print(text if text is not None else body)


def _pair(text: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected X,Y")
    return x, y


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers")


# --- subcommands --------------------------------------------------------------------------


def cmd_chartable(args) -> int:
    table = finite_gl2.character_table(args.p, args.m, seed=args.seed, exact=args.exact,
                                       budget=int(args.max_elements))
    if args.csv:
        print(table.to_csv(), end="")
        return EXIT_OK
    out = table.to_dict()
    reports = {k: finite_gl2.verify_character_bound(table, k).to_dict()
               for k in finite_gl2.dimension_classes(args.p, args.m)}
    out["bounds"] = reports
    out["row_orthogonality_error"] = float(f"{table.row_orthogonality_error():.3e}")
    _emit(args, out)
    return EXIT_OK if all(r["status"] == "pass" for r in reports.values()) else EXIT_FAIL


def cmd_gauss(args) -> int:
    rep = run_suite("gauss", {"primes": (args.p,), "max_a": args.a, "exact": args.exact})
    rows = []
    for chi in characters.enumerate_X(args.p, args.a):
        if characters.conductor(chi) != args.a:
            continue
        for l in range(1, args.a + 2):
            for k in range(-args.a - 1, 2):
                g = characters.gauss_G_closed_form(l, k, 1, chi)
                rows.append({"e": chi.e, "l": l, "k": k, "z": 1, "re": round(g.real, 12), "im": round(g.imag, 12)})
    _emit(args, {"report": rep.to_dict(), "table": rows})
    return EXIT_OK if rep.status != "fail" else EXIT_FAIL


def cmd_local_average(args) -> int:
    case = CASE_NAMES[args.case]
    chi = characters.MultChar(args.p, args.m, args.chi) if case == "PS" else None
    desc = lw.describe(case, args.p, args.m, chi, complex(0, args.rho))
    rows = []
    for v in range(args.vmin, args.vmax + 1):
        N = max(desc.m + max(0, -v), 2 * desc.m, 1)
        y = TruncatedPAdic(args.p, v, args.unit, N)
        s = lw.local_average(desc, y)
        rows.append({"v": v, "S": str(s) if isinstance(s, Fraction) else s,
                     "bound_ratio": round(lw.local_bound_ratio(desc, v + desc.m, args.unit), 12)})
    _emit(args, {"case": case, "p": args.p, "m": desc.m, "d": desc.d, "rows": rows})
    return EXIT_OK


def cmd_amplify(args) -> int:
    window = (args.lambda_cap, args.window * args.lambda_cap)
    S = hecke.build_S(args.p, args.lambda_cap, window)
    amp = hecke.build_f_ur(S, lambda r: 1, args.p)
    out = {"p": args.p, "Lambda": args.lambda_cap, "window": list(window), "S": S, "size": len(S),
           "y": {str(r): str(c) for r, c in amp.f_ur.coeffs.items()},
           "support_types": dict(sorted(hecke.support_types(amp.f_ur, S).items()))}
    _emit(args, out)
    return EXIT_OK


def cmd_count(args) -> int:
    z = lattice.UpperHalfPoint(*args.z)
    if args.lam is not None:
        res = lattice.count_M_lambda(args.r, args.lam, z, args.p, args.m, want_list=args.list)
        modulus, target = args.p ** args.lam, (1, 0, 0, 1)
    else:
        target = tuple(args.g) if args.g else (1, 0, 0, 1)
        if len(target) != 4:
            raise UsageError("--g needs four entries a,b,c,d")
        modulus = args.p ** args.m
        res = lattice.count_congruent(args.r, z, modulus, target, want_list=args.list)
    out = {"r": args.r, "z": list(args.z), "modulus": modulus, "target": list(target),
           "convention": "literal integral matrices, positive determinant, no central quotient",
           **res.to_dict(with_list=args.list)}
    if args.list:
        out["violations"] = lattice.check_members(res.matrices, args.r, z, modulus, target)
    _emit(args, out)
    return EXIT_OK if not out.get("violations") else EXIT_FAIL


def cmd_count_bench(args) -> int:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Lambda", "y", "time", "count"])
    for L in args.lambdas:
        S = hecke.build_S(args.p, L)
        f = hecke.build_f_ur(S, lambda r: 1, args.p).f_ur
        z = lattice.UpperHalfPoint(0.0, args.y)
        t0 = time.perf_counter()
        total = sum(lattice.count_congruent(r, z).count for r in f.support)
        w.writerow([L, args.y, f"{time.perf_counter() - t0:.4f}", total])
    print(buf.getvalue(), end="")
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(buf.getvalue())
    return EXIT_OK


def cmd_whittaker(args) -> int:
    case = CASE_NAMES[args.case]
    chi = characters.MultChar(args.p, args.m, args.chi) if case == "PS" else None
    desc = lw.describe(case, args.p, args.m, chi)
    params = arch.SpectralParams(args.t)
    res = arch.whittaker_global_bound(args.y, desc, params)
    out = {"case": case, "p": args.p, "m": desc.m, "d": desc.d, "t": args.t, "T": params.T, "y": args.y,
           **res.to_dict(),
           "envelope_dT^(1/2)/sqrt(y)": desc.d * params.T ** 0.5 / args.y ** 0.5}
    _emit(args, out)
    return EXIT_OK


def cmd_exponents(args) -> int:
    der = bounds.derivation(args.case)
    if args.text:
        lines = [f"case {der['case']}"]
        for step in der["steps"]:
            rest = {k: v for k, v in step.items() if k != "step"}
            lines.append(f"  {step['step']}: {json.dumps(rest)}")
        lines.append(f"Phi << T^{der['phi_exponent_T']} d^{der['phi_exponent_d']} (up to eps)")
        _emit(args, der, "\n".join(lines))
    else:
        _emit(args, der)
    return EXIT_OK


def cmd_verify_all(args) -> int:
    config = {}
    if args.config:
        with open(args.config) as fh:
            config = json.load(fh)
    log = (lambda s: print(s, file=sys.stderr)) if not args.quiet else None
    report = verify_all(config, seed=args.seed, exact=args.exact, budget=args.budget, log=log)
    body = dumps(report)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(body + "\n")
    else:
        print(body)
    for suite in report["suites"]:
        for note in suite["flagged"]:
            print(f"flagged [{suite['suite']}] {note}", file=sys.stderr)
    print(f"overall: {report['status']}", file=sys.stderr)
    return EXIT_FAIL if report["status"] == "fail" else EXIT_OK


# --- parser -------------------------------------------------------------------------------


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    """Global flags, accepted before or after the subcommand.

    The subcommand copy uses SUPPRESS defaults so it never overwrites a value given earlier.
    """
    dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--seed", type=int, default=dflt(0))
    g.add_argument("--exact", action="store_true", default=dflt(False), help="exact cyclotomic arithmetic where offered")
    g.add_argument("--json", metavar="OUT", default=dflt(None), help="also write the JSON report to OUT")
    g.add_argument("--budget", type=float, metavar="SECONDS", default=dflt(None), help="wall-clock budget (verify-all)")
    return g


def build_parser() -> argparse.ArgumentParser:
    top = _global_flags(suppress=False)
    common = _global_flags(suppress=True)
    ap = argparse.ArgumentParser(prog="supnorm", description="Verification toolkit for local and global sup-norm bounds.", parents=[top])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("chartable", parents=[common], help="character table of GL2(Z/p^m)")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--csv", action="store_true", help="print values as CSV (re,im)")
    s.add_argument("--max-elements", type=float, default=finite_gl2.DEFAULT_BUDGET)
    s.set_defaults(func=cmd_chartable)

    s = sub.add_parser("gauss", parents=[common], help="calibrated Gauss-sum case table")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--a", type=int, required=True)
    s.set_defaults(func=cmd_gauss)

    s = sub.add_parser("local-average", parents=[common], help="S(a(y)) over a valuation window")
    s.add_argument("--case", choices=sorted(CASE_NAMES), required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--chi", type=int, default=1, help="exponent e of the character (principal series)")
    s.add_argument("--rho", type=float, default=0.0, help="t in rho = it (principal series)")
    s.add_argument("--unit", type=int, default=1)
    s.add_argument("--vmin", type=int, default=-3)
    s.add_argument("--vmax", type=int, default=3)
    s.set_defaults(func=cmd_local_average)

    s = sub.add_parser("amplify", parents=[common], help="amplifier primes and y_r table")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--lambda-cap", type=int, required=True)
    s.add_argument("--window", type=int, default=hecke.DEFAULT_WINDOW_RATIO, help="primes in [L, window*L)")
    s.set_defaults(func=cmd_amplify)

    s = sub.add_parser("count", parents=[common], help="count matrices with det r and u(Az, z) <= 1")
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--m", type=int, default=1)
    s.add_argument("--lambda", dest="lam", type=int, help="identity congruence mod p^lambda")
    s.add_argument("--g", type=_ints, help="target residue a,b,c,d mod p^m")
    s.add_argument("--z", type=_pair, required=True, help="X,Y")
    s.add_argument("--list", action="store_true")
    s.set_defaults(func=cmd_count)

    s = sub.add_parser("count-bench", parents=[common], help="CSV of lambda-0 counting cost")
    s.add_argument("--p", type=int, default=lattice.FIT_P)
    s.add_argument("--y", type=float, default=lattice.FIT_Y)
    s.add_argument("--lambdas", type=_ints, default=list(lattice.FIT_GRID))
    s.set_defaults(func=cmd_count_bench)

    s = sub.add_parser("whittaker", parents=[common], help="Whittaker-expansion bound for Phi")
    s.add_argument("--case", choices=sorted(CASE_NAMES), required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--chi", type=int, default=1)
    s.add_argument("--t", type=float, default=0.0)
    s.add_argument("--y", type=float, required=True)
    s.set_defaults(func=cmd_whittaker)

    s = sub.add_parser("exponents", parents=[common], help="symbolic exponent derivation")
    s.add_argument("--case", choices=sorted(bounds.CHAINS), default="main")
    s.add_argument("--text", action="store_true")
    s.set_defaults(func=cmd_exponents)

    s = sub.add_parser("verify-all", parents=[common], help="run every suite and report")
    s.add_argument("--config", help="JSON file mapping suite names to parameter overrides")
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(func=cmd_verify_all)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ConfigurationError, DomainError, argparse.ArgumentTypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (finite_gl2.ResourceError, hecke.DegenerateAmplifierError, arch.AccuracyError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except BrokenPipeError:
        # reader closed early (e.g. piped into head)
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
