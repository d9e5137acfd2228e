"""``aitthermo`` command line.

Exit codes: 0 success, 1 usage or spec error, 2 a computation could not be
certified, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import specfile
from .compose import compose
from .core import weighted_sums
from .errors import (
    AITError,
    BudgetExhausted,
    NoConvergenceCertificate,
    NotFound,
    PrecisionExhausted,
    SpecParseError,
    TailUnbounded,
    Undefined,
    UnknownMachine,
)
from .machines import (
    DEFAULT_BUDGET,
    EnumerationState,
    UniversalMachine,
    complexity_upper,
    enumerate_domain,
)
from .randomness import CompressionProfile, compression_profile, deficiency_probe
from .rigor import decimal_str, format_interval, log2
from .thermo import DEFAULT_EPS, QUANTITIES, evaluate, parse_rational

EXIT_OK, EXIT_USAGE, EXIT_CERT, EXIT_IO = 0, 1, 2, 3
CSV_DIGITS = 30
SWEEP_HEADER = ["T_num", "T_den", "quantity", "lo", "hi", "tail_bound", "trunc_len"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


def _temperature(text: str) -> Fraction:
    # temperatures are exact: num/den or integers only
    if "." in text or "e" in text.lower():
        raise argparse.ArgumentTypeError(f"temperatures must be written as num/den, got {text!r}")
    T = _rational(text)
    if T <= 0:
        raise argparse.ArgumentTypeError(f"temperature must be > 0, got {text}")
    return T


def _eps(text: str) -> Fraction:
    e = _rational(text)
    if e <= 0:
        raise argparse.ArgumentTypeError("eps must be > 0")
    return e


def _quantities(text: str) -> list[str]:
    qs = [q.strip() for q in text.split(",") if q.strip()]
    bad = [q for q in qs if q not in QUANTITIES]
    if bad or not qs:
        raise argparse.ArgumentTypeError(f"quantities must be a subset of Z,F,E,S, got {text!r}")
    return qs


def _temps(text: str) -> list[Fraction]:
    return [_temperature(t) for t in text.split(",") if t.strip()]


def _opt(args, name, default):
    v = getattr(args, name, None)
    return default if v is None else v


def _write(args, text: str) -> None:
    out = _opt(args, "out", None)
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _machine(args, ref: str):
    return specfile.resolve(ref, _opt(args, "budget", None))


# ---------------------------------------------------------------------------
# eval


def _lower_bound_lines(spec, T, L) -> list[str]:
    """Certified one-sided bounds from the partial sum up to ``L``."""
    s = weighted_sums(spec, T, L, 96)
    z_lo = Fraction(s.z_lo)
    lines = [f"Z >= {decimal_str(z_lo)}  (lower bound from lengths <= {L})"]
    if z_lo > 0:
        f_hi = log2(z_lo, Fraction(1, 1 << 96)).scale(-T).hi
        lines.append(f"F <= {decimal_str(f_hi, up=True)}  (upper bound from the same partial sum)")
    lines.append("E, S: not enclosed")
    return lines


def cmd_eval(args) -> int:
    m = _machine(args, args.machine)
    spec = m.spectrum()
    T = args.T
    eps = _opt(args, "eps", DEFAULT_EPS)
    print(f"machine: {m.name}")
    print(f"T = {T}")
    if m.is_lower_bound:
        print(f"domain: programs discovered within the step budget ({m.kind} machine); "
              "Z below is a lower bound on the full machine")
    try:
        rep = evaluate(spec, T, eps)
    except (NoConvergenceCertificate, TailUnbounded) as exc:
        if T < 1:
            raise
        try:
            rep = evaluate(spec, T, eps, ("Z", "F"))
        except (NoConvergenceCertificate, TailUnbounded) as exc2:
            print(f"note: {exc2}")
            for line in _lower_bound_lines(spec, T, _opt(args, "max_len", 1024)):
                print(line)
            return EXIT_OK
        print(f"note: {exc}")
    for q in QUANTITIES:
        iv = rep[q]
        if iv is None:
            print(f"{q}: no convergence certificate at this temperature")
            continue
        tail = rep.tail_certificates.get(q)
        tail_s = "" if tail is None else f"  tail <= {decimal_str(tail, 3, up=True)}"
        print(f"{q} = {format_interval(iv)}{tail_s}")
    print(f"truncation length: {rep.truncation_length}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


def sweep_csv(spec, temps, quantities, eps) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for T in sorted(set(temps)):
        rep = evaluate(spec, T, eps, quantities)
        for q in sorted(set(quantities)):
            iv = rep[q]
            w.writerow([T.numerator, T.denominator, q,
                        decimal_str(iv.lo, CSV_DIGITS), decimal_str(iv.hi, CSV_DIGITS, up=True),
                        decimal_str(rep.tail_certificates[q], 6, up=True), rep.truncation_length])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    temps = list(args.temps or [])
    if args.grid:
        temps += [Fraction(k, args.grid + 1) for k in range(1, args.grid + 1)]
    for T in temps:
        if not 0 < T < 1:
            raise UsageError(f"sweep temperatures must lie strictly inside (0, 1), got {T}")
    m = _machine(args, args.machine)
    _write(args, sweep_csv(m.spectrum(), temps, args.quantities, _opt(args, "eps", DEFAULT_EPS)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# compose / enumerate


def cmd_compose(args) -> int:
    m = compose([_machine(args, ref) for ref in args.machines])
    _write(args, specfile.dumps(m))
    return EXIT_OK


def cmd_enumerate(args) -> int:
    m = _machine(args, args.machine)
    if not isinstance(m, UniversalMachine):
        raise UsageError("enumerate needs a universal machine")
    state = None
    if args.checkpoint:
        state = EnumerationState.from_dict(json.loads(Path(args.checkpoint).read_text(encoding="utf-8")))
    state = enumerate_domain(m, state, _opt(args, "budget", 0))
    _write(args, json.dumps(state.to_dict(m.name), indent=2) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# complexity / probe


def _target(text: str) -> str:
    if text in ("λ", "lambda"):
        return ""
    if any(c not in "01" for c in text):
        raise argparse.ArgumentTypeError(f"target must be a bit string, got {text!r}")
    return text


def cmd_complexity(args) -> int:
    m = _machine(args, args.machine)
    max_len = _opt(args, "max_len", 16)
    budget = _opt(args, "budget", DEFAULT_BUDGET)
    if args.target is not None:
        try:
            h = complexity_upper(m, args.target, max_len, budget)
            _write(args, f"h_upper={h}\n")
        except NotFound:
            _write(args, "h_upper=NotFound\n")
        return EXIT_OK
    prof = compression_profile(m, args.real, args.n_max, max_len, budget)
    _write(args, prof.to_csv())
    return EXIT_OK


def cmd_probe(args) -> int:
    prof = CompressionProfile.from_csv(Path(args.profile).read_text(encoding="utf-8"))
    if not 0 <= args.T <= 1:
        raise UsageError("probe needs T in [0, 1]")
    d = deficiency_probe(prof, args.T)
    _write(args, f"max(T*n - h_upper) = {d}  (over n = {prof.rows[0].n}..{prof.rows[-1].n}; "
                 "descriptive statistic, not a randomness verdict)\n")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eps", type=_eps, default=argparse.SUPPRESS,
                        help="target enclosure width, e.g. 2^-30 or 1/1000000000")
    common.add_argument("--out", default=argparse.SUPPRESS, help="write output to this path")
    common.add_argument("--budget", type=int, default=argparse.SUPPRESS,
                        help="simulation steps for universal machines")
    common.add_argument("--max-len", type=int, dest="max_len", default=argparse.SUPPRESS,
                        help="longest program length searched")

    p = _Parser(prog="aitthermo", parents=[common],
                description="Certified thermodynamic quantities of prefix-free machines.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", parents=[common], help="enclose Z, F, E, S at one temperature")
    e.add_argument("machine", help="builtin name (B, O, heavy_tail(a,b), U) or spec file")
    e.add_argument("T", type=_temperature)
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("sweep", parents=[common], help="CSV of enclosures over a temperature grid")
    s.add_argument("machine")
    s.add_argument("--temps", type=_temps, help="comma separated num/den values in (0, 1)")
    s.add_argument("--grid", type=int, default=0, help="add k/(N+1) for k = 1..N")
    s.add_argument("--quantities", type=_quantities, default=list(QUANTITIES))
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("compose", parents=[common], help="write the spec of a composite machine")
    c.add_argument("machines", nargs="+")
    c.set_defaults(func=cmd_compose)

    n = sub.add_parser("enumerate", parents=[common], help="dovetail the domain of U")
    n.add_argument("machine", nargs="?", default="U")
    n.add_argument("--checkpoint", help="resume from this checkpoint; --budget adds steps")
    n.set_defaults(func=cmd_enumerate)

    k = sub.add_parser("complexity", parents=[common], help="shortest programs for a string or real prefixes")
    k.add_argument("machine")
    g = k.add_mutually_exclusive_group(required=True)
    g.add_argument("--target", type=_target, help="bit string (λ or '' for the empty string)")
    g.add_argument("--real", type=_rational, help="profile the prefixes of this rational")
    k.add_argument("--n-max", type=int, dest="n_max", default=16)
    k.set_defaults(func=cmd_complexity)

    r = sub.add_parser("probe", parents=[common], help="deficiency statistic of a profile CSV")
    r.add_argument("profile")
    r.add_argument("--T", type=_rational, required=True)
    r.set_defaults(func=cmd_probe)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, SpecParseError, UnknownMachine, ValueError) as exc:
        print(f"aitthermo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        where = f" ({exc.filename})" if getattr(exc, "filename", None) else ""
        print(f"aitthermo: I/O error{where}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except BudgetExhausted as exc:
        print(f"aitthermo: {exc}", file=sys.stderr)
        if exc.certificate:
            print(f"certificate: {exc.certificate}", file=sys.stderr)
        return EXIT_CERT
    except (NoConvergenceCertificate, TailUnbounded, PrecisionExhausted, Undefined, AITError) as exc:
        print(f"aitthermo: cannot certify: {exc}", file=sys.stderr)
        return EXIT_CERT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
