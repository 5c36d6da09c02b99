"""Command-line front end.

    conewalks enumerate --model king --region three-quadrant --end -1,0 --n 5
    conewalks verify --identity reflection --model king --start 0,0 --n 10
    conewalks closed-form --name R0 --order 20
    conewalks guess --input seq.csv --dF 2 --dt 1
    conewalks asymptotics --series total --n 1000
    conewalks selftest

Exit codes: 0 success, 1 failed verification (or no candidate), 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from importlib import metadata
from typing import List, Optional, Sequence

from .errors import NoCandidate, WalksError
from .model import EdgeRule, StepSet, builtin, builtin_names

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def version_line() -> str:
    try:
        v = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        v = "unknown"
    return f"# conewalks {v}"


# ---------------------------------------------------------------------------
# argument helpers

def resolve_model(name: str, edge_rule: Optional[str]) -> StepSet:
    """A builtin name, or a path to a JSON descriptor."""
    if name.endswith(".json") or os.path.sep in name:
        try:
            with open(name) as fh:
                model = StepSet.from_json(fh.read())
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read model descriptor {name}: {exc}")
    else:
        try:
            model = builtin(name)
        except KeyError:
            raise UsageError(f"unknown model {name!r}; builtin models: {', '.join(builtin_names())}")
    if edge_rule is not None:
        model = model.with_edge_rule(EdgeRule(edge_rule))
    return model


def parse_point(text: str):
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"expected a point 'i,j', got {text!r}")
    return a, b


def parse_start_arg(text: Optional[str], model: StepSet):
    from .enumeration import StartDistribution, a_start, parse_start
    from .model import build_group
    if text is None:
        return StartDistribution.single((0, 0))
    if text.upper() == "A":
        return a_start(build_group(model))
    try:
        return parse_start(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse start {text!r}; expected 'a,b[:w]' items")


def _fmt(v) -> str:
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def sequence_text(values: Sequence, fmt: Optional[str], name: str = "count") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(version_line() + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", name])
        for n, v in enumerate(values):
            w.writerow([n, _fmt(v)])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([_fmt(v) for v in values]) + "\n"
    return ",".join(_fmt(v) for v in values) + "\n"


def read_sequence(path: str) -> List[Fraction]:
    """A sequence from CSV (n,value rows, '#' comments) or a comma/whitespace separated list."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(str(exc))
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if lines and lines[0].replace(" ", "").lower().startswith("n,"):
        return [Fraction(row[1]) for row in csv.reader(lines[1:])]
    if text.lstrip().startswith("["):
        return [Fraction(v) for v in json.loads(text)]
    return [Fraction(v) for v in " ".join(lines).replace(",", " ").split()]


# ---------------------------------------------------------------------------
# subcommands

def cmd_enumerate(args) -> int:
    from .enumeration import TOTAL, count_sequence, count_sequence_crt, prime_schedule, region
    model = resolve_model(args.model, args.edge_rule)
    start = parse_start_arg(args.start, model)
    if args.total == (args.end is not None):
        raise UsageError("give exactly one of --end i,j or --total")
    end = TOTAL if args.total else parse_point(args.end)
    try:
        reg = region(args.region)
    except (KeyError, ValueError):
        raise UsageError(f"unknown region {args.region!r}")
    if args.primes:
        primes = prime_schedule(args.primes) if args.primes > 0 else None
        vals = count_sequence_crt(model, reg, start, end, args.n, primes, threads=args.threads)
    else:
        vals = count_sequence(model, reg, start, end, args.n)
    scale = start.scale
    vals = [Fraction(v, scale) for v in vals]
    emit(sequence_text(vals, args.format), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import IDENTITIES, run_identity
    N = args.order if args.order is not None else args.n
    if args.identity == "kernel":
        from .kernel import run_all
        reports = run_all(N, closed_scalars=True)
        emit("".join(r.to_json() + "\n" for r in reports), args.out)
        return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL
    if args.identity not in IDENTITIES:
        raise UsageError(f"unknown identity {args.identity!r}; choose from kernel, {', '.join(IDENTITIES)}")
    model = resolve_model(args.model, args.edge_rule)
    start = parse_point(args.start) if args.start else (0, 0)
    chk = run_identity(args.identity, model, N, start)
    emit(chk.to_json() + "\n", args.out)
    return EXIT_OK if chk.passed else EXIT_FAIL


def cmd_closed_form(args) -> int:
    from .closedform import CLOSED_NAMES, NAME_ALIASES, expand_named
    from .series import series_to_json
    x0 = Fraction(args.x0) if args.x0 is not None else None
    known = set(CLOSED_NAMES) | set(NAME_ALIASES) | {"U0", "U1", "Stilde"}
    if args.name not in known:
        raise UsageError(f"unknown closed form {args.name!r}; known: {', '.join(sorted(known))}")
    try:
        f = expand_named(args.name, args.order, x0)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.format == "csv":
        text = sequence_text(f.coeffs, "csv", "coefficient")
    else:
        text = series_to_json(f) + "\n"
    emit(text, args.out)
    return EXIT_OK


def cmd_guess(args) -> int:
    from .enumeration import prime_schedule
    from .guess import GuessSpec, guess_algebraic, guess_ladder
    seq = read_sequence(args.input)
    if args.prime == "none":
        prime = None
    elif args.prime == "auto":
        prime = prime_schedule(1)[0]
    else:
        try:
            prime = int(args.prime)
        except ValueError:
            raise UsageError(f"--prime takes auto, none or an integer, got {args.prime!r}")
    if prime is not None:
        if any(v.denominator % prime == 0 for v in seq):
            raise UsageError(f"a denominator of the input is divisible by {prime}")
        seq = [v.numerator * pow(v.denominator, -1, prime) % prime for v in seq]
    try:
        if args.dF is None:
            cand = guess_ladder(seq, prime)
        else:
            if args.dt is None:
                raise UsageError("--dF needs --dt")
            cand = guess_algebraic(GuessSpec(seq, args.dF, args.dt, args.use, args.margin, prime))
    except NoCandidate as exc:
        sys.stderr.write(f"no candidate: {exc}\n")
        return EXIT_FAIL
    emit(cand.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_asymptotics(args) -> int:
    from . import asymptotics as asy
    if args.series not in ("total", "origin"):
        raise UsageError("--series is total or origin")
    data = asy.normalized_sequences(args.n)
    pred = asy.predicted(args.series)
    rows = asy.comparison_rows(args.n, data, args.series, every=max(1, args.n // 10))
    fit = None
    if args.n + 1 >= asy.MIN_FIT_TERMS:
        corr = (float(pred.correction_constant), float(pred.correction_exponent))
        fit = asy.empirical_fit(data[args.series], correction=corr, normalized=True)
    if args.format == "json":
        out = {"prediction": pred.to_json(),
               "rows": [{"n": n, "observed": o, "predicted": p, "relative": r} for n, o, p, r in rows],
               "fit": fit.to_json() if fit else None}
        text = json.dumps(out, indent=1) + "\n"
    else:
        buf = io.StringIO()
        buf.write(version_line() + "\n")
        buf.write(f"# predicted: 8^n n^({pred.exponent}) * {float(pred.constant):.15g}"
                  f" + 8^n n^({pred.correction_exponent}) * {float(pred.correction_constant):.15g}\n")
        if fit:
            rel = abs(fit.constant - float(pred.constant)) / float(pred.constant)
            buf.write(f"# fit: exponent {fit.exponent:.6f} (grid {fit.exponent_snapped}),"
                      f" constant {fit.constant:.10g} +- {fit.error:.2g}, relative error {rel:.3e}\n")
        buf.write("n,observed_over_8n,predicted_over_8n,relative_deviation\n")
        for n, o, p, r in rows:
            buf.write(f"{n},{o:.12e},{p:.12e},{r:.3e}\n")
        text = buf.getvalue()
    emit(text, args.out)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .acceptance import run_suite
    only = args.only.split(",") if args.only else None
    results = run_suite(include_slow=args.slow, only=only)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="conewalks", description="Walks in the three-quadrant cone.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, model=True):
        if model:
            sp.add_argument("--model", default="king", help="builtin name or JSON descriptor path")
            sp.add_argument("--edge-rule", choices=["forbid", "allow"], default=None)
        sp.add_argument("--format", choices=["csv", "json"], default=None)
        sp.add_argument("--out", default=None, help="write to this file instead of stdout")
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    e = sub.add_parser("enumerate", help="count walks")
    common(e)
    e.add_argument("--region", default="three-quadrant")
    e.add_argument("--start", default=None, help="'a,b[:w] ...' or A for the weighted start")
    e.add_argument("--end", default=None, help="endpoint 'i,j'")
    e.add_argument("--total", action="store_true", help="count all endpoints")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--primes", type=int, default=0,
                   help="use modular runs and CRT (-1: as many primes as needed)")
    e.set_defaults(fn=cmd_enumerate)

    v = sub.add_parser("verify", help="check an identity on enumeration data")
    common(v)
    v.add_argument("--identity", required=True)
    v.add_argument("--start", default=None)
    v.add_argument("--n", type=int, default=10)
    v.add_argument("--order", type=int, default=None)
    v.set_defaults(fn=cmd_verify)

    c = sub.add_parser("closed-form", help="expand a closed-form series")
    common(c, model=False)
    c.add_argument("--name", required=True)
    c.add_argument("--order", type=int, default=20)
    c.add_argument("--x0", default=None, help="evaluation point for U0, U1, Stilde")
    c.set_defaults(fn=cmd_closed_form)

    g = sub.add_parser("guess", help="guess a polynomial equation for a sequence")
    common(g, model=False)
    g.add_argument("--input", required=True)
    g.add_argument("--dF", type=int, default=None)
    g.add_argument("--dt", type=int, default=None)
    g.add_argument("--use", type=int, default=None)
    g.add_argument("--margin", type=int, default=None)
    g.add_argument("--prime", default="none", help="auto, none, or a prime")
    g.set_defaults(fn=cmd_guess)

    a = sub.add_parser("asymptotics", help="predicted vs empirical constants")
    common(a, model=False)
    a.add_argument("--series", default="total")
    a.add_argument("--n", type=int, default=1000)
    a.set_defaults(fn=cmd_asymptotics)

    s = sub.add_parser("selftest", help="run the acceptance suite")
    s.add_argument("--slow", action="store_true", help="include the long guessing run")
    s.add_argument("--only", default=None, help="comma-separated criterion ids")
    s.set_defaults(fn=cmd_selftest)
    return p


def _attach_values(argv: Sequence[str]) -> List[str]:
    """Turn '--end -1,0' into '--end=-1,0' so argparse does not read -1,0 as an option."""
    out, k = [], 0
    while k < len(argv):
        tok = argv[k]
        if tok in ("--end", "--start") and k + 1 < len(argv):
            nxt = argv[k + 1]
            if nxt[:1] == "-" and nxt[1:2].isdigit():
                out.append(f"{tok}={nxt}")
                k += 2
                continue
        out.append(tok)
        k += 1
    return out


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = _attach_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.fn(args)
    except UsageError as exc:
        sys.stderr.write(f"conewalks: error: {exc}\n")
        return EXIT_USAGE
    except WalksError as exc:
        sys.stderr.write(f"conewalks: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
