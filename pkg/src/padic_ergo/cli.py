"""Command line: ``verify``, ``gen``, ``stats`` and ``demo``.

Exit codes: 0 when every selected check holds, 1 when one fails or a
generator is refused, 2 for malformed input (parse errors, bad arguments).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from typing import Callable

from . import genlib, seqstats
from . import texpr as tx
from . import verdicts as vd

MAHLER_CAP = 12
ANF_DEFAULT = 11


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# verify


def _classify_verdict(e: tx.Expr) -> vd.Verdict:
    c = tx.classify(e)
    w = {} if c else {"subtree": tx.pretty(c.witness)}
    return vd.Verdict(
        "classify", vd.MP, vd.Result.HOLDS if c else vd.Result.FAILS, w, "structural compatibility"
    )


def _mod8(e: tx.Expr, n: int) -> list[vd.Verdict]:
    if not tx.is_arithmetic(e):
        return [vd.Verdict("arithmetic_mod8", vd.ERG, vd.Result.NOT_APPLICABLE, {"reason": "bitwise operators"})]
    inner = vd.brute_transitive(e, 3)
    mp = vd.brute_bijective(e, 2)
    return [
        vd.Verdict("arithmetic_mod4", vd.MP, mp.result, mp.witness, "arithmetic composition decided modulo 4"),
        vd.Verdict("arithmetic_mod8", vd.ERG, inner.result, inner.witness, "arithmetic composition decided modulo 8"),
    ]


def _needs_compat(fn):
    def run(e, n):
        if not tx.classify(e):
            return [vd.Verdict(fn.__name__.strip("_"), vd.ERG, vd.Result.NOT_APPLICABLE, {"reason": "not compatible"})]
        return fn(e, n)

    return run


@_needs_compat
def _mahler(e, n):
    c = vd.mahler_coeffs(e, min(n, MAHLER_CAP))
    return [vd.check_mahler_mp(c), vd.check_mahler_ergodic(c)]


@_needs_compat
def _anf(e, n):
    imax = min(n, ANF_DEFAULT + 1) - 1
    return [vd.check_anf_ergodic(e, imax, vd.MP), vd.check_anf_ergodic(e, imax)]


@_needs_compat
def _derivative(e, n):
    return [vd.check_mp_via_derivative(e), vd.check_ergodic_via_derivative(e)]


CRITERIA: dict[str, Callable[[tx.Expr, int], list[vd.Verdict]]] = {
    "classify": lambda e, n: [_classify_verdict(e)],
    "bijective": lambda e, n: [vd.brute_bijective(e, n)],
    "transitive": lambda e, n: [vd.brute_transitive(e, n)],
    "mod8": _mod8,
    "mahler": _mahler,
    "anf": _anf,
    "derivative": _derivative,
}
DEFAULT_CRITERIA = ("classify", "bijective", "transitive", "mahler", "anf")


def _required(v: vd.Verdict, require: str) -> bool:
    # "all" and "ergodic" both need every criterion; "mp" ignores ergodic ones
    return require != "mp" or v.property is not vd.ERG


def cmd_verify(args) -> int:
    names = args.criteria.split(",") if args.criteria else list(DEFAULT_CRITERIA)
    unknown = [c for c in names if c not in CRITERIA]
    if unknown:
        raise UsageError(f"unknown criteria: {', '.join(unknown)} (choose from {', '.join(CRITERIA)})")
    e = tx.parse(args.expression)
    if len(tx.free_vars(e)) > 1:
        raise UsageError("verify takes a univariate expression")
    verdicts: list[vd.Verdict] = []
    for name in names:
        verdicts.extend(CRITERIA[name](e, args.precision))
    if args.json:
        print(json.dumps(vd.report(tx.pretty(e), args.precision, verdicts), indent=2))
    else:
        print(f"expression: {tx.pretty(e)}  precision: {args.precision}")
        for v in verdicts:
            print(f"  {v.criterion:<22} {v.property.value:<18} {v.result.value:<14} {_short(v.witness)}")
    ok = all(v.holds for v in verdicts if _required(v, args.require))
    return 0 if ok else 1


def _short(w: dict) -> str:
    s = json.dumps(vd._elide(w))
    if len(s) > 100:
        s = s[:97] + "..."
    return s


# ---------------------------------------------------------------------------
# gen


def _spec_from_args(args) -> genlib.GeneratorSpec:
    if args.spec:
        with open(args.spec) as fh:
            return genlib.load_spec(fh.read())
    out = genlib.truncate_top(args.truncate) if args.truncate else genlib.FULL
    kind = args.kind or ("expr" if args.expr else "inversive")
    params: dict = {}
    if kind == "expr":
        if not args.expr:
            raise UsageError("--kind expr needs --expr")
        params["expr"] = args.expr
        if args.g:
            params["defs"] = {"g": args.g}
    elif kind == "exponential":
        params["a"] = args.a
    elif kind == "delta":
        if not args.g:
            raise UsageError("--kind delta needs --g")
        params.update(g=args.g, c=args.c)
    elif kind != "inversive":
        raise UsageError(f"--kind {kind} needs a --spec file")
    return genlib.GeneratorSpec(genlib.Kind(kind), args.precision, params, out)


def cmd_gen(args) -> int:
    spec = _spec_from_args(args)
    try:
        gen = genlib.build(spec, force=args.force)
    except genlib.BuildRefused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 1
    data = genlib.emit_bytes(gen, args.bytes, args.seed)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        try:
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. piped into head); not an error for a stream
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    if args.verbose:
        print(f"criterion: {gen.criterion} ({gen.verdict.result.value})", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# stats


def _input_bits(args):
    if args.bits:
        return seqstats._bits(args.bits.strip())
    if args.words:
        width = args.width or args.precision
        try:
            ws = [int(w, 0) for w in args.words.replace(" ", "").split(",") if w]
        except ValueError as exc:
            raise UsageError(f"malformed word list: {exc}") from None
        if any(not 0 <= w < 1 << width for w in ws):
            raise UsageError(f"words must lie in 0 .. 2**{width} - 1")
        return genlib.words_to_bits(ws, width)
    if args.file:
        with open(args.file, "rb") as fh:
            data = fh.read()
    else:
        data = sys.stdin.buffer.read()
    if args.limit_bits:
        return genlib.bytes_to_bits(data)[: args.limit_bits]
    return genlib.bytes_to_bits(data)


def cmd_stats(args) -> int:
    out: dict = {}
    ok = True
    if args.distr:
        spec = _spec_from_args(args)
        gen = genlib.build(spec, force=args.force)
        d = seqstats.distr_theorem_check(gen, args.seed)
        out["distr"] = {
            "n": d.n,
            "width": d.width,
            "bits": d.length,
            "uniform": d.uniform,
            "full": d.kfull.full,
            "expected_count": str(d.kfull.expected),
            "q1": d.q1.passed,
        }
        ok &= d.passed
    if args.q1 or args.kfull is not None:
        bits = _input_bits(args)
        if len(bits) == 0:
            raise UsageError("empty input")
        if args.kfull is not None:
            try:
                r = seqstats.k_fullness(bits, args.kfull)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            counts = r.as_dict() if r.k <= 8 else {}
            out["kfull"] = {"k": r.k, "length": r.length, "full": r.full, "expected": str(r.expected), "counts": counts}
            ok &= r.full
        if args.q1:
            try:
                q = seqstats.q1_check(bits)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            out["q1"] = {
                "N": q.N,
                "passed": q.passed,
                "levels": [
                    {"k": lv.k, "max_deviation": str(lv.max_deviation), "worst": lv.worst, "passed": lv.passed}
                    for lv in q.levels
                ],
            }
            ok &= q.passed
    if not out:
        raise UsageError("choose at least one of --q1, --kfull, --distr")
    out = {"schema": 1, **out}
    if args.json:
        print(json.dumps(out, indent=2))
    else:
        _print_stats(out)
    return 0 if ok else 1


def _print_stats(out: dict) -> None:
    if "distr" in out:
        d = out["distr"]
        print(f"distr: n={d['n']} width={d['width']} bits={d['bits']} full={d['full']} q1={d['q1']}")
    if "kfull" in out:
        r = out["kfull"]
        print(f"kfull: k={r['k']} length={r['length']} expected={r['expected']} full={r['full']}")
        for t, c in r["counts"].items():
            print(f"  {t}: {c}")
    if "q1" in out:
        q = out["q1"]
        print(f"q1: N={q['N']} passed={q['passed']}")
        for lv in q["levels"]:
            print(f"  k={lv['k']:<3} max_dev={lv['max_deviation']:<10} worst={lv['worst']:<14} {'pass' if lv['passed'] else 'FAIL'}")


# ---------------------------------------------------------------------------
# demo


def cmd_demo(args) -> int:
    n = args.precision
    if args.which == "bernoulli":
        rows = []
        for m in range(1, n + 1):
            r = genlib.demo_bernoulli(m)
            rows.append({"n": m, "max_steps": r.max_steps, "within_n": r.max_steps <= m})
        res = {"demo": "bernoulli", "rows": rows}
        code = 0 if all(r["within_n"] for r in rows) else 1
    elif args.which == "tent":
        rows = []
        for m in range(1, n + 1):
            r = genlib.demo_tent(m)
            rows.append({"n": m, "max_cycle": r.max_cycle, "cycle_lengths": r.cycle_lengths, "within_n": r.max_cycle <= m})
        res = {"demo": "tent", "rows": rows}
        code = 0
    elif args.which == "halfper":
        rng = random.Random(args.seed)
        gammas = seqstats.random_gammas(rng, n) if args.random else [0] * n
        h = seqstats.realize_half_periods(gammas, n)
        res = {
            "demo": "halfper",
            "n": n,
            "gammas": list(h.gammas),
            "recovered": list(h.recovered),
            "transitive": h.transitive.result.value,
            "compatible": h.compatible.result.value,
            "ok": h.ok,
        }
        code = 0 if h.ok else 1
    else:
        kinds = [args.kind] if args.kind else [k.value for k in genlib.Kind]
        res = {"demo": "bench", "rows": [genlib.bench(k, n, args.words) for k in kinds]}
        code = 0
    if args.json:
        print(json.dumps(res, indent=2))
    else:
        _print_demo(res)
    return code


def _print_demo(res: dict) -> None:
    if res["demo"] == "bernoulli":
        print(" n  max steps to 0")
        for r in res["rows"]:
            print(f"{r['n']:>2}  {r['max_steps']}")
    elif res["demo"] == "tent":
        print(" n  longest cycle  cycle lengths")
        for r in res["rows"]:
            print(f"{r['n']:>2}  {r['max_cycle']:>13}  {r['cycle_lengths']}")
    elif res["demo"] == "halfper":
        for k in ("n", "gammas", "recovered", "transitive", "compatible", "ok"):
            print(f"{k}: {res[k]}")
    else:
        for r in res["rows"]:
            print(f"{r['kind']:<15} n={r['n']:<3} {r['words_per_sec']:>14,.0f} words/s")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="padic-ergo", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-n", "--precision", type=int, default=16, help="word size in bits")
    common.add_argument("--budget", type=int, help="enumeration budget (states)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--force", action="store_true", help="use generators that fail verification")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run criteria on an expression")
    v.add_argument("expression")
    v.add_argument("--criteria", help=f"comma list from: {', '.join(CRITERIA)}")
    v.add_argument("--require", choices=("all", "mp", "ergodic"), default="all")
    v.set_defaults(func=cmd_verify)

    def gen_args(q):
        q.add_argument("--kind", choices=[k.value for k in genlib.Kind])
        q.add_argument("--expr")
        q.add_argument("--g", help="definition spliced in by g@(...)")
        q.add_argument("--a", type=int, default=3, help="base of the exponential generator")
        q.add_argument("--c", type=int, default=1, help="odd constant of the difference construction")
        q.add_argument("--spec", help="JSON generator spec file")
        q.add_argument("--truncate", type=int, help="output only the top k bits")

    g = sub.add_parser("gen", parents=[common], help="emit a verified generator stream")
    gen_args(g)
    g.add_argument("--bytes", type=int, default=1024)
    g.add_argument("--out", help="write to a file instead of stdout")
    g.add_argument("--verbose", action="store_true")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("stats", parents=[common], help="distribution checks")
    gen_args(s)
    s.add_argument("--file", help="raw bytes, first bit in the low position")
    s.add_argument("--bits", help="literal bit string such as 1111111100000111")
    s.add_argument("--words", help="comma separated words")
    s.add_argument("--width", type=int, help="bits per word for --words (default -n)")
    s.add_argument("--limit-bits", type=int, help="use only the first bits of the input")
    s.add_argument("--q1", action="store_true")
    s.add_argument("--kfull", type=int)
    s.add_argument("--distr", action="store_true", help="full-period check of a generator")
    s.set_defaults(func=cmd_stats)

    d = sub.add_parser("demo", parents=[common], help="non-ergodic maps, half periods, throughput")
    d.add_argument("which", choices=("bernoulli", "tent", "halfper", "bench"))
    d.add_argument("--random", action="store_true")
    d.add_argument("--kind", choices=[k.value for k in genlib.Kind])
    d.add_argument("--words", type=int, default=20000, help="words per benchmark run")
    d.set_defaults(func=cmd_demo)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if not 1 <= args.precision <= 64:
        print("error: precision must lie in 1..64", file=sys.stderr)
        return 2
    saved = os.environ.get("PADIC_ERGO_BUDGET")
    if args.budget is not None:
        os.environ["PADIC_ERGO_BUDGET"] = str(args.budget)
    try:
        return args.func(args)
    except tx.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except genlib.BuildRefused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ValueError, KeyError, vd.BudgetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        if saved is None:
            os.environ.pop("PADIC_ERGO_BUDGET", None)
        else:
            os.environ["PADIC_ERGO_BUDGET"] = saved


if __name__ == "__main__":
    sys.exit(main())
