"""Maximal-period generators built from verified T-functions.

A generator is an automaton: the state is a word modulo ``2**n``, the
transition is a single-cycle map ``f`` and the output is a balanced map of
the state.  :func:`build` lowers a :class:`GeneratorSpec` to an expression,
checks it with the cheapest criterion that suffices for its kind, and
refuses to construct anything that fails.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

import numpy as np

from . import texpr as tx
from . import verdicts as vd
from .texpr import Expr
from .twoadic import Word2

TABLE_LIMIT = 1 << 20


class Kind(str, Enum):
    EXPR = "expr"
    EXPONENTIAL = "exponential"
    INVERSIVE = "inversive"
    DELTA = "delta"
    CASCADE = "cascade"
    DIGIT_WEIGHTED = "digit_weighted"
    XOR_AFFINE = "xor_affine"


@dataclass(frozen=True)
class OutputMap:
    """``full``, ``truncate`` (top ``k`` bits) or ``custom`` (``expr`` reduced to ``k`` bits)."""

    kind: str = "full"
    k: int | None = None
    expr: Expr | None = None

    def width(self, n: int) -> int:
        return n if self.kind == "full" else int(self.k)


FULL = OutputMap()


def truncate_top(k: int) -> OutputMap:
    return OutputMap("truncate", k)


def custom(expr: Expr | str, k: int | None = None) -> OutputMap:
    return OutputMap("custom", k, tx.parse(expr) if isinstance(expr, str) else expr)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: Kind
    n: int
    params: Mapping[str, Any] = field(default_factory=dict)
    output: OutputMap = FULL

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if not 1 <= self.n <= 64:
            raise ValueError(f"state precision must lie in 1..64, got {self.n}")
        if self.output.kind == "custom" and self.output.k is None:
            object.__setattr__(self, "output", OutputMap("custom", self.n, self.output.expr))
        if self.output.kind != "full":
            if not 1 <= int(self.output.k) <= self.n:
                raise ValueError(f"output width must lie in 1..{self.n}")


class BuildRefused(Exception):
    def __init__(self, verdict: vd.Verdict):
        super().__init__(f"{verdict.criterion}: {verdict.result.value} {verdict.witness}")
        self.verdict = verdict


def _parse(text: Expr | str, defs: Mapping[str, Expr | str] | None = None) -> Expr:
    return text if isinstance(text, Expr) else tx.parse(text, defs)


def _odd(a: int, what: str) -> int:
    if int(a) % 2 == 0:
        raise ValueError(f"{what} must be odd, got {a}")
    return int(a)


def exponential_expr(a: int) -> Expr:
    """``a*x + a**x`` for odd ``a``."""
    a = _odd(a, "base")
    x = tx.Var("x")
    return tx.Add(tx.Mul(tx.Const(a), x), tx.Exp1p2(tx.Const((a - 1) // 2), x))


def inversive_expr() -> Expr:
    """``-inv(2x + 1) - x``."""
    x = tx.Var("x")
    inv = tx.InvOdd(tx.Add(tx.Mul(tx.Const(2), x), tx.Const(1)))
    return tx.Sub(tx.Sub(tx.Const(0), inv), x)


def delta_expr(g: Expr | str, c: int = 1) -> Expr:
    """``c + x + 2*(g(x+1) - g(x))``."""
    g = _parse(g)
    x = tx.Var("x")
    gv = tx.free_vars(g)
    var = gv[0] if gv else "x"
    shifted = tx.substitute(g, {var: tx.Add(x, tx.Const(1))})
    plain = tx.substitute(g, {var: x})
    return tx.Add(tx.Add(tx.Const(int(c)), x), tx.Mul(tx.Const(2), tx.Sub(shifted, plain)))


def lower(spec: GeneratorSpec) -> Expr:
    """The transition function of ``spec`` as an expression in ``x``."""
    p = spec.params
    match spec.kind:
        case Kind.EXPR:
            return _parse(p["expr"], p.get("defs"))
        case Kind.EXPONENTIAL:
            return exponential_expr(p.get("a", 3))
        case Kind.INVERSIVE:
            return inversive_expr()
        case Kind.DELTA:
            return delta_expr(p["g"], p.get("c", 1))
        case Kind.CASCADE:
            return vd.xor_add_cascade_expr(p["c"], p["d"])
        case Kind.DIGIT_WEIGHTED:
            return vd.digit_weighted_expr(p["a"], p["weights"])
        case Kind.XOR_AFFINE:
            return vd.xor_affine_expr(p["a"], [tuple(q) for q in p["pairs"]])
    raise ValueError(f"unknown kind {spec.kind}")


def _arith_mod8(e: Expr) -> vd.Verdict:
    inner = vd.brute_transitive(e, 3)
    return vd.Verdict(
        "arithmetic_mod8", vd.ERG, inner.result, inner.witness, "arithmetic composition decided modulo 8"
    )


def verify(spec: GeneratorSpec, e: Expr | None = None, limit: int | None = None) -> vd.Verdict:
    """The cheapest sufficient single-cycle check for the kind of ``spec``."""
    e = lower(spec) if e is None else e
    p = spec.params
    match spec.kind:
        case Kind.EXPONENTIAL | Kind.INVERSIVE:
            return _arith_mod8(e)
        case Kind.DELTA:
            c = int(p.get("c", 1))
            g = _parse(p["g"])
            compat = tx.classify(g)
            ok = c % 2 == 1 and compat.compatible
            w = {"c": c, "g_compatible": compat.compatible}
            if not compat:
                w["non_compatible_subtree"] = tx.pretty(compat.witness)
            return vd.Verdict(
                "delta_construction",
                vd.ERG,
                vd.Result.HOLDS if ok else vd.Result.FAILS,
                w,
                "c + x + 2 (g(x+1) - g(x)) with c odd and g compatible",
            )
        case Kind.CASCADE:
            return vd.check_xor_add_cascade(p["c"], p["d"])
        case Kind.XOR_AFFINE:
            return vd.check_special_xor_affine(p["a"], [tuple(q) for q in p["pairs"]])
        case Kind.DIGIT_WEIGHTED:
            if len(p["weights"]) != spec.n:
                raise ValueError("digit-weighted generators need exactly n weights")
            return vd.check_special_digit_weighted(p["a"], p["weights"])
    # free-form expression
    if tx.is_arithmetic(e):
        return _arith_mod8(e)
    if (1 << spec.n) <= vd.budget(limit):
        return vd.brute_transitive(e, spec.n, limit=limit)
    return vd.Verdict(
        "brute_transitive",
        vd.ERG,
        vd.Result.NOT_APPLICABLE,
        {"reason": f"2**{spec.n} states exceed the enumeration budget"},
        "single cycle modulo 2^n",
    )


def _check_output(spec: GeneratorSpec, limit: int | None) -> vd.Verdict | None:
    out = spec.output
    if out.kind != "custom":
        return None
    n, k = spec.n, int(out.k)
    vd._require_budget(1 << n, limit)
    vals = tx.table(out.expr, n, tx.free_vars(out.expr)[0] if tx.free_vars(out.expr) else "x")
    vals = vals & np.uint64((1 << k) - 1)
    counts = np.bincount(vals.astype(np.int64), minlength=1 << k)
    expected = 1 << (n - k)
    bad = np.flatnonzero(counts != expected)
    if bad.size:
        return vd.Verdict(
            "output_balanced",
            vd.Property.BALANCED,
            vd.Result.FAILS,
            {"output": int(bad[0]), "count": int(counts[bad[0]]), "expected": expected},
            "equal number of preimages",
        )
    return vd.Verdict("output_balanced", vd.Property.BALANCED, vd.Result.HOLDS, {"preimages": expected})


@dataclass
class StreamState:
    current: Word2
    steps_taken: int = 0


@dataclass
class Generator:
    spec: GeneratorSpec
    expr: Expr
    verdict: vd.Verdict
    forced: bool = False
    output_verdict: vd.Verdict | None = None
    _table: list[int] | None = field(default=None, repr=False)

    def __post_init__(self):
        self._fn = tx.compile_expr(self.expr, self.n)
        self._var = (tx.free_vars(self.expr) or ["x"])[0]
        o = self.spec.output
        if o.kind == "custom":
            self._out_fn = tx.compile_expr(o.expr, self.n)
            self._out_var = (tx.free_vars(o.expr) or ["x"])[0]

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def width(self) -> int:
        return self.spec.output.width(self.n)

    @property
    def criterion(self) -> str:
        return self.verdict.criterion

    def transition(self, x: int) -> int:
        if self._table is not None:
            return self._table[x]
        return int(self._fn({self._var: x})) & ((1 << self.n) - 1)

    def out(self, x: int) -> int:
        o = self.spec.output
        if o.kind == "full":
            return x
        if o.kind == "truncate":
            return x >> (self.n - o.k)
        return int(self._out_fn({self._out_var: x})) & ((1 << o.k) - 1)

    def table(self) -> list[int]:
        """Transition table, materialized once for small state spaces."""
        if self._table is None:
            self._table = tx.table(self.expr, self.n, self._var).tolist()
        return self._table

    def start(self, seed: int = 0) -> StreamState:
        return StreamState(Word2(int(seed) % (1 << self.n), self.n))

    def states(self, count: int, seed: int = 0) -> list[int]:
        """``f(seed), f(f(seed)), ...`` -- ``count`` successive states."""
        if (1 << self.n) <= TABLE_LIMIT:
            self.table()
        x = int(seed) % (1 << self.n)
        out = []
        step_fn = self.transition
        for _ in range(count):
            x = step_fn(x)
            out.append(x)
        return out

    def words(self, count: int, seed: int = 0) -> list[int]:
        return [self.out(x) for x in self.states(count, seed)]


def build(spec: GeneratorSpec, force: bool = False, limit: int | None = None) -> Generator:
    """Lower, verify and wrap ``spec``; raises :class:`BuildRefused` unless the check holds."""
    e = lower(spec)
    v = verify(spec, e, limit)
    if not v.holds and not force:
        raise BuildRefused(v)
    ov = _check_output(spec, limit)
    if ov is not None and not ov.holds and not force:
        raise BuildRefused(ov)
    return Generator(spec, e, v, forced=not v.holds, output_verdict=ov)


def step(gen: Generator, state: StreamState) -> Word2:
    """Advance ``state`` once and return the new state (before the output map)."""
    nxt = Word2(gen.transition(state.current.value), gen.n)
    state.current = nxt
    state.steps_taken += 1
    return nxt


def output(gen: Generator, state: StreamState) -> Word2:
    return Word2(gen.out(state.current.value), gen.width)


def words_to_bits(words, width: int) -> np.ndarray:
    """Concatenate ``width``-bit words, lowest digit first."""
    w = np.asarray(words, dtype=np.uint64).reshape(-1, 1)
    shifts = np.arange(width, dtype=np.uint64)
    return ((w >> shifts) & np.uint64(1)).astype(np.uint8).ravel()


def bits_to_bytes(bits: np.ndarray) -> bytes:
    """First bit into the least significant position of the first byte."""
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


def bytes_to_bits(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")


def emit_bits(gen: Generator, count: int, seed: int = 0) -> np.ndarray:
    """The first ``count`` bits of the output stream."""
    if count <= 0:
        return np.zeros(0, dtype=np.uint8)
    nwords = -(-count // gen.width)
    return words_to_bits(gen.words(nwords, seed), gen.width)[:count]


def emit_bytes(gen: Generator, nbytes: int, seed: int = 0) -> bytes:
    return bits_to_bytes(emit_bits(gen, 8 * nbytes, seed))


# ---------------------------------------------------------------------------
# exponential generator through a table of repeated squares


@dataclass(frozen=True)
class ExpTable:
    a: int
    n: int
    powers: tuple[int, ...]  # a**(2**j) mod 2**n
    squarings: int

    def power(self, x: int) -> tuple[int, int]:
        """``a**x mod 2**n`` and the number of multiplications spent."""
        mask = (1 << self.n) - 1
        acc, mults = 1, 0
        for j in range(self.n):
            if (x >> j) & 1:
                acc = (acc * self.powers[j]) & mask
                mults += 1
        return acc, mults

    def step(self, x: int) -> tuple[int, int]:
        """``a*x + a**x`` and the multiplication count including ``a*x``."""
        p, m = self.power(x)
        return (self.a * x + p) & ((1 << self.n) - 1), m + 1


def exp_generator_table(a: int, n: int) -> ExpTable:
    a = _odd(a, "base")
    mask = (1 << n) - 1
    t = [a & mask]
    for _ in range(n - 1):
        t.append((t[-1] * t[-1]) & mask)
    return ExpTable(a, n, tuple(t), n - 1)


# ---------------------------------------------------------------------------
# non-ergodic demonstrations


def bernoulli_map(x, n: int):
    """``((x | 1) - 1) / 2 mod 2**n``."""
    return (((x | 1) - 1) >> 1) & ((1 << n) - 1)


def tent_map(x, n: int):
    """``(x & -2)/2 - x*(x & 1) mod 2**n`` on the residues ``0 .. 2**n - 1``."""
    mask = (1 << n) - 1
    return (((x & (mask - 1)) >> 1) - x * (x & 1)) & mask


@dataclass
class BernoulliReport:
    n: int
    starts: int
    max_steps: int
    histogram: dict[int, int]


def demo_bernoulli(n: int, starts=None) -> BernoulliReport:
    """Steps needed to reach 0 from every start (or the given sample)."""
    xs = np.arange(1 << n, dtype=np.int64) if starts is None else np.asarray(starts, dtype=np.int64)
    steps = np.zeros_like(xs)
    cur = xs.copy()
    while (cur != 0).any():
        live = cur != 0
        steps += live
        cur = bernoulli_map(cur, n)
    vals, counts = np.unique(steps, return_counts=True)
    return BernoulliReport(n, len(xs), int(steps.max(initial=0)), {int(v): int(c) for v, c in zip(vals, counts)})


@dataclass
class TentReport:
    n: int
    cycle_lengths: dict[int, int]  # length -> number of cycles

    @property
    def max_cycle(self) -> int:
        return max(self.cycle_lengths)


def functional_cycles(t: list[int]) -> list[list[int]]:
    """All cycles of the functional graph of the table ``t``."""
    color = [0] * len(t)  # 0 new, 1 on current path, 2 done
    cycles = []
    for s in range(len(t)):
        if color[s]:
            continue
        path = []
        x = s
        while not color[x]:
            color[x] = 1
            path.append(x)
            x = t[x]
        if color[x] == 1:
            cycles.append(path[path.index(x):])
        for y in path:
            color[y] = 2
    return cycles


def demo_tent(n: int) -> TentReport:
    t = tent_map(np.arange(1 << n, dtype=np.int64), n).tolist()
    lengths: dict[int, int] = {}
    for c in functional_cycles(t):
        lengths[len(c)] = lengths.get(len(c), 0) + 1
    return TentReport(n, dict(sorted(lengths.items())))


# ---------------------------------------------------------------------------
# specs from JSON


def spec_from_dict(d: Mapping[str, Any]) -> GeneratorSpec:
    """``{"kind", "n", "params", "output"}``; output is ``"full"``,
    ``{"truncate": k}`` or ``{"custom": expr, "width": k}``."""
    out = d.get("output", "full")
    if out in (None, "full"):
        om = FULL
    elif "truncate" in out:
        om = truncate_top(int(out["truncate"]))
    elif "custom" in out:
        om = custom(out["custom"], out.get("width"))
    else:
        raise ValueError(f"unknown output map {out!r}")
    params = dict(d.get("params", {}))
    for key in ("a", "c"):
        if isinstance(params.get(key), str):
            params[key] = int(params[key], 0)
    return GeneratorSpec(Kind(d["kind"]), int(d.get("n", 32)), params, om)


def load_spec(text: str) -> GeneratorSpec:
    return spec_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# throughput


DEFAULT_BENCH_SPECS = {
    Kind.EXPONENTIAL: {"a": 3},
    Kind.INVERSIVE: {},
    Kind.DELTA: {"g": "x ^ (2*x+1)", "c": 1},
    Kind.CASCADE: {"c": [1, 4], "d": [4, 8]},
    Kind.XOR_AFFINE: {"a": 1, "pairs": [[1, 2], [4, 5]]},
    Kind.EXPR: {"expr": "x + (x^2 | 5)"},
}


def bench(kind: Kind | str, n: int = 32, count: int = 20000, params: Mapping | None = None) -> dict:
    """Words per second of the plain stepping loop (informational)."""
    kind = Kind(kind)
    if kind is Kind.DIGIT_WEIGHTED:
        params = params or {"a": 1, "weights": [5] + [1 << i for i in range(1, n)]}
    params = dict(DEFAULT_BENCH_SPECS.get(kind, {}) if params is None else params)
    gen = build(GeneratorSpec(kind, n, params), force=True)
    t0 = time.perf_counter()
    gen.words(count)
    dt = time.perf_counter() - t0
    return {"kind": kind.value, "n": n, "words": count, "seconds": dt, "words_per_sec": count / dt if dt else float("inf")}


__all__ = [
    "Kind",
    "OutputMap",
    "FULL",
    "truncate_top",
    "custom",
    "GeneratorSpec",
    "BuildRefused",
    "exponential_expr",
    "inversive_expr",
    "delta_expr",
    "lower",
    "verify",
    "StreamState",
    "Generator",
    "build",
    "step",
    "output",
    "words_to_bits",
    "bits_to_bytes",
    "bytes_to_bits",
    "emit_bits",
    "emit_bytes",
    "ExpTable",
    "exp_generator_table",
    "bernoulli_map",
    "tent_map",
    "BernoulliReport",
    "demo_bernoulli",
    "TentReport",
    "functional_cycles",
    "demo_tent",
    "spec_from_dict",
    "load_spec",
    "bench",
]
