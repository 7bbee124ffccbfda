"""A small expression language for T-functions.

Expressions are built from the operations a processor offers (``+ - *``,
``& | ^ ~``, left shifts) plus a few 2-adic extras: inverse of an odd
word, ``(1 + 2u) ** v``, a single digit, truncation.  Parsing yields an
immutable tree; evaluation compiles the tree into nested closures that work
equally on Python ints and on numpy ``uint64`` arrays, so the brute-force
checkers can evaluate a map on every residue at once.

Grammar, loosest binding first::

    expr  := or
    or    := xor ('|' xor)*
    xor   := and (('^' | 'xor') and)*
    and   := shift ('&' shift)*
    shift := sum (('<<' | '>>') INT)*
    sum   := prod (('+' | '-') prod)*
    prod  := pow (('*' | '/') pow)*
    pow   := unary (('**' unary) | ('^' INT, written without spaces))?
    unary := ('~' | '-') unary | atom
    atom  := INT | INT '/' ODDINT | IDENT | IDENT '(' args ')'
           | IDENT '@' atom | '(' expr ')'

``x^2`` (caret glued to both operands, integer on the right) is a power;
``x ^ 2`` with surrounding spaces is exclusive or.  ``a ** x`` with an odd
constant ``a`` is exponentiation ``exp1p2((a-1)/2, x)``; ``e ** k`` with a
literal ``k`` is an ordinary power.  ``u / v`` is only allowed when ``v`` is
provably odd and means ``u * inv(v)``.  ``g@e`` splices a caller-supplied
definition ``g`` with its variable ``x`` replaced by ``e``.
"""

from __future__ import annotations

import functools
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np

from .twoadic import Word2, canonical, inv_odd_int

__all__ = [
    "Expr",
    "Var",
    "Const",
    "Add",
    "Sub",
    "Mul",
    "And",
    "Or",
    "Xor",
    "Not",
    "Shl",
    "Shr",
    "InvOdd",
    "Exp1p2",
    "Digit",
    "TruncMod",
    "Pow",
    "ParseError",
    "EvalError",
    "parse",
    "pretty",
    "substitute",
    "free_vars",
    "compile_expr",
    "evaluate",
    "evaluate_array",
    "table",
    "CompatClass",
    "classify",
    "is_arithmetic",
    "is_polynomial",
    "parity",
    "AnfPoly",
    "coordinate_anf",
    "anf_from_truth_table",
    "random_expr",
    "poly_expr",
    "ANF_CAP",
]

ANF_CAP = 20


# ---------------------------------------------------------------------------
# tree


class Expr:
    __slots__ = ()

    def children(self) -> tuple["Expr", ...]:
        return ()

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: int | Fraction

    def __post_init__(self):
        v = self.value
        if isinstance(v, Fraction) and v.denominator == 1:
            object.__setattr__(self, "value", int(v))


@dataclass(frozen=True, slots=True)
class _Binary(Expr):
    a: Expr
    b: Expr

    def children(self):
        return (self.a, self.b)


class Add(_Binary):
    __slots__ = ()


class Sub(_Binary):
    __slots__ = ()


class Mul(_Binary):
    __slots__ = ()


class And(_Binary):
    __slots__ = ()


class Or(_Binary):
    __slots__ = ()


class Xor(_Binary):
    __slots__ = ()


class Exp1p2(_Binary):
    """``(1 + 2a) ** b``."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Not(Expr):
    a: Expr

    def children(self):
        return (self.a,)


@dataclass(frozen=True, slots=True)
class InvOdd(Expr):
    a: Expr

    def children(self):
        return (self.a,)


@dataclass(frozen=True, slots=True)
class Shl(Expr):
    a: Expr
    k: int

    def children(self):
        return (self.a,)


@dataclass(frozen=True, slots=True)
class Shr(Expr):
    a: Expr
    k: int

    def children(self):
        return (self.a,)


@dataclass(frozen=True, slots=True)
class Pow(Expr):
    a: Expr
    k: int

    def children(self):
        return (self.a,)


@dataclass(frozen=True, slots=True)
class Digit(Expr):
    j: int
    a: Expr

    def children(self):
        return (self.a,)


@dataclass(frozen=True, slots=True)
class TruncMod(Expr):
    k: int
    a: Expr

    def children(self):
        return (self.a,)


_BINARY_SYMBOL = {Add: "+", Sub: "-", Mul: "*", And: "&", Or: "|", Xor: "^"}


def walk(e: Expr) -> Iterable[Expr]:
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def free_vars(e: Expr) -> list[str]:
    return sorted({node.name for node in walk(e) if isinstance(node, Var)})


def pretty(e: Expr) -> str:
    """Fully parenthesized text that parses back to the same tree."""
    match e:
        case Var(name):
            return name
        case Const(value):
            return str(value)
        case Exp1p2(a, b):
            return f"exp1p2({pretty(a)}, {pretty(b)})"
        case _Binary(a, b):
            return f"({pretty(a)} {_BINARY_SYMBOL[type(e)]} {pretty(b)})"
        case Not(a):
            return f"~{pretty(a)}"
        case InvOdd(a):
            return f"inv({pretty(a)})"
        case Shl(a, k):
            return f"shl({pretty(a)}, {k})"
        case Shr(a, k):
            return f"shr({pretty(a)}, {k})"
        case Pow(a, k):
            return f"({pretty(a)}^{k})"
        case Digit(j, a):
            return f"delta({j}, {pretty(a)})"
        case TruncMod(k, a):
            return f"trunc({k}, {pretty(a)})"
    raise TypeError(f"not an expression node: {e!r}")


def _rebuild(e: Expr, kids: list[Expr]) -> Expr:
    match e:
        case _Binary():
            return type(e)(kids[0], kids[1])
        case Not() | InvOdd():
            return type(e)(kids[0])
        case Shl(_, k) | Shr(_, k) | Pow(_, k):
            return type(e)(kids[0], k)
        case Digit(j, _):
            return Digit(j, kids[0])
        case TruncMod(k, _):
            return TruncMod(k, kids[0])
    return e


def substitute(e: Expr, bindings: Mapping[str, Expr]) -> Expr:
    """Replace free variables by expressions."""
    if isinstance(e, Var):
        return bindings.get(e.name, e)
    kids = e.children()
    if not kids:
        return e
    return _rebuild(e, [substitute(k, bindings) for k in kids])


# ---------------------------------------------------------------------------
# parser


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


@dataclass(slots=True)
class _Tok:
    kind: str  # INT IDENT OP END
    text: str
    pos: int
    tight: bool = False  # for '^': glued to both neighbours


_TOKEN_RE = re.compile(
    r"\s*(?:(0[xX][0-9a-fA-F]+|\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|<<|>>|[-+*/&|^~(),@]))"
)


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            toks.append(_Tok("END", "", pos))
            return toks
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(1) if m.group(1) else m.start(2) if m.group(2) else m.start(3)
        if m.group(1):
            toks.append(_Tok("INT", m.group(1), start))
        elif m.group(2):
            toks.append(_Tok("IDENT", m.group(2), start))
        else:
            op = m.group(3)
            tight = False
            if op == "^":
                before = start > 0 and not text[start - 1].isspace()
                after = start + 1 < len(text) and text[start + 1].isdigit()
                tight = before and after
            toks.append(_Tok("OP", op, start, tight))
        pos = m.end()


def _int_of(tok: _Tok) -> int:
    return int(tok.text, 0) if tok.text[:2].lower() == "0x" else int(tok.text)


def parity(e: Expr) -> int | None:
    """Low bit of ``e`` when it is forced by the syntax, else ``None``."""
    match e:
        case Const(v):
            if isinstance(v, Fraction):
                return v.numerator % 2
            return v % 2
        case Add(a, b) | Sub(a, b) | Xor(a, b):
            pa, pb = parity(a), parity(b)
            return None if pa is None or pb is None else pa ^ pb
        case Mul(a, b) | And(a, b):
            pa, pb = parity(a), parity(b)
            if pa == 0 or pb == 0:
                return 0
            return 1 if pa == pb == 1 else None
        case Or(a, b):
            pa, pb = parity(a), parity(b)
            if pa == 1 or pb == 1:
                return 1
            return 0 if pa == pb == 0 else None
        case Not(a):
            pa = parity(a)
            return None if pa is None else 1 - pa
        case InvOdd() | Exp1p2():
            return 1
        case Shl(a, k):
            return 0 if k >= 1 else parity(a)
        case Pow(a, k):
            return 1 if k == 0 else parity(a)
        case Digit(0, a) | TruncMod(_, a):
            return parity(a)
    return None


class _Parser:
    def __init__(self, text: str, defs: Mapping[str, Expr]):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.defs = defs

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, *ops: str) -> bool:
        t = self.tok
        return t.kind == "OP" and t.text in ops

    def expect(self, op: str) -> _Tok:
        if not self.at(op):
            raise ParseError(f"expected {op!r}, found {self.tok.text or 'end of input'!r}", self.tok.pos)
        return self.take()

    def expect_int(self) -> int:
        t = self.tok
        neg = False
        if self.at("-"):
            neg = True
            self.take()
            t = self.tok
        if t.kind != "INT":
            raise ParseError("expected an integer literal", t.pos)
        self.take()
        return -_int_of(t) if neg else _int_of(t)

    def parse(self) -> Expr:
        e = self.or_()
        if self.tok.kind != "END":
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return e

    def or_(self):
        e = self.xor()
        while self.at("|"):
            self.take()
            e = Or(e, self.xor())
        return e

    def xor(self):
        e = self.and_()
        while (self.at("^") and not self.tok.tight) or (self.tok.kind == "IDENT" and self.tok.text == "xor"):
            self.take()
            e = Xor(e, self.and_())
        return e

    def and_(self):
        e = self.shift()
        while self.at("&"):
            self.take()
            e = And(e, self.shift())
        return e

    def shift(self):
        e = self.sum()
        while self.at("<<", ">>"):
            op = self.take()
            k = self.expect_int()
            if k < 0:
                raise ParseError("shift amount must be nonnegative", op.pos)
            e = Shl(e, k) if op.text == "<<" else Shr(e, k)
        return e

    def sum(self):
        e = self.prod()
        while self.at("+", "-"):
            op = self.take().text
            rhs = self.prod()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def prod(self):
        e = self.pow()
        while self.at("*", "/"):
            op = self.take()
            rhs = self.pow()
            if op.text == "*":
                e = Mul(e, rhs)
            else:
                if parity(rhs) != 1:
                    raise ParseError("division is only defined by a provably odd divisor", op.pos)
                e = Mul(e, InvOdd(rhs))
        return e

    def pow(self):
        base = self.unary()
        if self.at("^") and self.tok.tight:
            self.take()
            return Pow(base, self.expect_int())
        if self.at("**"):
            op = self.take()
            expo = self.unary()
            if isinstance(base, Const) and parity(base) == 1:
                return Exp1p2(Const((Fraction(base.value) - 1) / 2), expo)
            if isinstance(expo, Const) and isinstance(expo.value, int) and expo.value >= 0:
                return Pow(base, expo.value)
            raise ParseError("'**' needs an odd constant base or a nonnegative literal exponent", op.pos)
        return base

    def unary(self):
        if self.at("~"):
            self.take()
            return Not(self.unary())
        if self.at("-"):
            self.take()
            inner = self.unary()
            if isinstance(inner, Const):
                return Const(-inner.value)
            return Sub(Const(0), inner)
        return self.atom()

    def atom(self):
        t = self.tok
        if t.kind == "INT":
            self.take()
            v = _int_of(t)
            # INT '/' INT is a rational literal
            if self.at("/") and self.toks[self.i + 1].kind == "INT":
                slash = self.take()
                d = _int_of(self.take())
                if d % 2 == 0:
                    raise ParseError("rational constant with even denominator", slash.pos)
                return Const(Fraction(v, d))
            return Const(v)
        if t.kind == "IDENT":
            self.take()
            name = t.text
            if self.at("@"):
                self.take()
                if name not in self.defs:
                    raise ParseError(f"no definition supplied for {name!r}", t.pos)
                return substitute(self.defs[name], {"x": self.atom()})
            if self.at("("):
                return self.call(name, t.pos)
            if name in _BUILTINS:
                raise ParseError(f"builtin {name!r} needs arguments", t.pos)
            return Var(name)
        if self.at("("):
            self.take()
            e = self.or_()
            self.expect(")")
            return e
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.pos)

    def call(self, name: str, pos: int):
        if name not in _BUILTINS:
            raise ParseError(f"unknown function {name!r}", pos)
        self.expect("(")
        args = []
        while True:
            args.append(self.or_())
            if self.at(","):
                self.take()
                continue
            break
        self.expect(")")
        return _BUILTINS[name](args, pos)


def _const_int(e: Expr, what: str, pos: int) -> int:
    if isinstance(e, Const) and isinstance(e.value, int) and e.value >= 0:
        return e.value
    raise ParseError(f"{what} must be a nonnegative integer constant", pos)


def _arity(args, n, name, pos):
    if len(args) != n:
        raise ParseError(f"{name} takes {n} argument(s), got {len(args)}", pos)
    return args


_BUILTINS: dict[str, Callable[[list, int], Expr]] = {
    "delta": lambda a, p: Digit(_const_int(_arity(a, 2, "delta", p)[0], "digit index", p), a[1]),
    "inv": lambda a, p: InvOdd(_arity(a, 1, "inv", p)[0]),
    "exp1p2": lambda a, p: Exp1p2(*_arity(a, 2, "exp1p2", p)),
    "trunc": lambda a, p: TruncMod(_const_int(_arity(a, 2, "trunc", p)[0], "truncation width", p), a[1]),
    "shl": lambda a, p: Shl(_arity(a, 2, "shl", p)[0], _const_int(a[1], "shift amount", p)),
    "shr": lambda a, p: Shr(_arity(a, 2, "shr", p)[0], _const_int(a[1], "shift amount", p)),
}


def parse(text: str, defs: Mapping[str, Expr | str] | None = None) -> Expr:
    """Parse DSL text.  ``defs`` maps names usable as ``name@arg`` to expressions in ``x``."""
    resolved = {k: parse(v) if isinstance(v, str) else v for k, v in (defs or {}).items()}
    return _Parser(text, resolved).parse()


# ---------------------------------------------------------------------------
# evaluation


class EvalError(ValueError):
    pass


@functools.lru_cache(maxsize=4096)
def compile_expr(e: Expr, n: int, p: int = 2) -> Callable[[Mapping], object]:
    """Compile ``e`` into ``env -> value`` reducing modulo ``p**n`` after each node.

    Values may be Python ints or numpy integer arrays (``uint64`` for p = 2,
    ``int64`` for odd p).  For odd p only arithmetic nodes are allowed.
    """
    if p == 2:
        mask = (1 << n) - 1

        def red(v):
            return v & mask
    else:
        mod = p**n

        def red(v):
            return v % mod

    def build(node: Expr):
        match node:
            case Var(name):
                def f(env):
                    try:
                        return env[name]
                    except KeyError:
                        raise EvalError(f"unbound variable {name!r}") from None
                return f
            case Const(value):
                c = canonical(value, n) if p == 2 else _canonical_p(value, p, n)
                return lambda env: c
            case Add(a, b):
                fa, fb = build(a), build(b)
                return lambda env: red(fa(env) + fb(env))
            case Sub(a, b):
                fa, fb = build(a), build(b)
                return lambda env: red(fa(env) - fb(env))
            case Mul(a, b):
                fa, fb = build(a), build(b)
                return lambda env: red(fa(env) * fb(env))
            case Pow(a, k):
                fa = build(a)
                if k == 0:
                    return lambda env: red(1)

                def f(env):
                    base, acc, e_ = fa(env), None, k
                    while e_:
                        if e_ & 1:
                            acc = base if acc is None else red(acc * base)
                        e_ >>= 1
                        if e_:
                            base = red(base * base)
                    return acc
                return f
            case InvOdd(a):
                fa = build(a)
                return lambda env: _inverse(fa(env), p, n, red)
            case Exp1p2(a, b):
                if p != 2:
                    raise EvalError("exp1p2 is only defined for p = 2")
                fa, fb = build(a), build(b)
                return lambda env: _exp1p2(fa(env), fb(env), n, red)
        if p != 2:
            raise EvalError(f"{type(node).__name__} is a bitwise node; odd p supports arithmetic only")
        match node:
            case And(a, b):
                fa, fb = build(a), build(b)
                return lambda env: fa(env) & fb(env)
            case Or(a, b):
                fa, fb = build(a), build(b)
                return lambda env: fa(env) | fb(env)
            case Xor(a, b):
                fa, fb = build(a), build(b)
                return lambda env: fa(env) ^ fb(env)
            case Not(a):
                fa = build(a)
                return lambda env: red(~fa(env))
            case Shl(a, k):
                fa = build(a)
                if k >= n:
                    return lambda env: fa(env) & 0
                return lambda env: red(fa(env) << k)
            case Shr(a, k):
                fa = build(a)
                if k >= n:
                    return lambda env: fa(env) & 0
                return lambda env: fa(env) >> k
            case Digit(j, a):
                fa = build(a)
                if j >= n:
                    return lambda env: fa(env) & 0
                return lambda env: (fa(env) >> j) & 1
            case TruncMod(k, a):
                fa = build(a)
                m = (1 << min(k, n)) - 1
                return lambda env: fa(env) & m
        raise TypeError(f"cannot compile {node!r}")

    return build(e)


def _canonical_p(c: int | Fraction, p: int, n: int) -> int:
    m = p**n
    if isinstance(c, Fraction):
        if c.denominator % p == 0:
            raise EvalError(f"{c} is not a {p}-adic integer")
        return c.numerator * pow(c.denominator, -1, m) % m
    return c % m


def _inverse(v, p: int, n: int, red):
    if isinstance(v, np.ndarray):
        if np.any(v % p == 0):
            raise EvalError("inverse of a non-unit")
        if p == 2:
            y, good = v.copy(), 3
            while good < n:
                y = red(y * (2 - v * y))
                good *= 2
            return red(y)
        # Euler: v ** (phi(p**n) - 1)
        e_, acc, base = p ** (n - 1) * (p - 1) - 1, np.ones_like(v), v.copy()
        while e_:
            if e_ & 1:
                acc = red(acc * base)
            base = red(base * base)
            e_ >>= 1
        return acc
    v = int(v)
    if v % p == 0:
        raise EvalError(f"inverse of non-unit {v}")
    if p == 2:
        return inv_odd_int(v, n)
    return pow(v, -1, p**n)


def _exp1p2(u, v, n: int, red):
    if not isinstance(u, np.ndarray) and not isinstance(v, np.ndarray):
        return pow((1 + 2 * int(u)) & ((1 << n) - 1), int(v), 1 << n)
    base = red(1 + 2 * u)
    two_u = red(2 * u)
    acc = red(base * 0 + 1)
    for j in range(n):
        bit = (v >> j) & 1
        acc = red(acc * red(1 + bit * two_u))
        two_u = red(base * base - 1)
        base = red(base * base)
    return acc


def evaluate(e: Expr, env: Mapping[str, Word2 | int], n: int) -> Word2:
    """Value of ``e`` at precision ``n`` with every intermediate reduced mod ``2**n``."""
    mask = (1 << n) - 1
    ints = {}
    for k, v in env.items():
        if isinstance(v, Word2) and v.n != n:
            raise EvalError(f"variable {k!r} has precision {v.n}, expected {n}")
        ints[k] = int(v) & mask
    return Word2(int(compile_expr(e, n)(ints)) & mask, n)


def evaluate_array(e: Expr, env: Mapping[str, np.ndarray], n: int, p: int = 2) -> np.ndarray:
    """Vectorized evaluation; arrays must share a shape."""
    if p == 2 and n > 64:
        raise ValueError("array evaluation supports precision up to 64")
    dtype = np.uint64 if p == 2 else np.int64
    arrs = {k: np.asarray(v, dtype=dtype) for k, v in env.items()}
    shape = next(iter(arrs.values())).shape if arrs else ()
    out = compile_expr(e, n, p)(arrs)
    return np.broadcast_to(np.asarray(out, dtype=dtype), shape).copy()


def table(e: Expr, n: int, var: str = "x", p: int = 2) -> np.ndarray:
    """``e`` evaluated on every residue ``0 .. p**n - 1``."""
    size = p**n
    dtype = np.uint64 if p == 2 else np.int64
    return evaluate_array(e, {var: np.arange(size, dtype=dtype)}, n, p)


# ---------------------------------------------------------------------------
# compatibility


@dataclass(frozen=True, slots=True)
class CompatClass:
    compatible: bool
    witness: Expr | None = None

    def __bool__(self):
        return self.compatible


def _scaled_digit_arg(node: Expr) -> Expr | None:
    """Argument of ``2**k * delta(j, e)`` with ``k >= j``, which is 1-Lipschitz again."""
    match node:
        case Shl(Digit(j, arg), k) if k >= j:
            return arg
        case Mul(Const(c), Digit(j, arg)) | Mul(Digit(j, arg), Const(c)):
            if isinstance(c, Fraction):
                c = c.numerator
            if c == 0 or (c & -c).bit_length() - 1 >= j:
                return arg
    return None


def classify(e: Expr) -> CompatClass:
    """Structural compatibility.  Right shifts and bare digits are flagged.

    Digit 0 is always fine, and a digit ``j`` scaled by ``2**j`` (or more) is
    re-admitted; everything else involving a high digit is reported, even
    when the surrounding expression happens to be compatible.
    """
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Shr) and node.k > 0:
            return CompatClass(False, node)
        arg = _scaled_digit_arg(node)
        if arg is not None:
            stack.append(arg)
            continue
        if isinstance(node, Digit) and node.j > 0:
            return CompatClass(False, node)
        stack.extend(node.children())
    return CompatClass(True)


def is_arithmetic(e: Expr) -> bool:
    """Only ring operations, odd inverses and ``exp1p2``."""
    return all(isinstance(node, (Var, Const, Add, Sub, Mul, Pow, InvOdd, Exp1p2)) for node in walk(e))


def is_polynomial(e: Expr) -> bool:
    return all(
        isinstance(node, (Var, Add, Sub, Mul, Pow)) or (isinstance(node, Const) and isinstance(node.value, int))
        for node in walk(e)
    )


# ---------------------------------------------------------------------------
# algebraic normal form


@dataclass(frozen=True)
class AnfPoly:
    """Boolean polynomial; each monomial is a bitmask over variables ``x0 .. x{nvars-1}``."""

    nvars: int
    monomials: frozenset[int] = field(default_factory=frozenset)

    def __contains__(self, mono: int) -> bool:
        return mono in self.monomials

    @property
    def degree(self) -> int:
        return max((bin(m).count("1") for m in self.monomials), default=-1)

    def truth_table(self) -> np.ndarray:
        coeffs = np.zeros(1 << self.nvars, dtype=np.uint8)
        for m in self.monomials:
            coeffs[m] = 1
        return _moebius(coeffs, self.nvars)

    def without(self, var: int) -> "AnfPoly":
        """Monomials free of ``var``."""
        return AnfPoly(self.nvars, frozenset(m for m in self.monomials if not m >> var & 1))

    def __str__(self):
        if not self.monomials:
            return "0"

        def term(m):
            names = [f"x{i}" for i in range(self.nvars) if m >> i & 1]
            return "*".join(names) if names else "1"

        order = sorted(self.monomials, key=lambda m: (-bin(m).count("1"), -m))
        return " + ".join(term(m) for m in order)


def _moebius(values: np.ndarray, nvars: int) -> np.ndarray:
    a = values.astype(np.uint8).copy()
    for k in range(nvars):
        v = a.reshape(-1, 2, 1 << k)
        v[:, 1, :] ^= v[:, 0, :]
    return a


def anf_from_truth_table(bits: np.ndarray, nvars: int) -> AnfPoly:
    coeffs = _moebius(np.asarray(bits, dtype=np.uint8), nvars)
    return AnfPoly(nvars, frozenset(int(m) for m in np.flatnonzero(coeffs)))


def coordinate_anf(e: Expr, i: int, cap: int = ANF_CAP, var: str = "x") -> AnfPoly:
    """ANF of output digit ``i`` of ``e`` in the input digits ``x0 .. xi``."""
    if i > cap:
        raise ValueError(f"coordinate {i} exceeds the ANF cap {cap}")
    if not classify(e):
        raise ValueError("coordinate ANF needs a compatible expression")
    vals = table(e, i + 1, var)
    return anf_from_truth_table((vals >> np.uint64(i)) & np.uint64(1), i + 1)


# ---------------------------------------------------------------------------
# generators of expressions


def poly_expr(coeffs: Iterable[int], var: str = "x", combine=Add) -> Expr:
    """``c0 + c1*x + c2*x^2 + ...``; pass ``combine=Xor`` for the xor-polynomial."""
    x = Var(var)
    terms = []
    for i, c in enumerate(coeffs):
        if i == 0:
            terms.append(Const(c))
        elif i == 1:
            terms.append(Mul(Const(c), x))
        else:
            terms.append(Mul(Const(c), Pow(x, i)))
    if not terms:
        return Const(0)
    e = terms[0]
    for t in terms[1:]:
        e = combine(e, t)
    return e


_BIN_ALL = (Add, Sub, Mul, And, Or, Xor)
_BIN_ARITH = (Add, Sub, Mul)


def random_expr(
    rng: random.Random,
    depth: int,
    vars: tuple[str, ...] = ("x",),
    arithmetic_only: bool = False,
    allow_shr: bool = False,
    const_bits: int = 16,
) -> Expr:
    """Random compatible tree of depth at most ``depth``.

    Inverses are always of the form ``inv(1 + 2*e)`` so they never fail.
    """

    def leaf():
        if rng.random() < 0.6:
            return Var(rng.choice(vars))
        return Const(rng.getrandbits(rng.choice((2, 4, const_bits))))

    def gen(d):
        if d <= 0 or rng.random() < 0.2:
            return leaf()
        r = rng.random()
        if r < 0.55:
            op = rng.choice(_BIN_ARITH if arithmetic_only else _BIN_ALL)
            return op(gen(d - 1), gen(d - 1))
        choices = ["pow", "inv", "exp"]
        if not arithmetic_only:
            choices += ["not", "shl", "trunc"]
            if allow_shr:
                choices.append("shr")
        kind = rng.choice(choices)
        a = gen(d - 1)
        if kind == "pow":
            return Pow(a, rng.randint(2, 3))
        if kind == "inv":
            return InvOdd(Add(Const(1), Mul(Const(2), a)))
        if kind == "exp":
            return Exp1p2(a, gen(d - 1))
        if kind == "not":
            return Not(a)
        if kind == "shl":
            return Shl(a, rng.randint(1, 3))
        if kind == "trunc":
            return TruncMod(rng.randint(1, 8), a)
        return Shr(a, rng.randint(1, 2))

    return gen(depth)
