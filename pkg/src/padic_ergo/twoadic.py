"""Machine words viewed as 2-adic integers truncated to a fixed precision.

A :class:`Word2` is a residue modulo ``2**n`` that remembers ``n``.  Every
operation wraps modulo ``2**n`` exactly like a processor register does, so a
word of precision ``n`` is the approximation ``z mod 2**n`` of some
2-adic integer ``z``.  Negative numbers are simply their two's complement
truncations (``-1`` is ``...111``), and fractions with odd denominators are
canonicalized through :func:`inv_odd`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "INFINITE",
    "PrecisionError",
    "Word2",
    "word",
    "add",
    "sub",
    "mul",
    "band",
    "bor",
    "bxor",
    "bnot",
    "shl",
    "shr",
    "digit",
    "ord2",
    "norm2",
    "inv_odd",
    "inv_odd_int",
    "exp1p2",
    "monna",
    "canonical",
]

#: Valuation of zero.  ``math.inf`` compares correctly with every int.
INFINITE = math.inf


class PrecisionError(ValueError):
    """Raised when words of different precisions are combined."""


@dataclass(frozen=True, slots=True)
class Word2:
    value: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"precision must be >= 1, got {self.n}")
        if not 0 <= self.value < (1 << self.n):
            raise ValueError(f"value {self.value} out of range for precision {self.n}")

    @property
    def mask(self) -> int:
        return (1 << self.n) - 1

    def bits(self) -> list[int]:
        """Base-2 digits, least significant first."""
        return [(self.value >> j) & 1 for j in range(self.n)]

    def reduce(self, k: int) -> "Word2":
        """The same 2-adic integer seen at the lower precision ``k``."""
        if not 1 <= k <= self.n:
            raise ValueError(f"cannot reduce precision {self.n} to {k}")
        return Word2(self.value & ((1 << k) - 1), k)

    def signed(self) -> int:
        """Two's complement reading of the word."""
        return self.value - (1 << self.n) if self.value >> (self.n - 1) else self.value

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __add__(self, other):
        return add(self, _coerce(other, self.n))

    def __radd__(self, other):
        return add(_coerce(other, self.n), self)

    def __sub__(self, other):
        return sub(self, _coerce(other, self.n))

    def __rsub__(self, other):
        return sub(_coerce(other, self.n), self)

    def __mul__(self, other):
        return mul(self, _coerce(other, self.n))

    def __rmul__(self, other):
        return mul(_coerce(other, self.n), self)

    def __and__(self, other):
        return band(self, _coerce(other, self.n))

    __rand__ = __and__

    def __or__(self, other):
        return bor(self, _coerce(other, self.n))

    __ror__ = __or__

    def __xor__(self, other):
        return bxor(self, _coerce(other, self.n))

    __rxor__ = __xor__

    def __invert__(self):
        return bnot(self)

    def __neg__(self):
        return sub(Word2(0, self.n), self)

    def __lshift__(self, m: int):
        return shl(self, m)

    def __rshift__(self, m: int):
        return shr(self, m)

    def __repr__(self):
        return f"Word2({self.value}, n={self.n})"


def canonical(c: int | Fraction, n: int) -> int:
    """Reduce an integer or a fraction with odd denominator modulo ``2**n``."""
    m = 1 << n
    if isinstance(c, Fraction):
        if c.denominator % 2 == 0:
            raise ValueError(f"{c} has an even denominator and is not a 2-adic integer")
        return (c.numerator * pow(c.denominator, -1, m)) % m
    return int(c) % m


def word(c: int | Fraction, n: int) -> Word2:
    """Build a word from an integer (possibly negative) or an odd-denominator fraction."""
    return Word2(canonical(c, n), n)


def _coerce(x, n: int) -> Word2:
    if isinstance(x, Word2):
        return x
    if isinstance(x, (int, Fraction)):
        return word(x, n)
    return NotImplemented


_new = object.__new__
_set_value = Word2.value.__set__  # slot descriptors bypass the frozen __setattr__
_set_n = Word2.n.__set__


def _raw(value: int, n: int) -> Word2:
    # results of the operations below are already reduced, so skip validation
    w = _new(Word2)
    _set_value(w, value)
    _set_n(w, n)
    return w


def _check(a: Word2, b: Word2) -> int:
    if a.n != b.n:
        raise PrecisionError(f"precision mismatch: {a.n} vs {b.n}")
    return a.n


def add(a: Word2, b: Word2) -> Word2:
    n = a.n
    if b.n != n:
        _check(a, b)
    return _raw((a.value + b.value) & ((1 << n) - 1), n)


def sub(a: Word2, b: Word2) -> Word2:
    n = a.n
    if b.n != n:
        _check(a, b)
    return _raw((a.value - b.value) & ((1 << n) - 1), n)


def mul(a: Word2, b: Word2) -> Word2:
    n = a.n
    if b.n != n:
        _check(a, b)
    return _raw((a.value * b.value) & ((1 << n) - 1), n)


def band(a: Word2, b: Word2) -> Word2:
    n = a.n
    if b.n != n:
        _check(a, b)
    return _raw(a.value & b.value, n)


def bor(a: Word2, b: Word2) -> Word2:
    n = a.n
    if b.n != n:
        _check(a, b)
    return _raw(a.value | b.value, n)


def bxor(a: Word2, b: Word2) -> Word2:
    n = a.n
    if b.n != n:
        _check(a, b)
    return _raw(a.value ^ b.value, n)


def bnot(a: Word2) -> Word2:
    return _raw(~a.value & ((1 << a.n) - 1), a.n)


def shl(a: Word2, m: int) -> Word2:
    if m < 0:
        raise ValueError("shift amount must be nonnegative")
    return _raw((a.value << m) & a.mask, a.n)


def shr(a: Word2, m: int) -> Word2:
    if m < 0:
        raise ValueError("shift amount must be nonnegative")
    return _raw(a.value >> m, a.n)


def digit(a: Word2, j: int) -> int:
    if not 0 <= j < a.n:
        raise IndexError(f"digit index {j} outside 0..{a.n - 1}")
    return (a.value >> j) & 1


def ord2(a: Word2 | int) -> int | float:
    """2-adic valuation: index of the lowest set bit, ``INFINITE`` for zero.

    Plain ints are accepted too, which is what the exact big-integer code
    (interpolation coefficients, sigma tables) needs.
    """
    v = a.value if isinstance(a, Word2) else int(a)
    if v == 0:
        return INFINITE
    return (v & -v).bit_length() - 1


def norm2(a: Word2 | int) -> Fraction:
    """2-adic absolute value ``2**-ord2``; zero maps to 0."""
    o = ord2(a)
    return Fraction(0) if o == INFINITE else Fraction(1, 1 << o)


def inv_odd_int(v: int, n: int) -> int:
    """Inverse of an odd ``v`` modulo ``2**n`` by Newton lifting.

    Each step ``y <- y*(2 - v*y)`` doubles the number of correct low bits;
    ``y = v`` is already correct modulo 8 because odd squares are 1 mod 8.
    """
    if v % 2 == 0:
        raise ValueError(f"{v} is even and has no inverse modulo 2**{n}")
    mask = (1 << n) - 1
    y = v & mask
    good = 3
    while good < n:
        y = (y * (2 - v * y)) & mask
        good *= 2
    return y & mask


def inv_odd(a: Word2) -> Word2:
    return Word2(inv_odd_int(a.value, a.n), a.n)


def exp1p2(u: Word2, v: Word2) -> Word2:
    """``(1 + 2u) ** v`` modulo ``2**n``.

    The exponent is the integer value of ``v``; this is exact because the
    multiplicative order of ``1 + 2u`` modulo ``2**n`` divides ``2**(n-1)``.
    """
    n = _check(u, v)
    base = (1 + 2 * u.value) & u.mask
    return Word2(pow(base, v.value, 1 << n), n)


def monna(a: Word2) -> Fraction:
    """Bit-reversing embedding into [0, 1): digit ``i`` gets weight ``2**-(i+1)``."""
    num = 0
    for i in range(a.n):
        if (a.value >> i) & 1:
            num |= 1 << (a.n - 1 - i)
    return Fraction(num, 1 << a.n)
