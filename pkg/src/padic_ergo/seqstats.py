"""Exact distribution diagnostics for the bit streams of maximal-period generators.

Two window conventions live side by side.  k-fullness looks at a bit string
as a cycle and counts every cyclic window.  The Q1 test looks at a finite
linear word, counts its ``N - k + 1`` overlapping windows and divides by
``N``.  Tuple keys are packed integers with the first bit in the low
position, the same order in which :mod:`genlib` emits bits.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import genlib
from . import verdicts as vd


def _bits(x) -> np.ndarray:
    if isinstance(x, str):
        if set(x) - {"0", "1"}:
            raise ValueError("bit strings may only contain 0 and 1")
        return np.frombuffer(x.encode(), dtype=np.uint8) - ord("0")
    return np.asarray(x, dtype=np.uint8)


def tuple_str(key: int, k: int) -> str:
    """Packed tuple key back to a left-to-right bit string."""
    return "".join(str((key >> t) & 1) for t in range(k))


def _window_keys(bits: np.ndarray, k: int) -> np.ndarray:
    """Packed keys of all linear windows of length ``k``."""
    m = len(bits) - k + 1
    keys = np.zeros(max(m, 0), dtype=np.int64)
    for t in range(k):
        keys |= bits[t : t + m].astype(np.int64) << t
    return keys


# ---------------------------------------------------------------------------
# uniformity of words


@dataclass
class UniformReport:
    n: int
    length: int
    passed: bool
    missing: list[int] = field(default_factory=list)
    overfull: list[int] = field(default_factory=list)


def strict_uniform(words: Sequence[int], n: int) -> UniformReport:
    """Every residue modulo ``2**n`` occurs equally often in the supplied periods."""
    size = 1 << n
    w = np.asarray(words, dtype=np.int64)
    if len(w) == 0 or len(w) % size:
        raise ValueError(f"length {len(w)} is not a positive multiple of 2**{n}")
    if w.min() < 0 or w.max() >= size:
        raise ValueError("word out of range")
    counts = np.bincount(w, minlength=size)
    r = len(w) // size
    missing = np.flatnonzero(counts < r).tolist()
    over = np.flatnonzero(counts > r).tolist()
    return UniformReport(n, len(w), not missing and not over, missing, over)


# ---------------------------------------------------------------------------
# cyclic k-fullness


@dataclass(frozen=True)
class BitCycle:
    bits: np.ndarray

    def __post_init__(self):
        b = _bits(self.bits)
        if len(b) == 0:
            raise ValueError("a bit cycle needs at least one bit")
        object.__setattr__(self, "bits", b)

    def __len__(self):
        return len(self.bits)

    def __getitem__(self, i: int) -> int:
        return int(self.bits[i % len(self.bits)])

    @classmethod
    def from_words(cls, words: Sequence[int], width: int) -> "BitCycle":
        return cls(genlib.words_to_bits(words, width))

    def __str__(self):
        return "".join(map(str, self.bits.tolist()))


@dataclass
class KFullReport:
    k: int
    length: int
    counts: np.ndarray  # indexed by packed tuple key
    expected: Fraction
    full: bool

    def count(self, tup: str) -> int:
        key = sum(int(c) << t for t, c in enumerate(tup))
        return int(self.counts[key])

    def as_dict(self) -> dict[str, int]:
        return {tuple_str(i, self.k): int(c) for i, c in enumerate(self.counts)}


def k_fullness(c: BitCycle | str | Sequence[int], k: int) -> KFullReport:
    """Cyclic counts of every ``k``-tuple; full iff all equal ``L / 2**k``."""
    if not isinstance(c, BitCycle):
        c = BitCycle(c)
    L = len(c)
    if k < 0 or (1 << k) > L:
        raise ValueError(f"k = {k} is too large for a cycle of length {L}")
    if k == 0:
        return KFullReport(0, L, np.array([L], dtype=np.int64), Fraction(L), True)
    ext = np.concatenate([c.bits, c.bits[: k - 1]])
    counts = np.bincount(_window_keys(ext, k), minlength=1 << k)
    expected = Fraction(L, 1 << k)
    full = expected.denominator == 1 and bool((counts == expected.numerator).all())
    return KFullReport(k, L, counts, expected, full)


# ---------------------------------------------------------------------------
# Knuth's Q1


@dataclass
class Q1Level:
    k: int
    max_deviation: Fraction
    worst: str
    passed: bool


@dataclass
class Q1Report:
    N: int
    levels: list[Q1Level]

    @property
    def threshold(self) -> float:
        return 1 / math.sqrt(self.N)

    @property
    def passed(self) -> bool:
        return all(lv.passed for lv in self.levels)

    @property
    def first_failure(self) -> Q1Level | None:
        return next((lv for lv in self.levels if not lv.passed), None)

    def level(self, k: int) -> Q1Level:
        return self.levels[k - 1]


def q1_check(word: str | Sequence[int], kmax: int | None = None) -> Q1Report:
    """``|nu(b)/N - 2**-k| <= 1/sqrt(N)`` for all ``k <= log2 N`` and all ``k``-tuples ``b``.

    ``nu`` counts overlapping occurrences in the linear word.  The
    comparison is exact: ``(nu * 2**k - N)**2 <= N * 4**k``.
    """
    bits = _bits(word)
    N = len(bits)
    if N < 2:
        raise ValueError("Q1 needs at least two bits")
    top = N.bit_length() - 1
    if kmax is not None:
        top = min(top, kmax)
    levels = []
    for k in range(1, top + 1):
        counts = np.bincount(_window_keys(bits, k), minlength=1 << k).astype(object)
        devs = [abs(int(v) * (1 << k) - N) for v in counts]
        worst = max(range(len(devs)), key=devs.__getitem__)
        dmax = devs[worst]
        levels.append(
            Q1Level(k, Fraction(dmax, N << k), tuple_str(worst, k), dmax * dmax <= N * (1 << (2 * k)))
        )
    return Q1Report(N, levels)


# ---------------------------------------------------------------------------
# the distribution theorem


@dataclass
class DistrReport:
    n: int
    width: int
    length: int
    uniform: bool
    kfull: KFullReport
    lower_full: bool
    q1: Q1Report

    @property
    def passed(self) -> bool:
        return self.uniform and self.kfull.full and self.lower_full and self.q1.passed


def word_cycle_report(words: Sequence[int], n: int, width: int | None = None) -> DistrReport:
    """k-fullness (k = word width) of the concatenated words, then Q1 on the same bits.

    ``words`` should be one full period of ``2**n`` words.
    """
    width = n if width is None else width
    words = list(words)
    uniform = len(words) == 1 << n and (
        strict_uniform(words, n).passed if width == n else _balanced_outputs(words, width)
    )
    cyc = BitCycle.from_words(words, width)
    rep = k_fullness(cyc, width)
    lower = all(k_fullness(cyc, k).full for k in range(1, width)) if rep.full else False
    return DistrReport(n, width, len(cyc), uniform, rep, lower, q1_check(cyc.bits))


def _balanced_outputs(words: Sequence[int], width: int) -> bool:
    counts = np.bincount(np.asarray(words, dtype=np.int64), minlength=1 << width)
    return bool((counts == counts[0]).all())


def distr_theorem_check(gen: genlib.Generator, seed: int = 0) -> DistrReport:
    """Full-period bit cycle of ``gen``: every tuple of the word width occurs equally often."""
    n = gen.n
    vd._require_budget(n << n, None)
    return word_cycle_report(gen.words(1 << n, seed), n, gen.width)


# ---------------------------------------------------------------------------
# coordinate sequences


@dataclass
class CoordReport:
    j: int
    bits: np.ndarray  # one minimal period, starting at the seed
    period: int
    half_negation: bool
    gamma: int

    @property
    def expected_period(self) -> int:
        return 1 << (self.j + 1)

    @property
    def ok(self) -> bool:
        return self.period == self.expected_period and self.half_negation


def _orbit(source, n: int, seed: int) -> list[int]:
    """``seed, f(seed), ...`` for ``2**n`` steps."""
    if isinstance(source, genlib.Generator):
        return [seed % (1 << n)] + source.states((1 << n) - 1, seed)
    if callable(source):
        f = source
    else:
        t = list(source)
        f = t.__getitem__
    out = [seed % (1 << n)]
    for _ in range((1 << n) - 1):
        out.append(int(f(out[-1])))
    return out


def minimal_period(s: np.ndarray) -> int:
    """Smallest ``p`` dividing ``len(s)`` with ``s`` invariant under rotation by ``p``."""
    L = len(s)
    for p in range(1, L + 1):
        if L % p == 0 and np.array_equal(s, np.roll(s, -p)):
            return p
    return L


def coordinate_sequence(source, j: int, n: int, seed: int = 0) -> CoordReport:
    """Digit ``j`` along the orbit of ``seed``; ``source`` is a generator, a callable or a table."""
    if not 0 <= j < n:
        raise ValueError(f"need 0 <= j < n, got j={j}, n={n}")
    orbit = np.asarray(_orbit(source, n, seed), dtype=np.int64)
    s = ((orbit >> j) & 1).astype(np.uint8)
    p = minimal_period(s)
    h = 1 << j
    half = bool(np.array_equal(s, np.roll(s, -h) ^ 1))
    gamma = sum(int(b) << i for i, b in enumerate(s[:h]))
    return CoordReport(j, s[:p], p, half, gamma)


@dataclass
class HalfPeriodRealization:
    n: int
    gammas: tuple[int, ...]
    orbit: list[int]
    table: list[int]
    transitive: vd.Verdict
    compatible: vd.Verdict
    recovered: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return self.transitive.holds and self.compatible.holds and self.recovered == self.gammas


def realize_half_periods(gammas: Sequence[int], n: int) -> HalfPeriodRealization:
    """Orbit whose digit ``j`` starts with the ``2**j`` bits of ``gammas[j]``.

    Digit 0 of ``z_i`` is ``gamma_0 + i mod 2``; digit ``j >= 1`` is digit
    ``i mod 2**j`` of ``gamma_j`` plus ``floor(i / 2**j)``, modulo 2.  The
    induced map sends each ``z_i`` to ``z_{i+1}``.
    """
    gammas = tuple(int(g) for g in gammas)
    if len(gammas) != n:
        raise ValueError(f"need exactly {n} half-periods")
    for j, g in enumerate(gammas):
        if not 0 <= g < 1 << (1 << j):
            raise ValueError(f"gamma_{j} = {g} outside 0 .. 2**{1 << j} - 1")
    size = 1 << n
    orbit = []
    for i in range(size):
        z = (gammas[0] + i) & 1
        for j in range(1, n):
            z |= (((gammas[j] >> (i % (1 << j))) + (i >> j)) & 1) << j
        orbit.append(z)
    table = [0] * size
    for i, z in enumerate(orbit):
        table[z] = orbit[(i + 1) % size]
    if sorted(orbit) != list(range(size)):
        raise AssertionError("constructed orbit is not a permutation")
    trans = vd.brute_transitive(table, n)
    compat = vd.brute_compatible(table, n)
    rec = tuple(coordinate_sequence(table, j, n, orbit[0]).gamma for j in range(n))
    return HalfPeriodRealization(n, gammas, orbit, table, trans, compat, rec)


def random_gammas(rng: random.Random, n: int) -> list[int]:
    return [rng.getrandbits(1 << j) for j in range(n)]


__all__ = [
    "tuple_str",
    "UniformReport",
    "strict_uniform",
    "BitCycle",
    "KFullReport",
    "k_fullness",
    "Q1Level",
    "Q1Report",
    "q1_check",
    "DistrReport",
    "word_cycle_report",
    "distr_theorem_check",
    "CoordReport",
    "minimal_period",
    "coordinate_sequence",
    "HalfPeriodRealization",
    "realize_half_periods",
    "random_gammas",
]
