"""Criteria for measure preservation and ergodicity, and the brute-force oracles.

Every checker returns a :class:`Verdict`.  A failing verdict carries a witness
that can be replayed by evaluating the expression again: a colliding pair, a
premature return to the start point, or a violated congruence together with
the residues it was computed from.

The brute-force oracles walk the induced map on ``Z/p^n``.  The closed-form
criteria (interpolation coefficients, algebraic normal form, derivatives,
the special generator families) are validated against them in the tests.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import texpr as tx
from .texpr import Expr
from .twoadic import ord2

DEFAULT_BUDGET = 1 << 24
WITNESS_CYCLE_LIMIT = 1 << 12


class BudgetError(ValueError):
    """The requested enumeration is larger than the configured budget."""


def budget(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    env = os.environ.get("PADIC_ERGO_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


def _require_budget(size: int, limit: int | None) -> None:
    b = budget(limit)
    if size > b:
        raise BudgetError(f"enumeration of {size} states exceeds the budget of {b}")


class Property(str, Enum):
    MEASURE_PRESERVING = "MeasurePreserving"
    ERGODIC = "Ergodic"
    BALANCED = "Balanced"


class Result(str, Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    NOT_APPLICABLE = "NotApplicable"


MP = Property.MEASURE_PRESERVING
ERG = Property.ERGODIC


@dataclass
class Verdict:
    criterion: str
    property: Property
    result: Result
    witness: dict = field(default_factory=dict)
    reference: str = ""

    @property
    def holds(self) -> bool:
        return self.result is Result.HOLDS

    @property
    def fails(self) -> bool:
        return self.result is Result.FAILS

    def __bool__(self):
        return self.holds

    def to_json(self) -> dict:
        return {
            "name": self.criterion,
            "property": self.property.value,
            "result": self.result.value,
            "witness": _elide(self.witness),
            "paper_ref": self.reference,
        }


def _elide(w):
    if isinstance(w, dict):
        out = {}
        for k, v in w.items():
            if isinstance(v, (list, tuple)) and len(v) > WITNESS_CYCLE_LIMIT:
                digest = hashlib.sha256(",".join(map(str, v)).encode()).hexdigest()
                out[k] = {"elided": True, "length": len(v), "sha256": digest}
            else:
                out[k] = _elide(v)
        return out
    if isinstance(w, (list, tuple)):
        return [_elide(v) for v in w]
    if isinstance(w, Enum):
        return w.value
    if isinstance(w, Fraction):
        return str(w)
    if isinstance(w, float) and math.isinf(w):
        return "inf"
    if isinstance(w, np.integer):
        return int(w)
    return w


def report(expression: str, precision: int, verdicts: Iterable[Verdict]) -> dict:
    """JSON-ready report with a fixed key order."""
    return {
        "schema": 1,
        "expression": expression,
        "precision": precision,
        "criteria": [v.to_json() for v in verdicts],
    }


def _expr(f: Expr | str) -> Expr:
    return tx.parse(f) if isinstance(f, str) else f


def _var(e: Expr) -> str:
    vs = tx.free_vars(e)
    if len(vs) > 1:
        raise ValueError(f"expected a univariate expression, found variables {vs}")
    return vs[0] if vs else "x"


MapLike = Expr | str | Sequence[int] | np.ndarray


def _induced(f: MapLike, n: int, p: int, limit: int | None) -> np.ndarray:
    """The table of ``f`` on ``0 .. p**n - 1``; precomputed tables pass through."""
    size = p**n
    _require_budget(size, limit)
    if isinstance(f, (Expr, str)):
        e = _expr(f)
        if p != 2 and not tx.is_arithmetic(e):
            raise ValueError("odd p needs an arithmetic expression")
        return tx.table(e, n, _var(e), p)
    t = np.asarray(f)
    if t.shape != (size,):
        raise ValueError(f"table has shape {t.shape}, expected ({size},)")
    return t


# ---------------------------------------------------------------------------
# brute-force oracles


def brute_bijective(f: MapLike, n: int, p: int = 2, limit: int | None = None) -> Verdict:
    """Injectivity of ``x -> f(x) mod p**n``; a colliding pair is the witness."""
    t = _induced(f, n, p, limit)
    order = np.argsort(t, kind="stable")
    s = t[order]
    dup = np.flatnonzero(s[1:] == s[:-1])
    if dup.size == 0:
        return Verdict("brute_bijective", MP, Result.HOLDS, {"modulus": p**n}, "bijective modulo p^n")
    i = int(dup[0])
    x1, x2 = int(order[i]), int(order[i + 1])
    return Verdict(
        "brute_bijective",
        MP,
        Result.FAILS,
        {"modulus": p**n, "collision": [x1, x2], "value": int(s[i])},
        "bijective modulo p^n",
    )


def walk_cycle(t: Sequence[int], start: int = 0) -> list[int]:
    """Orbit of ``start`` under the table ``t`` up to the first repeated point."""
    seen = bytearray(len(t))
    orbit = []
    x = start
    while not seen[x]:
        seen[x] = 1
        orbit.append(x)
        x = t[x]
    return orbit


def brute_transitive(f: MapLike, n: int, p: int = 2, limit: int | None = None) -> Verdict:
    """Single-cycle test: iterate from 0 and count the steps until a repeat.

    On success the witness is the whole cycle starting at 0.  On failure it
    is the point where the orbit closes and the number of distinct residues
    seen before that.
    """
    t = _induced(f, n, p, limit).tolist()
    size = len(t)
    orbit = walk_cycle(t, 0)
    closes_at = t[orbit[-1]]
    ref = "single cycle modulo p^n"
    if len(orbit) == size and closes_at == 0:
        return Verdict("brute_transitive", ERG, Result.HOLDS, {"modulus": size, "cycle": orbit}, ref)
    return Verdict(
        "brute_transitive",
        ERG,
        Result.FAILS,
        {"modulus": size, "orbit_length": len(orbit), "returns_to": closes_at, "from": orbit[-1]},
        ref,
    )


def brute_compatible(f: MapLike, n: int, limit: int | None = None) -> Verdict:
    """Whether ``f(x) mod 2**r`` only depends on ``x mod 2**r`` for every ``r <= n``."""
    t = np.asarray(_induced(f, n, 2, limit), dtype=np.uint64)
    xs = np.arange(1 << n, dtype=np.uint64)
    for r in range(1, n):
        m = np.uint64((1 << r) - 1)
        bad = np.flatnonzero((t & m) != (t[xs & m] & m))
        if bad.size:
            u = int(bad[0])
            return Verdict(
                "brute_compatible",
                MP,
                Result.FAILS,
                {"r": r, "pair": [u, u & ((1 << r) - 1)]},
                "1-Lipschitz",
            )
    return Verdict("brute_compatible", MP, Result.HOLDS, {"modulus": 1 << n}, "1-Lipschitz")


def brute_balanced(
    F: Expr | str | Sequence[Expr | str],
    n: int,
    variables: Sequence[str] | None = None,
    limit: int | None = None,
) -> Verdict:
    """Every output tuple modulo ``2**n`` has ``2**(n*(s-t))`` preimages."""
    outs = [_expr(F)] if isinstance(F, (Expr, str)) else [_expr(g) for g in F]
    if variables is None:
        variables = sorted({v for g in outs for v in tx.free_vars(g)})
    s, t = len(variables), len(outs)
    if t > s:
        raise ValueError(f"{t} outputs from {s} inputs cannot be balanced")
    _require_budget(1 << (n * s), limit)
    mask = np.uint64((1 << n) - 1)
    idx = np.arange(1 << (n * s), dtype=np.uint64)
    env = {v: (idx >> np.uint64(n * k)) & mask for k, v in enumerate(variables)}
    key = np.zeros_like(idx)
    for k, g in enumerate(outs):
        key |= tx.evaluate_array(g, env, n) << np.uint64(n * k)
    counts = np.bincount(key.astype(np.int64), minlength=1 << (n * t))
    expected = 1 << (n * (s - t))
    bad = np.flatnonzero(counts != expected)
    ref = "equal number of preimages"
    if bad.size == 0:
        return Verdict("brute_balanced", Property.BALANCED, Result.HOLDS, {"preimages": expected}, ref)
    b = int(bad[0])
    output = [(b >> (n * k)) & int(mask) for k in range(t)]
    return Verdict(
        "brute_balanced",
        Property.BALANCED,
        Result.FAILS,
        {"output": output, "count": int(counts[b]), "expected": expected},
        ref,
    )


# ---------------------------------------------------------------------------
# interpolation (Mahler) coefficients


@dataclass(frozen=True)
class MahlerCoeffs:
    n: int
    coeffs: tuple[int, ...]

    def __getitem__(self, i: int) -> int:
        return self.coeffs[i]

    def __len__(self):
        return len(self.coeffs)

    @property
    def m(self) -> int:
        return len(self.coeffs) - 1


def mahler_coeffs(f: Expr | str, n: int, m: int | None = None, limit: int | None = None) -> MahlerCoeffs:
    """``a_i = Δ^i f(0) mod 2**n`` for ``i <= m`` (default ``m = 2**n - 1``)."""
    e = _expr(f)
    if m is None:
        m = (1 << n) - 1
    if not 0 <= m < (1 << n):
        raise ValueError(f"m must lie in 0 .. 2**n - 1, got {m}")
    _require_budget((m + 1) * (m + 2) // 2, limit)
    mask = np.uint64((1 << n) - 1)
    vals = tx.evaluate_array(e, {_var(e): np.arange(m + 1, dtype=np.uint64)}, n)
    out = [int(vals[0])]
    a = vals
    for _ in range(m):
        a = (a[1:] - a[:-1]) & mask
        out.append(int(a[0]))
    return MahlerCoeffs(n, tuple(out))


def _mahler_exponent(i: int, prop: Property) -> int:
    """Power of 2 that must divide ``a_i`` (or ``a_i - 1`` for the leading terms)."""
    if prop is ERG:
        if i == 0:
            return 1
        if i == 1:
            return 2
        return (i + 1).bit_length()  # floor(log2(i+1)) + 1
    if i == 0:
        return 0
    if i == 1:
        return 1
    return i.bit_length()  # floor(log2 i) + 1


def _check_mahler(c: MahlerCoeffs, prop: Property) -> Verdict:
    name = "mahler_ergodic" if prop is ERG else "mahler_mp"
    ref = "interpolation series criterion"
    undecided = 0
    for i, a in enumerate(c.coeffs):
        req = _mahler_exponent(i, prop)
        if req == 0:
            continue
        if req > c.n:
            undecided += 1
        k = min(req, c.n)
        target = 1 if i == 1 or (i == 0 and prop is ERG) else 0
        if (a - target) % (1 << k):
            return Verdict(
                name,
                prop,
                Result.FAILS,
                {"index": i, "coefficient": a, "modulus": 1 << k, "expected_residue": target % (1 << k)},
                ref,
            )
    return Verdict(
        name,
        prop,
        Result.HOLDS,
        {
            "checked_up_to": c.m,
            "precision": c.n,
            "truncated_moduli": undecided,
            "complete": c.m == (1 << c.n) - 1,
        },
        ref,
    )


def check_mahler_ergodic(c: MahlerCoeffs) -> Verdict:
    """Ergodicity conditions on the interpolation coefficients.

    Moduli larger than ``2**n`` are truncated to ``2**n``; the number of such
    indices is reported as ``truncated_moduli``.  With all ``2**n``
    coefficients this is equivalent to transitivity modulo ``2**n``.
    """
    return _check_mahler(c, ERG)


def check_mahler_mp(c: MahlerCoeffs) -> Verdict:
    return _check_mahler(c, MP)


# ---------------------------------------------------------------------------
# polynomials


def stirling2(k: int) -> list[list[int]]:
    """Rows ``S(i, j)`` of Stirling numbers of the second kind for ``i <= k``."""
    S = [[0] * (k + 1) for _ in range(k + 1)]
    S[0][0] = 1
    for i in range(1, k + 1):
        for j in range(1, i + 1):
            S[i][j] = j * S[i - 1][j] + S[i - 1][j - 1]
    return S


def monomial_to_factorial(coeffs: Sequence[int | Fraction]) -> list[int | Fraction]:
    """Coefficients in the basis ``x(x-1)...(x-j+1)`` from ordinary monomial ones.

    Uses ``x**k = sum_j S(k, j) x^(j falling)``.
    """
    d = len(coeffs) - 1
    if d < 0:
        return []
    S = stirling2(d)
    return [sum(coeffs[k] * S[k][j] for k in range(j, d + 1)) for j in range(d + 1)]


def factorial_to_monomial(c: Sequence[int]) -> list[int]:
    """Inverse of :func:`monomial_to_factorial` (signed Stirling numbers of the first kind)."""
    d = len(c) - 1
    out = [0] * (d + 1)
    falling = [1]  # coefficients of x(x-1)...(x-j+1)
    for j in range(d + 1):
        for k, v in enumerate(falling):
            out[k] += c[j] * v
        nxt = [0] * (len(falling) + 1)
        for k, v in enumerate(falling):
            nxt[k + 1] += v
            nxt[k] -= j * v
        falling = nxt
    return out


def check_poly_factorial(c: Sequence[int], prop: Property = ERG) -> Verdict:
    """Congruences on the descending-factorial coefficients ``c_0 .. c_d``.

    Only the low bits of ``c_0 .. c_3`` matter; higher coefficients are
    always divisible by enough powers of 2.
    """
    c = list(c) + [0] * max(0, 4 - len(c))
    if prop is ERG:
        conds = [(0, 2, 1), (1, 4, 1), (2, 2, 0), (3, 4, 0)]
    else:
        conds = [(1, 2, 1), (2, 2, 0), (3, 2, 0)]
    for i, mod, res in conds:
        if c[i] % mod != res:
            return Verdict(
                "poly_factorial",
                prop,
                Result.FAILS,
                {"index": i, "coefficient": c[i], "modulus": mod, "expected_residue": res},
                "descending factorial basis congruences",
            )
    return Verdict(
        "poly_factorial", prop, Result.HOLDS, {"coefficients": c[:4]}, "descending factorial basis congruences"
    )


def _poly_table(coeffs: Sequence[int], q: int) -> list[int]:
    out = []
    for x in range(q):
        v = 0
        for a in reversed(coeffs):
            v = (v * x + a) % q
        out.append(v)
    return out


def check_poly_lowmod(coeffs: Sequence[int], p: int = 2, prop: Property = ERG) -> Verdict:
    """Integer polynomial criterion: the whole question is decided modulo ``p**2`` or ``p**3``."""
    if prop is ERG:
        k = 3 if p in (2, 3) else 2
        inner = brute_transitive(_poly_table(coeffs, p**k), k, p)
    else:
        k = 2
        inner = brute_bijective(_poly_table(coeffs, p**k), k, p)
    return Verdict(
        "poly_lowmod",
        prop,
        inner.result,
        {"p": p, "modulus": p**k, **{k_: v for k_, v in inner.witness.items() if k_ != "modulus"}},
        "integer polynomial decided modulo p^2 or p^3",
    )


def transitive_mod(coeffs: Sequence[int], q: int, limit: int | None = None) -> Verdict:
    """Single-cycle test of an integer polynomial modulo an arbitrary ``q``."""
    _require_budget(q, limit)
    t = _poly_table(coeffs, q)
    orbit = walk_cycle(t, 0)
    ok = len(orbit) == q and t[orbit[-1]] == 0
    return Verdict(
        "transitive_mod",
        ERG,
        Result.HOLDS if ok else Result.FAILS,
        {"modulus": q, "orbit_length": len(orbit)},
        "single cycle modulo q",
    )


def _qpoly_value(coeffs: Sequence[Fraction], x: int) -> Fraction:
    v = Fraction(0)
    for a in reversed(coeffs):
        v = v * x + a
    return v


def check_qpoly(coeffs: Sequence[int | Fraction], p: int = 2, prop: Property = ERG) -> Verdict:
    """Rational-coefficient polynomial over ``Z_p``.

    The polynomial is evaluated exactly on ``0 .. p**L - 1`` with
    ``L = floor(log_p deg) + 3``.  Compatibility of the resulting map is
    verified on that whole domain, not assumed.
    """
    cs = [Fraction(a) for a in coeffs]
    while len(cs) > 1 and cs[-1] == 0:
        cs.pop()
    deg = len(cs) - 1
    lg = 0  # floor(log_p deg), with constants treated as degree 1
    while p ** (lg + 1) <= deg:
        lg += 1
    L = lg + 3
    q = p**L
    ref = "rational polynomial decided modulo p^L"
    vals = []
    for x in range(q):
        v = _qpoly_value(cs, x)
        if v.denominator % p == 0:
            return Verdict(
                "qpoly", prop, Result.NOT_APPLICABLE, {"reason": "non-integer-valued", "x": x, "value": str(v)}, ref
            )
        vals.append(v.numerator * pow(v.denominator, -1, q) % q)
    compatible = True
    for r in range(1, L):
        pr = p**r
        for x in range(q):
            if (vals[x] - vals[x % pr]) % pr:
                compatible = False
                break
        if not compatible:
            break
    inner = brute_transitive(vals, L, p) if prop is ERG else brute_bijective(vals, L, p)
    ok = compatible and inner.holds
    return Verdict(
        "qpoly",
        prop,
        Result.HOLDS if ok else Result.FAILS,
        {"L": L, "modulus": q, "compatible_on_domain": compatible, "degree": deg, "inner": inner.result.value},
        ref,
    )


def check_rivest(coeffs: Sequence[int], prop: Property = MP, xor: bool = False) -> Verdict:
    """Parity test for permutation polynomials modulo ``2**n`` (n > 1).

    ``xor=True`` names the variant whose monomials are combined with XOR;
    the conditions are the same.
    """
    a = list(coeffs) + [0, 0]
    even = sum(a[2::2])
    odd = sum(a[3::2])
    name = "rivest_xor" if xor else "rivest"
    ref = "a1 odd, even-index sum even, odd-index sum even"
    conds = {"a1_odd": a[1] % 2 == 1, "even_sum_even": even % 2 == 0, "odd_sum_even": odd % 2 == 0}
    ok = all(conds.values())
    return Verdict(name, prop, Result.HOLDS if ok else Result.FAILS, conds, ref)


# ---------------------------------------------------------------------------
# algebraic normal form


def check_anf_ergodic(f: Expr | str, imax: int, prop: Property = ERG) -> Verdict:
    """Coordinate functions must read ``chi_i + phi_i(chi_0 .. chi_{i-1})``.

    For ergodicity ``phi_0 = 1`` and every later ``phi_i`` must contain the
    full monomial ``chi_0 ... chi_{i-1}``.  On failure the brute-force
    verdict at precision ``i + 1`` is attached for replay.
    """
    e = _expr(f)
    if imax > tx.ANF_CAP:
        raise ValueError(f"imax {imax} exceeds the ANF cap {tx.ANF_CAP}")
    name = "anf_ergodic" if prop is ERG else "anf_mp"
    ref = "coordinate Boolean functions in algebraic normal form"
    if not tx.classify(e):
        return Verdict(name, prop, Result.NOT_APPLICABLE, {"reason": "not structurally compatible"}, ref)
    var = _var(e)
    vals = tx.table(e, imax + 1, var)
    for i in range(imax + 1):
        sub = vals[: 1 << (i + 1)]
        anf = tx.anf_from_truth_table((sub >> np.uint64(i)) & np.uint64(1), i + 1)
        lead = 1 << i
        reason = None
        if lead not in anf or any(m >> i & 1 and m != lead for m in anf.monomials):
            reason = "not of the form chi_i + phi_i"
        elif prop is ERG and (lead - 1) not in anf:
            reason = "phi_0 != 1" if i == 0 else "phi_i lacks the full monomial"
        if reason:
            inner = brute_transitive(e, i + 1) if prop is ERG else brute_bijective(e, i + 1)
            return Verdict(
                name,
                prop,
                Result.FAILS,
                {"coordinate": i, "anf": str(anf), "reason": reason, "replay": inner.witness},
                ref,
            )
    return Verdict(name, prop, Result.HOLDS, {"coordinates": imax + 1}, ref)


# ---------------------------------------------------------------------------
# derivatives modulo 2**k


@dataclass(frozen=True)
class Derivative:
    value: int
    k: int
    K: int
    stable: bool


def derivative_array(f: Expr | str, us: np.ndarray, k: int, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized candidate derivatives and stability flags at the points ``us``."""
    e = _expr(f)
    var = _var(e)
    n = k + K + 1
    if n > 64:
        raise ValueError("precision exhausted: k + K + 1 must be at most 64")
    mask = np.uint64((1 << n) - 1)
    us = np.asarray(us, dtype=np.uint64) & mask

    def ev(x):
        return tx.evaluate_array(e, {var: x & mask}, n)

    f0 = ev(us)
    d1 = (ev(us + np.uint64(1 << K)) - f0) & np.uint64((1 << (k + K)) - 1)
    d2 = (ev(us + np.uint64(1 << (K + 1))) - f0) & mask
    low1 = d1 & np.uint64((1 << K) - 1)
    low2 = d2 & np.uint64((1 << (K + 1)) - 1)
    v1 = (d1 >> np.uint64(K)) & np.uint64((1 << k) - 1)
    v2 = (d2 >> np.uint64(K + 1)) & np.uint64((1 << k) - 1)
    stable = (low1 == 0) & (low2 == 0) & (v1 == v2)
    return v1, stable


def numeric_derivative_mod2k(f: Expr | str, u, k: int, K: int, n: int | None = None) -> Derivative:
    """Candidate derivative ``d mod 2**k`` from ``f(u + 2**K) - f(u) = d * 2**K``.

    The value is recomputed with step ``2**(K+1)``; disagreement marks the
    result unstable.  When ``u`` is a word its precision must leave room for
    ``k + K`` bits.
    """
    prec = getattr(u, "n", n)
    if prec is not None and k + K > prec:
        raise ValueError(f"precision exhausted: k + K = {k + K} > {prec}")
    v, s = derivative_array(f, np.array([int(u)], dtype=np.uint64), k, K)
    return Derivative(int(v[0]), k, K, bool(s[0]))


def estimate_threshold(f: Expr | str, k: int, kmax: int = 20) -> int | None:
    """Smallest ``K`` at which the derivative mod ``2**k`` looks uniform.

    Tested on all ``u < 2**(K+6)``: the steps ``2**K`` and ``2**(K+1)`` must
    agree, and the derivative must be periodic with period ``2**K``.  This is
    evidence, not proof.
    """
    e = _expr(f)
    for K in range(1, kmax + 1):
        if k + K + 1 > 64 or K + 6 > 24:
            break
        us = np.arange(1 << (K + 6), dtype=np.uint64)
        v, s = derivative_array(e, us, k, K)
        if not s.all():
            continue
        if np.array_equal(v, v[us & np.uint64((1 << K) - 1)]):
            return K
    return None


def check_ergodic_via_derivative(f: Expr | str, N2: int | None = None, limit: int | None = None) -> Verdict:
    """Ergodic iff transitive modulo ``2**(N2 + 2)``, given the uniformity threshold ``N2``."""
    e = _expr(f)
    heuristic = N2 is None
    if heuristic:
        N2 = estimate_threshold(e, 2)
        if N2 is None:
            return Verdict(
                "derivative_ergodic",
                ERG,
                Result.NOT_APPLICABLE,
                {"reason": "no uniform derivative modulo 4 found", "heuristic": True},
                "uniformly differentiable modulo 4",
            )
    inner = brute_transitive(e, N2 + 2, limit=limit)
    return Verdict(
        "derivative_ergodic",
        ERG,
        inner.result,
        {"N2": N2, "heuristic": heuristic, "modulus": 1 << (N2 + 2), "inner": inner.witness},
        "uniformly differentiable modulo 4",
    )


def check_mp_via_derivative(f: Expr | str, N1: int | None = None, limit: int | None = None) -> Verdict:
    """Measure preserving iff bijective modulo ``2**(N1 + 1)``, given the threshold ``N1``."""
    e = _expr(f)
    heuristic = N1 is None
    if heuristic:
        N1 = estimate_threshold(e, 1)
        if N1 is None:
            return Verdict(
                "derivative_mp",
                MP,
                Result.NOT_APPLICABLE,
                {"reason": "no uniform derivative modulo 2 found", "heuristic": True},
                "uniformly differentiable modulo 2",
            )
    inner = brute_bijective(e, N1 + 1, limit=limit)
    return Verdict(
        "derivative_mp",
        MP,
        inner.result,
        {"N1": N1, "heuristic": heuristic, "modulus": 1 << (N1 + 1), "inner": inner.witness},
        "uniformly differentiable modulo 2",
    )


def partial_derivatives_mod2(F: Sequence[Expr | str], variables: Sequence[str], point: Sequence[int], K: int) -> list[list[int]]:
    """Numeric Jacobian modulo 2 of a multivariate map at one point.

    Entry ``[i][j]`` is ``(F_i(u + 2**K e_j) - F_i(u)) / 2**K mod 2``.
    """
    n = K + 2
    mask = (1 << n) - 1
    base = {v: int(p) & mask for v, p in zip(variables, point)}
    outs = [_expr(g) for g in F]
    jac = []
    for g in outs:
        row = []
        f0 = tx.evaluate(g, base, n).value
        for v in variables:
            env = dict(base)
            env[v] = (env[v] + (1 << K)) & mask
            diff = (tx.evaluate(g, env, n).value - f0) & mask
            row.append((diff >> K) & 1)
        jac.append(row)
    return jac


# ---------------------------------------------------------------------------
# special generator families


def xor_affine_expr(a: int, pairs: Sequence[tuple[int, int]]) -> Expr:
    """``a + sum a_i * (x XOR b_i)``."""
    x = tx.Var("x")
    e: Expr = tx.Const(int(a))
    for ai, bi in pairs:
        e = tx.Add(e, tx.Mul(tx.Const(int(ai)), tx.Xor(x, tx.Const(int(bi)))))
    return e


def check_special_xor_affine(a: int, pairs: Sequence[tuple[int, int]], prop: Property = ERG) -> Verdict:
    """Decided modulo 4 (ergodicity) or modulo 2 (measure preservation)."""
    e = xor_affine_expr(a, pairs)
    inner = brute_transitive(e, 2) if prop is ERG else brute_bijective(e, 1)
    return Verdict(
        "xor_affine",
        prop,
        inner.result,
        {"expression": tx.pretty(e), **inner.witness},
        "a + sum a_i (x xor b_i) decided modulo 4 or 2",
    )


def digit_weighted_expr(a: int, weights: Sequence[int]) -> Expr:
    """``a + sum a_i * delta_i(x)``."""
    x = tx.Var("x")
    e: Expr = tx.Const(int(a))
    for i, w in enumerate(weights):
        e = tx.Add(e, tx.Mul(tx.Const(int(w)), tx.Digit(i, x)))
    return e


def check_special_digit_weighted(a: int, weights: Sequence[int], prop: Property = ERG) -> Verdict:
    """Coefficient test for ``a + sum a_i delta_i(x)`` at precision ``len(weights)``.

    Every weight must have valuation exactly its index; for ergodicity the
    constant is odd and ``a_0 = 1 mod 4``.
    """
    n = len(weights)
    m = 1 << n
    ws = [w % m for w in weights]
    ref = "a + sum a_i delta_i(x) with ord a_i = i"

    def fail(**w):
        return Verdict("digit_weighted", prop, Result.FAILS, w, ref)

    if prop is ERG:
        if a % 2 != 1:
            return fail(reason="constant is even", a=a)
        if n >= 1 and ws[0] % min(4, m) != 1 % min(4, m):
            return fail(index=0, weight=ws[0], reason="a_0 != 1 mod 4")
        start = 1
    else:
        start = 0
    for i in range(start, n):
        if ord2(ws[i]) != i:
            return fail(index=i, weight=ws[i], valuation=ord2(ws[i]), reason="valuation differs from index")
    return Verdict("digit_weighted", prop, Result.HOLDS, {"precision": n}, ref)


def xor_add_cascade_expr(c: Sequence[int], d: Sequence[int]) -> Expr:
    """``(...((x + c_0) XOR d_0) + ... + c_m) XOR d_m``."""
    if len(c) != len(d):
        raise ValueError("c and d must have equal length")
    e: Expr = tx.Var("x")
    for ci, di in zip(c, d):
        e = tx.Xor(tx.Add(e, tx.Const(int(ci))), tx.Const(int(di)))
    return e


def check_xor_add_cascade(c: Sequence[int], d: Sequence[int], prop: Property = ERG) -> Verdict:
    e = xor_add_cascade_expr(c, d)
    inner = brute_transitive(e, 2) if prop is ERG else brute_bijective(e, 1)
    return Verdict(
        "xor_add_cascade",
        prop,
        inner.result,
        {"expression": tx.pretty(e), **inner.witness},
        "add/xor cascade decided modulo 4",
    )


# ---------------------------------------------------------------------------
# coefficients of the digit functions in the binomial basis


def sigma_closed(i: int, j: int) -> int:
    """Closed form of ``Δ^j delta_i(0)``."""
    if j == 0:
        return 0
    sign = 1 if j % 2 else -1  # (-1)**(j+1)
    if i == 0:
        return sign * (1 << (j - 1))
    s = 0
    k = 1
    while k * (1 << i) - 1 <= j - 1:
        s += (-1) ** k * math.comb(j - 1, k * (1 << i) - 1)
        k += 1
    return sign * s


def sigma_difference(i: int, j: int) -> int:
    """``Δ^j delta_i(0)`` summed directly from the digit values."""
    return sum((-1) ** (j - k) * math.comb(j, k) * ((k >> i) & 1) for k in range(j + 1))


@dataclass(frozen=True)
class SigmaTable:
    I: int
    J: int
    closed: tuple[tuple[int, ...], ...]
    difference: tuple[tuple[int, ...], ...]

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.closed[i][j]

    @property
    def agree(self) -> bool:
        return self.closed == self.difference

    def mismatches(self) -> list[tuple[int, int]]:
        return [
            (i, j)
            for i in range(self.I + 1)
            for j in range(self.J + 1)
            if self.closed[i][j] != self.difference[i][j]
        ]


def sigma_table(I: int, J: int) -> SigmaTable:
    closed = tuple(tuple(sigma_closed(i, j) for j in range(J + 1)) for i in range(I + 1))
    diff = tuple(tuple(sigma_difference(i, j) for j in range(J + 1)) for i in range(I + 1))
    return SigmaTable(I, J, closed, diff)


@dataclass(frozen=True)
class BoundViolation:
    part: str
    s: int
    k: int
    valuation: float
    required: str


def sigma_bound_violations(t: SigmaTable) -> list[BoundViolation]:
    """Check the three valuation bounds for ``s >= 1`` over the whole table.

    (i)   ``ord sigma_s(k) >= floor(log2 k) - s + 1`` unless ``k`` is ``2**s`` or ``2**(s+1)``;
    (ii)  ``ord sigma_s(2**s) = 0`` and ``ord sigma_s(2**(s+1)) = 1``;
    (iii) ``ord sigma_s(2**m - 1) >= m - s + 1`` for ``m > s``.
    """
    out = []
    for s in range(1, t.I + 1):
        for k in range(1, t.J + 1):
            o = ord2(t[s, k])
            if k in (1 << s, 1 << (s + 1)):
                want = 0 if k == 1 << s else 1
                if o != want:
                    out.append(BoundViolation("ii", s, k, o, f"== {want}"))
                continue
            need = k.bit_length() - 1 - s + 1
            if o < need:
                out.append(BoundViolation("i", s, k, o, f">= {need}"))
        m = s + 1
        while (1 << m) - 1 <= t.J:
            k = (1 << m) - 1
            o = ord2(t[s, k])
            if o < m - s + 1:
                out.append(BoundViolation("iii", s, k, o, f">= {m - s + 1}"))
            m += 1
    return out


__all__ = [
    "DEFAULT_BUDGET",
    "BudgetError",
    "Property",
    "Result",
    "Verdict",
    "report",
    "brute_bijective",
    "brute_transitive",
    "brute_compatible",
    "brute_balanced",
    "walk_cycle",
    "MahlerCoeffs",
    "mahler_coeffs",
    "check_mahler_ergodic",
    "check_mahler_mp",
    "stirling2",
    "monomial_to_factorial",
    "factorial_to_monomial",
    "check_poly_factorial",
    "check_poly_lowmod",
    "transitive_mod",
    "check_qpoly",
    "check_rivest",
    "check_anf_ergodic",
    "Derivative",
    "derivative_array",
    "numeric_derivative_mod2k",
    "estimate_threshold",
    "check_ergodic_via_derivative",
    "check_mp_via_derivative",
    "partial_derivatives_mod2",
    "xor_affine_expr",
    "check_special_xor_affine",
    "digit_weighted_expr",
    "check_special_digit_weighted",
    "xor_add_cascade_expr",
    "check_xor_add_cascade",
    "sigma_closed",
    "sigma_difference",
    "SigmaTable",
    "sigma_table",
    "BoundViolation",
    "sigma_bound_violations",
]
