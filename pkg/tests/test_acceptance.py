"""Acceptance criteria 1 to 19.

Each test records one PASS/FAIL line (shown in the terminal summary and,
with ``-s``, inline) and then asserts the criterion, including its time
limit where one is stated.
"""

import random
import time
from contextlib import contextmanager

import numpy as np
import pytest

import oracles
from conftest import ACCEPTANCE_LINES
from corpus import candidate, corpus_specs
from padic_ergo import genlib as gl
from padic_ergo import seqstats as ss
from padic_ergo import texpr as tx
from padic_ergo import verdicts as vd
from padic_ergo.genlib import GeneratorSpec, Kind
from padic_ergo.twoadic import add, band, bnot, bor, bxor, mul, sub, word
from padic_ergo.verdicts import ERG, MP


class Outcome:
    def __init__(self):
        self.ok = True
        self.notes: list[str] = []
        self.info = ""

    def check(self, cond, note):
        if not cond:
            self.ok = False
            self.notes.append(note)
        return cond


@contextmanager
def criterion(k, title, seconds=None):
    out = Outcome()
    t0 = time.perf_counter()
    yield out
    dt = time.perf_counter() - t0
    if seconds is not None:
        out.check(dt < seconds, f"took {dt:.1f}s, limit {seconds}s")
    status = "PASS" if out.ok else "FAIL"
    line = f"{status} criterion {k:>2}: {title} ({dt:.2f}s)"
    if out.notes:
        line += " -- " + "; ".join(out.notes[:5])
    elif out.info:
        line += " -- " + out.info
    ACCEPTANCE_LINES.append((k, line))
    print(line)
    assert out.ok, line


def sweep_degree4_mod8():
    """All 8**5 coefficient vectors (a0..a4) in 0..7."""
    idx = np.arange(8**5)
    return np.stack([(idx >> (3 * j)) & 7 for j in range(5)], axis=1)


def poly_tables(coeffs, q, xor=False):
    xs = np.arange(q, dtype=np.int64)
    out = np.empty((len(coeffs), q), dtype=np.int64)
    for lo in range(0, len(coeffs), 4096):
        c = coeffs[lo : lo + 4096].astype(np.int64)
        if xor:
            acc = np.zeros((len(c), q), dtype=np.int64)
            power = np.ones(q, dtype=np.int64)
            for j in range(c.shape[1]):
                acc ^= (c[:, j : j + 1] * power) % q
                power = (power * xs) % q
        else:
            acc = np.zeros((len(c), q), dtype=np.int64)
            for j in reversed(range(c.shape[1])):
                acc = (acc * xs + c[:, j : j + 1]) % q
        out[lo : lo + 4096] = acc
    return out


@pytest.fixture(scope="module")
def poly_sweep():
    coeffs = sweep_degree4_mod8()
    tables = poly_tables(coeffs, 1 << 10)
    trans = [vd.brute_transitive(t, 10).holds for t in tables]
    bij = [vd.brute_bijective(t, 10).holds for t in tables]
    return coeffs, trans, bij


# ---------------------------------------------------------------------------


def _identities(u, v, minus_one, two):
    return (
        bnot(u) == bxor(u, minus_one)
        and add(u, bnot(u)) == minus_one
        and bxor(u, v) == sub(add(u, v), mul(two, band(u, v)))
        and bor(u, v) == sub(add(u, v), band(u, v))
        and bor(u, v) == add(bxor(u, v), band(u, v))
    )


def test_c01_identities():
    with criterion(1, "five bitwise/arithmetic identities", seconds=5) as c:
        bad = 0
        consts = word(-1, 8), word(2, 8)
        ws = [word(u, 8) for u in range(256)]
        for u in ws:
            for v in ws:
                bad += not _identities(u, v, *consts)
        consts = word(-1, 64), word(2, 64)
        rng = random.Random(1)
        for _ in range(100_000):
            bad += not _identities(word(rng.getrandbits(64), 64), word(rng.getrandbits(64), 64), *consts)
        c.check(bad == 0, f"{bad} failures")


def test_c02_compatibility():
    with criterion(2, "compatibility of random expressions, shr violation", seconds=30) as c:
        rng = random.Random(2)
        bad = 0
        for _ in range(10_000):
            e = tx.random_expr(rng, rng.randint(1, 6))
            fn = tx.compile_expr(e, 64)
            r = rng.randint(1, 63)
            u = rng.getrandbits(64)
            u2 = (u + (rng.getrandbits(64 - r) << r)) % (1 << 64)
            m = (1 << r) - 1
            bad += (int(fn({"x": u})) & m) != (int(fn({"x": u2})) & m)
        c.check(bad == 0, f"{bad} disagreements")
        shr = tx.parse("x >> 1")
        c.check(not tx.classify(shr).compatible, "shr not flagged")
        c.check(not vd.brute_compatible(shr, 4).holds, "shr shows no violation")


def test_c03_polynomial_lowmod(poly_sweep):
    coeffs, trans, bij = poly_sweep
    with criterion(3, "integer polynomial low-modulus rule vs brute force at n=10", seconds=120) as c:
        mism = 0
        for a, t, b in zip(coeffs.tolist(), trans, bij):
            mism += vd.check_poly_lowmod(a, 2, ERG).holds != t
            mism += vd.check_poly_lowmod(a, 2, MP).holds != b
        c.check(mism == 0, f"{mism} mismatches")
        c.check(sum(trans) > 0 and sum(bij) > sum(trans), "degenerate sweep")


def test_c04_factorial_basis(poly_sweep):
    coeffs, trans, bij = poly_sweep
    with criterion(4, "factorial-basis criterion vs brute force") as c:
        mism = 0
        for a, t, b in zip(coeffs.tolist(), trans, bij):
            f = vd.monomial_to_factorial(a)
            mism += vd.check_poly_factorial(f, ERG).holds != t
            mism += vd.check_poly_factorial(f, MP).holds != b
        c.check(mism == 0, f"{mism} mismatches")


def test_c05_xor_affine():
    with criterion(5, "a + sum a_i (x xor b_i) decided mod 4 / mod 2") as c:
        rng = random.Random(5)
        mism = holds = 0
        for _ in range(10_000):
            a = rng.getrandbits(10)
            pairs = [(rng.getrandbits(10), rng.getrandbits(10)) for _ in range(rng.randint(1, 4))]
            e = vd.xor_affine_expr(a, pairs)
            t = tx.table(e, 10)
            erg = vd.check_special_xor_affine(a, pairs, ERG).holds
            holds += erg
            mism += erg != vd.brute_transitive(t, 10).holds
            mism += vd.check_special_xor_affine(a, pairs, MP).holds != vd.brute_bijective(t, 10).holds
        c.check(mism == 0, f"{mism} mismatches")
        c.check(holds > 100, f"only {holds} ergodic samples")


def _weighted_sample(rng, n):
    a = rng.getrandbits(n)
    if rng.random() < 0.5:
        return a, [rng.getrandbits(n) for _ in range(n)]
    # near the boundary: valuations mostly right, occasionally perturbed
    a |= 1
    ws = [((1 << i) * (2 * rng.getrandbits(n) + 1)) % (1 << n) for i in range(n)]
    ws[0] = (ws[0] & ~3) | 1
    if rng.random() < 0.5:
        i = rng.randrange(n)
        ws[i] = rng.getrandbits(n)
    return a, ws


def test_c06_digit_weighted():
    with criterion(6, "a + sum a_i delta_i(x) coefficient conditions vs compatible and transitive") as c:
        mism = holds = 0

        def compare(a, ws, n):
            nonlocal mism, holds
            t = tx.table(vd.digit_weighted_expr(a, ws), n)
            brute = vd.brute_transitive(t, n).holds and vd.brute_compatible(t, n).holds
            v = vd.check_special_digit_weighted(a, ws).holds
            holds += v
            mism += v != brute
            bmp = vd.brute_bijective(t, n).holds and vd.brute_compatible(t, n).holds
            mism += vd.check_special_digit_weighted(a, ws, MP).holds != bmp

        # exhaustive at n = 3
        for a in range(8):
            for w0 in range(8):
                for w1 in range(8):
                    for w2 in range(8):
                        compare(a, [w0, w1, w2], 3)
        rng = random.Random(6)
        for n in (5, 8):
            for _ in range(10_000):
                compare(*_weighted_sample(rng, n), n)
        c.check(mism == 0, f"{mism} mismatches")
        c.check(holds > 1000, f"only {holds} ergodic samples")


def test_c07_difference_construction():
    with criterion(7, "1 + x + 2 (g(x+1) - g(x)) is transitive") as c:
        rng = random.Random(7)
        bad = 0
        for _ in range(1000):
            e = gl.delta_expr(tx.random_expr(rng, rng.randint(1, 5)), 1)
            for n in (8, 10, 12):
                bad += not vd.brute_transitive(e, n).holds
        c.check(bad == 0, f"{bad} failures")


def test_c08_compositions():
    with criterion(8, "four compositions of 1 + x with 4 g(x)") as c:
        rng = random.Random(8)
        x = tx.Var("x")
        f = lambda z: tx.Add(tx.Const(1), z)
        bad = 0
        for _ in range(200):
            g4 = tx.Mul(tx.Const(4), tx.random_expr(rng, 4))
            for e in (f(tx.Add(x, g4)), f(tx.Xor(x, g4)), tx.Add(f(x), g4), tx.Xor(f(x), g4)):
                bad += not vd.brute_transitive(e, 10).holds
        c.check(bad == 0, f"{bad} failures")


def test_c09_anf():
    with criterion(9, "ANF criterion vs brute force on 500 expressions") as c:
        corpus = [tx.parse(f"x + (x^2 | {C})") for C in range(16)]
        rng = random.Random(9)
        while len(corpus) < 500:
            corpus.append(candidate(rng))
        mism = holds = 0
        for e in corpus:
            a = vd.check_anf_ergodic(e, 10).holds
            holds += a
            mism += a != vd.brute_transitive(e, 11).holds
        for C in range(16):
            rule = C & 1 == 1 and (C >> 2) & 1 == 1
            mism += vd.check_anf_ergodic(corpus[C], 10).holds != rule
        c.check(mism == 0, f"{mism} mismatches")
        c.check(holds >= 50, f"only {holds} ergodic expressions")


def test_c10_landmark():
    with criterion(10, "x + (x^2 | 5): 32-cycle, n=16, derivative 1 + 2x", seconds=5) as c:
        e = tx.parse("x + (x^2 | 5)")
        v = vd.brute_transitive(e, 5)
        f = lambda z: z + (z * z | 5)
        c.check(v.holds and v.witness["cycle"] == oracles.orbit_from_zero(f, 32), "mod 32 cycle")
        c.check(len(v.witness["cycle"]) == 32, "cycle length")
        c.check(vd.brute_transitive(e, 16).holds, "n = 16")
        us = np.arange(1 << 10)
        d, stable = vd.derivative_array(e, us, 2, 3)
        c.check(bool(stable.all()) and bool((d == (1 + 2 * us) % 4).all()), "derivative mod 4")


def test_c11_exponential_inversive():
    with criterion(11, "3x + 3^x and -inv(2x+1) - x, table powering", seconds=30) as c:
        for e in (gl.exponential_expr(3), gl.inversive_expr()):
            for n in range(1, 13):
                c.check(vd.brute_transitive(e, n).holds, f"{tx.pretty(e)} at n={n}")
        t = gl.exp_generator_table(3, 12)
        bad = sum(t.power(x)[0] != pow(3, x, 1 << 12) for x in range(1 << 12))
        c.check(bad == 0, f"{bad} powering mismatches")


def test_c12_distribution():
    with criterion(12, "n-fullness and Q1 of full-period bit cycles", seconds=60) as c:
        for n in (4, 6, 8):
            for spec in (
                GeneratorSpec(Kind.EXPR, n, {"expr": "x + (x^2 | 5)"}),
                GeneratorSpec(Kind.EXPONENTIAL, n, {"a": 3}),
                GeneratorSpec(Kind.INVERSIVE, n),
            ):
                r = ss.distr_theorem_check(gl.build(spec))
                c.check(r.kfull.full and set(r.kfull.counts.tolist()) == {n}, f"{spec.kind.value} n={n} not full")
                top = (n << n).bit_length() - 1
                c.check(r.q1.passed and len(r.q1.levels) == top, f"{spec.kind.value} n={n} Q1")
        k = ss.k_fullness(ss.BitCycle.from_words([0, 2, 3, 1], 2), 2)
        c.check(not k.full and k.as_dict() == {"00": 3, "01": 1, "11": 3, "10": 1}, "counterexample")


def test_c13_q1_example():
    with criterion(13, "Q1 worked example") as c:
        r = ss.q1_check("1111111100000111")
        c.check(r.level(4).passed and r.level(4).max_deviation == ss.Fraction(1, 4), "k=4")
        c.check(not r.level(3).passed and r.level(3).max_deviation == ss.Fraction(5, 16), "k=3")


def test_c14_coordinate_sequences():
    with criterion(14, "coordinate periods 2^(j+1) with negated halves") as c:
        n = 8
        bad = 0
        for spec in corpus_specs(n):
            t = gl.build(spec).table()
            for seed in range(1 << n):
                for j in range(n):
                    r = ss.coordinate_sequence(t, j, n, seed)
                    bad += not r.ok
        c.check(bad == 0, f"{bad} failures")


def test_c15_half_periods():
    with criterion(15, "any half periods are realized") as c:
        rng = random.Random(15)
        bad = 0
        for n in (4, 6, 8):
            for _ in range(100):
                g = ss.random_gammas(rng, n)
                r = ss.realize_half_periods(g, n)
                bad += not (r.ok and oracles.single_cycle(r.table.__getitem__, 1 << n))
        c.check(bad == 0, f"{bad} failures")


def test_c16_sigma():
    with criterion(16, "digit-coefficient closed form and valuation bounds") as c:
        t = vd.sigma_table(6, 128)
        c.check(t.agree, f"{len(t.mismatches())} closed-form mismatches")
        for s in range(1, 7):
            c.check(vd.ord2(t[s, 1 << s]) == 0, f"ord sigma_{s}(2^{s})")
            if 1 << (s + 1) <= 128:
                c.check(vd.ord2(t[s, 1 << (s + 1)]) == 1, f"ord sigma_{s}(2^{s + 1})")
        for v in vd.sigma_bound_violations(t):
            c.check(False, f"bound ({v.part}) fails at s={v.s}, k={v.k}: valuation {v.valuation}, need {v.required}")


def test_c17_nonergodic_demos():
    with criterion(17, "Bernoulli and tent analogues are not ergodic") as c:
        for n in range(1, 13):
            c.check(gl.demo_bernoulli(n).max_steps <= n, f"B_{n}")
        rng = np.random.default_rng(17)
        for n in range(13, 17):
            r = gl.demo_bernoulli(n, rng.integers(0, 1 << n, 4096))
            c.check(r.max_steps <= n, f"B_{n} sampled")
        for n in range(1, 13):
            m = gl.demo_tent(n).max_cycle
            c.check(m <= n, f"T_{n} has a cycle of length {m}")


def test_c18_rivest():
    with criterion(18, "permutation polynomial parity rule, plus and xor forms") as c:
        coeffs = sweep_degree4_mod8()
        mism = 0
        for xor in (False, True):
            tables = poly_tables(coeffs, 256, xor=xor)
            for a, t in zip(coeffs.tolist(), tables):
                mism += vd.check_rivest(a, xor=xor).holds != vd.brute_bijective(t, 8).holds
        c.check(mism == 0, f"{mism} mismatches")


def test_c19_throughput():
    with criterion(19, "throughput of every generator kind") as c:
        rates = []
        for kind in Kind:
            r = gl.bench(kind, 32, 5000)
            rates.append(f"{kind.value}={r['words_per_sec']:,.0f}/s")
            c.check(r["words_per_sec"] > 0, kind.value)
        c.info = ", ".join(rates)
