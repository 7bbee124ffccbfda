import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from padic_ergo import texpr as tx
from padic_ergo.texpr import Add, Const, Digit, Exp1p2, InvOdd, Mul, Or, Pow, Shr, Sub, Var, Xor
from padic_ergo.twoadic import Word2

x = Var("x")


def ev(text, value, n):
    return tx.evaluate(tx.parse(text), {"x": value}, n).value


def test_parse_landmark_expression():
    assert tx.parse("x + (x^2 | 5)") == Add(x, Or(Pow(x, 2), Const(5)))


def test_caret_spacing_decides_power_or_xor():
    assert tx.parse("x^2") == Pow(x, 2)
    assert tx.parse("x ^ 2") == Xor(x, Const(2))
    assert tx.parse("x xor 2") == Xor(x, Const(2))


def test_precedence():
    assert tx.parse("x | 1 ^ 2 & 3 + 4 * 5") == Or(x, Xor(Const(1), tx.And(Const(2), Add(Const(3), Mul(Const(4), Const(5))))))
    assert tx.parse("1 + 2 << 1") == tx.Shl(Add(Const(1), Const(2)), 1)


def test_literals():
    assert tx.parse("0x1F") == Const(31)
    assert tx.parse("1/3") == Const(Fraction(1, 3))
    assert tx.parse("-1") == Const(-1)
    with pytest.raises(tx.ParseError):
        tx.parse("1/4")


def test_exponentiation_sugar():
    assert tx.parse("3**x") == Exp1p2(Const(1), x)
    assert tx.parse("x**3") == Pow(x, 3)
    with pytest.raises(tx.ParseError):
        tx.parse("2**x")


def test_division_needs_odd_divisor():
    assert tx.parse("x / (1 + 2*x)") == Mul(x, InvOdd(Add(Const(1), Mul(Const(2), x))))
    assert tx.parse("x / 3") == Mul(x, InvOdd(Const(3)))
    with pytest.raises(tx.ParseError):
        tx.parse("x / x")
    with pytest.raises(tx.ParseError):
        tx.parse("1 / (2*x)")


def test_builtins():
    assert tx.parse("delta(2, x)") == Digit(2, x)
    assert tx.parse("shr(x, 1)") == Shr(x, 1)
    assert tx.parse("x >> 1") == Shr(x, 1)
    with pytest.raises(tx.ParseError):
        tx.parse("delta(x, x)")
    with pytest.raises(tx.ParseError):
        tx.parse("frobnicate(x)")


def test_substitution_of_definitions():
    e = tx.parse("1 + x + 2*((g@(x+1)) - (g@x))", {"g": "x ^ (2*x+1)"})
    g1 = Xor(Add(x, Const(1)), Add(Mul(Const(2), Add(x, Const(1))), Const(1)))
    g0 = Xor(x, Add(Mul(Const(2), x), Const(1)))
    assert e == Add(Add(Const(1), x), Mul(Const(2), Sub(g1, g0)))
    with pytest.raises(tx.ParseError):
        tx.parse("h@x")


def test_parse_error_positions():
    with pytest.raises(tx.ParseError) as info:
        tx.parse("x + (")
    assert info.value.pos == 5
    with pytest.raises(tx.ParseError) as info:
        tx.parse("x $ 1")
    assert info.value.pos == 2


@given(st.text(alphabet="x1234567890+-*/^|&~()<> ,@delta", max_size=30))
def test_parser_is_total(text):
    try:
        tx.parse(text)
    except tx.ParseError:
        pass


@given(st.text(max_size=20))
def test_parser_is_total_on_any_text(text):
    try:
        tx.parse(text)
    except tx.ParseError:
        pass


@settings(max_examples=300)
@given(st.integers(0, 2**32), st.integers(0, 6))
def test_pretty_roundtrip(seed, depth):
    e = tx.random_expr(random.Random(seed), depth, allow_shr=True)
    assert tx.parse(tx.pretty(e)) == e


def test_round_trip_with_fractions_and_builtins():
    for text in ["x*1/3 - -1/5", "delta(3, x) + trunc(4, x*x)", "inv(1+2*x) ^ ~x", "exp1p2(x, x+1)", "shl(x, 3) | x >> 2"]:
        e = tx.parse(text)
        assert tx.parse(tx.pretty(e)) == e


def test_evaluation_examples():
    assert ev("x + 2*x^2", 3, 2) == 1
    assert ev("x + (x^2 | 5)", 0, 5) == 5
    assert ev("3*x + 3**x", 3, 4) == (9 + 27) % 16
    assert ev("x / 3", 1, 4) == 11
    assert ev("-1", 0, 4) == 15


def test_evaluation_errors():
    with pytest.raises(tx.EvalError):
        tx.evaluate(tx.parse("inv(x)"), {"x": 2}, 4)
    with pytest.raises((KeyError, tx.EvalError)):
        tx.evaluate(tx.parse("x + y"), {"x": 2}, 4)
    with pytest.raises(tx.EvalError):
        tx.evaluate(x, {"x": Word2(1, 3)}, 4)


def test_array_evaluation_matches_scalar():
    rng = random.Random(5)
    for _ in range(50):
        e = tx.random_expr(rng, 4)
        n = rng.randint(1, 12)
        t = tx.table(e, n)
        for v in rng.sample(range(1 << n), min(20, 1 << n)):
            assert int(t[v]) == tx.evaluate(e, {"x": v}, n).value


def test_exponentiation_array_path():
    t = tx.table(tx.parse("3**x"), 12)
    assert all(int(t[v]) == pow(3, v, 4096) for v in range(4096))


def test_odd_prime_evaluation():
    t = tx.table(tx.parse("1 + x + 25*x^3"), 2, p=5)
    assert t.tolist() == [(1 + v + 25 * v**3) % 25 for v in range(25)]
    with pytest.raises(tx.EvalError):
        tx.table(tx.parse("x ^ 1"), 2, p=5)


@settings(max_examples=200)
@given(st.integers(0, 2**32))
def test_compatible_expressions_respect_congruences(seed):
    rng = random.Random(seed)
    e = tx.random_expr(rng, 6)
    assert tx.classify(e)
    n = 32
    r = rng.randint(1, n)
    u = rng.getrandbits(n)
    u2 = (u + (rng.getrandbits(n) << r)) % (1 << n)
    a = tx.evaluate(e, {"x": u}, n).value
    b = tx.evaluate(e, {"x": u2}, n).value
    assert (a - b) % (1 << r) == 0


@settings(max_examples=200)
@given(st.integers(0, 2**32))
def test_lower_precision_is_reduction(seed):
    rng = random.Random(seed)
    e = tx.random_expr(rng, 5)
    m = rng.randint(2, 64)
    n = rng.randint(1, m - 1)
    u = rng.getrandbits(m)
    hi = tx.evaluate(e, {"x": u}, m).value
    lo = tx.evaluate(e, {"x": u % (1 << n)}, n).value
    assert hi % (1 << n) == lo


def test_classify():
    assert tx.classify(tx.parse("x + (x^2 | 5)"))
    c = tx.classify(tx.parse("x >> 1"))
    assert not c and c.witness == Shr(x, 1)
    assert not tx.classify(tx.parse("shr(x & 2, 1)"))
    assert not tx.classify(tx.parse("delta(1, x)"))
    assert tx.classify(tx.parse("2*delta(1, x)"))
    assert tx.classify(tx.parse("shl(delta(3, x), 3)"))
    assert tx.classify(tx.parse("delta(0, x)"))


def test_shift_right_breaks_compatibility():
    e = tx.parse("x >> 1")
    # 0 and 2 agree mod 2 but their images do not
    assert (tx.evaluate(e, {"x": 0}, 4).value - tx.evaluate(e, {"x": 2}, 4).value) % 2 != 0


def test_anf_examples():
    assert str(tx.coordinate_anf(tx.parse("x+1"), 1)) == "x1 + x0"
    anf0 = tx.coordinate_anf(tx.parse("x+1"), 0)
    assert str(anf0) == "x0 + 1" and 0 in anf0
    with pytest.raises(ValueError):
        tx.coordinate_anf(tx.parse("x+1"), 21)
    with pytest.raises(ValueError):
        tx.coordinate_anf(tx.parse("x >> 1"), 2)


@pytest.mark.parametrize("i", range(11))
def test_anf_shape_for_bijective_polynomial(i):
    anf = tx.coordinate_anf(tx.parse("x + 2*x^2"), i)
    lead = 1 << i
    assert lead in anf
    assert all(m == lead or not m >> i & 1 for m in anf.monomials)


def test_anf_truth_table_roundtrip():
    rng = random.Random(2)
    for _ in range(40):
        e = tx.random_expr(rng, 5)
        i = rng.randint(0, 9)
        anf = tx.coordinate_anf(e, i)
        direct = (tx.table(e, i + 1) >> np.uint64(i)) & np.uint64(1)
        assert np.array_equal(anf.truth_table(), direct.astype(np.uint8))


def test_poly_expr():
    assert tx.poly_expr([1, 2, 3]) == Add(Add(Const(1), Mul(Const(2), x)), Mul(Const(3), Pow(x, 2)))
    assert tx.poly_expr([0, 1], combine=Xor) == Xor(Const(0), Mul(Const(1), x))


def test_free_vars_and_kinds():
    e = tx.parse("x*y + 3")
    assert tx.free_vars(e) == ["x", "y"]
    assert tx.is_polynomial(tx.parse("1 + x + 200*x^17"))
    assert not tx.is_polynomial(tx.parse("inv(1+2*x)"))
    assert tx.is_arithmetic(tx.parse("3*x + 3**x - inv(1+2*x)"))
    assert not tx.is_arithmetic(tx.parse("x & 1"))
