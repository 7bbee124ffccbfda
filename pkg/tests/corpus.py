"""Criterion-passing generator specs shared by several test modules."""

from padic_ergo.genlib import GeneratorSpec, Kind


def corpus_specs(n):
    specs = [
        GeneratorSpec(Kind.EXPR, n, {"expr": "x + (x^2 | 5)"}),
        GeneratorSpec(Kind.EXPR, n, {"expr": "-1 + x - 4*x^2"}),
        GeneratorSpec(Kind.EXPR, n, {"expr": "x + 1"}),
        GeneratorSpec(Kind.EXPONENTIAL, n, {"a": 3}),
        GeneratorSpec(Kind.EXPONENTIAL, n, {"a": 5}),
        GeneratorSpec(Kind.INVERSIVE, n),
        GeneratorSpec(Kind.DELTA, n, {"g": "x ^ (2*x+1)", "c": 1}),
        GeneratorSpec(Kind.DELTA, n, {"g": "x*x & (x + 7)", "c": 3}),
        GeneratorSpec(Kind.CASCADE, n, {"c": [1, 4], "d": [4, 8]}),
        GeneratorSpec(Kind.XOR_AFFINE, n, {"a": 1, "pairs": [[1, 2], [4, 5]]}),
        GeneratorSpec(Kind.DIGIT_WEIGHTED, n, {"a": 1, "weights": [5] + [1 << i for i in range(1, n)]}),
    ]
    return specs


def candidate(rng, depth=4):
    """Random compatible map, biased so that a fair share is bijective or ergodic."""
    from padic_ergo import texpr as tx

    g = tx.random_expr(rng, depth)
    r = rng.random()
    if r < 0.3:
        return tx.Add(tx.Add(tx.Const(1), tx.Var("x")), tx.Mul(tx.Const(4), g))
    if r < 0.5:
        return tx.Add(tx.Var("x"), tx.Mul(tx.Const(2), g))
    return g
