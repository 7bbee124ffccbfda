"""Slow, independent reference computations used to cross-check the package.

Everything here is plain Python on ints; nothing imports the package's
vectorized evaluators.
"""

from math import comb


def orbit_from_zero(f, m):
    seen = set()
    x = 0
    out = []
    while x not in seen:
        seen.add(x)
        out.append(x)
        x = f(x) % m
    return out


def single_cycle(f, m):
    orb = orbit_from_zero(f, m)
    return len(orb) == m and f(orb[-1]) % m == 0


def bijective(f, m):
    return len({f(x) % m for x in range(m)}) == m


def compatible(f, n):
    m = 1 << n
    return all((f(x) - f(x % (1 << r))) % (1 << r) == 0 for x in range(m) for r in range(1, n))


def mahler(f, i, m):
    return sum((-1) ** (i - k) * comb(i, k) * f(k) for k in range(i + 1)) % m


def poly(coeffs):
    def f(x):
        return sum(c * x**i for i, c in enumerate(coeffs))

    return f


def inv_mod(v, m):
    return pow(v, -1, m)
