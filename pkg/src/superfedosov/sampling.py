"""Seeded random Elements and symbols for property checks."""

import random
from fractions import Fraction

from .scalar import Scalar

__all__ = ["random_scalar", "random_element", "random_symbol", "random_homogeneous"]


def random_scalar(rng, complex_=True):
    re = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
    im = Fraction(rng.randint(-2, 2), rng.randint(1, 2)) if complex_ and rng.random() < 0.3 else 0
    s = Scalar(re, im)
    return s if s else Scalar(1)


def random_element(ring, rng, terms=4, max_y=3, max_x=2, max_c=2, hbar=True, complex_=True):
    """Random sum of monomials in x, c, y (and hbar), truncated to the ring."""
    if isinstance(rng, int):
        rng = random.Random(rng)
    n = ring.n
    out = ring.zero()
    for _ in range(terms):
        exps = [0] * ring.nslots
        if hbar and rng.random() < 0.3:
            exps[0] = 1
        for _ in range(rng.randint(0, max_x)):
            exps[1 + rng.randrange(n)] += 1
        for _ in range(rng.randint(0, max_c)):
            exps[1 + n + rng.randrange(n)] += 1
        for _ in range(rng.randint(0, max_y)):
            exps[1 + 2 * n + rng.randrange(n)] += 1
        out = out + ring.monomial(exps, random_scalar(rng, complex_))
    return out


def random_symbol(ring, rng, terms=3, max_x=3, hbar=False, complex_=False):
    """Random y-free, c-free polynomial in the coordinates (x-degree <= max_x)."""
    return random_element(ring, rng, terms=terms, max_y=0, max_x=max_x, max_c=0, hbar=hbar, complex_=complex_)


def random_homogeneous(ring, rng, **kw):
    """Largest-count homogeneous component of a random element."""
    a = random_element(ring, rng, **kw)
    comps = a.homogeneous_components()
    if not comps:
        return a
    return max(comps.values(), key=len)
