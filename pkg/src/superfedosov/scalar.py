"""Exact Gaussian rationals ``re + im*i``.

Both parts are ``gmpy2.mpq`` values, which keep themselves reduced with a
positive denominator.
"""

from fractions import Fraction
from numbers import Rational

from gmpy2 import mpq

__all__ = ["Scalar", "as_scalar", "ZERO", "ONE", "I"]

_Q0 = mpq(0)


def _q(value):
    if isinstance(value, type(_Q0)):
        return value
    if isinstance(value, (int, Fraction)) or isinstance(value, Rational):
        return mpq(value.numerator, value.denominator) if not isinstance(value, int) else mpq(value)
    if isinstance(value, str):
        return mpq(Fraction(value))
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def _make(re, im):
    s = object.__new__(Scalar)
    s.re = re
    s.im = im
    return s


class Scalar:
    """An element of Q(i). Immutable; arithmetic is exact."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _q(re)
        self.im = _q(im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_real(self):
        return not self.im

    def __eq__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = as_scalar(other)
            except TypeError:
                return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __neg__(self):
        return _make(-self.re, -self.im)

    def __add__(self, other):
        if not isinstance(other, Scalar):
            other = as_scalar(other)
        return _make(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Scalar):
            other = as_scalar(other)
        return _make(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return as_scalar(other) - self

    def __mul__(self, other):
        if type(other) is int:
            return _make(self.re * other, self.im * other)
        if not isinstance(other, Scalar):
            other = as_scalar(other)
        ar, ai, br, bi = self.re, self.im, other.re, other.im
        if not ai:
            if not bi:
                return _make(ar * br, _Q0)
            return _make(ar * br, ar * bi)
        if not bi:
            return _make(ar * br, ai * br)
        return _make(ar * br - ai * bi, ar * bi + ai * br)

    __rmul__ = __mul__

    def conjugate(self):
        return _make(self.re, -self.im)

    def inverse(self):
        norm = self.re * self.re + self.im * self.im
        if not norm:
            raise ZeroDivisionError("Scalar division by zero")
        return _make(self.re / norm, -self.im / norm)

    def __truediv__(self, other):
        if not isinstance(other, Scalar):
            other = as_scalar(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return as_scalar(other) * self.inverse()

    def __repr__(self):
        return f"Scalar({self})"

    def __str__(self):
        if not self.im:
            return _fmt_q(self.re)
        if not self.re:
            return f"({_fmt_q(self.im)} i)"
        sign = "-" if self.im < 0 else "+"
        return f"({_fmt_q(self.re)}{sign}{_fmt_q(abs(self.im))} i)"


def _fmt_q(q):
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def as_scalar(value):
    if isinstance(value, Scalar):
        return value
    if isinstance(value, complex):
        raise TypeError("floating complex numbers are not exact")
    return Scalar(value)


ZERO = Scalar(0)
ONE = Scalar(1)
I = Scalar(0, 1)
