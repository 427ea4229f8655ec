"""Fiberwise Moyal-type product in the y-variables.

Sign realization
----------------
The exponential ``a exp(<-d/dy^j (i hbar/2) m^jl d/dy^l->) b`` is evaluated on
a doubled fiber: ``b`` is copied to fresh variables ybar (same parities, placed
after all y in the canonical order, so the copy costs no sign), the product
``a * bbar`` is formed, and the even bidifferential operator

    Pi = (i hbar / 2) sum_jl (-1)^(eps_j eps_l) m^jl  d/dy^j  d/dybar^l

(left derivatives, the ybar one applied first, coefficient multiplied from
the left) is exponentiated before ybar is identified with y again. The factor
(-1)^(eps_j eps_l) is exactly what turns ``m^jl d/dy^j d/dybar^l`` into the
triple product ``(a <-d/dy^j) m^jl (d/dy^l b)`` for every homogeneous a, b, so
the first-order term is the defining one. The components of Pi commute with
one another (m is y-independent), hence the series is associative; the test
suite pins this down.

For the commutator, ``(-1)^(|a||b|) b o a`` equals the same series applied to
``a * bbar`` with m replaced by its graded transpose, so both orderings share
one doubled product and the order-zero terms cancel identically.
"""

from fractions import Fraction

from .errors import HbarDivisionError
from .graded_algebra import _BITS, _FIELD, INF, Element, _mul_terms, deriv_slot
from .scalar import Scalar

__all__ = ["circ", "circ_commutator", "circ_commutator_naive", "div_ihbar", "ihbar_bracket"]

_HALF_I = Scalar(0, Fraction(1, 2))


def _doubling(ring, d_max):
    base = ring.with_degree(d_max)
    return base, base.doubled_ring()


def _embed_left(a, dring):
    return Element(dring, a.terms, a.validity)


def _embed_right(b, dring):
    n = dring.n
    yshift = _BITS * (1 + 2 * n)
    low = (1 << yshift) - 1
    move = _BITS * n
    terms = {(k & low) | ((k >> yshift) << (yshift + move)): c for k, c in b.terms.items()}
    return Element(dring, terms, b.validity)


def _identify(F, base):
    """Set ybar = y, re-sorting each ybar factor into its y slot."""
    n = base.n
    cut = _BITS * (1 + 3 * n)
    low = (1 << cut) - 1
    yshift = _BITS * (1 + 2 * n)
    info = base.info
    out = {}
    for k, c in F.terms.items():
        u = k & low
        w = (k >> cut) << yshift
        if not w:
            s = out.get(u)
            if s is None:
                out[u] = c
            else:
                s = s + c
                if s:
                    out[u] = s
                else:
                    del out[u]
            continue
        iu, iw = info(u), info(w)
        if iu[6] & iw[6]:
            continue
        odd = (iu[4] & iw[7]).bit_count() + (iu[5] & iw[8]).bit_count()
        if odd & 1:
            c = -c
        key = u + w
        s = out.get(key)
        if s is None:
            out[key] = c
        else:
            s = s + c
            if s:
                out[key] = s
            else:
                del out[key]
    return Element(base, out, F.validity)


def _operator(m, dring, transpose=False):
    """List of (y slot, ybar slot, coefficient element) for Pi."""
    n = dring.n
    eps = dring.coords.parities
    y0 = 1 + 2 * n
    yb0 = 1 + 3 * n
    hbar = dring.hbar()
    ops = []
    for j in range(n):
        for l in range(n):
            entry = m[l][j] if transpose else m[j][l]
            if entry is None or entry.is_zero():
                continue
            # graded transpose (m^T)^jl = (-1)^(eps_j eps_l) m^lj; Pi carries another (-1)^(eps_j eps_l)
            sign = 1
            if eps[j] and eps[l]:
                sign = -sign
            if transpose and eps[j] and eps[l]:
                sign = -sign
            coef = Element(dring, entry.terms, entry.validity) * hbar
            coef = coef.scale(_HALF_I if sign > 0 else -_HALF_I)
            ops.append((y0 + j, yb0 + l, coef))
    return ops


def _apply(F, ops):
    ring = F.ring
    out = {}
    v = F.validity
    for ys, ybs, coef in ops:
        G = deriv_slot(deriv_slot(F, ybs), ys)
        if G.is_zero():
            continue
        v = min(v, coef.validity)
        part = _mul_terms(ring, coef.terms, G.terms, v, ring.ctx.d_max)
        for k, c in part.items():
            s = out.get(k)
            if s is None:
                out[k] = c
            else:
                s = s + c
                if s:
                    out[k] = s
                else:
                    del out[k]
    return Element(ring, out, v).truncated()


def _series(F, ops, start):
    """sum_{k >= start} Pi^k F / k!"""
    total = F if start == 0 else Element(F.ring, {}, F.validity)
    term = F
    k = 0
    while True:
        k += 1
        term = _apply(term, ops)
        if term.is_zero():
            break
        term = term.scale(Fraction(1, k))
        if k >= start:
            total = total + term
    return total


def _check_m(m, base):
    for row in m:
        for e in row:
            if e is not None and (e.depends_on("y") or e.depends_on("c")):
                raise ValueError("m entries must be y-free and c-free")


def circ(a, b, m, d_max=None):
    """a o b, truncated at Fedosov degree ``d_max`` (default: a's ring)."""
    a._check(b)
    base, dring = _doubling(a.ring, a.ring.ctx.d_max if d_max is None else d_max)
    _check_m(m, base)
    F = Element(dring, _mul_terms(dring, a.terms, _embed_right(b, dring).terms,
                                  min(a.validity, b.validity), dring.ctx.d_max),
                min(a.validity, b.validity))
    return _identify(_series(F, _operator(m, dring), 0), base)


def circ_commutator(a, b, m, d_max=None):
    """[a o, b] = a o b - (-1)^(eps_a eps_b + p_a p_b) b o a, bilinearly."""
    a._check(b)
    base, dring = _doubling(a.ring, a.ring.ctx.d_max if d_max is None else d_max)
    _check_m(m, base)
    v = min(a.validity, b.validity)
    F = Element(dring, _mul_terms(dring, a.terms, _embed_right(b, dring).terms, v, dring.ctx.d_max), v)
    forward = _series(F, _operator(m, dring), 1)
    backward = _series(F, _operator(m, dring, transpose=True), 1)
    return _identify(forward - backward, base)


def circ_commutator_naive(a, b, m, d_max=None):
    """Reference commutator summed over homogeneous components of a and b."""
    ring = a.ring if d_max is None else a.ring.with_degree(d_max)
    a, b = a.rebind(ring), b.rebind(ring)
    out = ring.zero()
    for (ea, pa), ca in a.homogeneous_components().items():
        for (eb, pb), cb in b.homogeneous_components().items():
            t = circ(ca, cb, m) - circ(cb, ca, m).scale(-1 if (ea * eb + pa * pb) & 1 else 1)
            out = out + t
    return out


_MINUS_I = Scalar(0, -1)


def div_ihbar(a):
    """Divide by i*hbar exactly; every term must carry hbar."""
    out = {}
    for k, c in a.terms.items():
        if not k & _FIELD:
            raise HbarDivisionError("term without hbar cannot be divided by i*hbar")
        out[k - 1] = c * _MINUS_I
    return Element(a.ring, out, a.validity)


def ihbar_bracket(a, b, m):
    """(1/(i hbar)) [a o, b], exact through a's truncation degree.

    The commutator is taken with two degrees of headroom so that dividing by
    hbar does not expose truncated terms.
    """
    d = a.ring.ctx.d_max
    return div_ihbar(circ_commutator(a, b, m, d_max=d + 2)).rebind(a.ring)
