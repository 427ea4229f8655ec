"""Independent computations used to certify the main engine.

Everything here works on explicit generator words and goes through
:func:`normalize` only: products concatenate words, derivatives walk a
factor through its neighbours one transposition at a time. Nothing from the
fiberwise product, the product kernel's sign masks or the fast derivative
path is used.
"""

import itertools
from fractions import Fraction

from .geometry import ValidationReport
from .graded_algebra import C, CoordinateSystem, Generator, Ring, TruncationContext, X, Y, deriv_slot, normalize
from .scalar import Scalar

__all__ = ["flat_star", "word_product", "word_deriv", "enumerate_check_derivatives", "enumerate_check_products"]


def _words(a):
    """(word, coefficient) pairs of an Element, words in canonical order."""
    ring = a.ring
    out = []
    for key, c in a.terms.items():
        word = []
        for s, e in enumerate(ring.unpack(key)):
            word.extend([ring.generator(s)] * e)
        out.append((word, c))
    return out


def _from_words(ring, pairs):
    out = ring.zero()
    for word, c in pairs:
        if c:
            out = out + normalize(word, c, ring)
    return out


def _swap_sign(ring, g, h):
    s, t = ring.slot(g), ring.slot(h)
    return (ring.eps[s] * ring.eps[t] + ring.form[s] * ring.form[t]) & 1


def word_product(a, b):
    """a * b by word concatenation and normalization."""
    ring = a.ring
    return _from_words(ring, [(wa + wb, ca * cb) for wa, ca in _words(a) for wb, cb in _words(b)])


def word_deriv(a, g, side="left"):
    """Graded derivative by explicit transpositions along each word."""
    ring = a.ring
    pairs = []
    for word, c in _words(a):
        for pos, h in enumerate(word):
            if h != g:
                continue
            others = word[:pos] if side == "left" else word[pos + 1 :]
            odd = sum(_swap_sign(ring, g, w) for w in others)
            rest = word[:pos] + word[pos + 1 :]
            pairs.append((rest, -c if odd & 1 else c))
    return _from_words(ring, pairs)


def flat_star(f, g, m_const):
    """Moyal-type product in the x-variables for constant m.

    Sum over k of (i hbar / 2)^k / k! times the k-fold iterate of the
    bidifferential operator u (x) v -> sum_jl (u <-d/dx^j) (x) m^jl (d/dx^l v),
    kept as a list of tensor pairs until the final multiplication.
    """
    ring = f.ring
    n = ring.n
    m = [[Scalar(0) if e is None else (e if isinstance(e, Scalar) else Scalar(e)) for e in row] for row in m_const]
    mel = [[ring.const(m[j][l]) for l in range(n)] for j in range(n)]
    half_ih = ring.hbar().scale(Scalar(0, Fraction(1, 2)))
    pairs = [(f, g)]
    total = word_product(f, g)
    k = 0
    while pairs:
        k += 1
        nxt = []
        for u, v in pairs:
            for j in range(n):
                du = word_deriv(u, X(j), "right")
                if du.is_zero():
                    continue
                for l in range(n):
                    if not m[j][l]:
                        continue
                    dv = word_deriv(v, X(l), "left")
                    if dv.is_zero():
                        continue
                    nxt.append((du, word_product(mel[j][l], dv)))
        pairs = nxt
        if not pairs:
            break
        coef = ring.one()
        for _ in range(k):
            coef = word_product(coef, half_ih)
        coef = coef.scale(Fraction(1, _fact(k)))
        if coef.is_zero():
            break
        for u, v in pairs:
            total = total + word_product(coef, word_product(u, v))
    return total


def _fact(k):
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def _monomials(ring, max_len):
    """All canonical monomials over x, c, y of total length <= max_len."""
    slots = list(range(1, ring.nslots))
    for length in range(1, max_len + 1):
        for combo in itertools.combinations_with_replacement(slots, length):
            exps = [0] * ring.nslots
            for s in combo:
                exps[s] += 1
            if any(e > 1 and ring.nil[s] for s, e in enumerate(exps)):
                continue
            yield length, ring.monomial(exps)


def _audit_ring(max_len, even, odd):
    coords = CoordinateSystem.build([f"x{i + 1}" for i in range(even)], [f"t{i + 1}" for i in range(odd)])
    return Ring.get(coords, TruncationContext(max_len + 2))


def enumerate_check_products(max_len=2, even=1, odd=2):
    """Exhaustive sign audit of the product kernel: every pair of monomials
    of up to ``max_len`` factors multiplies like its concatenated word."""
    if max_len > 4:
        raise ValueError("max_len must be at most 4")
    ring = _audit_ring(2 * max_len, even, odd)
    monos = list(_monomials(ring, max_len))
    report = ValidationReport()
    witness = None
    for la, a in monos:
        for lb, b in monos:
            if a * b != word_product(a, b):
                witness = (la + lb, f"{a} * {b}")
                break
        if witness:
            break
    report.add("product = word computation", witness, "" if witness is None else f"length-{witness[0]} witness {witness[1]}")
    return report


def enumerate_check_derivatives(max_len=4, even=1, odd=2):
    """Exhaustive sign audit of the fast graded derivatives.

    For every monomial up to ``max_len`` factors and every generator: the fast
    left and right derivatives agree with explicit word computations; left
    derivatives satisfy graded Leibniz when the first factor is split off and
    right derivatives when the last one is. The first failure is reported with
    its monomial.
    """
    if max_len > 6:
        raise ValueError("max_len must be at most 6")
    ring = _audit_ring(max_len, even, odd)
    gens = [kind(i) for kind in (X, C, Y) for i in range(ring.n)]
    report = ValidationReport()
    fail = {}

    def note(name, length, mono):
        if name not in fail:
            fail[name] = (length, str(mono))

    for length, mono in _monomials(ring, max_len):
        words = _words(mono)
        (word, coef), = words
        for g in gens:
            s = ring.slot(g)
            dl = deriv_slot(mono, s, "left")
            dr = deriv_slot(mono, s, "right")
            if dl != word_deriv(mono, g, "left"):
                note("left derivative = word computation", length, mono)
            if dr != word_deriv(mono, g, "right"):
                note("right derivative = word computation", length, mono)
            if length < 2:
                continue
            head = normalize(word[:1], 1, ring)
            tail = normalize(word[1:], coef, ring)
            sign = -1 if _swap_sign(ring, g, word[0]) else 1
            lhs = deriv_slot(head, s, "left") * tail + (head * deriv_slot(tail, s, "left")).scale(sign)
            if dl != lhs:
                note("left Leibniz", length, mono)
            front = normalize(word[:-1], coef, ring)
            last = normalize(word[-1:], 1, ring)
            sign = -1 if _swap_sign(ring, g, word[-1]) else 1
            rhs = front * deriv_slot(last, s, "right") + (deriv_slot(front, s, "right") * last).scale(sign)
            if dr != rhs:
                note("right Leibniz", length, mono)
    for name in (
        "left derivative = word computation",
        "right derivative = word computation",
        "left Leibniz",
        "right Leibniz",
    ):
        w = fail.get(name)
        report.add(name, w, "" if w is None else f"length-{w[0]} witness {w[1]}")
    return report
