"""Supercommutative algebra generated by hbar, x^i, c^i = dx^i and y^i.

Every generator carries a bidegree (Grassmann parity, form degree) and a
Fedosov degree:

    generator   parity   form   Fedosov
    x^i         eps_i    0      0
    c^i         eps_i    1      0
    y^i         eps_i    0      1
    hbar        0        0      2

Transposing two adjacent generators u, v costs (-1)^(eps_u eps_v + p_u p_v).
A generator whose total parity eps + p is odd squares to zero.

Representation
--------------
A monomial is stored as a packed ``int`` with one 8-bit exponent field per
generator slot, in the fixed canonical order

    hbar < x^0..x^{n-1} < c^0..c^{n-1} < y^0..y^{n-1} [< ybar^0..ybar^{n-1}]

(the trailing ``ybar`` block exists only in the doubled ring used by the
fiberwise product). An :class:`Element` is a dict ``packed monomial ->
Scalar`` plus a jet validity: the even-x total degree up to which its
coefficients are trusted (``math.inf`` for exact polynomials).

Even coordinates enter as deviations from the chart basepoint. Odd
coordinates are nilpotent generators.
"""

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .scalar import Scalar, as_scalar

__all__ = [
    "INF",
    "CoordinateSystem",
    "TruncationContext",
    "Generator",
    "HBAR",
    "X",
    "C",
    "Y",
    "Ring",
    "Element",
    "normalize",
    "add",
    "mul",
    "gradings",
    "project_bidegree",
    "project_fedosov",
    "substitute_zero",
]

INF = math.inf

_BITS = 8
_FIELD = (1 << _BITS) - 1

#: Kernel mutation used by the mutation-testing hook of ``verify``.
#: ``koszul_p`` drops the form-degree part of the transposition sign in
#: products; ``deriv_right`` drops the sign picked up by right derivatives
#: when the stripped factor passes the factors to its right.
MUTATION = os.environ.get("SUPERFEDOSOV_MUTATION", "")


@dataclass(frozen=True)
class CoordinateSystem:
    """Chart coordinates with Grassmann parities and an even basepoint."""

    names: tuple
    parities: tuple
    basepoint: tuple  # Fraction per even coordinate, None per odd one

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("coordinate names must be unique")
        if len(self.parities) != len(self.names) or len(self.basepoint) != len(self.names):
            raise ValueError("names, parities and basepoint must have equal length")
        for eps, b in zip(self.parities, self.basepoint):
            if eps not in (0, 1):
                raise ValueError("parities must be 0 or 1")
            if (eps == 0) != (b is not None):
                raise ValueError("basepoint is defined exactly for the even coordinates")

    @classmethod
    def build(cls, even=(), odd=(), basepoint=None):
        basepoint = basepoint or {}
        unknown = set(basepoint) - set(even)
        if unknown:
            raise ValueError(f"basepoint given for non-even coordinates: {sorted(unknown)}")
        names = tuple(even) + tuple(odd)
        parities = (0,) * len(even) + (1,) * len(odd)
        base = tuple(Fraction(basepoint.get(n, 0)) for n in even) + (None,) * len(odd)
        return cls(names, parities, base)

    @property
    def dim(self):
        return len(self.names)

    def index(self, name):
        return self.names.index(name)


@dataclass(frozen=True)
class TruncationContext:
    d_max: int
    jet_order: int = 4

    def __post_init__(self):
        if self.d_max < 0 or self.jet_order < 0:
            raise ValueError("d_max and jet_order must be non-negative")


@dataclass(frozen=True)
class Generator:
    """One of ``hbar``, ``x``, ``c``, ``y`` (the latter three indexed)."""

    kind: str
    index: int = -1

    def parity(self, coords):
        return 0 if self.kind == "hbar" else coords.parities[self.index]

    def form_degree(self):
        return 1 if self.kind == "c" else 0

    def fedosov_degree(self):
        return {"hbar": 2, "y": 1}.get(self.kind, 0)


HBAR = Generator("hbar")


def X(i):
    return Generator("x", i)


def C(i):
    return Generator("c", i)


def Y(i):
    return Generator("y", i)


class Ring:
    """Slot tables and truncation for one coordinate system.

    Use :meth:`Ring.get` so that equal rings are shared.
    """

    def __init__(self, coords, ctx, doubled=False):
        self.coords = coords
        self.ctx = ctx
        self.doubled = doubled
        n = coords.dim
        self.n = n
        kinds = [("hbar", -1)] + [("x", i) for i in range(n)] + [("c", i) for i in range(n)]
        kinds += [("y", i) for i in range(n)]
        if doubled:
            kinds += [("ybar", i) for i in range(n)]
        self.kinds = tuple(kinds)
        self.nslots = len(kinds)
        eps, form, deg, nil, evenx = [], [], [], [], []
        for kind, i in kinds:
            e = 0 if kind == "hbar" else coords.parities[i]
            p = 1 if kind == "c" else 0
            eps.append(e)
            form.append(p)
            deg.append({"hbar": 2, "y": 1, "ybar": 1}.get(kind, 0))
            nil.append((e + p) % 2 == 1)
            evenx.append(kind == "x" and e == 0)
        self.eps = tuple(eps)
        self.form = tuple(form)
        self.deg = tuple(deg)
        self.nil = tuple(nil)
        self.evenx = tuple(evenx)
        self.y0 = 1 + 2 * n
        self._info = {}

    @staticmethod
    @lru_cache(maxsize=None)
    def get(coords, ctx, doubled=False):
        return Ring(coords, ctx, doubled)

    def with_degree(self, d_max):
        if d_max == self.ctx.d_max:
            return self
        return Ring.get(self.coords, TruncationContext(d_max, self.ctx.jet_order), self.doubled)

    def doubled_ring(self):
        return Ring.get(self.coords, self.ctx, True)

    def base_ring(self):
        return Ring.get(self.coords, self.ctx, False)

    # eq/hash by value so that rings from different sources interoperate
    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, Ring)
            and self.coords == other.coords
            and self.ctx == other.ctx
            and self.doubled == other.doubled
        )

    def __hash__(self):
        return hash((self.coords, self.ctx, self.doubled))

    def __repr__(self):
        return f"Ring({list(self.coords.names)}, d_max={self.ctx.d_max}{', doubled' if self.doubled else ''})"

    # -- slots and packing ------------------------------------------------

    def slot(self, g):
        i = g.index
        if g.kind == "hbar":
            return 0
        if not 0 <= i < self.n:
            raise ValueError(f"generator index {i} out of range")
        return {"x": 1, "c": 1 + self.n, "y": 1 + 2 * self.n, "ybar": 1 + 3 * self.n}[g.kind] + i

    def generator(self, s):
        kind, i = self.kinds[s]
        return Generator(kind, i)

    def pack(self, exps):
        key = 0
        for s, e in enumerate(exps):
            if e:
                if not 0 < e <= _FIELD:
                    raise OverflowError("monomial exponent out of range")
                key |= e << (_BITS * s)
        return key

    def unpack(self, key):
        return tuple((key >> (_BITS * s)) & _FIELD for s in range(self.nslots))

    def info(self, key):
        """(fedosov deg, even-x deg, form deg, y deg, eps mask, p mask,
        nil mask, eps prefix mask, p prefix mask, parity) of a monomial."""
        try:
            return self._info[key]
        except KeyError:
            pass
        fdeg = xdeg = pdeg = ydeg = 0
        em = pm = nm = epre = ppre = 0
        run_e = run_p = 0
        parity = 0
        k = key
        for s in range(self.nslots):
            e = k & _FIELD
            k >>= _BITS
            bit = 1 << s
            if run_e:
                epre |= bit
            if run_p:
                ppre |= bit
            if not e:
                continue
            fdeg += e * self.deg[s]
            if self.evenx[s]:
                xdeg += e
            if self.form[s]:
                pdeg += e
            if s >= self.y0:
                ydeg += e
            if self.eps[s] and e & 1:
                em |= bit
                run_e ^= 1
                parity ^= 1
            if self.form[s] and e & 1:
                pm |= bit
                run_p ^= 1
            if self.nil[s]:
                nm |= bit
        out = (fdeg, xdeg, pdeg, ydeg, em, pm, nm, epre, ppre, parity)
        self._info[key] = out
        return out

    def exponent(self, key, s):
        return (key >> (_BITS * s)) & _FIELD

    # -- constructors -----------------------------------------------------

    def element(self, terms, validity=INF):
        return Element(self, terms, validity)

    def zero(self):
        return Element(self, {}, INF)

    def one(self):
        return self.const(1)

    def const(self, value):
        s = as_scalar(value)
        return Element(self, {0: s} if s else {}, INF)

    def gen(self, g, coef=1):
        return normalize([g], coef, self)

    def hbar(self):
        return self.gen(HBAR)

    def x(self, i):
        return self.gen(X(i))

    def c(self, i):
        return self.gen(C(i))

    def y(self, i):
        return self.gen(Y(i))

    def monomial(self, exps, coef=1):
        """Single canonical term from an exponent tuple over the slots."""
        key = self.pack(exps)
        for s, e in enumerate(exps):
            if e > 1 and self.nil[s]:
                return self.zero()
        return self.element({key: as_scalar(coef)}).truncated()


class Element:
    """Finite sum of canonical monomials with Gaussian-rational coefficients.

    Treat instances as immutable.
    """

    __slots__ = ("ring", "terms", "validity")

    def __init__(self, ring, terms, validity=INF):
        self.ring = ring
        self.terms = terms
        self.validity = validity

    # -- basic protocol ---------------------------------------------------

    def is_zero(self):
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def coefficient(self, exps):
        return self.terms.get(self.ring.pack(exps), Scalar(0))

    def monomials(self):
        """List of (exponent tuple, Scalar) in canonical key order."""
        return [(self.ring.unpack(k), v) for k, v in sorted(self.terms.items())]

    def _check(self, other):
        if self.ring is not other.ring and self.ring != other.ring:
            raise ValueError(f"incompatible rings {self.ring} and {other.ring}")

    def __add__(self, other):
        if not isinstance(other, Element):
            other = self.ring.const(other)
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return Element(self.ring, {k: -v for k, v in self.terms.items()}, self.validity)

    def __sub__(self, other):
        if not isinstance(other, Element):
            other = self.ring.const(other)
        return add(self, -other)

    def __rsub__(self, other):
        return self.ring.const(other) - self

    def __mul__(self, other):
        if isinstance(other, Element):
            return mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if isinstance(other, Element):
            return (self - other).is_zero()
        if isinstance(other, (int, Fraction, Scalar)):
            return (self - self.ring.const(other)).is_zero()
        return NotImplemented

    __hash__ = None

    def __str__(self):
        from .expressions import format_element

        return format_element(self)

    def __repr__(self):
        return f"<Element {self}>"

    # -- structural helpers -----------------------------------------------

    def scale(self, value):
        s = as_scalar(value)
        if not s:
            return Element(self.ring, {}, self.validity)
        return Element(self.ring, {k: v * s for k, v in self.terms.items()}, self.validity)

    def filter(self, keep):
        """Terms whose monomial info tuple satisfies ``keep(info)``."""
        info = self.ring.info
        return Element(self.ring, {k: v for k, v in self.terms.items() if keep(info(k))}, self.validity)

    def truncated(self, d_max=None, validity=None):
        d = self.ring.ctx.d_max if d_max is None else d_max
        v = self.validity if validity is None else min(validity, self.validity)
        info = self.ring.info
        terms = {}
        for k, c in self.terms.items():
            inf = info(k)
            if inf[0] <= d and inf[1] <= v:
                terms[k] = c
        return Element(self.ring, terms, v)

    def with_validity(self, v):
        return self.truncated(validity=v) if v < self.validity else Element(self.ring, self.terms, v)

    def rebind(self, ring):
        """Same terms over a ring with the same coordinates (other d_max)."""
        if ring is self.ring:
            return self
        if ring.coords != self.ring.coords or ring.doubled != self.ring.doubled:
            raise ValueError("rebind requires identical coordinate layout")
        return Element(ring, self.terms, self.validity).truncated()

    def hbar_order(self, k):
        """Coefficient of hbar^k, as an hbar-free element."""
        shift = k  # hbar occupies slot 0, the lowest field
        out = {}
        for key, c in self.terms.items():
            if key & _FIELD == k:
                out[key - shift] = c
        return Element(self.ring, out, self.validity)

    def max_hbar(self):
        return max((k & _FIELD for k in self.terms), default=0)

    def degrees(self):
        """Sorted set of Fedosov degrees present."""
        info = self.ring.info
        return sorted({info(k)[0] for k in self.terms})

    def homogeneous_components(self):
        """Split by (parity, form degree mod 2)."""
        info = self.ring.info
        parts = {}
        for k, c in self.terms.items():
            inf = info(k)
            parts.setdefault((inf[9], inf[2] & 1), {})[k] = c
        return {t: Element(self.ring, d, self.validity) for t, d in sorted(parts.items())}

    def parity(self):
        """Grassmann parity if homogeneous (zero counts as even), else None."""
        vals = {self.ring.info(k)[9] for k in self.terms}
        return vals.pop() if len(vals) == 1 else (0 if not vals else None)

    def form_degree(self):
        vals = {self.ring.info(k)[2] for k in self.terms}
        return vals.pop() if len(vals) == 1 else (0 if not vals else None)

    def depends_on(self, kind):
        slots = [s for s, (k, _) in enumerate(self.ring.kinds) if k == kind]
        return any(self.ring.exponent(key, s) for key in self.terms for s in slots)


# -- module-level operations ---------------------------------------------


def normalize(word, coef, ring):
    """Canonical single-term element of the product of ``word`` times ``coef``.

    Sorts by adjacent transpositions, collecting (-1)^(eps_u eps_v + p_u p_v)
    per swap of distinct generators; a repeated self-annihilating generator
    gives zero.
    """
    slots = [ring.slot(g) for g in word]
    sign = 1
    # bubble sort; stable for equal slots (no sign from commuting a generator with itself)
    for end in range(len(slots) - 1, 0, -1):
        for j in range(end):
            u, v = slots[j], slots[j + 1]
            if u > v:
                slots[j], slots[j + 1] = v, u
                if (ring.eps[u] * ring.eps[v] + ring.form[u] * ring.form[v]) & 1:
                    sign = -sign
    exps = [0] * ring.nslots
    for s in slots:
        exps[s] += 1
    for s, e in enumerate(exps):
        if e > 1 and ring.nil[s]:
            return ring.zero()
    c = as_scalar(coef)
    if sign < 0:
        c = -c
    if not c:
        return ring.zero()
    return Element(ring, {ring.pack(exps): c}, INF).truncated()


def add(a, b):
    a._check(b)
    v = min(a.validity, b.validity)
    terms = dict(a.terms)
    for k, c in b.terms.items():
        s = terms.get(k)
        if s is None:
            terms[k] = c
        else:
            s = s + c
            if s:
                terms[k] = s
            else:
                del terms[k]
    out = Element(a.ring, terms, v)
    if v < INF and (v < a.validity or v < b.validity):
        out = out.truncated()
    return out


def mul(a, b):
    """Supercommutative product with Fedosov-degree and jet truncation."""
    a._check(b)
    ring = a.ring
    v = min(a.validity, b.validity)
    return Element(ring, _mul_terms(ring, a.terms, b.terms, v, ring.ctx.d_max), v)


def _mul_terms(ring, ta, tb, v, d_max):
    info = ring.info
    out = {}
    get = out.get
    drop_p = MUTATION == "koszul_p"
    binfo = [(kb, cb, info(kb)) for kb, cb in tb.items()]
    for ka, ca in ta.items():
        ia = info(ka)
        fa, xa, nila, ema, pma = ia[0], ia[1], ia[6], ia[4], ia[5]
        for kb, cb, ib in binfo:
            if fa + ib[0] > d_max or xa + ib[1] > v or nila & ib[6]:
                continue
            odd = (ema & ib[7]).bit_count()
            if not drop_p:
                odd += (pma & ib[8]).bit_count()
            c = ca * cb
            if odd & 1:
                c = -c
            k = ka + kb
            s = get(k)
            if s is None:
                out[k] = c
            else:
                s = s + c
                if s:
                    out[k] = s
                else:
                    del out[k]
    return out


def gradings(a):
    """Per-term (exponents, parity, form degree, Fedosov degree) plus the
    element-level triple (None where terms disagree)."""
    rows = []
    for k in sorted(a.terms):
        inf = a.ring.info(k)
        rows.append((a.ring.unpack(k), inf[9], inf[2], inf[0]))
    common = []
    for col in (1, 2, 3):
        vals = {r[col] for r in rows}
        common.append(vals.pop() if len(vals) == 1 else None)
    return {"terms": rows, "parity": common[0], "form_degree": common[1], "fedosov_degree": common[2]}


def project_bidegree(a, m, n):
    """Terms with form degree m and y-degree n."""
    return a.filter(lambda inf: inf[2] == m and inf[3] == n)


def project_fedosov(a, n):
    return a.filter(lambda inf: inf[0] == n)


def substitute_zero(a, kind):
    """Drop every term containing a generator of class ``kind`` ('Y' or 'C')."""
    kind = {"Y": "y", "C": "c"}.get(kind, kind)
    ring = a.ring
    slots = [s for s, (k, _) in enumerate(ring.kinds) if k == kind or (kind == "y" and k == "ybar")]
    mask = 0
    for s in slots:
        mask |= _FIELD << (_BITS * s)
    return Element(ring, {k: c for k, c in a.terms.items() if not k & mask}, a.validity)


def deriv_slot(a, s, side="left"):
    """Graded partial derivative with respect to the generator in slot ``s``.

    ``left``: commute one factor to the far left, strip it. ``right``: commute
    it to the far right, strip it. The factor is multiplied by its exponent.
    Even-x derivatives lower the jet validity by one.
    """
    ring = a.ring
    shift = _BITS * s
    one = 1 << shift
    bit = 1 << s
    above = ~((bit << 1) - 1)
    es, ps = ring.eps[s], ring.form[s]
    skip_pass = side == "right" and MUTATION == "deriv_right"
    v = a.validity
    if ring.evenx[s] and v < INF:
        if v <= 0:
            if a.terms:
                from .errors import JetExhaustedError

                raise JetExhaustedError("x-derivative of a jet with validity 0")
            return Element(ring, {}, v)
        v = v - 1
    info = ring.info
    out = {}
    for k, c in a.terms.items():
        e = (k >> shift) & _FIELD
        if not e:
            continue
        inf = info(k)
        if side == "left":
            odd = (1 if es and inf[7] & bit else 0) + (1 if ps and inf[8] & bit else 0)
        elif skip_pass:
            odd = 0
        else:
            odd = 0
            if es:
                odd += (inf[4] & above).bit_count()
            if ps:
                odd += (inf[5] & above).bit_count()
        c = c * e if e != 1 else c
        if odd & 1:
            c = -c
        out[k - one] = c
    return Element(ring, out, v)
