"""Derivations and homotopy operators on algebra elements."""

from fractions import Fraction

from .errors import JetExhaustedError
from .graded_algebra import INF, C, Element, X, Y, deriv_slot, project_bidegree

__all__ = [
    "deriv_left",
    "deriv_right",
    "exterior_d",
    "delta",
    "delta_star",
    "delta_inv",
    "Connection",
    "nabla",
    "nabla_i",
    "nabla_full",
    "torsion_sector",
    "poisson",
]


def deriv_left(a, g):
    return deriv_slot(a, a.ring.slot(g), "left")


def deriv_right(a, g):
    return deriv_slot(a, a.ring.slot(g), "right")


def _sum(ring, parts):
    out = ring.zero()
    for p in parts:
        out = out + p
    return out


def exterior_d(a):
    """de Rham differential c^i d/dx^i (left derivatives)."""
    ring = a.ring
    if a.validity == 0 and a.terms and any(ring.evenx):
        raise JetExhaustedError("exterior derivative of a jet with validity 0")
    out = ring.zero()
    if a.validity < INF and any(ring.evenx):
        out = out.with_validity(a.validity - 1)
    for i in range(ring.n):
        out = out + ring.c(i) * deriv_left(a, X(i))
    return out


def delta(a):
    """Koszul-Tate differential c^i d/dy^i."""
    ring = a.ring
    out = Element(ring, {}, a.validity)
    for i in range(ring.n):
        out = out + ring.c(i) * deriv_left(a, Y(i))
    return out


def delta_star(a):
    """Contraction y^j d/dc^j."""
    ring = a.ring
    out = Element(ring, {}, a.validity)
    for j in range(ring.n):
        out = out + ring.y(j) * deriv_left(a, C(j))
    return out


def delta_inv(a):
    """Homotopy operator: delta_star / (m + n) on each A_mn, zero on A_00."""
    ring = a.ring
    bidegrees = sorted({(inf[2], inf[3]) for inf in map(ring.info, a.terms)})
    out = Element(ring, {}, a.validity)
    for m, n in bidegrees:
        if m == 0:
            continue  # delta_star annihilates c-free parts, including A_00
        out = out + delta_star(project_bidegree(a, m, n)).scale(Fraction(1, m + n))
    return out


class Connection:
    """Christoffel data prepared for the coordinate-free operators.

    ``christoffel`` maps (k, i, j) to Gamma^k_ij. The reordered symbol
    Gamma_i^k_j = (-1)^(eps_i eps_k) Gamma^k_ij is what the operators use.
    """

    def __init__(self, ring, christoffel):
        self.ring = ring
        eps = ring.coords.parities
        self.reordered = {}
        for (k, i, j), g in christoffel.items():
            if not g.is_zero():
                self.reordered[(i, k, j)] = g if not (eps[i] and eps[k]) else -g
        self._cache = {}

    def _for(self, ring):
        """Per-ring precomputed operator pieces."""
        try:
            return self._cache[ring]
        except KeyError:
            pass
        n = ring.n
        # y-sector: G_k = sum_ij c^i Gamma_i^k_j y^j ; per i: H_ik = sum_j Gamma_i^k_j y^j
        G = [ring.zero() for _ in range(n)]
        Hy = {}
        Hc = {}
        for (i, k, j), g in sorted(self.reordered.items()):
            g = g.rebind(ring)
            G[k] = G[k] + ring.c(i) * g * ring.y(j)
            Hy[(i, k)] = Hy.get((i, k), ring.zero()) + g * ring.y(j)
            Hc[(i, k)] = Hc.get((i, k), ring.zero()) + g * ring.c(j)
        pieces = (G, Hy, Hc)
        self._cache[ring] = pieces
        return pieces

    def is_flat_zero(self):
        return not self.reordered


def nabla(a, conn):
    """Torsion-free composite connection d - c^i Gamma_i^k_j y^j d/dy^k."""
    out = exterior_d(a)
    if conn is None or conn.is_flat_zero():
        return out
    G = conn._for(a.ring)[0]
    for k, gk in enumerate(G):
        if not gk.is_zero():
            out = out - gk * deriv_left(a, Y(k))
    return out


def nabla_i(a, i, conn):
    """Full covariant derivative along x^i, acting on x, c and y."""
    out = deriv_left(a, X(i))
    if conn is None or conn.is_flat_zero():
        return out
    _, Hy, Hc = conn._for(a.ring)
    for (ii, k), h in Hc.items():
        if ii == i:
            out = out - h * deriv_left(a, C(k))
    for (ii, k), h in Hy.items():
        if ii == i:
            out = out - h * deriv_left(a, Y(k))
    return out


def nabla_full(a, conn):
    """c^i nabla_i with the full realization (includes the c-sector term)."""
    ring = a.ring
    out = ring.zero()
    for i in range(ring.n):
        out = out + ring.c(i) * nabla_i(a, i, conn)
    return out


def torsion_sector(a, conn):
    """The c-sector piece c^i Gamma_i^k_j c^j d/dc^k a, which vanishes
    identically for a torsion-free connection."""
    ring = a.ring
    out = ring.zero()
    if conn is None or conn.is_flat_zero():
        return out
    _, _, Hc = conn._for(ring)
    for (i, k), h in Hc.items():
        out = out + ring.c(i) * h * deriv_left(a, C(k))
    return out


def poisson(a, b, omega_up):
    """{a, b} = (a <-d/dy^i) omega^ij (d/dy^j -> b)."""
    ring = a.ring
    n = ring.n
    right = [deriv_right(a, Y(i)) for i in range(n)]
    left = [deriv_left(b, Y(j)) for j in range(n)]
    out = Element(ring, {}, min(a.validity, b.validity))
    for i in range(n):
        if right[i].is_zero():
            continue
        for j in range(n):
            w = omega_up[i][j]
            if w.is_zero() or left[j].is_zero():
                continue
            out = out + right[i] * w.rebind(ring) * left[j]
    return out
