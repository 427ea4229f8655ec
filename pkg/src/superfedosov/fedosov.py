"""The deformed connection D, the deformation one-form r, the flattening map
Q onto horizontal sections, and the induced star product.

Both solvers are whole-element fixed points. Iteration t of the r-solver
leaves r exact through Fedosov degree t + 3, so it runs on a ring truncated
there (progressive truncation); the quantizer gains one degree per step the
same way. Each right-hand side is checked for delta-closedness on the
degrees it is already exact in.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .calculus import delta, delta_inv, delta_star, nabla
from .errors import NoConvergenceError, ValidationError
from .geometry import abelian_form, derive_structures, riemann, validate
from .graded_algebra import project_fedosov, substitute_zero
from .moyal import circ, ihbar_bracket

__all__ = [
    "AbelianTwoForm",
    "DeformationOneForm",
    "FlatConnection",
    "HorizontalSection",
    "flat_connection",
    "solve_r",
    "apply_D",
    "check_flatness",
    "quantize",
    "dequantize",
    "star",
    "star_commutator",
]

_HALF = Fraction(1, 2)


def _upto(a, n):
    return a.filter(lambda inf: inf[0] <= n)


@dataclass
class AbelianTwoForm:
    C: object

    @classmethod
    def from_spec(cls, spec):
        return cls(abelian_form(spec))


@dataclass
class DeformationOneForm:
    r: object
    spec: object
    C: object
    iterations: int = 0
    closed_history: list = field(default_factory=list)  # one bool per right-hand side

    def sector(self, n):
        return project_fedosov(self.r, n)


@dataclass
class FlatConnection:
    spec: object
    derived: object
    curvature: object
    r: DeformationOneForm
    C: AbelianTwoForm
    sections: dict = field(default_factory=dict, repr=False, compare=False)  # symbol key -> HorizontalSection

    @property
    def ring(self):
        return self.spec.ring

    @property
    def m(self):
        return self.spec.m_entries


@dataclass
class HorizontalSection:
    a: object
    symbol: object
    iterations: int = 0


def solve_r(spec, derived=None, curvature=None, C=None):
    """Unique r with delta* r = 0, r_(0..2) = 0 solving
    delta r = R + C + nabla r + (1/2 i hbar)[r o, r] through d_max."""
    ring = spec.ring
    d_max = ring.ctx.d_max
    derived = derived or derive_structures(spec)
    curvature = curvature or riemann(spec, derived)
    C = C or AbelianTwoForm.from_spec(spec)
    source = curvature.curvature_hamiltonian + C.C
    conn = derived.connection
    m = spec.m_entries
    r = ring.zero()
    history = []
    for t in range(d_max + 1):
        deg = min(d_max, t + 3)
        sub = ring.with_degree(deg)
        rs = r.rebind(sub)
        msub = [[e.rebind(sub) for e in row] for row in m]
        rhs = source.rebind(sub) + nabla(rs, conn)
        if not rs.is_zero():
            rhs = rhs + ihbar_bracket(rs, rs, msub).scale(_HALF)
        closed = delta(_upto(rhs, t + 2)).is_zero()
        history.append(closed)
        if not closed:
            raise ValidationError("r right-hand side delta-closed", ("iteration", t), "right-hand side is not delta-closed")
        new = delta_inv(rhs).rebind(ring)
        if deg == d_max and (new - r.rebind(ring)).is_zero():
            return DeformationOneForm(new, spec, C, t + 1, history)
        r = new
    raise NoConvergenceError(f"r iteration did not stabilize within {d_max + 1} steps")


def flat_connection(spec, check=True):
    """Validate, derive, compute curvature and solve for r."""
    derived = derive_structures(spec)
    if check:
        validate(spec, derived).raise_if_failed(spec.coords.names)
    curv = riemann(spec, derived)
    C = AbelianTwoForm.from_spec(spec)
    r = solve_r(spec, derived, curv, C)
    return FlatConnection(spec, derived, curv, r, C)


def apply_D(fc, a):
    """D a = nabla a - delta a + (1/i hbar)[r o, a]; exact through d_max - 1."""
    out = nabla(a, fc.derived.connection) - delta(a)
    if not fc.r.r.is_zero():
        out = out + ihbar_bracket(fc.r.r.rebind(a.ring), a, fc.m)
    return out


def curvature_residual(fc):
    """R_D + C + omega, which must vanish through degree d_max - 1."""
    r = fc.r.r
    conn = fc.derived.connection
    R = fc.curvature.curvature_hamiltonian
    out = R + nabla(r, conn) - delta(r) + fc.C.C
    if not r.is_zero():
        out = out + ihbar_bracket(r, r, fc.m).scale(_HALF)
    return out


def check_flatness(fc, samples=()):
    from .geometry import ValidationReport

    d_max = fc.ring.ctx.d_max
    rep = ValidationReport()
    res = _upto(curvature_residual(fc), d_max - 1)
    rep.add("R_D + C + omega = 0", None if res.is_zero() else ())
    r = fc.r.r
    rep.add("r_(0..2) = 0", None if _upto(r, 2).is_zero() else ())
    rep.add("delta* r = 0", None if delta_star(r).is_zero() else ())
    for idx, a in enumerate(samples):
        dd = _upto(apply_D(fc, apply_D(fc, a)), d_max - 2)
        rep.add(f"D^2 = 0 sample {idx}", None if dd.is_zero() else ("sample", idx))
    return rep


def quantize(fc, f):
    """Horizontal section a with a|_(y=0) = f."""
    if f.depends_on("y") or f.depends_on("c"):
        raise ValueError("symbols must be y-free and c-free")
    ring = fc.ring
    f = f.rebind(ring)
    key = (frozenset(f.terms.items()), f.validity)
    hit = fc.sections.get(key)
    if hit is not None:
        return hit
    d_max = ring.ctx.d_max
    conn = fc.derived.connection
    r = fc.r.r
    a = f
    for t in range(d_max + 1):
        deg = min(d_max, t + 1)
        sub = ring.with_degree(deg)
        asub = a.rebind(sub)
        rhs = nabla(asub, conn)
        if not r.is_zero():
            msub = [[e.rebind(sub) for e in row] for row in fc.m]
            rhs = rhs + ihbar_bracket(r.rebind(sub), asub, msub)
        # (1/i hbar)[r o, a] in degree n needs r_(n+1), so degree d_max is not certified
        if not delta(_upto(rhs, min(t, d_max - 1))).is_zero():
            raise ValidationError("quantize right-hand side delta-closed", ("iteration", t), "right-hand side is not delta-closed")
        new = (f.rebind(sub) + delta_inv(rhs)).rebind(ring)
        if deg == d_max and (new - a).is_zero():
            fc.sections[key] = HorizontalSection(new, f, t + 1)
            return fc.sections[key]
        a = new
    raise NoConvergenceError(f"horizontal-section iteration did not stabilize within {d_max + 1} steps")


def dequantize(a):
    a = a.a if isinstance(a, HorizontalSection) else a
    return substitute_zero(substitute_zero(a, "Y"), "C")


def star(fc, f, g):
    """f * g = Q^-1(Q(f) o Q(g)), exact to hbar^floor(d_max/2)."""
    qa = quantize(fc, f).a
    qb = quantize(fc, g).a
    return dequantize(circ(qa, qb, fc.m))


def star_commutator(fc, f, g):
    out = fc.ring.zero()
    f, g = f.rebind(fc.ring), g.rebind(fc.ring)
    for (ef, pf), fh in f.homogeneous_components().items():
        for (eg, pg), gh in g.homogeneous_components().items():
            t = star(fc, fh, gh) - star(fc, gh, fh).scale(-1 if ef * eg else 1)
            out = out + t
    return out
