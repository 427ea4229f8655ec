"""Chart geometry: the tensor m, Christoffel symbols, the optional Abelian
two-form, everything derived from them, and the curvature apparatus.

Index conventions follow the component formulas literally. Tensors are
nested lists indexed from 0; Christoffel input is a dict ``(k, i, j) ->
Gamma^k_ij``. Products of components keep the written order, since odd
entries do not commute.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .calculus import Connection, delta, deriv_left, exterior_d, nabla, nabla_full, poisson, torsion_sector
from .errors import DegenerateError, JetExhaustedError, ValidationError
from .graded_algebra import INF, Ring, X
from .scalar import Scalar

__all__ = [
    "GeometrySpec",
    "DerivedStructures",
    "CurvatureData",
    "CheckResult",
    "ValidationReport",
    "derive_structures",
    "validate",
    "riemann",
    "check_curvature",
    "graded_inverse",
]

_HALF = Fraction(1, 2)


def _sgn(odd):
    return -1 if odd & 1 else 1


def _is_shape(e, parity):
    """y-free, c-free, every term of the given parity."""
    return not e.depends_on("y") and not e.depends_on("c") and all(
        e.ring.info(k)[9] == parity for k in e.terms
    )


@dataclass
class GeometrySpec:
    """User-level chart data. ``m`` is dim x dim; ``christoffel`` and
    ``abelian_C`` are sparse dicts of Elements over ``ring``."""

    coords: object
    m_entries: list
    christoffel: dict = field(default_factory=dict)
    abelian_C: dict = None
    truncation: object = None

    def __post_init__(self):
        n = self.coords.dim
        self.ring = Ring.get(self.coords, self.truncation)
        eps = self.coords.parities
        if len(self.m_entries) != n or any(len(row) != n for row in self.m_entries):
            raise ValueError(f"m must be a {n}x{n} matrix")
        self.m_entries = [[self._coerce(e) for e in row] for row in self.m_entries]
        for i in range(n):
            for j in range(n):
                if not _is_shape(self.m_entries[i][j], (eps[i] + eps[j]) % 2):
                    raise ValueError(f"m[{i + 1},{j + 1}] must be y/c-free with parity eps_i+eps_j")
        gam = {}
        for (k, i, j), g in self.christoffel.items():
            for t in (k, i, j):
                if not 0 <= t < n:
                    raise ValueError("Christoffel index out of range")
            g = self._coerce(g)
            if not _is_shape(g, (eps[i] + eps[j] + eps[k]) % 2):
                raise ValueError(f"Gamma[{k + 1},{i + 1},{j + 1}] must be y/c-free with parity eps_i+eps_j+eps_k")
            if not g.is_zero():
                gam[(k, i, j)] = g
        self.christoffel = gam
        if self.abelian_C is not None:
            cc = {}
            for (i, j), g in self.abelian_C.items():
                if not (0 <= i < n and 0 <= j < n):
                    raise ValueError("C index out of range")
                g = self._coerce(g)
                if not _is_shape(g, (eps[i] + eps[j]) % 2):
                    raise ValueError(f"C[{i + 1},{j + 1}] must be y/c-free with parity eps_i+eps_j")
                if not g.is_zero():
                    cc[(i, j)] = g
            self.abelian_C = cc

    def _coerce(self, e):
        if e is None:
            return self.ring.zero()
        if not hasattr(e, "terms"):
            return self.ring.const(e)
        return e.rebind(self.ring)

    @property
    def dim(self):
        return self.coords.dim

    def gamma(self, k, i, j):
        return self.christoffel.get((k, i, j)) or self.ring.zero()

    def C(self, i, j):
        if not self.abelian_C:
            return self.ring.zero()
        return self.abelian_C.get((i, j)) or self.ring.zero()

    def connection(self):
        return Connection(self.ring, self.christoffel)


@dataclass
class DerivedStructures:
    omega_up: list
    m_transpose: list
    g_up: list
    omega_down: list
    omega_tilde: list
    omega_form: object
    varpi: object
    gamma_reordered: dict
    gamma_lowered: dict
    connection: object
    omega0_up: list  # constant part of omega^ij, as Scalars


@dataclass
class CurvatureData:
    riemann_up: dict  # (n, i, j, k) -> R^n_ijk
    riemann_pair: dict  # (i, j, k, n) -> R_ij,kn
    curvature_hamiltonian: object


@dataclass
class CheckResult:
    name: str
    passed: bool
    witness: tuple = None
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def first_failure(self):
        return next((c for c in self.checks if not c.passed), None)

    def get(self, name):
        return next(c for c in self.checks if c.name == name)

    def add(self, name, witness=None, detail=""):
        self.checks.append(CheckResult(name, witness is None, witness, detail))

    def raise_if_failed(self, names=None):
        bad = self.first_failure()
        if bad is not None:
            w = bad.witness
            if names is not None and w is not None and all(isinstance(t, int) for t in w):
                w = "(" + ",".join(names[t] for t in w) + ")"
            raise ValidationError(bad.name, w, bad.detail)

    def lines(self, names=None):
        out = []
        for c in self.checks:
            tag = "pass" if c.passed else "FAIL"
            w = ""
            if c.witness is not None:
                if names is not None and all(isinstance(t, int) for t in c.witness):
                    w = " at (" + ",".join(names[t] for t in c.witness) + ")"
                else:
                    w = " at " + " ".join(str(t) for t in c.witness)
            out.append(f"{c.name}: {tag}{w}")
        return out


# -- linear algebra ------------------------------------------------------


def _scalar_inverse(mat):
    """Gauss-Jordan over Q(i); None if singular."""
    n = len(mat)
    a = [list(row) + [Scalar(1) if i == j else Scalar(0) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = a[col][col].inverse()
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [row[n:] for row in a]


def _matmul(A, B, ring):
    n = len(A)
    out = [[ring.zero() for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            acc = ring.zero()
            for k in range(n):
                if A[i][k].is_zero() or B[k][j].is_zero():
                    continue
                acc = acc + A[i][k] * B[k][j]
            out[i][j] = acc
    return out


def _is_identity(M, ring):
    n = len(M)
    return all((M[i][j] - (ring.one() if i == j else ring.zero())).is_zero() for i in range(n) for j in range(n))


def graded_inverse(Omega, ring):
    """Matrix W with W*Omega = Omega*W = 1 for entries in the algebra.

    Omega = Omega0 + N with Omega0 the constant part. Every term of N carries
    hbar, an odd coordinate or an even deviation, so the Neumann series
    sum_k (-W0 N)^k W0 terminates once N's even-x dependence is read as a
    jet of the context's order.
    """
    n = len(Omega)
    O0 = [[Omega[i][j].terms.get(0, Scalar(0)) for j in range(n)] for i in range(n)]
    W0s = _scalar_inverse(O0)
    if W0s is None:
        raise DegenerateError("the constant part of omega^ij is not invertible")
    W0 = [[ring.const(v) for v in row] for row in W0s]
    jet = ring.ctx.jet_order
    N = []
    for i in range(n):
        row = []
        for j in range(n):
            e = Omega[i][j] - ring.const(O0[i][j])
            if any(ring.info(k)[1] for k in e.terms):
                e = e.with_validity(min(e.validity, jet))
            row.append(e)
        N.append(row)
    minus_W0N = [[-e for e in row] for row in _matmul(W0, N, ring)]
    W = W0
    term = W0
    for _ in range(ring.ctx.d_max + sum(ring.coords.parities) + 2 * (jet + 1) + 2):
        term = _matmul(minus_W0N, term, ring)
        if all(e.is_zero() for row in term for e in row):
            break
        W = [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(W, term)]
    else:
        raise JetExhaustedError("Neumann series for omega_ij did not terminate")
    # the series was read as a jet, so the inverse is only trusted that far
    v = min(e.validity for row in N for e in row)
    return [[e.with_validity(v) for e in row] for row in W]


# -- derived structures --------------------------------------------------


def derive_structures(spec):
    ring = spec.ring
    n = spec.dim
    eps = spec.coords.parities
    m = spec.m_entries
    mT = [[m[j][i] if not (eps[i] and eps[j]) else -m[j][i] for j in range(n)] for i in range(n)]
    omega_up = [[(m[i][j] - mT[i][j]).scale(_HALF) for j in range(n)] for i in range(n)]
    g_up = [[(m[i][j] + mT[i][j]).scale(_HALF) for j in range(n)] for i in range(n)]
    W = graded_inverse(omega_up, ring)
    if not _is_identity(_matmul(W, omega_up, ring), ring) or not _is_identity(_matmul(omega_up, W, ring), ring):
        raise DegenerateError("omega_ij failed the inverse post-check")
    for i in range(n):
        for j in range(n):
            if not (W[i][j] - W[j][i].scale(_sgn((eps[i] + 1) * (eps[j] + 1)))).is_zero():
                raise ValidationError("omega_skew", (i, j), "omega_ij lacks the graded skew symmetry")
    tilde = [[W[i][j].scale(_sgn(eps[j])) for j in range(n)] for i in range(n)]
    form = ring.zero()
    varpi = ring.zero()
    for i in range(n):
        for j in range(n):
            if W[i][j].is_zero():
                continue
            form = form + ring.c(i) * W[i][j] * ring.c(j)
            varpi = varpi + ring.c(i) * W[i][j] * ring.y(j)
    form = form.scale(_HALF)
    conn = spec.connection()
    reordered = dict(conn.reordered)
    lowered = {}
    for kk in range(n):
        for i in range(n):
            for j in range(n):
                acc = ring.zero()
                for nn in range(n):
                    g = spec.christoffel.get((nn, i, j))
                    if g is not None and not W[kk][nn].is_zero():
                        acc = acc + W[kk][nn] * g
                if not acc.is_zero():
                    lowered[(kk, i, j)] = acc.scale(_sgn(eps[j]))
    O0 = [[omega_up[i][j].terms.get(0, Scalar(0)) for j in range(n)] for i in range(n)]
    return DerivedStructures(omega_up, mT, g_up, W, tilde, form, varpi, reordered, lowered, conn, O0)


# -- validation -----------------------------------------------------------


def _dx(e, i):
    return deriv_left(e, X(i))


def _first_nonzero(items):
    for idx, val in items:
        if not val.is_zero():
            return idx
    return None


def validate(spec, derived=None):
    """Run checks (a)-(f) and return the report (no exception on failure)."""
    ring = spec.ring
    n = spec.dim
    eps = spec.coords.parities
    d = derived or derive_structures(spec)
    m = spec.m_entries
    R = d.gamma_reordered
    report = ValidationReport()
    rng = range(n)

    def reord(i, k, j):
        return R.get((i, k, j)) or ring.zero()

    def nabla_m(i, j, k):
        out = _dx(m[j][k], i)
        for nn in rng:
            out = out + reord(i, j, nn) * m[nn][k]
            out = out + (reord(i, k, nn) * m[j][nn]).scale(_sgn(eps[j] * (eps[k] + eps[nn])))
        return out

    report.add("(a) nabla m = 0", _first_nonzero(((i, j, k), nabla_m(i, j, k)) for i in rng for j in rng for k in rng))

    def torsion(k, i, j):
        return spec.gamma(k, i, j) + spec.gamma(k, j, i).scale(_sgn((eps[i] + 1) * (eps[j] + 1)))

    report.add("(b) torsion-free", _first_nonzero(((k, i, j), torsion(k, i, j)) for k in rng for i in rng for j in rng))

    L = d.gamma_lowered

    def low(k, i, j):
        return L.get((k, i, j)) or ring.zero()

    def nabla_wt(i, j, k):
        return (
            _dx(d.omega_tilde[j][k], i)
            - low(j, i, k).scale(_sgn(eps[i] * eps[j]))
            + low(k, i, j).scale(_sgn(eps[j] * eps[k] + eps[i] * eps[k]))
        )

    report.add(
        "(c) nabla omega_tilde = 0",
        _first_nonzero(((i, j, k), nabla_wt(i, j, k)) for i in rng for j in rng for k in rng),
    )
    dw = exterior_d(d.omega_form)
    report.add("(d) d omega = 0", None if dw.is_zero() else ())

    W = d.omega_up

    def jacobi(i, j, k):
        out = ring.zero()
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            for nn in rng:
                if W[a][nn].is_zero():
                    continue
                out = out + (W[a][nn] * _dx(W[b][c], nn)).scale(_sgn(eps[a] * eps[c]))
        return out

    report.add("(e) Jacobi", _first_nonzero(((i, j, k), jacobi(i, j, k)) for i in rng for j in rng for k in rng))
    if spec.abelian_C:
        C = spec.C
        report.add(
            "(f) C skew",
            _first_nonzero(
                ((i, j), C(i, j) - C(j, i).scale(_sgn((eps[i] + 1) * (eps[j] + 1)))) for i in rng for j in rng
            ),
        )
        form = abelian_form(spec)
        report.add("(f) dC = 0", None if exterior_d(form).is_zero() else ())
        report.add(
            "(f) C_(0) = 0",
            _first_nonzero(((i, j), C(i, j).filter(lambda inf: inf[0] == 0)) for i in rng for j in rng),
        )
    return report


def abelian_form(spec):
    """C = 1/2 c^i C_ij c^j in A_20 (zero by default)."""
    ring = spec.ring
    out = ring.zero()
    if not spec.abelian_C:
        return out
    for (i, j), g in sorted(spec.abelian_C.items()):
        out = out + ring.c(i) * g * ring.c(j)
    return out.scale(_HALF)


# -- curvature ------------------------------------------------------------


def riemann(spec, derived=None):
    ring = spec.ring
    n = spec.dim
    eps = spec.coords.parities
    d = derived or derive_structures(spec)
    rng = range(n)
    G = spec.gamma

    def half(nn, i, j, k):
        out = _dx(G(nn, j, k), i).scale(_sgn(eps[nn] * eps[i]))
        for mm in rng:
            a = spec.christoffel.get((nn, i, mm))
            b = spec.christoffel.get((mm, j, k))
            if a is not None and b is not None:
                out = out + a * b
        return out

    up = {}
    for nn in rng:
        for i in rng:
            for j in rng:
                for k in rng:
                    v = half(nn, i, j, k) - half(nn, j, i, k).scale(_sgn(eps[i] * eps[j]))
                    if not v.is_zero():
                        up[(nn, i, j, k)] = v
    # R_ij^n_k, then R_ijk^n, then lower with omega_tilde
    mixed = {}
    for (nn, i, j, k), v in up.items():
        s = _sgn(eps[nn] * (eps[i] + eps[j])) * _sgn(eps[k] * (eps[nn] + 1))
        mixed[(i, j, k, nn)] = v.scale(s)
    pair = {}
    for i in rng:
        for j in rng:
            for k in rng:
                for nn in rng:
                    acc = ring.zero()
                    for mm in rng:
                        v = mixed.get((i, j, k, mm))
                        if v is not None and not d.omega_tilde[mm][nn].is_zero():
                            acc = acc + v * d.omega_tilde[mm][nn]
                    if not acc.is_zero():
                        pair[(i, j, k, nn)] = acc
    H = ring.zero()
    for (i, j, k, nn), v in sorted(pair.items()):
        H = H + ring.y(nn) * ring.y(k) * ring.c(j) * ring.c(i) * v
    H = H.scale(Fraction(1, 4))
    return CurvatureData(up, pair, H)


def riemann_mixed(spec, curv):
    """R_ijk^n keyed (i, j, k, n)."""
    eps = spec.coords.parities
    out = {}
    for (nn, i, j, k), v in curv.riemann_up.items():
        s = _sgn(eps[nn] * (eps[i] + eps[j])) * _sgn(eps[k] * (eps[nn] + 1))
        out[(i, j, k, nn)] = v.scale(s)
    return out


def check_curvature(spec, curv=None, derived=None, samples=()):
    """Bianchi identities, delta- and nabla-closedness of the curvature
    Hamiltonian, and nabla^2 a = {R, a} on the given sample elements."""
    ring = spec.ring
    n = spec.dim
    eps = spec.coords.parities
    d = derived or derive_structures(spec)
    curv = curv or riemann(spec, d)
    rng = range(n)
    report = ValidationReport()
    mixed = riemann_mixed(spec, curv)

    def Rm(i, j, k, nn):
        return mixed.get((i, j, k, nn)) or ring.zero()

    def bianchi1(i, j, k, nn):
        out = ring.zero()
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            out = out + Rm(a, b, c, nn).scale(_sgn(eps[a] * eps[c]))
        return out

    report.add(
        "first Bianchi",
        _first_nonzero(((i, j, k, nn), bianchi1(i, j, k, nn)) for i in rng for j in rng for k in rng for nn in rng),
    )
    P = curv.riemann_pair

    def pair(i, j, k, nn):
        return P.get((i, j, k, nn)) or ring.zero()

    report.add(
        "pair symmetry R_ij,kn",
        _first_nonzero(
            ((i, j, k, nn), pair(i, j, k, nn) - pair(i, j, nn, k).scale(_sgn(eps[k] * eps[nn])))
            for i in rng
            for j in rng
            for k in rng
            for nn in rng
        ),
    )
    H = curv.curvature_hamiltonian
    conn = d.connection
    dH = delta(H)
    report.add("delta R = 0", None if dH.is_zero() else ())
    try:
        nH = nabla(H, conn)
        full = nabla_full(H, conn)
    except JetExhaustedError:
        nH = full = None
    report.add("nabla R = 0", None if nH is None or nH.is_zero() else ())
    report.add("second Bianchi (full nabla)", None if full is None or full.is_zero() else ())
    for idx, a in enumerate(samples):
        lhs = nabla(nabla(a, conn), conn)
        rhs = poisson(H, a, d.omega_up)
        diff = lhs - rhs
        report.add(f"nabla^2 = {{R, .}} sample {idx}", None if diff.is_zero() else ("sample", idx))
        ts = torsion_sector(a, conn)
        report.add(f"torsion sector vanishes sample {idx}", None if ts.is_zero() else ("sample", idx))
    return report
