import random
from fractions import Fraction

import pytest

from conftest import connection, spec
from superfedosov.calculus import delta, delta_inv, deriv_left, nabla
from superfedosov.expressions import parse_expr
from superfedosov.fedosov import (
    AbelianTwoForm,
    apply_D,
    check_flatness,
    curvature_residual,
    dequantize,
    quantize,
    solve_r,
    star,
    star_commutator,
)
from superfedosov.graded_algebra import X, project_fedosov
from superfedosov.sampling import random_element, random_symbol
from superfedosov.scalar import Scalar

HALF_I = Scalar(0, Fraction(1, 2))
ALL = ["flat", "wick", "super_flat", "hbar", "curved", "curved_C", "super_curved"]


def upto(a, n):
    return a.filter(lambda inf: inf[0] <= n)


@pytest.mark.parametrize("name", ["flat", "wick", "super_flat", "hbar"])
def test_flat_geometry_has_zero_r(name):
    fc = connection(name)
    assert fc.r.r.is_zero()
    assert curvature_residual(fc).is_zero()


@pytest.mark.parametrize("name", ALL)
def test_low_sectors_vanish(name):
    r = connection(name).r
    assert all(r.sector(n).is_zero() for n in range(3))
    assert all(r.closed_history)


@pytest.mark.parametrize("name", ["curved", "curved_C", "super_curved"])
def test_first_r_terms(name):
    fc = connection(name)
    R = fc.curvature.curvature_hamiltonian
    r3 = fc.r.sector(3)
    assert not r3.is_zero()
    assert r3 == delta_inv(project_fedosov(R, 2) + project_fedosov(fc.C.C, 2))
    nr3 = project_fedosov(nabla(r3, fc.derived.connection), 3)
    assert fc.r.sector(4) == delta_inv(nr3 + project_fedosov(R, 3) + project_fedosov(fc.C.C, 3))


def test_r_independent_of_precomputation():
    sp = spec("curved")
    fc = connection("curved")
    again = solve_r(sp, C=AbelianTwoForm.from_spec(sp))
    assert again.r == fc.r.r


def test_C_changes_r():
    assert connection("curved").r.r != connection("curved_C").r.r


def test_apply_D_examples():
    fc = connection("flat")
    ring = fc.ring
    assert apply_D(fc, ring.one()).is_zero()
    assert apply_D(fc, ring.x(0) + ring.y(0)).is_zero()
    assert apply_D(fc, ring.x(0)) == ring.c(0)


@pytest.mark.parametrize("name", ALL)
def test_flatness(name):
    fc = connection(name)
    rng = random.Random(17)
    samples = [random_element(fc.ring, rng, terms=3) for _ in range(5)]
    rep = check_flatness(fc, samples)
    assert rep.passed, rep.first_failure()


def test_quantize_examples():
    fc = connection("flat")
    ring = fc.ring
    assert quantize(fc, ring.one()).a == ring.one()
    q = quantize(fc, ring.x(0))
    assert q.a == ring.x(0) + ring.y(0)
    assert dequantize(q) == ring.x(0)
    assert dequantize(quantize(fc, ring.one())) == ring.one()


@pytest.mark.parametrize("name", ["curved", "super_curved", "hbar"])
def test_first_order_correction(name):
    fc = connection(name)
    ring = fc.ring
    rng = random.Random(23)
    for _ in range(3):
        f = random_symbol(ring, rng, hbar=True)
        f0 = f.hbar_order(0)
        want = ring.zero()
        for i in range(ring.n):
            want = want + ring.y(i) * deriv_left(f0, X(i))
        a = quantize(fc, f).a
        assert project_fedosov(a, 1) == want
        assert project_fedosov(a, 0) == f0


@pytest.mark.parametrize("name", ["curved", "curved_C", "super_curved"])
def test_horizontal_sections(name):
    fc = connection(name)
    d = fc.ring.ctx.d_max
    rng = random.Random(29)
    for _ in range(3):
        f = random_symbol(fc.ring, rng, hbar=True)
        a = quantize(fc, f).a
        assert dequantize(a) == f
        assert upto(apply_D(fc, a), d - 1).is_zero()
        assert quantize(fc, dequantize(a)).a == a


def test_quantize_rejects_y():
    fc = connection("flat")
    with pytest.raises(ValueError):
        quantize(fc, fc.ring.y(0))


def test_star_examples():
    fc = connection("flat")
    ring = fc.ring
    x1, x2 = ring.x(0), ring.x(1)
    assert star(fc, x1, x2) == x1 * x2 + (ring.hbar() * fc.m[0][1]).scale(HALF_I)
    assert star_commutator(fc, x1, x2) == ring.hbar().scale(Scalar(0, 1))
    f = parse_expr("x1^2*x2 + hbar*x1", ring)
    assert star_commutator(fc, f, f).is_zero()
    fc = connection("super_flat")
    t = fc.ring.x(0)
    assert star(fc, t, t) == fc.ring.hbar().scale(HALF_I)
    assert not star_commutator(fc, t, t).is_zero()


def test_star_unit_curved():
    fc = connection("curved")
    f = parse_expr("x1^2*x2 - 3*hbar*x2 + 1/2", fc.ring)
    one = fc.ring.one()
    assert star(fc, one, f) == f == star(fc, f, one)


def test_curved_star_differs_from_flat():
    f = parse_expr("x1^3", connection("curved").ring)
    g = parse_expr("x2^3", connection("curved").ring)
    a = star(connection("curved"), f, g)
    b = star(connection("flat", 6), f.rebind(connection("flat", 6).ring), g.rebind(connection("flat", 6).ring))
    assert a.hbar_order(1) == b.hbar_order(1)
    assert a.hbar_order(2) != b.hbar_order(2)
