import math

import numpy as np
import pytest

from weylgeom import jet
from weylgeom.exceptions import (
    DomainError, InsufficientOrder, OrderOutOfRange, SeedSetError,
)


def poly(xs):
    x, y = xs
    return x * x * y


def test_partial_polynomial():
    assert jet.partial(poly, [2., 3.], (1, 1)) == pytest.approx(4.)
    assert jet.partial(poly, [2., 3.], (2, 0)) == pytest.approx(6.)
    assert jet.partial(poly, [2., 3.], (2, 1)) == pytest.approx(2.)
    assert jet.partial(poly, [2., 3.], (0, 2)) == pytest.approx(0.)
    assert jet.partial(poly, [2., 3.], (0, 0)) == pytest.approx(12.)


def test_elementary_taylor():
    x, = jet.lift([0.], [0], 4)
    s = jet.sin(x)
    assert s.derivative((1,)) == pytest.approx(1.)
    assert s.derivative((3,)) == pytest.approx(-1.)
    assert s.derivative((4,)) == pytest.approx(0.)

    x, = jet.lift([0.7], [0], 4)
    np.testing.assert_allclose(jet.log(jet.exp(x)).coeffs, x.coeffs, atol=1e-13)

    x, = jet.lift([4.], [0], 3)
    r = x ** 0.5
    assert r.value == pytest.approx(2.)
    assert r.derivative((1,)) == pytest.approx(0.25)
    assert r.derivative((2,)) == pytest.approx(-1 / 32)


def test_tensor_inverse():
    x, y = jet.lift([0.3, -0.2], [0, 1], 3)
    m = jet.stack([[1 + x * x, y], [y, 2 + jet.sin(x)]])
    prod = jet.einsum('ij,jk->ik', jet.inv(m), m)
    np.testing.assert_allclose(prod.value, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(prod.coeffs[..., 1:], 0., atol=1e-13)


def test_grad_and_einsum():
    x, y = jet.lift([1., 2.], [0, 1], 2)
    f = jet.stack([x * y, x + y])
    g = jet.grad(f)
    assert g.shape == (2, 2)
    np.testing.assert_allclose(g.value, [[2., 1.], [1., 1.]])
    assert g.order == 1


def test_expand_many_variables():
    def field(xs):
        return xs[0] * xs[4] + xs[1] ** 2 + jet.sin(xs[2]) * xs[3]

    point = [0.1, 0.2, 0.3, 0.4, 0.5]
    j = jet.expand(field, point, 2)
    assert j.nvars == 5
    assert j.derivative((1, 0, 0, 0, 1)) == pytest.approx(1.)
    assert j.derivative((0, 2, 0, 0, 0)) == pytest.approx(2.)
    assert j.derivative((0, 0, 1, 1, 0)) == pytest.approx(math.cos(0.3))
    assert j.derivative((0, 0, 0, 0, 0)) == pytest.approx(field(point))


def test_finite_difference_agrees():
    def field(xs):
        return jet.exp(xs[0]) * jet.sin(xs[1])

    for idx in [(1, 0), (1, 1), (1, 2), (2, 2)]:
        exact = jet.partial(field, [0.3, 0.5], idx)
        approx = jet.finite_difference(field, [0.3, 0.5], idx)
        assert approx == pytest.approx(exact, rel=1e-5, abs=1e-7)


def test_errors():
    with pytest.raises(OrderOutOfRange):
        jet.lift([0.], [0], 5)
    with pytest.raises(OrderOutOfRange):
        jet.lift([0.], [0], 0)

    with pytest.raises(SeedSetError):
        jet.lift([0.] * 5, range(5), 2)
    with pytest.raises(SeedSetError):
        jet.lift([0., 0.], [[1., 1.], [2., 2.]], 2)
    with pytest.raises(SeedSetError):
        jet.lift([0., 0.], [2], 2)

    a, = jet.lift([1.], [0], 2)
    b, c = jet.lift([1., 2.], [0, 1], 2)
    with pytest.raises(SeedSetError):
        a + b

    x, = jet.lift([-1.], [0], 2)
    with pytest.raises(DomainError):
        jet.log(x)
    with pytest.raises(DomainError):
        jet.sqrt(x)
    with pytest.raises(DomainError):
        x ** 0.5
    assert (x ** 2).value == pytest.approx(1.)

    with pytest.raises(InsufficientOrder):
        x.derivative((3,))


def _f(xs):
    return jet.exp(xs[0]) * jet.sin(xs[1])


def _g(xs):
    return xs[0] * xs[0] * xs[1] + jet.cos(xs[0] * xs[1])


POINT = [0.4, -1.1]


@pytest.mark.parametrize('idx', [(1, 0), (0, 1), (1, 1), (2, 1), (0, 3), (2, 2)])
def test_partial_linear(idx):
    def combo(xs):
        return 2.5 * _f(xs) - 3. * _g(xs)

    expected = 2.5 * jet.partial(_f, POINT, idx) - 3. * jet.partial(_g, POINT, idx)
    assert jet.partial(combo, POINT, idx) == pytest.approx(expected, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize('idx', [(1, 1), (2, 1), (3, 1), (2, 2)])
def test_mixed_partials_symmetric(idx):
    def swapped(xs):
        return _g([xs[1], xs[0]])

    a = jet.partial(_g, POINT, idx)
    b = jet.partial(swapped, POINT[::-1], idx[::-1])
    assert b == pytest.approx(a, rel=1e-14, abs=1e-15)


def test_leibniz():
    def product(xs):
        return _f(xs) * _g(xs)

    f0, g0 = jet.partial(_f, POINT, (0, 0)), jet.partial(_g, POINT, (0, 0))
    for idx in [(1, 0), (0, 1)]:
        expected = (jet.partial(_f, POINT, idx) * g0 + f0 * jet.partial(_g, POINT, idx))
        assert jet.partial(product, POINT, idx) == pytest.approx(expected, rel=1e-12)
