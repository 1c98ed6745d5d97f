import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from weylgeom import geom
from weylgeom.exceptions import (
    BadCoordinateSplit, DegenerateMetric, DegenerateTransversalMetric,
    DimensionMismatch, UnknownSymbol,
)
from weylgeom.exprlang import parse

MIXED_POINT = [1., 0., 2.]


def test_metric_eval(euclidean3):
    blocks = geom.metric_eval(euclidean3, [0.1, 0.2, 0.3])
    assert_allclose(blocks.structural, np.eye(2))
    assert_allclose(blocks.mixed, np.zeros((2, 1)))
    assert_allclose(blocks.transversal, [[1.]])


def test_adapted_frame_mixed(mixed):
    frame = geom.adapted_frame(mixed, MIXED_POINT)
    assert_allclose(frame.A, [[2.], [0.]])
    assert_allclose(frame.g_trans, [[1.]])
    assert_allclose(frame.delta_vectors()[:, 0], [-2., 0., 1.])

    # delta_alpha is orthogonal to every d_i
    g = mixed.metric_values(MIXED_POINT)
    assert_allclose(g[:2] @ frame.delta_vectors(), 0, atol=1e-14)


def test_adapt_weyl_mixed(mixed):
    w = geom.adapt_weyl(mixed, MIXED_POINT)
    assert_allclose(w.theta, [1., 0.])
    assert_allclose(w.rho, [-2.])
    assert_allclose(w.theta_up, [1., 0.])
    assert_allclose(w.rho_up, [-2.])


def test_chart_matches_pointwise(mixed):
    chart = geom.FoliatedChart.at(mixed, MIXED_POINT, order=2)
    assert chart.order == 2
    assert_allclose(chart.A.value, [[2.], [0.]])
    assert_allclose(chart.rho.value, [-2.])
    assert_allclose(chart.adapted_metric.value, np.eye(3))


def test_christoffel_leafwarp(leafwarp):
    gamma = geom.christoffel(leafwarp, [0.2, 0., 0.1])
    assert gamma[0, 0, 1] == pytest.approx(1.)
    assert gamma[0, 1, 0] == pytest.approx(1.)
    assert gamma[1, 0, 0] == pytest.approx(-1.)
    assert gamma[1, 1, 1] == pytest.approx(0.)


def test_christoffel_ignores_transversal_derivatives():
    from weylgeom import catalog
    spec = catalog.load('leafwarp-transversal')
    gamma = geom.christoffel(spec, [0.3, -0.2, 0.4])
    assert_allclose(gamma, 0, atol=1e-14)


def test_weyl_exterior_derivative(p2_nonintegrable):
    dW = geom.weyl_exterior_derivative(p2_nonintegrable, [0.5, 0., 0., 0., 0.3])
    assert dW[3, 0] == pytest.approx(0.5)
    assert dW[0, 3] == pytest.approx(-0.5)
    assert dW[1, 3] == pytest.approx(0.5)
    assert dW[3, 1] == pytest.approx(-0.5)
    assert_allclose(dW, -dW.T)


def test_with_constants(euclidean3):
    spec = euclidean3.with_constants(c=1)
    assert_allclose(spec.weyl_values([0., 0., 0.]), [0., 0., 1.])
    # The original is unchanged
    assert_allclose(euclidean3.weyl_values([0., 0., 0.]), 0)

    with pytest.raises(UnknownSymbol):
        euclidean3.with_constants(k=2)


def test_gauge_transform(mixed):
    spec = geom.gauge_transform(mixed, 'x1*x2 + x3')
    g0 = mixed.metric_values(MIXED_POINT)
    assert_allclose(spec.metric_values(MIXED_POINT), math.exp(2) * g0)
    assert_allclose(spec.weyl_values(MIXED_POINT), [1., -1., -1.])

    # W - du - d(-u) = W
    back = geom.gauge_transform(spec, '-(x1*x2 + x3)')
    assert_allclose(back.metric_values(MIXED_POINT), g0, rtol=1e-12)
    assert_allclose(back.weyl_values(MIXED_POINT), mixed.weyl_values(MIXED_POINT),
                    atol=1e-12)


def test_gauge_transform_unknown_symbol(mixed):
    with pytest.raises(UnknownSymbol):
        geom.gauge_transform(mixed, 'z*x1')


def test_degenerate_structural():
    spec = geom.ManifoldSpec(1, 1, {(0, 1): parse('1')})
    with pytest.raises(DegenerateMetric) as excinfo:
        geom.metric_eval(spec, [0., 0.])
    assert excinfo.value.block == 'structural'


def test_degenerate_transversal():
    one = parse('1')
    spec = geom.ManifoldSpec(1, 1, {(0, 0): one, (0, 1): one, (1, 1): one})
    # Only the structural block has to be invertible for the leaf geometry
    chart = geom.FoliatedChart.at(spec, [0., 0.], order=1)
    assert_allclose(chart.g_trans.value, [[0.]], atol=1e-15)
    assert_allclose(geom.christoffel(spec, [0., 0.]), np.zeros((1, 1, 1)))
    assert_allclose(geom.adapted_frame(spec, [0., 0.]).A, [[1.]])

    with pytest.raises(DegenerateTransversalMetric) as excinfo:
        geom.adapt_weyl(spec, [0., 0.])
    assert excinfo.value.block == 'transversal'


def test_bad_split():
    with pytest.raises(BadCoordinateSplit):
        geom.ManifoldSpec(0, 1, {})


def test_point_dimension(euclidean3):
    with pytest.raises(DimensionMismatch):
        geom.metric_eval(euclidean3, [0., 0.])


def test_metric_lower_triangle_is_symmetric():
    spec = geom.ManifoldSpec(2, 0, {(1, 0): parse('x1'), (0, 0): parse('2'),
                                    (1, 1): parse('3')})
    g = spec.metric_values([0.5, 0.])
    assert_allclose(g, [[2., 0.5], [0.5, 3.]])
