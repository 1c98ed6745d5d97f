import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from weylgeom import conn
from weylgeom.exceptions import (
    BadFrameArgument, DegenerateFullMetric, DegenerateMetric,
    DegenerateTransversalMetric, DimensionMismatch,
)
from weylgeom.exprlang import parse
from weylgeom.geom import ManifoldSpec, christoffel, gauge_transform

ORIGIN = [0., 0., 0.]
MIXED_POINT = [1., 0., 2.]
P2_POINT = [0.5, 0., 0., 0., 0.3]


def test_flat_everything_vanishes(euclidean3):
    coeffs = conn.vranceanu_coeffs(euclidean3, [0.3, -0.1, 0.2])
    for name, block in coeffs.blocks().items():
        assert_allclose(block, 0, atol=1e-14, err_msg=name)

    curv = conn.curvature(euclidean3, [0.3, -0.1, 0.2])
    assert set(curv.blocks()) == {'ttt', 'tts', 'tss', 'stt', 'sts', 'sss'}
    for name, block in curv.blocks().items():
        assert_allclose(block, 0, atol=1e-14, err_msg=name)

    assert conn.torsion_transversal(euclidean3, ORIGIN).max_abs() < 1e-14


def test_transversal_weyl_terms(euclidean3):
    spec = euclidean3.with_constants(c=1)
    coeffs = conn.vranceanu_coeffs(spec, ORIGIN)
    assert coeffs.F[0, 0, 0] == pytest.approx(0.5)
    assert_allclose(coeffs.C, 0)
    assert_allclose(coeffs.L, 0)


def test_full_weyl_connection(euclidean3):
    gamma = conn.full_weyl_connection(euclidean3.with_constants(c=1), ORIGIN)
    assert gamma[0, 0, 2] == pytest.approx(0.5)
    assert gamma[0, 2, 0] == pytest.approx(0.5)
    assert gamma[2, 0, 0] == pytest.approx(-0.5)
    assert gamma[2, 2, 2] == pytest.approx(0.5)


def test_compatible_coeffs(leaf_weyl):
    coeffs = conn.compatible_coeffs(leaf_weyl, ORIGIN)
    assert coeffs.F is None and coeffs.L is None
    assert coeffs.C[0, 0, 0] == pytest.approx(0.5)
    assert coeffs.C[1, 0, 1] == pytest.approx(0.5)
    assert coeffs.C[1, 1, 0] == pytest.approx(0.5)
    assert coeffs.C[0, 1, 1] == pytest.approx(-0.5)
    assert coeffs.C[0, 0, 1] == pytest.approx(0.)
    assert_allclose(coeffs.D, 0)


def test_koszul_oracle(leaf_weyl):
    assert conn.koszul_oracle(leaf_weyl, ORIGIN, 0, 0, 0) == pytest.approx(1.)
    assert conn.koszul_oracle(leaf_weyl, ORIGIN, 1, 1, 0) == pytest.approx(-1.)

    oracle = conn.koszul_coeffs(leaf_weyl, ORIGIN)
    coeffs = conn.compatible_coeffs(leaf_weyl, ORIGIN)
    assert coeffs.max_difference(oracle) < 1e-12


def test_koszul_bad_argument(euclidean3):
    with pytest.raises(BadFrameArgument):
        conn.koszul_oracle(euclidean3, ORIGIN, 0, 2, 0)
    with pytest.raises(BadFrameArgument):
        conn.koszul_transversal(euclidean3, ORIGIN, 1, 0)


def test_mixed_coeffs(mixed):
    coeffs = conn.vranceanu_coeffs(mixed, MIXED_POINT)
    assert coeffs.C[0, 0, 0] == pytest.approx(0.5)
    assert coeffs.C[1, 0, 1] == pytest.approx(0.5)
    assert coeffs.C[0, 1, 1] == pytest.approx(-0.5)
    assert coeffs.D[0, 0, 0] == pytest.approx(2.)
    assert coeffs.D[1, 0, 0] == pytest.approx(0.)
    assert coeffs.F[0, 0, 0] == pytest.approx(5.)

    assert_allclose(conn.koszul_transversal(mixed, MIXED_POINT, 0, 0), [2., 0.],
                    atol=1e-12)
    oracle = conn.koszul_coeffs(mixed, MIXED_POINT)
    assert coeffs.max_difference(oracle, ['C', 'D']) < 1e-12

    assert conn.torsion_transversal(mixed, MIXED_POINT).max_abs() < 1e-12


@pytest.mark.parametrize('point', [MIXED_POINT, [-0.7, 0.4, 1.3], [0.2, -0.9, 0.1]])
def test_koszul_transversal_matches_D(mixed, point):
    D = conn.compatible_coeffs(mixed, point).D
    for i in range(2):
        assert_allclose(conn.koszul_transversal(mixed, point, 0, i), D[:, i, 0], atol=1e-10)


def test_mixed_global_oracle(mixed):
    coeffs = conn.vranceanu_coeffs(mixed, MIXED_POINT)
    oracle = conn.vranceanu_global_oracle(mixed, MIXED_POINT)
    assert set(oracle.blocks()) == {'C', 'D', 'L', 'F'}
    assert coeffs.max_difference(oracle) < 1e-9


def test_gauge_invariance(mixed):
    gauged = gauge_transform(mixed, 'x1*x2 + x3')
    a = conn.vranceanu_coeffs(mixed, MIXED_POINT)
    b = conn.vranceanu_coeffs(gauged, MIXED_POINT)
    assert a.max_difference(b) < 1e-9


def test_coeffs_to_xarray(mixed):
    ds = conn.vranceanu_coeffs(mixed, MIXED_POINT).to_xarray()
    assert list(ds.coords['i']) == [1, 2]
    assert list(ds.coords['alpha']) == [3]
    assert float(ds['F'].sel(gamma=3, alpha=3, beta=3)) == pytest.approx(5.)
    assert float(ds['D'].sel(k=1, i=1, alpha=3)) == pytest.approx(2.)


def test_torsion_nonintegrable(p2_nonintegrable):
    T = conn.torsion_transversal(p2_nonintegrable, P2_POINT)
    assert T.T.shape == (3, 2, 2)
    assert T.T[0, 0, 1] == pytest.approx(0.5)
    assert T.T[0, 1, 0] == pytest.approx(-0.5)
    assert_allclose(T.T[1:], 0, atol=1e-14)

    oracle = conn.torsion_bracket_oracle(p2_nonintegrable, P2_POINT)
    assert_allclose(T.T, oracle.T, atol=1e-12)

    ds = T.to_xarray()
    assert float(ds['T'].sel(k=1, alpha=4, beta=5)) == pytest.approx(0.5)


def test_nijenhuis(p2_nonintegrable):
    N = conn.nijenhuis_P(p2_nonintegrable, P2_POINT, 3, 4)
    assert_allclose(N, [2., 0., 0., 0., 0.], atol=1e-12)
    assert_allclose(conn.nijenhuis_P(p2_nonintegrable, P2_POINT, 0, 3), 0, atol=1e-12)
    assert_allclose(conn.nijenhuis_P(p2_nonintegrable, P2_POINT, 0, 1), 0, atol=1e-12)


def test_dprime_torsion_vanishes(mixed):
    for X, Y in itertools.product(range(3), repeat=2):
        res = conn.dprime_torsion_residual(mixed, MIXED_POINT, X, Y)
        assert_allclose(res, 0, atol=1e-10, err_msg=str((X, Y)))


def test_curvature_leafwarp(leafwarp):
    point = [0.2, 0., 0.1]
    curv = conn.curvature(leafwarp, point)
    assert curv.sss[0, 1, 1, 0] == pytest.approx(-1.)
    assert curv.sss[0, 1, 0, 1] == pytest.approx(1.)

    oracle = conn.curvature_commutator_oracle(leafwarp, point, (0, 1), 1)
    assert oracle[0] == pytest.approx(curv.sss[0, 1, 1, 0])

    commutator = conn.commutator_curvature(leafwarp, point)
    assert curv.max_difference(commutator) < 1e-9


def test_curvature_to_xarray(leafwarp):
    ds = conn.curvature(leafwarp, [0.2, 0., 0.1]).to_xarray()
    assert ds['sss'].dims == ('h', 'i', 'j', 'k')
    assert float(ds['sss'].sel(h=1, i=2, j=2, k=1)) == pytest.approx(-1.)


def test_nabla_g(euclidean3):
    spec = euclidean3.with_constants(c=1)
    nm = conn.nabla_g(spec, ORIGIN, [0., 0., 1.])
    assert nm.transversal[0, 0] == pytest.approx(-1.)
    assert nm.transversal_closed[0, 0] == pytest.approx(-1.)
    assert nm.definition[2, 2] == pytest.approx(-1.)
    assert_allclose(nm.structural, 0, atol=1e-14)
    assert_allclose(nm.structural_closed, 0, atol=1e-14)
    assert_allclose(nm.mixed, 0, atol=1e-14)

    with pytest.raises(DimensionMismatch):
        conn.nabla_g(spec, ORIGIN, [1., 0.])


def test_nabla_g_structural(leaf_weyl):
    nm = conn.nabla_g(leaf_weyl, ORIGIN, [1., 0., 0.])
    assert_allclose(nm.structural, -np.eye(2), atol=1e-14)
    assert_allclose(nm.structural_closed, nm.structural, atol=1e-14)
    assert_allclose(nm.definition[:2, :2], nm.structural, atol=1e-14)


def test_degenerate_transversal_block():
    # g = diag(1, 1, 0), W = dx1: the leaves are fine, the complement is not
    one = parse('1')
    spec = ManifoldSpec(2, 1, {(0, 0): one, (1, 1): one}, weyl={0: one})

    assert_allclose(christoffel(spec, ORIGIN), np.zeros((2, 2, 2)))
    coeffs = conn.compatible_coeffs(spec, ORIGIN)
    assert coeffs.C[0, 0, 0] == pytest.approx(0.5)
    assert coeffs.C[1, 0, 1] == pytest.approx(0.5)
    assert coeffs.C[0, 1, 1] == pytest.approx(-0.5)
    assert_allclose(coeffs.D, 0, atol=1e-15)
    assert conn.koszul_oracle(spec, ORIGIN, 0, 0, 0) == pytest.approx(1.)

    with pytest.raises(DegenerateTransversalMetric) as excinfo:
        conn.vranceanu_coeffs(spec, ORIGIN)
    assert excinfo.value.block == 'transversal'

    with pytest.raises(DegenerateFullMetric) as excinfo:
        conn.full_weyl_connection(spec, ORIGIN)
    assert isinstance(excinfo.value, DegenerateMetric)
    assert excinfo.value.block == 'full'
