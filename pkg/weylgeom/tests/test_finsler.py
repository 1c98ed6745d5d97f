import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from weylgeom import finsler
from weylgeom.exceptions import (
    DimensionMismatch, NotPositiveDefinite, NotRiemannianBase, OnZeroSection,
)
from weylgeom.exprlang import parse
from weylgeom.finsler import TangentVector

SPHERE_X = [math.pi / 4, 0.]
ONES = [1., 1.]
Y34 = [3., 4.]


def test_sphere_metric_and_spray(sphere):
    g, g_inv = finsler.hessian_metric(sphere, SPHERE_X, ONES)
    assert_allclose(g, np.diag([1., 0.5]), atol=1e-12)
    assert_allclose(g_inv, np.diag([1., 2.]), atol=1e-12)

    s = finsler.spray(sphere, SPHERE_X, ONES)
    assert_allclose(s.G, [-0.25, 1.], atol=1e-10)
    assert_allclose(s.Gb, [[0., -0.5], [1., 1.]], atol=1e-10)
    assert s.Gbc[0, 1, 1] == pytest.approx(-0.5)
    assert s.Gbc[1, 0, 1] == pytest.approx(1.)
    assert s.Gbc[1, 1, 0] == pytest.approx(1.)
    assert s.Gbc[0, 0, 0] == pytest.approx(0., abs=1e-10)

    ds = s.to_xarray()
    assert float(ds['G'].sel(i=2)) == pytest.approx(1.)


def test_horizontal_frame(sphere):
    hf = finsler.horizontal_frame(sphere, SPHERE_X, ONES)
    assert_allclose(hf.pairing(), np.eye(4), atol=1e-12)
    # delta_2 = d/dx^2 - G^j_2 d/dy^j
    assert_allclose(hf.frame[1], [0., 1., 0.5, -1.], atol=1e-10)


def test_sasaki_metric(sphere):
    G = finsler.sasaki_metric(sphere, SPHERE_X, ONES)
    assert_allclose(G, np.diag([1., 0.5, 1., 0.5]), atol=1e-12)

    # Pulled back to (dx, dy) it stays symmetric and agrees on the vertical block
    Gc = finsler.sasaki_coordinate_metric(sphere, SPHERE_X, ONES)
    assert_allclose(Gc, Gc.T, atol=1e-12)
    assert_allclose(Gc[2:, 2:], np.diag([1., 0.5]), atol=1e-12)


def test_tangent_torsion(sphere):
    T = finsler.tangent_torsion(sphere, SPHERE_X, ONES)
    assert T.T[0, 0, 1] == pytest.approx(-0.5)
    assert T.T[0, 1, 0] == pytest.approx(0.5)
    ds = T.to_xarray()
    assert list(ds.coords['alpha']) == [1, 2]


def test_curvature_torsion_riemannian(sphere):
    res = finsler.finsler_curvature_torsion(sphere, SPHERE_X, ONES)
    assert res.base_riemann[0, 1, 0, 1] == pytest.approx(0.5)
    assert res.base_riemann[1, 0, 0, 1] == pytest.approx(-1.)
    assert_allclose(res.torsion.T, res.torsion_closed, atol=1e-9)
    assert_allclose(res.curvature.tts, res.closed_tts, atol=1e-8)
    assert not res.torsion_free

    ds = res.to_xarray()
    assert 'Rg' in ds and 'T' in ds


def test_tangent_curvature(sphere):
    curv = finsler.tangent_curvature(sphere, SPHERE_X, ONES)
    assert set(curv.blocks()) == {'ttt', 'tts', 'tss', 'sss'}
    full = finsler.finsler_curvature_torsion(sphere, SPHERE_X, ONES).curvature
    assert_allclose(curv.tts, full.tts, atol=1e-12)


def test_riemannian_deviation(sphere, quartic):
    assert finsler.riemannian_deviation(sphere, SPHERE_X, ONES) < 1e-10
    with pytest.raises(NotRiemannianBase):
        finsler.check_riemannian(quartic, [0., 0.], ONES)


def test_quartic_metric(quartic):
    g, _ = finsler.hessian_metric(quartic, [0., 0.], ONES)
    r2 = math.sqrt(2)
    assert_allclose(g, [[r2, -r2 / 2], [-r2 / 2, r2]], rtol=1e-10)
    assert_allclose(finsler.spray(quartic, [0.3, 0.1], ONES).G, 0, atol=1e-12)


def test_cartan_form(euclidean_finsler):
    w = finsler.cartan_form(euclidean_finsler, [0., 0.], Y34)
    assert_allclose(w.rho, Y34, atol=1e-12)
    assert_allclose(w.rho_up, Y34, atol=1e-12)
    assert_allclose(w.theta, 0, atol=1e-14)


def test_vranceanu_spec_weyl(euclidean_finsler):
    coeffs = finsler.vranceanu_finsler(euclidean_finsler, 'spec', [0., 0.], Y34)
    assert coeffs.offset == 0
    assert coeffs.C[0, 0, 0] == pytest.approx(0.5)
    assert coeffs.C[1, 0, 1] == pytest.approx(0.5)
    assert coeffs.C[0, 1, 1] == pytest.approx(-0.5)
    assert_allclose(coeffs.F, 0, atol=1e-12)


def test_vranceanu_cartan(euclidean_finsler):
    coeffs = finsler.vranceanu_finsler(euclidean_finsler, 'cartan', [0., 0.], Y34)
    assert_allclose(coeffs.C, 0, atol=1e-12)
    assert coeffs.F[0, 0, 0] == pytest.approx(1.5)
    assert coeffs.F[1, 0, 0] == pytest.approx(-2.)

    zero = finsler.vranceanu_finsler(euclidean_finsler, 'zero', [0., 0.], Y34)
    assert_allclose(zero.F, 0, atol=1e-12)


def test_sasaki_pipeline(sphere):
    direct = finsler.vranceanu_finsler(sphere, 'cartan', SPHERE_X, ONES)
    pipeline = finsler.sasaki_pipeline_coeffs(sphere, SPHERE_X, ONES)
    assert direct.max_difference(pipeline, ['C', 'D', 'F']) < 1e-8


def test_liouville(euclidean_finsler):
    X = TangentVector(np.array([1., 0.]), np.array([0., 0.]))
    res = finsler.liouville_derivatives(euclidean_finsler, 'cartan', X, [0., 0.], Y34)
    for form in ('frame', 'cartan'):
        L, Ls = res[form]
        assert_allclose(Ls.horizontal, [12.5, 0.], atol=1e-10, err_msg=form)
        assert_allclose(Ls.vertical, 0, atol=1e-10, err_msg=form)
        assert_allclose(L.vertical, 0, atol=1e-10, err_msg=form)
    assert res.max_spread() < 1e-9

    ds = res.to_xarray()
    assert 'Lstar_horizontal' in ds


def test_nabla_sasaki(euclidean_finsler):
    X = TangentVector(np.array([1., 0.]), np.array([0., 0.]))
    nm = finsler.nabla_sasaki(euclidean_finsler, X, [0., 0.], Y34)
    assert_allclose(nm.transversal_closed, -3 * np.eye(2), atol=1e-10)
    assert_allclose(nm.transversal, -3 * np.eye(2), atol=1e-10)
    assert_allclose(nm.structural, 0, atol=1e-10)


def test_landsberg_residual_euclidean(euclidean_finsler):
    assert_allclose(finsler.landsberg_residual(euclidean_finsler, [0.2, 0.1], Y34),
                    0, atol=1e-12)


def test_zero_section(euclidean_finsler):
    with pytest.raises(OnZeroSection):
        finsler.hessian_metric(euclidean_finsler, [0., 0.], [0., 0.])


def test_not_positive_definite():
    F = parse('sqrt(y1^2 - y2^2)', ['x1', 'x2', 'y1', 'y2'])
    spec = finsler.FinslerSpec(2, F)
    with pytest.raises(NotPositiveDefinite):
        finsler.hessian_metric(spec, [0., 0.], [2., 1.])


def test_point_dimensions(euclidean_finsler):
    with pytest.raises(DimensionMismatch):
        finsler.spray(euclidean_finsler, [0.], Y34)


def test_center_avoids_zero_section(euclidean_finsler):
    x, y = euclidean_finsler.center()
    assert_allclose(x, [0., 0.])
    assert np.linalg.norm(y) >= euclidean_finsler.zero_radius
