import json
import os.path as osp

import numpy as np
import pytest
from testpath import assert_isfile

from weylgeom import catalog, verify
from weylgeom.exceptions import EmptyDomain, SuiteInapplicable, UnknownSuite
from weylgeom.verify import CheckResult, SuiteConfig


def test_every_invariant_covered_once():
    covered = [inv for suite in verify.SUITES.values() for inv in suite.invariants]
    assert sorted(covered) == sorted(verify.INVARIANTS)
    assert len(set(covered)) == len(covered)


def test_get_suite():
    assert verify.get_suite('flatness').name == 'flatness'
    assert verify.get_suite('nonvanishing') is verify.get_suite('nonvanishing-47')
    with pytest.raises(UnknownSuite):
        verify.get_suite('no-such-suite')


def test_sample_points_deterministic(euclidean3):
    a = verify.sample_points(euclidean3, 5, seed=3)
    b = verify.sample_points(euclidean3, 5, seed=3)
    c = verify.sample_points(euclidean3, 5, seed=4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    for p in a:
        assert p.shape == (3,)
        assert np.all(p >= -1) and np.all(p <= 1)


def test_sample_points_finsler(sphere):
    for p in verify.sample_points(sphere, 20):
        assert np.linalg.norm(p[2:]) >= sphere.zero_radius
        assert 0.5 <= p[0] <= 2.5


def test_sample_points_empty(euclidean3, euclidean_finsler):
    with pytest.raises(EmptyDomain):
        verify.sample_points(euclidean3, 0)

    tiny = euclidean_finsler.replace(domain=[(-1, 1), (-1, 1), (0, 0.01), (0, 0.01)])
    with pytest.raises(EmptyDomain):
        verify.sample_points(tiny, 3)


def test_suite_config():
    with pytest.raises(EmptyDomain):
        SuiteConfig('all', samples=0)
    with pytest.raises(ValueError):
        SuiteConfig('all', tol=-1.)
    with pytest.raises(ValueError):
        SuiteConfig('all', tolerances={'flatness': 0.})

    cfg = SuiteConfig('all', tolerances={'gauge': 1e-3})
    assert cfg.tolerance('gauge', 'exact') == 1e-3
    assert cfg.tolerance('flatness', 'exact') == 1e-12
    assert SuiteConfig('all', tol=1e-6).tolerance('gauge', 'first') == 1e-6


def test_check_result_passed():
    assert CheckResult('a', 'upper', 1., 1., 1., 1e-9, holds=False).passed is False
    assert CheckResult('a', 'upper', 0., 0., 0., 1e-9, holds=True).passed is True
    # A claim expected not to hold passes when it does not hold
    assert CheckResult('a', 'upper', 1., 1., 1., 1e-9, holds=False,
                       expected=False).passed is True
    assert CheckResult('a', 'info', 5., 5., 5.).passed is True
    with pytest.raises(ValueError):
        CheckResult('a', 'sideways', 0., 0., 0.)


def test_inapplicable_suites(euclidean3, quartic):
    with pytest.raises(SuiteInapplicable):
        verify.run_suite(euclidean3, SuiteConfig('flatness', samples=2))
    with pytest.raises(SuiteInapplicable):
        verify.run_suite(quartic, SuiteConfig('flatness', samples=2))
    with pytest.raises(UnknownSuite):
        verify.run_suite(euclidean3, SuiteConfig('no-such-suite', samples=2))


def test_compatibility_euclidean(euclidean3):
    report = verify.run_suite(euclidean3, SuiteConfig('compatibility', samples=3))
    assert report.passed, report.to_text()
    assert report.points == 3
    assert report.suites == ['compatibility']


def test_all_euclidean(euclidean3):
    report = verify.run_suite(euclidean3, SuiteConfig('all', samples=2))
    assert report.passed, report.to_text()
    assert 'gauge' in report.suites
    assert 'jet-soundness' in report.suites
    assert 'flatness' not in report.suites
    assert 'homogeneity' not in report.suites


def test_finsler_axioms_sphere(sphere):
    report = verify.run_suite(sphere, SuiteConfig('finsler-axioms', samples=4))
    assert report.passed, report.to_text()


def test_nonvanishing_sphere(sphere):
    report = verify.run_suite(sphere, SuiteConfig('nonvanishing-47', samples=3))
    assert report.passed, report.to_text()
    assert report.suites == ['nonvanishing-47']
    check = [c for c in report.checks if c.kind == 'lower'][0]
    assert check.min_residual > verify.NONVANISHING_BOUND


def test_flatness_sphere(sphere):
    report = verify.run_suite(sphere, SuiteConfig('flatness', samples=4))
    assert report.passed, report.to_text()
    names = [c.name for c in report.checks]
    assert 'base not flat: consistent' in names
    assert 'base flat: consistent' not in names

    torsion = [c for c in report.checks if c.name == 'torsion vanishes'][0]
    assert torsion.holds is False
    assert torsion.expected is False


def test_report_outputs(sphere, tmpdir):
    report = verify.run_suite(sphere, SuiteConfig('flatness', samples=2, seed=7))

    text = report.to_text()
    lines = text.splitlines()
    assert lines[0].startswith('suite=flatness spec=sphere-riemann points=2 seed=7')
    assert 'check="base not flat: consistent"' in text
    assert lines[-1].startswith('wall_time=')

    df = report.to_dataframe()
    assert list(df.columns) == verify.CHECK_FIELDS
    assert len(df) == len(report.checks)
    assert df['pass'].all()

    path = osp.join(str(tmpdir), 'report.json')
    report.write_json(path)
    assert_isfile(path)
    with open(path) as f:
        d = json.load(f)
    assert d['pass'] is True
    assert d['suite'] == 'flatness'
    assert len(d['checks']) == len(report.checks)


@pytest.mark.parametrize('name', catalog.NAMES)
def test_jet_soundness_catalog(name):
    report = verify.run_suite(catalog.load(name), SuiteConfig('jet-soundness', samples=5))
    assert report.passed, report.to_text()
    high = [c for c in report.checks if c.name.endswith('(orders 3-4)')][0]
    assert high.kind == 'upper'
    assert high.tolerance == 1e-3
    assert high.max_residual < 1e-3


def test_bundle_like_recurrence_violated(mixed):
    # g_trans = 5 - (x1 x3)^2 varies along the leaves
    report = verify.run_suite(mixed, SuiteConfig('bundle-like', samples=20))
    checks = {c.name: c for c in report.checks}

    recurrent = checks['transversal metric recurrent']
    assert recurrent.holds is False
    assert recurrent.expected is False
    assert recurrent.passed

    violated = checks['transversal metric not recurrent']
    assert violated.kind == 'lower'
    assert violated.max_residual > 1e-3
    assert violated.passed


def test_bundle_like_recurrence_holds():
    report = verify.run_suite(catalog.load('bundlelike').with_constants(c=0),
                              SuiteConfig('bundle-like', samples=10))
    checks = {c.name: c for c in report.checks}
    assert checks['transversal metric recurrent'].holds is True
    assert 'transversal metric not recurrent' not in checks
