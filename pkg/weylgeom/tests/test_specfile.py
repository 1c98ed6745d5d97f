import os.path as osp

import numpy as np
import pytest
from numpy.testing import assert_allclose

from weylgeom import catalog, specfile
from weylgeom.exceptions import ParseError, ValidationError
from weylgeom.finsler import FinslerSpec
from weylgeom.geom import ManifoldSpec

MANIFOLD = """\
[manifold]
name = test
n = 2
p = 1

[metric]
1,1 = 1
2,2 = exp(x1)
1,3 = a*x2
3,3 = 4

[weyl]
3 = a

[constants]
a = 0.5

[domain]
x1 = 0, 2
"""


def test_load_catalog():
    spec = catalog.load('euclidean3')
    assert isinstance(spec, ManifoldSpec)
    assert (spec.n, spec.p) == (2, 1)
    assert spec.name == 'euclidean3'
    assert spec.constants == {'c': 0.}
    assert_allclose(spec.metric_values([0.1, 0.2, 0.3]), np.eye(3))


def test_loads_manifold():
    spec = specfile.loads(MANIFOLD)
    assert spec.coordinates == ('x1', 'x2', 'x3')
    assert spec.domain == ((0., 2.), (-1., 1.), (-1., 1.))
    g = spec.metric_values([0., 1., 0.])
    assert_allclose(g, [[1., 0., 0.5], [0., 1., 0.], [0.5, 0., 4.]])
    assert_allclose(spec.weyl_values([0., 1., 0.]), [0., 0., 0.5])


def test_loads_finsler(euclidean_finsler):
    assert isinstance(euclidean_finsler, FinslerSpec)
    assert euclidean_finsler.n == 2
    assert euclidean_finsler.coordinates == ('x1', 'x2', 'y1', 'y2')
    assert euclidean_finsler.F_value([0., 0.], [3., 4.]) == pytest.approx(5.)
    assert list(euclidean_finsler.weyl) == [2]


def test_metric_index_out_of_range():
    text = MANIFOLD.replace('3,3 = 4', '3,3 = 4\n4,4 = 1')
    with pytest.raises(ValidationError) as excinfo:
        specfile.loads(text)
    problems = excinfo.value.problems
    assert len(problems) == 1
    assert problems[0]['msg'] == "Metric index out of range"
    assert problems[0]['line'] == 11


def test_all_problems_reported():
    text = """\
[manifold]
n = 2
p = 1

[metric]
2,1 = 1
1,1 = z

[weyl]
7 = 1

[colours]
red = 1
"""
    with pytest.raises(ValidationError) as excinfo:
        specfile.loads(text)
    msgs = {p['msg'] for p in excinfo.value.problems}
    assert msgs == {
        "Unknown section", "Metric entry below the diagonal",
        "Expression uses an undeclared name", "Weyl index out of range",
    }
    undeclared = [p for p in excinfo.value.problems if p['msg'].startswith('Expression')]
    assert undeclared[0]['name'] == 'z'


def test_kind_section_required():
    with pytest.raises(ValidationError):
        specfile.loads("[metric]\n1,1 = 1\n")
    with pytest.raises(ValidationError):
        specfile.loads("[manifold]\nn = 1\np = 0\n\n[finsler]\nn = 1\nF = y1\n")


def test_expression_syntax_error():
    text = MANIFOLD.replace('2,2 = exp(x1)', '2,2 = exp(x1')
    with pytest.raises(ParseError) as excinfo:
        specfile.loads(text, path='bad.spec')
    assert excinfo.value.lineno == 8
    assert excinfo.value.path == 'bad.spec'


def test_ini_syntax_error():
    with pytest.raises(ParseError) as excinfo:
        specfile.loads("[manifold]\nn = 1\nthis line is not an option\n")
    assert excinfo.value.lineno == 3


def test_degenerate_center_reported():
    text = "[manifold]\nn = 1\np = 1\n\n[metric]\n1,2 = 1\n"
    with pytest.raises(ValidationError) as excinfo:
        specfile.loads(text)
    assert 'DegenerateMetric' in excinfo.value.problems[0]['error']


def test_degenerate_transversal_loads():
    # Only the structural block is checked at the centre
    spec = specfile.loads("[manifold]\nn = 2\np = 1\n\n[metric]\n1,1 = 1\n2,2 = 1\n")
    assert spec.n == 2
    assert spec.p == 1


def test_dumps_loads_equivalent():
    spec = specfile.loads(MANIFOLD)
    again = specfile.loads(specfile.dumps(spec))
    assert again.name == spec.name
    assert again.constants == spec.constants
    assert again.domain == spec.domain
    for point in ([0.3, -0.2, 0.1], [1.5, 0.7, -0.4]):
        assert_allclose(again.metric_values(point), spec.metric_values(point))
        assert_allclose(again.weyl_values(point), spec.weyl_values(point))


def test_dump_finsler(sphere, tmpdir):
    path = osp.join(str(tmpdir), 'sphere.spec')
    specfile.dump(sphere, path)
    again = specfile.load(path)
    assert again.kind == 'finsler'
    assert again.domain == sphere.domain
    assert again.F_value([1., 0.], [1., 2.]) == pytest.approx(sphere.F_value([1., 0.], [1., 2.]))
