import os.path as osp
from tempfile import TemporaryDirectory

import pytest

from weylgeom import catalog
from weylgeom.specfile import loads


EUCLIDEAN_FINSLER = """\
[finsler]
name = euclidean-finsler
n = 2
F = sqrt(y1^2 + y2^2)

[weyl]
3 = 1
"""

LEAF_WEYL = """\
[manifold]
name = leaf-weyl
n = 2
p = 1

[metric]
1,1 = 1
2,2 = 1
3,3 = 1

[weyl]
1 = 1
"""


@pytest.fixture(scope='module')
def euclidean3():
    return catalog.load('euclidean3')


@pytest.fixture(scope='module')
def leafwarp():
    return catalog.load('leafwarp')


@pytest.fixture(scope='module')
def mixed():
    return catalog.load('mixed')


@pytest.fixture(scope='module')
def p2_nonintegrable():
    return catalog.load('p2-nonintegrable')


@pytest.fixture(scope='module')
def sphere():
    return catalog.load('sphere-riemann')


@pytest.fixture(scope='module')
def quartic():
    return catalog.load('quartic-minkowski')


@pytest.fixture(scope='module')
def euclidean_finsler():
    return loads(EUCLIDEAN_FINSLER)


@pytest.fixture(scope='module')
def leaf_weyl():
    return loads(LEAF_WEYL)


@pytest.fixture(scope='module')
def leaf_weyl_file():
    with TemporaryDirectory() as td:
        path = osp.join(td, 'leaf-weyl.spec')
        with open(path, 'w') as f:
            f.write(LEAF_WEYL)
        yield path
