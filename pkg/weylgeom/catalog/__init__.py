"""Built-in spec files used as fixtures and examples"""
import logging
import os.path as osp

from ..exceptions import UnknownFixture
from ..specfile import load as load_file

log = logging.getLogger(__name__)

CATALOG_DIR = osp.dirname(osp.abspath(__file__))

NAMES = (
    'euclidean3', 'leafwarp', 'leafwarp-transversal', 'mixed',
    'p2-nonintegrable', 'bundlelike', 'sphere-riemann', 'flat-riemann',
    'quartic-minkowski',
)


def path(name):
    if name not in NAMES:
        raise UnknownFixture(name, NAMES)
    return osp.join(CATALOG_DIR, name + '.spec')


def text(name):
    with open(path(name), encoding='utf-8') as f:
        return f.read()


def load(name):
    return load_file(path(name))


def resolve(arg):
    """Load *arg* as a spec file if it exists, else as a catalog name"""
    if osp.isfile(arg):
        return load_file(arg)
    if arg in NAMES:
        log.debug("Using catalog spec %s", arg)
        return load(arg)
    raise UnknownFixture(arg, NAMES)
