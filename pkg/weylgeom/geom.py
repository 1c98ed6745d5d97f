"""Foliated semi-Riemannian data in adapted coordinates.

A :class:`ManifoldSpec` describes a metric and a Weyl one-form by expressions
in coordinates (x^1..x^n, x^{n+1}..x^{n+p}) whose leaves are the slices where
the last p coordinates are constant. :class:`FoliatedChart` evaluates the
data as jets at a point and provides the adapted frame

    delta_alpha = d/dx^alpha - A^i_alpha d/dx^i,   A^i_alpha = g^{ij} g_{j alpha}

together with the derived blocks used by :mod:`weylgeom.conn`.

Arrays are 0-based with structural indices first: ``A[i, a]`` is A^i_alpha
and ``christoffel[k, i, j]`` is Gamma^k_ij.
"""
import logging
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import jet
from .exceptions import (
    BadCoordinateSplit, DegenerateFullMetric, DegenerateMetric,
    DegenerateTransversalMetric, DimensionMismatch, UnknownSymbol,
)
from .exprlang import Expr, compile_field, evaluate, free_symbols, parse

__all__ = [
    'ManifoldSpec', 'FoliatedChart', 'MetricBlocks', 'AdaptedFrameData',
    'WeylAdapted', 'metric_eval', 'adapted_frame', 'adapt_weyl', 'christoffel',
    'gauge_transform', 'weyl_exterior_derivative', 'check_nondegenerate',
    'christoffel_form', 'weyl_terms',
]

log = logging.getLogger(__name__)

DEGENERACY_THRESHOLD = 1e-12
DEFAULT_INTERVAL = (-1., 1.)

_DEGENERATE = {
    'transversal': DegenerateTransversalMetric,
    'full': DegenerateFullMetric,
}


def check_nondegenerate(block, name, point=None):
    """Raise DegenerateMetric if the determinant is tiny relative to the rows"""
    block = np.asarray(block)
    if block.shape[0] == 0:
        return
    det = np.linalg.det(block)
    scale = np.prod(np.linalg.norm(block, axis=1))
    if scale == 0 or abs(det) < DEGENERACY_THRESHOLD * scale:
        if name in _DEGENERATE:
            raise _DEGENERATE[name](det, point)
        raise DegenerateMetric(name, det, point)


class ManifoldSpec:
    """Metric and Weyl form of a foliated chart, given by expressions

    *metric* maps 0-based index pairs to expressions; only one of (a, b) and
    (b, a) may be given, missing entries are zero. *weyl* maps 0-based indices
    to the components of W(g) against dx^a. *gauge* lists potentials u which
    have been applied as g -> e^u g, W -> W - du.
    """
    kind = 'manifold'

    def __init__(self, n, p, metric, weyl=None, coordinates=None,
                 constants=None, domain=None, name=None, gauge=()):
        if n < 1 or p < 0:
            raise BadCoordinateSplit(n, p)
        self.n = n
        self.p = p
        self.dim = dim = n + p
        if coordinates is None:
            coordinates = ['x{}'.format(i + 1) for i in range(dim)]
        self.coordinates = tuple(coordinates)
        if len(self.coordinates) != dim:
            raise DimensionMismatch('coordinate names', dim, len(self.coordinates))
        self.constants = dict(constants or {})

        self.metric = {}
        for (a, b), expr in metric.items():
            key = (min(a, b), max(a, b))
            if not 0 <= key[0] <= key[1] < dim:
                raise IndexError("metric index {} outside 1..{}".format(
                    (a + 1, b + 1), dim))
            self.metric[key] = expr

        self.weyl = {}
        for a, expr in (weyl or {}).items():
            if not 0 <= a < dim:
                raise IndexError("weyl index {} outside 1..{}".format(a + 1, dim))
            self.weyl[a] = expr

        if domain is None:
            domain = [DEFAULT_INTERVAL] * dim
        self.domain = tuple((float(lo), float(hi)) for lo, hi in domain)
        if len(self.domain) != dim:
            raise DimensionMismatch('domain', dim, len(self.domain))
        self.name = name
        self.gauge = tuple(gauge)

    def __repr__(self):
        return "<ManifoldSpec {} n={} p={}>".format(self.name or '', self.n, self.p)

    @property
    def symbols(self):
        return self.coordinates + tuple(self.constants)

    @property
    def structural_coordinates(self):
        return self.coordinates[:self.n]

    @property
    def transversal_coordinates(self):
        return self.coordinates[self.n:]

    def expressions(self):
        """(label, expression) pairs for every expression in the spec"""
        for (a, b), expr in sorted(self.metric.items()):
            yield 'metric {},{}'.format(a + 1, b + 1), expr
        for a, expr in sorted(self.weyl.items()):
            yield 'weyl {}'.format(a + 1), expr
        for i, u in enumerate(self.gauge):
            yield 'gauge {}'.format(i + 1), u

    def replace(self, **changes):
        kwargs = dict(
            n=self.n, p=self.p, metric=self.metric, weyl=self.weyl,
            coordinates=self.coordinates, constants=self.constants,
            domain=self.domain, name=self.name, gauge=self.gauge,
        )
        kwargs.update(changes)
        return type(self)(**kwargs)

    def with_constants(self, **values):
        constants = dict(self.constants)
        for name, value in values.items():
            if name not in constants:
                raise UnknownSymbol(name, 'constant')
            constants[name] = float(value)
        return self.replace(constants=constants)

    def center(self):
        return np.array([(lo + hi) / 2 for lo, hi in self.domain])

    def check_point(self, point):
        point = np.asarray(point, dtype=np.float64).ravel()
        if point.shape != (self.dim,):
            raise DimensionMismatch('point', self.dim, point.shape[0])
        return point

    def field(self, expr):
        """Callable of the coordinate values evaluating *expr*"""
        return compile_field(expr, self.coordinates, self.constants)

    def _env(self, xs):
        env = dict(self.constants)
        env.update(zip(self.coordinates, xs))
        return env

    def metric_field(self, xs):
        """Nested list of metric entries at coordinate values *xs*"""
        env = self._env(xs)
        rows = [[0.] * self.dim for _ in range(self.dim)]
        for (a, b), expr in self.metric.items():
            rows[a][b] = rows[b][a] = evaluate(expr, env)
        if self.gauge:
            factor = jet.exp(sum(evaluate(u, env) for u in self.gauge))
            rows = [[v * factor for v in row] for row in rows]
        return rows

    def weyl_field(self, xs):
        """Components of W at *xs*, without the gauge correction"""
        env = self._env(xs)
        return [evaluate(self.weyl[a], env) if a in self.weyl else 0.
                for a in range(self.dim)]

    def metric_values(self, point):
        point = self.check_point(point)
        return np.array(self.metric_field(list(point)), dtype=np.float64)

    def weyl_values(self, point):
        point = self.check_point(point)
        if self.gauge:
            return self.weyl_jet(point, 1).value
        return np.array(self.weyl_field(list(point)), dtype=np.float64)

    def metric_jet(self, point, order):
        return jet.expand(self.metric_field, self.check_point(point), order)

    def weyl_jet(self, point, order):
        """W as a jet; gauge potentials are differentiated one order higher"""
        point = self.check_point(point)
        w = jet.expand(self.weyl_field, point, order)
        for u in self.gauge:
            w = w - jet.grad(jet.expand(self.field(u), point, order + 1))
        return w


class MetricBlocks(NamedTuple):
    structural: np.ndarray
    mixed: np.ndarray
    transversal: np.ndarray


class AdaptedFrameData(NamedTuple):
    A: np.ndarray
    g_inv: np.ndarray
    g_trans: np.ndarray

    def delta_vectors(self):
        """Coordinate components of delta_alpha, one column per alpha"""
        n, p = self.A.shape
        vecs = np.zeros((n + p, p))
        vecs[:n] = -self.A
        vecs[n:] = np.eye(p)
        return vecs


class WeylAdapted(NamedTuple):
    theta: np.ndarray
    rho: np.ndarray
    theta_up: np.ndarray
    rho_up: np.ndarray


def christoffel_form(inverse, d):
    """Gamma[k,i,j] = 1/2 inv[k,l] (d[l,j,i] + d[i,l,j] - d[i,j,l])

    *d* holds the derivatives with the direction last: d[a, b, c] is the
    derivative of g_ab along the c-th direction.
    """
    sym = d.transpose(0, 2, 1) + d.transpose(1, 0, 2) - d.transpose(2, 0, 1)
    return jet.einsum('kl,lij->kij', inverse, sym) * 0.5


def weyl_terms(w, w_up, metric):
    """1/2 (w_i delta^k_j + w_j delta^k_i - g_ij w^k) as [k, i, j]"""
    eye = np.eye(metric.shape[0])
    return (jet.einsum('i,kj->kij', w, eye) + jet.einsum('j,ki->kij', w, eye)
            - jet.einsum('ij,k->kij', metric, w_up)) * 0.5


class FoliatedChart:
    """Metric and Weyl form as jets at one point of an adapted chart

    *metric* is an (n+p, n+p) jet and *weyl* an (n+p,) jet, structural
    components first. *axes* lists the jet variables in the same order when
    the expansion was made in another one.
    """
    def __init__(self, n, p, metric, weyl, point=None, axes=None):
        self.n = n
        self.p = p
        self.dim = n + p
        self.metric = metric
        self.weyl = weyl
        self.point = point
        self.axes = None if axes is None else np.asarray(axes, dtype=np.intp)
        check_nondegenerate(self.gs.value, 'structural', point)

    @classmethod
    def at(cls, spec, point, order=2):
        point = spec.check_point(point)
        return cls(spec.n, spec.p, spec.metric_jet(point, order),
                   spec.weyl_jet(point, order), point)

    @property
    def order(self):
        return min(self.metric.order, self.weyl.order)

    def grad(self, f):
        """Coordinate derivatives of a jet, as a new last axis"""
        d = jet.grad(f)
        if self.axes is None:
            return d
        return d[..., self.axes]

    def structural_grad(self, f):
        return self.grad(f)[..., :self.n]

    def delta(self, f):
        """delta_alpha f = d_alpha f - A^i_alpha d_i f, as a new last axis"""
        d = self.grad(f)
        return d[..., self.n:] - jet.tensordot(d[..., :self.n], self.A)

    @cached_property
    def gs(self):
        return self.metric[:self.n, :self.n]

    @cached_property
    def gm(self):
        return self.metric[:self.n, self.n:]

    @cached_property
    def gt(self):
        return self.metric[self.n:, self.n:]

    @cached_property
    def gs_inv(self):
        return jet.inv(self.gs)

    @cached_property
    def A(self):
        return jet.einsum('ij,ja->ia', self.gs_inv, self.gm)

    @cached_property
    def g_trans(self):
        """g(delta_alpha, delta_beta)"""
        return self.gt - jet.einsum('ja,jb->ab', self.gm, self.A)

    @cached_property
    def g_trans_inv(self):
        check_nondegenerate(self.g_trans.value, 'transversal', self.point)
        return jet.inv(self.g_trans)

    @cached_property
    def theta(self):
        return self.weyl[:self.n]

    @cached_property
    def rho(self):
        return self.weyl[self.n:] - jet.einsum('i,ia->a', self.theta, self.A)

    @cached_property
    def theta_up(self):
        return jet.einsum('ki,i->k', self.gs_inv, self.theta)

    @cached_property
    def rho_up(self):
        return jet.einsum('ca,a->c', self.g_trans_inv, self.rho)

    @cached_property
    def christoffel(self):
        """Leaf Christoffel symbols, with structural derivatives only"""
        return christoffel_form(self.gs_inv, self.structural_grad(self.gs))

    @cached_property
    def adapted_metric(self):
        """The metric in the adapted frame: block diagonal (g_ij, g_trans)"""
        n, p = self.n, self.p
        space = self.g_trans.space
        coeffs = np.zeros((self.dim, self.dim, space.size))
        coeffs[:n, :n] = self.gs.truncate(space.order).coeffs
        coeffs[n:, n:] = self.g_trans.coeffs
        return jet.Jet(space, coeffs)


def metric_eval(spec, point):
    """Metric blocks at a point, checking that the structural block is invertible"""
    point = spec.check_point(point)
    g = spec.metric_values(point)
    n = spec.n
    check_nondegenerate(g[:n, :n], 'structural', point)
    return MetricBlocks(g[:n, :n], g[:n, n:], g[n:, n:])


def adapted_frame(spec, point):
    blocks = metric_eval(spec, point)
    g_inv = np.linalg.inv(blocks.structural)
    A = g_inv @ blocks.mixed
    g_trans = blocks.transversal - blocks.mixed.T @ A
    return AdaptedFrameData(A, g_inv, g_trans)


def adapt_weyl(spec, point, frame=None):
    """theta_i = w_i, rho_alpha = w_alpha - w_i A^i_alpha, and their raised forms"""
    if frame is None:
        frame = adapted_frame(spec, point)
    w = spec.weyl_values(point)
    theta = w[:spec.n]
    rho = w[spec.n:] - theta @ frame.A
    check_nondegenerate(frame.g_trans, 'transversal', point)
    rho_up = np.linalg.solve(frame.g_trans, rho) if spec.p else rho
    return WeylAdapted(theta, rho, frame.g_inv @ theta, rho_up)


def christoffel(spec, point):
    return FoliatedChart.at(spec, point, order=1).christoffel.value


def gauge_transform(spec, u):
    """The spec for e^u g, whose Weyl form is W - du

    *u* is an expression (or its text) in the spec's coordinates and
    constants.
    """
    if not isinstance(u, Expr):
        u = parse(u, spec.symbols)
    unknown = free_symbols(u) - set(spec.symbols)
    if unknown:
        raise UnknownSymbol(sorted(unknown)[0])
    log.debug("Gauge transform of %s by %s", spec.name, u)
    return spec.replace(gauge=spec.gauge + (u,))


def weyl_exterior_derivative(spec, point):
    """dW[a, b] = d_a w_b - d_b w_a"""
    dw = jet.grad(spec.weyl_jet(point, 1)).value
    return dw.T - dw
