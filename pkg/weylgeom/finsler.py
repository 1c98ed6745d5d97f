"""Finsler structures and the Vranceanu connection on the tangent bundle.

A :class:`FinslerSpec` gives the fundamental function F(x, y) of a Finsler
space on an n-dimensional base. :class:`FinslerChart` expands F^2 as an
order 4 jet at a point (x, y) of TN, y != 0, and derives

- the metric tensor g_ab = 1/2 d^2 F^2 / dy^a dy^b,
- the spray G^a, the nonlinear connection G^a_b = dG^a/dy^b and its
  y-derivatives,
- the adapted frame {delta_a = d/dx^a - G^b_a d/dy^b, d/dy^a},
- the Sasaki metric and the Vranceanu connection of a Weyl form on TN.

On TN the vertical directions are structural and the horizontal ones
transversal, so the connection is an :class:`~weylgeom.conn.AdaptedConnection`
with A = G^a_b. Indices in results are 0-based and, unlike the manifold case,
both ranges are labelled 1..n.
"""
import logging
from functools import cached_property
from typing import NamedTuple

import numpy as np
import xarray as xr

from . import jet
from .conn import (
    AdaptedConnection, CurvatureData, TorsionData, VranceanuConnection,
    labelled_dataset, nabla_metric,
)
from .exceptions import (
    BadCoordinateSplit, DimensionMismatch, NotPositiveDefinite, NotRiemannianBase,
    OnZeroSection, UnknownSymbol,
)
from .exprlang import compile_field, evaluate
from .geom import FoliatedChart, christoffel_form, weyl_terms

__all__ = [
    'FinslerSpec', 'FinslerChart', 'SprayData', 'HorizontalFrame',
    'TangentWeylAdapted', 'TangentVector', 'TangentConnection',
    'FinslerCurvatureTorsion', 'LiouvilleDerivatives', 'WEYL_CHOICES',
    'hessian_metric', 'spray', 'horizontal_frame', 'sasaki_metric',
    'sasaki_coordinate_metric', 'cartan_form', 'vranceanu_finsler',
    'landsberg_residual', 'cartan_transversal_forms', 'base_riemann',
    'riemannian_deviation', 'check_riemannian', 'finsler_curvature_torsion',
    'tangent_commutator_curvature', 'nabla_sasaki', 'liouville_derivatives',
    'tangent_curvature', 'tangent_torsion',
    'chart_liouville_derivatives',
    'sasaki_pipeline_coeffs',
]

log = logging.getLogger(__name__)

FINSLER_ORDER = 4
ZERO_SECTION_THRESHOLD = 1e-8
DEFAULT_ZERO_RADIUS = 0.1
POSITIVITY_THRESHOLD = 1e-10
RIEMANNIAN_THRESHOLD = 1e-10
DEFAULT_INTERVAL = (-1., 1.)

WEYL_CHOICES = ('cartan', 'zero', 'spec')


class FinslerSpec:
    """Fundamental function of a Finsler space, as an expression in (x, y)

    *weyl* maps 0-based indices to the components of a one-form on TN
    against (dx^1..dx^n, dy^1..dy^n). *domain* gives 2n intervals, base
    coordinates first; sampling keeps |y| >= *zero_radius*.
    """
    kind = 'finsler'

    def __init__(self, n, F, weyl=None, base=None, fiber=None, constants=None,
                 domain=None, name=None, zero_radius=DEFAULT_ZERO_RADIUS):
        if n < 1:
            raise BadCoordinateSplit(n, n)
        self.n = n
        self.dim = 2 * n
        self.base = tuple(base or ['x{}'.format(i + 1) for i in range(n)])
        self.fiber = tuple(fiber or ['y{}'.format(i + 1) for i in range(n)])
        for names, what in [(self.base, 'base coordinates'), (self.fiber, 'fiber coordinates')]:
            if len(names) != n:
                raise DimensionMismatch(what, n, len(names))
        self.F = F
        self.constants = dict(constants or {})

        self.weyl = {}
        for a, expr in (weyl or {}).items():
            if not 0 <= a < self.dim:
                raise IndexError("weyl index {} outside 1..{}".format(a + 1, self.dim))
            self.weyl[a] = expr

        if domain is None:
            domain = [DEFAULT_INTERVAL] * self.dim
        self.domain = tuple((float(lo), float(hi)) for lo, hi in domain)
        if len(self.domain) != self.dim:
            raise DimensionMismatch('domain', self.dim, len(self.domain))
        self.name = name
        self.zero_radius = float(zero_radius)

    def __repr__(self):
        return "<FinslerSpec {} n={}>".format(self.name or '', self.n)

    @property
    def coordinates(self):
        return self.base + self.fiber

    @property
    def symbols(self):
        return self.coordinates + tuple(self.constants)

    def expressions(self):
        yield 'F', self.F
        for a, expr in sorted(self.weyl.items()):
            yield 'weyl {}'.format(a + 1), expr

    def replace(self, **changes):
        kwargs = dict(
            n=self.n, F=self.F, weyl=self.weyl, base=self.base, fiber=self.fiber,
            constants=self.constants, domain=self.domain, name=self.name,
            zero_radius=self.zero_radius,
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

    def check_point(self, x, y):
        x = np.asarray(x, dtype=np.float64).ravel()
        y = np.asarray(y, dtype=np.float64).ravel()
        if x.shape != (self.n,):
            raise DimensionMismatch('base point', self.n, x.shape[0])
        if y.shape != (self.n,):
            raise DimensionMismatch('fiber point', self.n, y.shape[0])
        return x, y

    def split(self, point):
        """(x, y) from a point of TN given as one 2n-vector"""
        point = np.asarray(point, dtype=np.float64).ravel()
        if point.shape != (self.dim,):
            raise DimensionMismatch('point', self.dim, point.shape[0])
        return point[:self.n], point[self.n:]

    def center(self):
        """A point inside the domain, off the excluded ball around y = 0"""
        mid = np.array([(lo + hi) / 2 for lo, hi in self.domain])
        x, y = mid[:self.n], mid[self.n:]
        if np.linalg.norm(y) < self.zero_radius:
            y = np.array([hi for _, hi in self.domain[self.n:]])
        return x, y

    def field(self, expr):
        return compile_field(expr, self.coordinates, self.constants)

    def F_field(self, xs):
        env = dict(self.constants)
        env.update(zip(self.coordinates, xs))
        return evaluate(self.F, env)

    def energy_field(self, xs):
        """F^2 at coordinate values (x, y)"""
        f = self.F_field(xs)
        return f * f

    def weyl_field(self, xs):
        env = dict(self.constants)
        env.update(zip(self.coordinates, xs))
        return [evaluate(self.weyl[a], env) if a in self.weyl else 0.
                for a in range(self.dim)]

    def F_value(self, x, y):
        x, y = self.check_point(x, y)
        return float(self.F_field(list(x) + list(y)))


class SprayData(NamedTuple):
    G: np.ndarray
    Gb: np.ndarray
    Gbc: np.ndarray

    def to_xarray(self):
        n = len(self.G)
        return labelled_dataset({
            'G': (('i',), self.G),
            'Gb': (('i', 'j'), self.Gb),
            'Gbc': (('i', 'j', 'k'), self.Gbc),
        }, n, 0)


class HorizontalFrame(NamedTuple):
    """Rows in (x, y) coordinate components

    ``frame``: delta_1..delta_n, d/dy^1..d/dy^n;
    ``coframe``: dx^1..dx^n, delta y^1..delta y^n.
    """
    frame: np.ndarray
    coframe: np.ndarray

    def pairing(self):
        return self.coframe @ self.frame.T

    def to_xarray(self):
        n = len(self.frame) // 2
        return labelled_dataset({
            'frame': (('a', 'b'), self.frame),
            'coframe': (('a', 'b'), self.coframe),
        }, n, n, offset=0)


class TangentWeylAdapted(NamedTuple):
    """W = rho_a dx^a + theta_a delta y^a, with indices raised by g"""
    rho: np.ndarray
    theta: np.ndarray
    rho_up: np.ndarray
    theta_up: np.ndarray

    def to_xarray(self):
        return labelled_dataset(
            {k: (('i',), v) for k, v in self._asdict().items()}, len(self.rho), 0)


class TangentVector(NamedTuple):
    """X = horizontal^a delta_a + vertical^i d/dy^i"""
    horizontal: np.ndarray
    vertical: np.ndarray

    @classmethod
    def from_adapted(cls, components, n):
        """From adapted components in the connection order: vertical first"""
        components = np.asarray(components, dtype=np.float64)
        return cls(components[n:], components[:n])

    def adapted(self):
        return np.concatenate([np.asarray(self.vertical, dtype=np.float64),
                               np.asarray(self.horizontal, dtype=np.float64)])


def _check_positive(g, n):
    eig = np.linalg.eigvalsh(g)
    if eig[0] <= POSITIVITY_THRESHOLD * np.trace(g) / n:
        raise NotPositiveDefinite(eig[0])


class FinslerChart:
    """F^2 and its derived objects as jets at a point (x, y) of TN

    Jet variables are (x^1..x^n, y^1..y^n) in that order.
    """
    def __init__(self, spec, x, y, order=FINSLER_ORDER):
        x, y = spec.check_point(x, y)
        if np.linalg.norm(y) < ZERO_SECTION_THRESHOLD:
            raise OnZeroSection(y, ZERO_SECTION_THRESHOLD)
        self.spec = spec
        self.n = spec.n
        self.x = x
        self.y = y
        self.point = np.concatenate([x, y])
        self.order = order
        # Vertical first: the structural directions of TN
        self.axes = list(range(self.n, 2 * self.n)) + list(range(self.n))
        _check_positive(self.g.value, self.n)

    @cached_property
    def energy(self):
        return jet.expand(self.spec.energy_field, self.point, self.order)

    @property
    def space(self):
        return self.energy.space

    @cached_property
    def coordinates(self):
        return jet.expand(lambda xs: list(xs), self.point, self.order)

    @property
    def y_jet(self):
        return self.coordinates[self.n:]

    def x_grad(self, f):
        return jet.grad(f)[..., :self.n]

    def y_grad(self, f):
        return jet.grad(f)[..., self.n:]

    def delta(self, f):
        """delta_a f = d f/dx^a - G^b_a d f/dy^b, as a new last axis"""
        return self.x_grad(f) - jet.tensordot(self.y_grad(f), self.Gb)

    @cached_property
    def energy_grad(self):
        return jet.grad(self.energy)

    @cached_property
    def g(self):
        return self.y_grad(self.energy_grad[self.n:]) * 0.5

    @cached_property
    def g_inv(self):
        return jet.inv(self.g)

    @cached_property
    def G(self):
        """G^a = 1/4 g^ab (d^2 F^2/dy^b dx^c y^c - dF^2/dx^b)"""
        n = self.n
        mixed = self.x_grad(self.energy_grad[n:])
        inner = jet.einsum('bc,c->b', mixed, self.y_jet) - self.energy_grad[:n]
        return jet.einsum('ab,b->a', self.g_inv, inner) * 0.25

    @cached_property
    def Gb(self):
        """Gb[a, b] = dG^a/dy^b"""
        return self.y_grad(self.G)

    @cached_property
    def Gbc(self):
        """Gbc[a, b, c] = d^2 G^a/dy^b dy^c"""
        return self.y_grad(self.Gb)

    @cached_property
    def cartan_rho(self):
        """1/2 dF^2/dy^a, the Cartan form against dx^a"""
        return self.energy_grad[self.n:] * 0.5

    @cached_property
    def spec_weyl(self):
        return jet.expand(self.spec.weyl_field, self.point, self.order)

    def weyl_jets(self, weyl):
        """(theta, rho) for a Weyl choice name or a TangentWeylAdapted"""
        n = self.n
        if isinstance(weyl, TangentWeylAdapted):
            return (jet.Jet.constant(weyl.theta, self.space),
                    jet.Jet.constant(weyl.rho, self.space))
        zero = jet.Jet.constant(np.zeros(n), self.space)
        if weyl == 'cartan':
            return zero, self.cartan_rho
        if weyl == 'zero':
            return zero, zero
        if weyl == 'spec':
            w = self.spec_weyl
            theta = w[n:]
            return theta, w[:n] - jet.tensordot(theta, self.Gb)
        raise ValueError("Unknown Weyl form {!r}, expected one of {}".format(
            weyl, ', '.join(WEYL_CHOICES)))

    def weyl_adapted(self, weyl):
        theta, rho = (t.value for t in self.weyl_jets(weyl))
        g_inv = self.g_inv.value
        return TangentWeylAdapted(rho, theta, g_inv @ rho, g_inv @ theta)

    @cached_property
    def torsion(self):
        """T[c, a, b] = delta_b G^c_a - delta_a G^c_b"""
        dG = self.delta(self.Gb)
        return dG - dG.transpose(0, 2, 1)

    def vertical_coeffs(self, theta):
        """C[c, a, b] = 1/2 g^cd dg_ab/dy^d + Weyl terms of theta"""
        theta_up = jet.einsum('cd,d->c', self.g_inv, theta)
        return (jet.einsum('cd,abd->cab', self.g_inv, self.y_grad(self.g)) * 0.5
                + weyl_terms(theta, theta_up, self.g))

    def horizontal_christoffel(self):
        """1/2 g^cd (delta_a g_db + delta_b g_ad - delta_d g_ab)"""
        return christoffel_form(self.g_inv, self.delta(self.g))

    def transversal_coeffs(self, rho):
        rho_up = jet.einsum('cd,d->c', self.g_inv, rho)
        return self.horizontal_christoffel() + weyl_terms(rho, rho_up, self.g)

    def connection(self, weyl='cartan'):
        return TangentConnection(self, weyl)

    @cached_property
    def sasaki(self):
        """The Sasaki metric in the adapted frame, vertical block first"""
        n = self.n
        g = self.g
        coeffs = np.zeros((2 * n, 2 * n, g.space.size))
        coeffs[:n, :n] = g.coeffs
        coeffs[n:, n:] = g.coeffs
        return jet.Jet(g.space, coeffs)

    def sasaki_coordinates(self, vertical_first=False):
        """Sasaki metric against (dx, dy), or (dy, dx) with *vertical_first*"""
        n = self.n
        Gb = self.Gb
        g = self.g.truncate(Gb.order)
        yx = jet.einsum('ac,cb->ab', g, Gb)
        xx = g + jet.einsum('ca,cb->ab', Gb, yx)
        space = Gb.space
        coeffs = np.zeros((2 * n, 2 * n, space.size))
        v, h = (slice(None, n), slice(n, None)) if vertical_first else (slice(n, None), slice(None, n))
        coeffs[v, v] = g.coeffs
        coeffs[v, h] = yx.coeffs
        coeffs[h, v] = yx.T.coeffs
        coeffs[h, h] = xx.coeffs
        return jet.Jet(space, coeffs)


class TangentConnection(AdaptedConnection):
    """The Vranceanu connection of (TN, Sasaki metric, W)

    C^c_ab: nabla_{d/dy^b} d/dy^a; D^c_ab: nabla_{delta_b} d/dy^a;
    L = 0; F^c_ab: nabla_{delta_b} delta_a.
    """
    def __init__(self, chart, weyl='cartan'):
        self.chart = chart
        self.weyl = weyl
        n = chart.n
        self.theta, self.rho = chart.weyl_jets(weyl)
        C = chart.vertical_coeffs(self.theta)
        F = chart.transversal_coeffs(self.rho)
        L = jet.Jet.constant(np.zeros((n, n, n)), chart.space)
        super().__init__(n, n, chart.Gb, C, chart.Gbc, L, F, axes=chart.axes)

    def coefficients(self, offset=0):
        return super().coefficients(offset)


def hessian_metric(spec, x, y):
    """(g, g^-1) at (x, y)"""
    chart = FinslerChart(spec, x, y, order=2)
    return chart.g.value, chart.g_inv.value


def spray(spec, x, y):
    chart = FinslerChart(spec, x, y)
    return SprayData(chart.G.value, chart.Gb.value, chart.Gbc.value)


def horizontal_frame(spec, x, y):
    chart = FinslerChart(spec, x, y, order=3)
    n = chart.n
    Gb = chart.Gb.value
    eye = np.eye(n)
    frame = np.block([[eye, -Gb.T], [np.zeros((n, n)), eye]])
    coframe = np.block([[eye, np.zeros((n, n))], [Gb, eye]])
    return HorizontalFrame(frame, coframe)


def sasaki_metric(spec, x, y):
    """Sasaki metric on the frame {delta_a, d/dy^a}: diag(g, g)"""
    g = FinslerChart(spec, x, y, order=2).g.value
    n = len(g)
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = g
    out[n:, n:] = g
    return out


def sasaki_coordinate_metric(spec, x, y):
    """Sasaki metric against the coordinate coframe (dx, dy)"""
    return FinslerChart(spec, x, y, order=3).sasaki_coordinates().value


def cartan_form(spec, x, y):
    """The Cartan form 1/2 dF^2/dy^a dx^a as a TangentWeylAdapted"""
    return FinslerChart(spec, x, y, order=2).weyl_adapted('cartan')


def vranceanu_finsler(spec, weyl, x, y):
    """Coefficients of the Vranceanu connection on TN for a Weyl form"""
    return FinslerChart(spec, x, y).connection(weyl).coefficients()


def landsberg_residual(spec, x, y):
    """[c, a, b]: 1/2 g^cd (delta_a g_db + delta_b g_ad - delta_d g_ab) - dG^c_a/dy^b"""
    chart = FinslerChart(spec, x, y)
    return (chart.horizontal_christoffel().value - chart.Gbc.value)


def cartan_transversal_forms(chart):
    """F^c_ab for the Cartan form, computed several ways

    ``weyl``: the general Weyl formula with rho = 1/2 dF^2/dy;
    ``gradient``: Weyl terms written with dF^2/dy and g^-1 directly;
    ``euler``: rho replaced by g_au y^u;
    ``spray``: d^2 G^c/dy^a dy^b in place of the horizontal Christoffel
    symbols, valid for Landsberg spaces;
    ``minkowski``: the Weyl terms alone, valid for locally Minkowski spaces.
    """
    n = chart.n
    g, g_inv = chart.g.value, chart.g_inv.value
    y = chart.y
    eye = np.eye(n)
    gamma = chart.horizontal_christoffel().value
    dF2 = chart.energy_grad.value[n:]

    gy = g @ y
    euler = 0.5 * (np.einsum('b,ca->cab', gy, eye) + np.einsum('a,cb->cab', gy, eye)
                   - np.einsum('ab,c->cab', g, y))
    gradient = 0.25 * (np.einsum('a,cb->cab', dF2, eye) + np.einsum('b,ca->cab', dF2, eye)
                       - np.einsum('c,ab->cab', g_inv @ dF2, g))
    return {
        'weyl': chart.transversal_coeffs(chart.cartan_rho).value,
        'gradient': gamma + gradient,
        'euler': gamma + euler,
        'spray': chart.Gbc.value + euler,
        'minkowski': euler,
    }


# Riemannian base --------------------------------------------------------------

def riemannian_deviation(spec, x, y):
    """Largest change of g along the fibre, relative to 1 + max|g|

    g at y is compared with g along n + 1 fixed directions off the coordinate
    axes. A fibre point where g is not positive definite counts as an
    infinite deviation.
    """
    x, y = spec.check_point(x, y)
    n = spec.n
    g0 = FinslerChart(spec, x, y, order=2).g.value
    base = np.linspace(1., 2., n)
    others = [np.roll(base, k) for k in range(n)] + [base * [(-1) ** i for i in range(n)]]
    dev = 0.
    for y2 in others:
        try:
            g2 = FinslerChart(spec, x, y2 / np.linalg.norm(y2), order=2).g.value
        except NotPositiveDefinite:
            return np.inf
        dev = max(dev, np.max(np.abs(g2 - g0)))
    return dev / (1 + np.max(np.abs(g0)))


def check_riemannian(spec, x, y):
    dev = riemannian_deviation(spec, x, y)
    if dev > RIEMANNIAN_THRESHOLD:
        raise NotRiemannianBase(dev)
    return dev


def _base_christoffel(chart):
    """Christoffel symbols of g in the base directions (g independent of y)"""
    return christoffel_form(chart.g_inv, chart.x_grad(chart.g))


def base_riemann(chart):
    """Rg[j, i, a, b] = d_a Gamma^j_ib - d_b Gamma^j_ia + Gamma^k_ib Gamma^j_ka - Gamma^k_ia Gamma^j_kb"""
    gamma = _base_christoffel(chart)
    dG = chart.x_grad(gamma)
    return (dG - dG.transpose(0, 1, 3, 2)
            + jet.einsum('kib,jka->jiab', gamma, gamma)
            - jet.einsum('kia,jkb->jiab', gamma, gamma)).value


class FinslerCurvatureTorsion:
    """Curvature and torsion of the Vranceanu-Cartan connection of a Riemannian base

    ``curvature.tts`` is R*^c_abi and ``closed_tts`` its closed form
    1/2 (g_ib delta^c_a + g_ai delta^c_b - g_ab delta^c_i); ``curvature.stt``
    is the base Riemann tensor. ``torsion_closed`` is -Rg^c_dab y^d.
    """
    def __init__(self, curvature, torsion, base_riemann, closed_tts, torsion_closed):
        self.curvature = curvature
        self.torsion = torsion
        self.base_riemann = np.asarray(base_riemann)
        self.closed_tts = np.asarray(closed_tts)
        self.torsion_closed = np.asarray(torsion_closed)

    @property
    def torsion_free(self):
        return self.torsion.max_abs() < RIEMANNIAN_THRESHOLD

    def to_xarray(self):
        ds = self.curvature.to_xarray()
        ds['T'] = (('k', 'alpha', 'beta'), self.torsion.T)
        ds['Rg'] = (('h', 'i', 'j', 'k'), self.base_riemann)
        return ds


def closed_form_tts(g):
    n = len(g)
    eye = np.eye(n)
    return 0.5 * (np.einsum('ib,ca->cabi', g, eye) + np.einsum('ai,cb->cabi', g, eye)
                  - np.einsum('ab,ci->cabi', g, eye))


def finsler_curvature_torsion(spec, x, y):
    """Curvature blocks, torsion and base curvature for a Riemannian base"""
    check_riemannian(spec, x, y)
    chart = FinslerChart(spec, x, y)
    conn = chart.connection('cartan')
    n = chart.n
    Rg = base_riemann(chart)
    curv = CurvatureData(
        n, n, offset=0,
        ttt=conn.curvature_ttt().value,
        tts=conn.curvature_tts().value,
        tss=conn.curvature_tss(),
        stt=Rg,
        sts=np.zeros((n, n, n, n)),
        sss=conn.curvature_sss().value,
    )
    T = TorsionData(conn.torsion_formula().value, offset=0)
    return FinslerCurvatureTorsion(curv, T, Rg, closed_form_tts(chart.g.value),
                                   -np.einsum('cdab,d->cab', Rg, chart.y))


def tangent_curvature(spec, x, y, weyl='cartan'):
    """Curvature blocks of the TN connection which an order 4 jet of F^2 determines"""
    conn = FinslerChart(spec, x, y).connection(weyl)
    return CurvatureData(
        conn.n, conn.p, offset=0,
        ttt=conn.curvature_ttt().value,
        tts=conn.curvature_tts().value,
        tss=conn.curvature_tss(),
        sss=conn.curvature_sss().value,
    )


def tangent_torsion(spec, x, y):
    """T[c, a, b] = delta_b G^c_a - delta_a G^c_b"""
    return TorsionData(FinslerChart(spec, x, y).torsion.value, offset=0)


def tangent_commutator_curvature(spec, x, y, weyl='cartan'):
    """Curvature blocks of the TN connection from the frame commutator"""
    conn = FinslerChart(spec, x, y).connection(weyl)
    return CurvatureData(conn.n, conn.p, offset=0, **conn.commutator_blocks())


def nabla_sasaki(spec, X, x, y, require_riemannian=True):
    """(nabla*_X G) of the Sasaki metric for the Cartan form

    ``structural`` is the vertical block, ``transversal`` the horizontal one.
    *X* is a :class:`TangentVector`.
    """
    if require_riemannian:
        check_riemannian(spec, x, y)
    chart = FinslerChart(spec, x, y)
    conn = chart.connection('cartan')
    return nabla_metric(conn, X.adapted(), chart.g, chart.g, conn.theta, conn.rho)


# Liouville vector fields ----------------------------------------------------------

class LiouvilleDerivatives:
    """nabla*_X L and nabla*_X L* computed in several ways

    *forms* maps a form name to a pair of adapted vectors (vertical first)
    for L = y^i d/dy^i and L* = y^a delta_a.
    """
    def __init__(self, forms, n):
        self.forms = forms
        self.n = n

    def __getitem__(self, name):
        L, Ls = self.forms[name]
        return (TangentVector.from_adapted(L, self.n),
                TangentVector.from_adapted(Ls, self.n))

    def max_spread(self, reference='frame'):
        ra, rb = self.forms[reference]
        return max(float(np.max(np.abs(np.concatenate([a - ra, b - rb]))))
                   for a, b in self.forms.values())

    def to_xarray(self):
        names = list(self.forms)
        n = self.n
        data = {}
        for idx, field in enumerate(['L', 'Lstar']):
            arr = np.array([self.forms[k][idx] for k in names])
            data[field + '_vertical'] = (('form', 'i'), arr[:, :n])
            data[field + '_horizontal'] = (('form', 'alpha'), arr[:, n:])
        return xr.Dataset(data, coords={
            'form': names, 'i': np.arange(1, n + 1), 'alpha': np.arange(1, n + 1),
        })


def _liouville_fields(chart):
    n = chart.n
    space = chart.space
    L = np.zeros((2 * n, space.size))
    L[:n] = chart.y_jet.coeffs
    Ls = np.zeros((2 * n, space.size))
    Ls[n:] = chart.y_jet.coeffs
    return jet.Jet(space, L), jet.Jet(space, Ls)


def liouville_derivatives(spec, weyl, X, x, y):
    """Covariant derivatives of the Liouville fields along X (a TangentVector)"""
    return chart_liouville_derivatives(FinslerChart(spec, x, y), weyl, X)


def chart_liouville_derivatives(chart, weyl, X):
    conn = chart.connection(weyl)
    n = chart.n
    Xa = X.adapted()
    Xv, Xh = Xa[:n], Xa[n:]
    y = chart.y
    zero = np.zeros(n)

    L, Ls = _liouville_fields(chart)
    forms = {'frame': (conn.covariant(Xa, L).value, conn.covariant(Xa, Ls).value)}

    C, D, F = conn.C.value, conn.D.value, conn.F.value
    Gb = chart.Gb.value
    raw_L = Xv + np.einsum('ikj,k,j->i', C, y, Xv) + (np.einsum('abc,b->ac', D, y) - Gb) @ Xh
    raw_Ls = Xv + (np.einsum('abc,b->ac', F, y) - Gb) @ Xh
    forms['coefficients'] = (np.concatenate([raw_L, zero]), np.concatenate([zero, raw_Ls]))

    g = chart.g.value
    w = chart.weyl_adapted(weyl)
    theta, rho, theta_up, rho_up = w.theta, w.rho, w.theta_up, w.rho_up
    simple_L = Xv + 0.5 * ((theta @ Xv) * y + (theta @ y) * Xv - (y @ g @ Xv) * theta_up)
    simple_Ls = Xv + 0.5 * ((rho @ Xh) * y + (rho @ y) * Xh - (y @ g @ Xh) * rho_up)
    forms['weyl'] = (np.concatenate([simple_L, zero]), np.concatenate([zero, simple_Ls]))

    # Vector and form algebra on TN with the Sasaki metric
    G = chart.sasaki.value
    VX = np.concatenate([Xv, zero])
    HX = np.concatenate([zero, Xh])
    Lv = np.concatenate([y, zero])
    Lsv = np.concatenate([zero, y])
    WV = np.concatenate([theta, zero])
    WH = np.concatenate([zero, rho])
    Theta_X = np.concatenate([zero, Xv])
    glob_L = VX + 0.5 * ((WV @ VX) * Lv + (WV @ Lv) * VX
                         - (VX @ G @ Lv) * np.linalg.solve(G, WV))
    glob_Ls = Theta_X + 0.5 * ((WH @ HX) * Lsv + (WH @ Lsv) * HX
                               - (HX @ G @ Lsv) * np.linalg.solve(G, WH))
    forms['global'] = (glob_L, glob_Ls)

    if weyl == 'cartan':
        F2 = float(chart.energy.value)
        forms['cartan'] = (VX, Theta_X + 0.5 * F2 * HX)

    return LiouvilleDerivatives(forms, n)


# Sasaki metric through the foliated manifold construction -----------------------

def sasaki_pipeline_coeffs(spec, x, y, weyl='cartan'):
    """Vranceanu coefficients of TN foliated by the fibres, from the coordinate Sasaki metric

    The fibres are the leaves: y is structural and x transversal. The
    coefficients match those of :class:`TangentConnection`.
    """
    chart = FinslerChart(spec, x, y)
    n = chart.n
    metric = chart.sasaki_coordinates(vertical_first=True)
    theta, rho = chart.weyl_jets(weyl)
    w_x = rho + jet.tensordot(theta, chart.Gb)
    space = metric.space
    coeffs = np.zeros((2 * n, space.size))
    coeffs[:n] = theta.truncate(space.order).coeffs
    coeffs[n:] = w_x.truncate(space.order).coeffs
    foliated = FoliatedChart(n, n, metric, jet.Jet(space, coeffs),
                             point=chart.point, axes=chart.axes)
    return VranceanuConnection(foliated).coefficients(offset=0)
