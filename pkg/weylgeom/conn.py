"""Compatible and Vranceanu connections, their torsion and curvature.

Everything is expressed in the adapted frame {E_i = d_i, E_alpha = delta_alpha}
with 0-based arrays, structural indices first:

- ``C[k, i, j]``: nabla_{d_j} d_i = C^k_ij d_k
- ``D[k, i, a]``: nabla_{delta_a} d_i = D^k_ia d_k
- ``L[c, a, i]``: nabla_{d_i} delta_a = L^c_ai delta_c
- ``F[c, a, b]``: nabla_{delta_b} delta_a = F^c_ab delta_c

:class:`AdaptedConnection` is the frame calculus for any such connection; it
is shared with :mod:`weylgeom.finsler`, where the vertical directions of the
tangent bundle play the structural role.
"""
import logging
from functools import cached_property

import numpy as np
import xarray as xr

from . import jet
from .exceptions import BadFrameArgument, DimensionMismatch, InsufficientOrder
from .geom import FoliatedChart, check_nondegenerate, christoffel_form, weyl_terms

__all__ = [
    'ConnectionCoeffs', 'TorsionData', 'CurvatureData', 'NablaMetric',
    'AdaptedConnection', 'VranceanuConnection', 'connection_at',
    'compatible_coeffs', 'vranceanu_coeffs', 'koszul_oracle',
    'koszul_transversal', 'koszul_coeffs', 'full_weyl_connection',
    'vranceanu_global_oracle', 'dprime_torsion_residual', 'torsion_transversal',
    'torsion_bracket_oracle', 'curvature', 'curvature_commutator_oracle',
    'commutator_curvature', 'nabla_g', 'nabla_metric', 'metricity_residual',
    'nijenhuis_P', 'CURVATURE_BLOCKS',
]

log = logging.getLogger(__name__)

STRUCTURAL_DIMS = ('h', 'i', 'j', 'k')
TRANSVERSAL_DIMS = ('alpha', 'beta', 'gamma', 'mu')
FULL_DIMS = ('a', 'b', 'c')


def labelled_dataset(variables, n, p, offset=None):
    """xarray Dataset of 0-based arrays, labelled with 1-based frame indices

    Structural dimensions are labelled 1..n, transversal ones
    offset+1..offset+p (offset defaults to n), full ones 1..n+p.
    """
    if offset is None:
        offset = n
    labels = {}
    for d in STRUCTURAL_DIMS:
        labels[d] = np.arange(1, n + 1)
    for d in TRANSVERSAL_DIMS:
        labels[d] = np.arange(offset + 1, offset + p + 1)
    for d in FULL_DIMS:
        labels[d] = np.arange(1, n + p + 1)

    data_vars = {}
    used = set()
    for name, (dims, values) in variables.items():
        if values is None:
            continue
        data_vars[name] = (dims, np.asarray(values))
        used.update(dims)
    return xr.Dataset(data_vars, coords={d: labels[d] for d in sorted(used)})


def _max_abs(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.


class ConnectionCoeffs:
    """Coefficient blocks at a point; blocks which were not computed are None"""
    BLOCK_DIMS = {
        'C': ('k', 'i', 'j'),
        'D': ('k', 'i', 'alpha'),
        'L': ('gamma', 'alpha', 'i'),
        'F': ('gamma', 'alpha', 'beta'),
    }

    def __init__(self, C=None, D=None, L=None, F=None, n=None, p=None, offset=None):
        self.C = None if C is None else np.asarray(C)
        self.D = None if D is None else np.asarray(D)
        self.L = None if L is None else np.asarray(L)
        self.F = None if F is None else np.asarray(F)
        self.n = n if n is not None else self.C.shape[0]
        if p is None:
            p = self.F.shape[0] if self.F is not None else self.D.shape[2]
        self.p = p
        self.offset = offset

    def blocks(self):
        return {name: getattr(self, name) for name in self.BLOCK_DIMS
                if getattr(self, name) is not None}

    def max_difference(self, other, names=None):
        mine, theirs = self.blocks(), other.blocks()
        names = names or [k for k in mine if k in theirs]
        return max((_max_abs(mine[k] - theirs[k]) for k in names), default=0.)

    def to_xarray(self):
        return labelled_dataset(
            {k: (self.BLOCK_DIMS[k], v) for k, v in self.blocks().items()},
            self.n, self.p, self.offset)


class TorsionData:
    """T[k, a, b] = T*^k_ab, the structural part of [delta_a, delta_b]"""
    def __init__(self, T, offset=None):
        self.T = np.asarray(T)
        self.offset = offset

    def max_abs(self):
        return _max_abs(self.T)

    def to_xarray(self):
        n, p = self.T.shape[0], self.T.shape[1]
        return labelled_dataset({'T': (('k', 'alpha', 'beta'), self.T)}, n, p, self.offset)


# Block name -> dims. Names give the kinds of (target field, slots...) in the
# order the indices are written: 'tts' is R^mu_{alpha beta i}.
CURVATURE_BLOCKS = {
    'ttt': ('mu', 'alpha', 'beta', 'gamma'),  # R(delta_g, delta_b) delta_a
    'tts': ('mu', 'alpha', 'beta', 'i'),      # R(d_i, delta_b) delta_a
    'tss': ('mu', 'alpha', 'i', 'j'),         # R(d_j, d_i) delta_a
    'stt': ('h', 'i', 'alpha', 'beta'),       # R(delta_a, delta_b) d_i
    'sts': ('h', 'i', 'alpha', 'k'),          # R(d_k, delta_a) d_i
    'sss': ('h', 'i', 'j', 'k'),              # R(d_k, d_j) d_i
}


class CurvatureData:
    """Curvature blocks at a point; unavailable blocks are None"""
    def __init__(self, n, p, offset=None, **blocks):
        self.n = n
        self.p = p
        self.offset = offset
        for name in CURVATURE_BLOCKS:
            b = blocks.get(name)
            setattr(self, name, None if b is None else np.asarray(b))

    def blocks(self):
        return {name: getattr(self, name) for name in CURVATURE_BLOCKS
                if getattr(self, name) is not None}

    def max_difference(self, other):
        mine, theirs = self.blocks(), other.blocks()
        return max((_max_abs(mine[k] - theirs[k]) for k in mine if k in theirs),
                   default=0.)

    def to_xarray(self):
        return labelled_dataset(
            {k: (CURVATURE_BLOCKS[k], v) for k, v in self.blocks().items()},
            self.n, self.p, self.offset)


class NablaMetric:
    """Blocks of (nabla*_X g) in the adapted frame

    ``structural``/``mixed``/``transversal`` follow the coefficient formula;
    ``*_closed`` are the simplified forms in theta and rho; ``definition``
    is X(g(Y,Z)) - g(nabla_X Y, Z) - g(Y, nabla_X Z) for the whole frame.
    """
    def __init__(self, structural, mixed, transversal, structural_closed,
                 transversal_closed, definition, offset=None):
        self.structural = np.asarray(structural)
        self.mixed = np.asarray(mixed)
        self.transversal = np.asarray(transversal)
        self.structural_closed = np.asarray(structural_closed)
        self.transversal_closed = np.asarray(transversal_closed)
        self.definition = np.asarray(definition)
        self.offset = offset

    def to_xarray(self):
        n, p = self.mixed.shape
        return labelled_dataset({
            'structural': (('i', 'j'), self.structural),
            'mixed': (('i', 'alpha'), self.mixed),
            'transversal': (('alpha', 'beta'), self.transversal),
            'structural_closed': (('i', 'j'), self.structural_closed),
            'transversal_closed': (('alpha', 'beta'), self.transversal_closed),
            'definition': (('a', 'b'), self.definition),
        }, n, p, self.offset)


def frame_matrix(n, p, A):
    """Rows are the coordinate components of d_i and delta_alpha"""
    dim = n + p
    coeffs = np.zeros((dim, dim, A.space.size))
    coeffs[np.arange(dim), np.arange(dim), 0] = 1.
    coeffs[n:, :n] = -A.T.coeffs
    return jet.Jet(A.space, coeffs)


def coframe_matrix(n, p, A):
    """Maps coordinate components to adapted components"""
    dim = n + p
    coeffs = np.zeros((dim, dim, A.space.size))
    coeffs[np.arange(dim), np.arange(dim), 0] = 1.
    coeffs[:n, n:] = A.coeffs
    return jet.Jet(A.space, coeffs)


def _padded(block, space):
    """Coefficients of *block* in *space*, with zeros beyond its own order"""
    if block.order >= space.order:
        return block.truncate(space.order).coeffs
    coeffs = np.zeros(block.shape + (space.size,))
    coeffs[..., :block.space.size] = block.coeffs
    return coeffs


def structure_functions(phi, psi, grad):
    """kappa[e, a, b] with [E_a, E_b] = kappa^e_ab E_e, for frame rows phi"""
    dphi = grad(phi)
    t = jet.einsum('ad,bcd->abc', phi, dphi)
    return jet.einsum('ec,abc->eab', psi, t - t.transpose(1, 0, 2))


class AdaptedConnection:
    """A linear connection given by its coefficients in an adapted frame

    *A* (n, p) is the frame shift of delta_alpha; C, D, L, F are coefficient
    jets as described in the module docstring. *axes* selects, structural
    first, the jet variables which are the chart coordinates; by default the
    jet variables are already in that order.

    Vector fields are passed around as jets (or arrays) of adapted
    components.
    """
    def __init__(self, n, p, A, C, D, L, F, axes=None):
        self.n = n
        self.p = p
        self.dim = n + p
        self.A = A
        self.C = C
        self.D = D
        self.L = L
        self.F = F
        self.axes = None if axes is None else np.asarray(axes, dtype=np.intp)

    @property
    def space(self):
        return self.A.space

    def grad(self, f):
        d = jet.grad(f)
        if self.axes is None:
            return d
        return d[..., self.axes]

    def structural_grad(self, f):
        return self.grad(f)[..., :self.n]

    def delta(self, f):
        d = self.grad(f)
        return d[..., self.n:] - jet.tensordot(d[..., :self.n], self.A)

    @cached_property
    def frame(self):
        return frame_matrix(self.n, self.p, self.A)

    @cached_property
    def coframe(self):
        return coframe_matrix(self.n, self.p, self.A)

    @cached_property
    def omega(self):
        """Omega[c, a, b]: nabla_{E_b} E_a = Omega^c_ab E_c"""
        n, dim = self.n, self.dim
        order = min(b.order for b in (self.C, self.L, self.F))
        space = jet.jet_space(self.space.nvars, order)
        coeffs = np.zeros((dim, dim, dim, space.size))
        coeffs[:n, :n, :n] = self.C.truncate(order).coeffs
        coeffs[:n, :n, n:] = _padded(self.D, space)
        coeffs[n:, n:, :n] = self.L.truncate(order).coeffs
        coeffs[n:, n:, n:] = self.F.truncate(order).coeffs
        return jet.Jet(space, coeffs)

    @property
    def available_blocks(self):
        """Curvature blocks the commutator can give at the orders of the blocks"""
        if self.D.order < self.omega.order:
            return tuple(b for b in CURVATURE_BLOCKS if b not in ('stt', 'sts'))
        return tuple(CURVATURE_BLOCKS)

    @cached_property
    def structure(self):
        return structure_functions(self.frame, self.coframe, self.grad)

    def vector(self, components):
        if isinstance(components, jet.Jet):
            return components
        components = np.asarray(components, dtype=np.float64)
        if components.shape != (self.dim,):
            raise DimensionMismatch('vector', self.dim, components.shape[0])
        return jet.Jet.constant(components, self.space)

    def basis(self, a):
        if not 0 <= a < self.dim:
            raise BadFrameArgument(a + 1, self.dim)
        return self.vector(np.eye(self.dim)[a])

    def project(self, X):
        """Q X: keep the structural components"""
        mask = np.zeros(self.dim)
        mask[:self.n] = 1.
        return self.vector(X) * mask

    def to_coordinates(self, X):
        return jet.einsum('a,ac->c', self.vector(X), self.frame)

    def to_adapted(self, V):
        return jet.einsum('ec,c->e', self.coframe, V)

    def derive(self, coords, f):
        """Directional derivative of f along a vector with coordinate components"""
        return jet.tensordot(self.grad(f), coords)

    def frame_derivative(self, f):
        """[..., a] = E_a(f)"""
        return jet.tensordot(self.grad(f), self.frame.T)

    def covariant(self, X, Z):
        X, Z = self.vector(X), self.vector(Z)
        deriv = self.derive(self.to_coordinates(X), Z)
        return deriv + jet.einsum('cb,b->c', jet.einsum('cab,a->cb', self.omega, Z), X)

    def bracket(self, X, Y):
        x, y = self.to_coordinates(X), self.to_coordinates(Y)
        return self.to_adapted(self.derive(x, y) - self.derive(y, x))

    def torsion_operator(self, X, Y):
        return self.covariant(X, Y) - self.covariant(Y, X) - self.bracket(X, Y)

    def curvature_operator(self, X, Y, Z):
        """R(X, Y) Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z"""
        return (self.covariant(X, self.covariant(Y, Z))
                - self.covariant(Y, self.covariant(X, Z))
                - self.covariant(self.bracket(X, Y), Z))

    def metric_derivative(self, G, X):
        """(nabla_X G)_ab = X(G_ab) - G(nabla_X E_a, E_b) - G(E_a, nabla_X E_b)"""
        X = self.vector(X)
        om_x = jet.einsum('cax,x->ca', self.omega, X)
        return (self.derive(self.to_coordinates(X), G)
                - jet.einsum('ca,cb->ab', om_x, G)
                - jet.einsum('cb,ac->ab', om_x, G))

    @cached_property
    def frame_torsion(self):
        """Tf[c, x, y] = T(E_x, E_y)^c"""
        om = self.omega
        return om.transpose(0, 2, 1) - om - self.structure

    @cached_property
    def frame_curvature(self):
        """Rf[c, a, x, y] = (R(E_x, E_y) E_a)^c from the frame structure"""
        om = self.omega
        d_om = self.frame_derivative(om)
        return (d_om.transpose(0, 1, 3, 2) - d_om
                + jet.einsum('eay,cex->caxy', om, om)
                - jet.einsum('eax,cey->caxy', om, om)
                - jet.einsum('exy,cae->caxy', self.structure, om))

    def torsion_formula(self):
        """T[k, a, b] = delta_b A^k_a - delta_a A^k_b"""
        dA = self.delta(self.A)
        return dA - dA.transpose(0, 2, 1)

    def coefficients(self, offset=None):
        return ConnectionCoeffs(
            self.C.value, self.D.value, self.L.value, self.F.value,
            n=self.n, p=self.p, offset=offset,
        )

    # Curvature blocks from the coefficient formulas (L = 0) ---------------

    def curvature_ttt(self):
        F = self.F
        dF = self.delta(F)
        return (dF - dF.transpose(0, 1, 3, 2)
                + jet.einsum('nab,mng->mabg', F, F)
                - jet.einsum('nag,mnb->mabg', F, F))

    def curvature_tts(self):
        return self.structural_grad(self.F)

    def curvature_tss(self):
        return np.zeros((self.p, self.p, self.n, self.n))

    def curvature_stt(self, T=None):
        C, D = self.C, self.D
        if T is None:
            T = self.torsion_formula()
        dD = self.delta(D)
        return (dD.transpose(0, 1, 3, 2) - dD
                + jet.einsum('kib,hka->hiab', D, D)
                - jet.einsum('kia,hkb->hiab', D, D)
                - jet.einsum('kab,hik->hiab', T, C))

    def curvature_sts(self):
        C, D = self.C, self.D
        return (self.structural_grad(D)
                - self.delta(C).transpose(0, 1, 3, 2)
                + jet.einsum('jia,hjk->hiak', D, C)
                - jet.einsum('jik,hja->hiak', C, D)
                + jet.einsum('jka,hij->hiak', D, C))

    def curvature_sss(self):
        C = self.C
        dC = self.structural_grad(C)
        return (dC - dC.transpose(0, 1, 3, 2)
                + jet.einsum('eij,hek->hijk', C, C)
                - jet.einsum('eik,hej->hijk', C, C))

    def commutator_blocks(self, names=None):
        """Curvature blocks sliced from the frame commutator curvature

        Blocks which differentiate D are unavailable when D is known to a
        lower order than the other blocks.
        """
        if names is None:
            names = self.available_blocks
        for name in names:
            if name not in self.available_blocks:
                raise InsufficientOrder('curvature block ' + name, self.omega.order, self.D.order)
        R = self.frame_curvature.value
        n = self.n
        s, t = slice(None, n), slice(n, None)
        swap = (0, 1, 3, 2)
        sliced = {
            'ttt': lambda: R[t, t, t, t].transpose(swap),
            'tts': lambda: R[t, t, s, t].transpose(swap),
            'tss': lambda: R[t, t, s, s].transpose(swap),
            'stt': lambda: R[s, s, t, t],
            'sts': lambda: R[s, s, s, t].transpose(swap),
            'sss': lambda: R[s, s, s, s].transpose(swap),
        }
        return {name: sliced[name]() for name in names}


def leaf_coefficients(chart):
    """C and D of the compatible connection; only the structural block is inverted"""
    C = chart.christoffel + weyl_terms(chart.theta, chart.theta_up, chart.gs)
    D = chart.structural_grad(chart.A).transpose(0, 2, 1)
    return C, D


class VranceanuConnection(AdaptedConnection):
    """The Vranceanu connection of a foliated chart

    C and D make up the compatible connection of the leaves; F is the
    transversal Weyl connection of (g_trans, rho); L vanishes.
    """
    def __init__(self, chart):
        self.chart = chart
        n, p = chart.n, chart.p
        C, D = leaf_coefficients(chart)
        F = (christoffel_form(chart.g_trans_inv, chart.delta(chart.g_trans))
             + weyl_terms(chart.rho, chart.rho_up, chart.g_trans))
        L = jet.Jet.constant(np.zeros((p, p, n)), chart.metric.space)
        super().__init__(n, p, chart.A, C, D, L, F, axes=chart.axes)


def connection_at(spec, point, order=2):
    return VranceanuConnection(FoliatedChart.at(spec, point, order))


def compatible_coeffs(spec, point):
    """C and D blocks of the compatible connection on the leaves"""
    C, D = leaf_coefficients(FoliatedChart.at(spec, point, order=1))
    return ConnectionCoeffs(C=C.value, D=D.value, n=spec.n, p=spec.p)


def vranceanu_coeffs(spec, point):
    return connection_at(spec, point, order=1).coefficients()


# Koszul oracle -----------------------------------------------------------------

def _coordinate_field(chart, a):
    return jet.Jet.constant(np.eye(chart.dim)[a], chart.metric.space)


def _koszul(chart, X, Y, Z):
    """2 g(nabla_X Y, Z) by the Weyl-Koszul formula, for coordinate-component jets"""
    g, w = chart.metric, chart.weyl

    def pair(U, V):
        return jet.einsum('a,a->', U, jet.einsum('ab,b->a', g, V))

    def derive(U, f):
        return jet.tensordot(jet.grad(f), U)

    def bracket(U, V):
        return derive(U, V) - derive(V, U)

    def form(U):
        return jet.einsum('a,a->', w, U)

    return (derive(X, pair(Y, Z)) + derive(Y, pair(Z, X)) - derive(Z, pair(X, Y))
            + pair(bracket(X, Y), Z) - pair(bracket(Y, Z), X) + pair(bracket(Z, X), Y)
            + form(X) * pair(Y, Z) + form(Y) * pair(Z, X) - form(Z) * pair(X, Y))


def _check_structural(chart, *indices):
    for a in indices:
        if not 0 <= a < chart.n:
            raise BadFrameArgument(a + 1, chart.n)


def koszul_oracle(spec, point, X, Y, Z):
    """2 g(nabla_{d_X} d_Y, d_Z) for 0-based structural indices"""
    chart = FoliatedChart.at(spec, point, order=1)
    _check_structural(chart, X, Y, Z)
    fields = [_coordinate_field(chart, a) for a in (X, Y, Z)]
    return float(_koszul(chart, *fields).value)


def _koszul_transversal(chart, alpha, i):
    """Q[delta_alpha, d_i] in structural components"""
    n = chart.n
    phi = frame_matrix(n, chart.p, chart.A)
    X, Y = phi[n + alpha], _coordinate_field(chart, i)
    br = jet.tensordot(jet.grad(Y), X) - jet.tensordot(jet.grad(X), Y)
    return (br[:n] + jet.tensordot(chart.A, br[n:])).value


def koszul_transversal(spec, point, alpha, i):
    """nabla_{delta_alpha} d_i as the projected bracket, structural components"""
    chart = FoliatedChart.at(spec, point, order=1)
    _check_structural(chart, i)
    if not 0 <= alpha < chart.p:
        raise BadFrameArgument(chart.n + alpha + 1, chart.dim)
    return _koszul_transversal(chart, alpha, i)


def koszul_chart_coeffs(chart):
    n, p = chart.n, chart.p
    fields = [_coordinate_field(chart, a) for a in range(n)]
    K = np.zeros((n, n, n))
    for j in range(n):
        for i in range(n):
            for l in range(n):
                K[l, i, j] = float(_koszul(chart, fields[j], fields[i], fields[l]).value)
    C = 0.5 * np.einsum('kl,lij->kij', chart.gs_inv.value, K)
    D = np.zeros((n, n, p))
    for alpha in range(p):
        for i in range(n):
            D[:, i, alpha] = _koszul_transversal(chart, alpha, i)
    return ConnectionCoeffs(C=C, D=D, n=n, p=p)


def koszul_coeffs(spec, point):
    """C and D extracted from the Koszul oracle for every frame argument"""
    return koszul_chart_coeffs(FoliatedChart.at(spec, point, order=1))


# Full Weyl connection and the global form of the Vranceanu connection ----------

def full_weyl_jet(chart):
    g, w = chart.metric, chart.weyl
    check_nondegenerate(g.value, 'full', chart.point)
    g_inv = jet.inv(g)
    return (christoffel_form(g_inv, jet.grad(g))
            + weyl_terms(w, jet.einsum('ab,b->a', g_inv, w), g))


def full_weyl_connection(spec, point):
    """Gamma~[c, a, b] of the Weyl connection of (g, W) on all coordinates"""
    return full_weyl_jet(FoliatedChart.at(spec, point, order=1)).value


def global_oracle_coeffs(chart):
    """C = Q nabla~_{E_j} E_i, F = Q' nabla~_{E_b} E_a, D = Q[E_a, E_i], L = Q'[E_i, E_a]"""
    n, p = chart.n, chart.p
    gamma = full_weyl_jet(chart)
    phi = frame_matrix(n, p, chart.A)
    psi = coframe_matrix(n, p, chart.A)

    # nabla~_{E_b} E_a in coordinates, then in adapted components
    dphi = jet.grad(phi)
    along = jet.einsum('cxy,by->cxb', gamma, phi)
    coord = (jet.einsum('bd,acd->cab', phi, dphi)
             + jet.einsum('cxb,ax->cab', along, phi))
    nabla = jet.einsum('ec,cab->eab', psi, coord).value
    kappa = structure_functions(phi, psi, jet.grad).value

    return ConnectionCoeffs(
        C=nabla[:n, :n, :n],
        D=kappa[:n, n:, :n].transpose(0, 2, 1),
        L=kappa[n:, :n, n:].transpose(0, 2, 1),
        F=nabla[n:, n:, n:],
        n=n, p=p,
    )


def vranceanu_global_oracle(spec, point):
    return global_oracle_coeffs(FoliatedChart.at(spec, point, order=1))


# Torsion ------------------------------------------------------------------------

def dprime_torsion_residual(spec, point, X, Y):
    """nabla_X QY - nabla_{QY} QX - Q[X, QY] for 0-based frame indices"""
    conn = connection_at(spec, point, order=1)
    return frame_dprime_residual(conn, X, Y)


def frame_dprime_residual(conn, X, Y):
    Xv, Yv = conn.basis(X), conn.basis(Y)
    QX, QY = conn.project(Xv), conn.project(Yv)
    res = conn.covariant(Xv, QY) - conn.covariant(QY, QX) - conn.project(conn.bracket(Xv, QY))
    return res.value


def torsion_transversal(spec, point):
    conn = connection_at(spec, point, order=1)
    return TorsionData(conn.torsion_formula().value)


def torsion_bracket_oracle(spec, point):
    """T* as the structural components of [delta_a, delta_b], by jet brackets"""
    conn = connection_at(spec, point, order=1)
    n = conn.n
    return TorsionData(conn.structure.value[:n, n:, n:])


# Curvature ------------------------------------------------------------------------

def curvature_from_formulas(conn, offset=None):
    return CurvatureData(
        conn.n, conn.p, offset,
        ttt=conn.curvature_ttt().value,
        tts=conn.curvature_tts().value,
        tss=conn.curvature_tss(),
        stt=conn.curvature_stt().value,
        sts=conn.curvature_sts().value,
        sss=conn.curvature_sss().value,
    )


def curvature(spec, point):
    return curvature_from_formulas(connection_at(spec, point))


def commutator_curvature(spec, point):
    conn = connection_at(spec, point)
    return CurvatureData(conn.n, conn.p, **conn.commutator_blocks())


def curvature_commutator_oracle(spec, point, pair, target):
    """(R(E_x, E_y) E_a) in adapted components, for 0-based frame indices"""
    conn = connection_at(spec, point)
    x, y = pair
    return conn.curvature_operator(conn.basis(x), conn.basis(y), conn.basis(target)).value


# Metric covariant derivative ------------------------------------------------------

def block_diagonal(gs, gT):
    """The metric in the adapted frame: diag(gs, gT)"""
    n, p = gs.shape[0], gT.shape[0]
    order = min(gs.order, gT.order)
    space = jet.jet_space(gs.nvars, order)
    coeffs = np.zeros((n + p, n + p, space.size))
    coeffs[:n, :n] = gs.truncate(order).coeffs
    coeffs[n:, n:] = gT.truncate(order).coeffs
    return jet.Jet(space, coeffs)


def metricity_residual(conn, g, C, theta=None):
    """r[i, j, k] = d_k g_ij - C^h_ik g_hj - C^h_kj g_ih (+ theta_k g_ij)

    Derivatives are along the structural directions of *conn*.
    """
    r = (conn.structural_grad(g) - jet.einsum('hik,hj->ijk', C, g)
         - jet.einsum('hkj,ih->ijk', C, g)).value
    if theta is not None:
        r = r + np.einsum('k,ij->ijk', jet.value_of(theta), jet.value_of(g))
    return r


def nabla_metric(conn, X, gs, gT, theta, rho):
    """Blocks of (nabla_X g) for the metric diag(gs, gT) on the adapted frame

    *theta* and *rho* are the structural and transversal parts of the Weyl
    form, used by the closed forms.
    """
    n = conn.n
    X = np.asarray(X, dtype=np.float64)
    if X.shape != (conn.dim,):
        raise DimensionMismatch('vector', conn.dim, X.shape[0])
    Xs, Xt = X[:n], X[n:]
    C, F = conn.C, conn.F

    cc = metricity_residual(conn, gs, C)
    delta_gs = conn.delta(gs).value
    structural = cc @ Xs + delta_gs @ Xt

    sgT = conn.structural_grad(gT).value
    ff = (conn.delta(gT) - jet.einsum('ram,rb->abm', F, gT)
          - jet.einsum('rmb,ar->abm', F, gT)).value
    transversal = sgT @ Xs + ff @ Xt

    theta, rho = jet.value_of(theta), jet.value_of(rho)
    structural_closed = -(Xs @ theta) * gs.value + delta_gs @ Xt
    transversal_closed = sgT @ Xs - (Xt @ rho) * gT.value

    definition = conn.metric_derivative(block_diagonal(gs, gT), X).value
    return NablaMetric(structural, definition[:n, n:], transversal,
                       structural_closed, transversal_closed, definition)


def nabla_g(spec, point, X):
    """(nabla*_X g) for X given in adapted components"""
    conn = connection_at(spec, point, order=1)
    chart = conn.chart
    return nabla_metric(conn, X, chart.gs, chart.g_trans, chart.theta, chart.rho)


def frame_nijenhuis(conn, X, Y):
    sign = np.ones(conn.dim)
    sign[conn.n:] = -1.

    def P(V):
        return V * sign

    PX, PY = P(X), P(Y)
    return (conn.bracket(PX, PY) - P(conn.bracket(PX, Y))
            - P(conn.bracket(X, PY)) + conn.bracket(X, Y))


def nijenhuis_P(spec, point, X, Y):
    """N_P(E_X, E_Y) for P = Q - Q', 0-based frame indices, adapted components"""
    conn = connection_at(spec, point, order=1)
    return frame_nijenhuis(conn, conn.basis(X), conn.basis(Y)).value
