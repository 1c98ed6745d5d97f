"""Property suites: sample points, evaluate invariants, report pass/fail.

Each suite evaluates per-point residuals into a pandas table (one row per
sampled point) and reduces the table to checks. A check is an upper bound
(residual < tolerance), a lower bound (quantity > bound) or recorded for
information only. Two-sided claims ("A if and only if B") record whether
the inequality holds and whether it was expected to; the check passes when
the two agree.
"""
import logging
import time
from multiprocessing import Pool

import numpy as np
import pandas as pd

from . import jet
from .conn import (
    VranceanuConnection, curvature_from_formulas, frame_dprime_residual,
    frame_nijenhuis, full_weyl_jet, global_oracle_coeffs, koszul_chart_coeffs,
    metricity_residual, nabla_metric,
)
from .exceptions import EmptyDomain, SuiteInapplicable, UnknownSuite, WeylGeomError
from .exprlang import Neg, parse
from .finsler import (
    RIEMANNIAN_THRESHOLD, FinslerChart, TangentVector, TangentWeylAdapted,
    base_riemann, cartan_transversal_forms, chart_liouville_derivatives,
    closed_form_tts, horizontal_frame, riemannian_deviation,
    sasaki_pipeline_coeffs,
)
from .geom import FoliatedChart, adapted_frame, christoffel_form, gauge_transform
from .utils import atomic_dump, available_cpu_cores, format_real, ignore_sigint

__all__ = [
    'SuiteConfig', 'CheckResult', 'VerificationReport', 'SUITES', 'INVARIANTS',
    'SUITE_ALIASES', 'run_suite', 'sample_points', 'get_suite',
]

log = logging.getLogger(__name__)

DEFAULT_SAMPLES = 100
DEFAULT_SEED = 42
MAX_REJECTIONS = 10000

TOLERANCES = {
    'exact': 1e-12,
    'algebraic': 1e-10,
    'first': 1e-9,
    'curvature': 1e-8,
    'homogeneity': 1e-8,
    'finite-difference': 1e-5,
    'high-order-finite-difference': 1e-3,
}

HOMOGENEITY_FACTORS = (0.5, 2., 3.)

# Thresholds for the lower-bound checks
CURVED_TORSION_BOUND = 1e-2
NONVANISHING_BOUND = 0.1
BUNDLE_LIKE_THRESHOLD = 1e-6
RECURRENCE_VIOLATION_BOUND = 1e-3
MINKOWSKI_THRESHOLD = 1e-12


class SuiteConfig:
    """What to verify and how

    *tolerances* maps suite ids to a tolerance replacing every upper-bound
    tolerance of that suite; *tol* does the same for all suites. *jobs* is
    the number of worker processes, 0 meaning one per available core.
    """
    def __init__(self, suite, samples=DEFAULT_SAMPLES, seed=DEFAULT_SEED,
                 tolerances=None, tol=None, jobs=1):
        if samples < 1:
            raise EmptyDomain("sample count must be at least 1, got {}".format(samples))
        self.suite = suite
        self.samples = int(samples)
        self.seed = int(seed)
        self.tolerances = dict(tolerances or {})
        for name, value in self.tolerances.items():
            if not value > 0:
                raise ValueError("Tolerance for {} must be positive, got {}".format(name, value))
        if tol is not None and not tol > 0:
            raise ValueError("Tolerance must be positive, got {}".format(tol))
        self.tol = tol
        self.jobs = int(jobs)

    def tolerance(self, suite, level):
        if self.tol is not None:
            return self.tol
        if suite in self.tolerances:
            return self.tolerances[suite]
        return TOLERANCES[level]

    @property
    def processes(self):
        return self.jobs or available_cpu_cores()


def sample_points(spec, count, seed=DEFAULT_SEED):
    """Uniform points in the spec's domain box, one PCG64 stream per point

    Finsler points are 2n-vectors (x, y) with |y| >= spec.zero_radius.
    """
    if count < 1:
        raise EmptyDomain("sample count must be at least 1, got {}".format(count))
    lo, hi = np.array(spec.domain, dtype=np.float64).T
    for (a, b), name in zip(spec.domain, spec.coordinates):
        if b < a:
            raise EmptyDomain("interval [{}, {}] for {} is empty".format(a, b, name))

    finsler = spec.kind == 'finsler'
    if finsler:
        n = spec.n
        reach = np.maximum(np.abs(lo[n:]), np.abs(hi[n:]))
        if np.linalg.norm(reach) < spec.zero_radius:
            raise EmptyDomain("the fibre box lies within |y| < {}".format(spec.zero_radius))

    points = []
    for stream in np.random.SeedSequence(seed).spawn(count):
        rng = np.random.Generator(np.random.PCG64(stream))
        for _ in range(MAX_REJECTIONS):
            point = lo + (hi - lo) * rng.random(len(lo))
            if not finsler or np.linalg.norm(point[spec.n:]) >= spec.zero_radius:
                break
        else:
            raise EmptyDomain("no point with |y| >= {} found in the fibre box".format(
                spec.zero_radius))
        points.append(point)
    return points


def _amax(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.


def _relative(a, ref):
    """max|a - ref|, relative to max(1, max|ref|)"""
    return _amax(np.asarray(a) - np.asarray(ref)) / max(1., _amax(ref))


class CheckResult:
    KINDS = ('upper', 'lower', 'info')

    def __init__(self, name, kind, max_residual, mean_residual, min_residual,
                 tolerance=None, holds=None, expected=True, suite=None):
        if kind not in self.KINDS:
            raise ValueError("Unknown check kind {!r}".format(kind))
        self.name = name
        self.kind = kind
        self.max_residual = max_residual
        self.mean_residual = mean_residual
        self.min_residual = min_residual
        self.tolerance = tolerance
        self.holds = holds
        self.expected = expected
        self.suite = suite

    @property
    def passed(self):
        if self.kind == 'info':
            return True
        return self.holds == self.expected

    def to_dict(self):
        def real(v):
            return None if v is None or np.isnan(v) else float(v)

        return {
            'suite': self.suite,
            'name': self.name,
            'kind': self.kind,
            'max': real(self.max_residual),
            'mean': real(self.mean_residual),
            'min': real(self.min_residual),
            'tolerance': real(self.tolerance),
            'holds': self.holds,
            'expected': self.expected,
            'pass': self.passed,
        }


CHECK_FIELDS = ['suite', 'name', 'kind', 'max', 'mean', 'min', 'tolerance',
                'holds', 'expected', 'pass']


def _text_value(v):
    if v is None:
        return 'none'
    if isinstance(v, bool):
        return 'true' if v else 'false'
    if isinstance(v, float):
        return format_real(v)
    v = str(v)
    if not v or any(c.isspace() for c in v) or '"' in v:
        return '"{}"'.format(v.replace('"', '\\"'))
    return v


class VerificationReport:
    def __init__(self, suite, spec_name, checks, points, problems, wall_time,
                 seed, suites=None):
        self.suite = suite
        self.spec_name = spec_name
        self.checks = checks
        self.points = points
        self.problems = problems
        self.wall_time = wall_time
        self.seed = seed
        self.suites = suites or [suite]

    @property
    def passed(self):
        return not self.problems and all(c.passed for c in self.checks)

    def failed_checks(self):
        return [c for c in self.checks if not c.passed]

    def to_dataframe(self):
        return pd.DataFrame([c.to_dict() for c in self.checks], columns=CHECK_FIELDS)

    def to_dict(self):
        return {
            'suite': self.suite,
            'spec': self.spec_name,
            'suites': list(self.suites),
            'points': self.points,
            'seed': self.seed,
            'pass': self.passed,
            'checks': [c.to_dict() for c in self.checks],
            'problems': [dict(p) for p in self.problems],
            'wall_time': self.wall_time,
        }

    def to_text(self):
        """key=value records: the report, one per check and problem, then wall time"""
        def record(pairs):
            return ' '.join('{}={}'.format(k, _text_value(v)) for k, v in pairs)

        lines = [record([
            ('suite', self.suite), ('spec', self.spec_name), ('points', self.points),
            ('seed', self.seed), ('pass', self.passed),
        ])]
        for c in self.checks:
            d = c.to_dict()
            lines.append(record([('check', d['name'])] + [
                (k, d[k]) for k in CHECK_FIELDS if k != 'name'
            ]))
        for p in self.problems:
            lines.append(record([('problem', p['msg'])] + sorted(
                (k, v) for k, v in p.items() if k != 'msg')))
        lines.append(record([('wall_time', float(self.wall_time))]))
        return '\n'.join(lines) + '\n'

    def write_json(self, path):
        atomic_dump(self.to_dict(), path, indent=2, sort_keys=True)


class CheckBuilder:
    """Reduces a per-point table to checks for one suite"""
    def __init__(self, suite, table, cfg):
        self.suite = suite
        self.table = table
        self.cfg = cfg
        self.results = []

    def has(self, column):
        return column in self.table and self.table[column].notna().any()

    def column(self, column):
        if column not in self.table:
            return pd.Series(dtype=np.float64)
        return self.table[column].dropna().astype(np.float64)

    def largest(self, column):
        values = self.column(column)
        return float(values.max()) if len(values) else np.nan

    def _add(self, name, kind, values, tolerance, holds, expected):
        if len(values):
            stats = float(values.max()), float(values.mean()), float(values.min())
        else:
            stats = np.nan, np.nan, np.nan
        self.results.append(CheckResult(
            name, kind, *stats, tolerance=tolerance, holds=holds,
            expected=expected, suite=self.suite.name,
        ))

    def upper(self, name, column, level, expected=True):
        values = self.column(column)
        tol = self.cfg.tolerance(self.suite.name, level)
        holds = bool(len(values)) and bool(values.max() < tol)
        self._add(name, 'upper', values, tol, holds, expected)

    def lower(self, name, column, bound, use_min=False, expected=True):
        values = self.column(column)
        if len(values):
            stat = values.min() if use_min else values.max()
            holds = bool(stat > bound)
        else:
            holds = False
        self._add(name, 'lower', values, bound, holds, expected)

    def info(self, name, column):
        self._add(name, 'info', self.column(column), None, None, None)


class Suite:
    """A named group of checks

    ``point_values`` maps one sampled point to a dict of residuals;
    ``checks`` turns the table of those dicts into CheckResults.
    """
    name = None
    kind = 'manifold'
    invariants = ()

    def inapplicable(self, spec):
        """Reason why the suite does not apply to *spec*, or None"""
        if self.kind != 'any' and spec.kind != self.kind:
            return "needs a {} spec, got a {} spec".format(self.kind, spec.kind)
        return None

    def point_values(self, spec, point, cfg, index):
        raise NotImplementedError

    def checks(self, table, cfg):
        builder = CheckBuilder(self, table, cfg)
        self.add_checks(builder)
        return builder.results

    def add_checks(self, b):
        raise NotImplementedError


def _manifold_connection(spec, point, order=1):
    return VranceanuConnection(FoliatedChart.at(spec, point, order))


def _finsler_chart(spec, point, order=4):
    x, y = spec.split(point)
    return FinslerChart(spec, x, y, order=order)


class RiemannianSuite(Suite):
    """Finsler suite whose claims need g independent of y"""
    kind = 'finsler'

    def inapplicable(self, spec):
        reason = super().inapplicable(spec)
        if reason:
            return reason
        try:
            dev = riemannian_deviation(spec, *spec.center())
        except WeylGeomError as e:
            return "cannot evaluate at the domain center ({}: {})".format(type(e).__name__, e)
        if dev > RIEMANNIAN_THRESHOLD:
            return "the metric varies along the fibre (deviation {:.3g})".format(dev)
        return None


# Manifold suites ---------------------------------------------------------------

class CompatibilitySuite(Suite):
    name = 'compatibility'
    kind = 'any'
    invariants = ('compatibility', 'leaf-metricity', 'full-weyl-compatibility')

    def point_values(self, spec, point, cfg, index):
        if spec.kind == 'finsler':
            chart = _finsler_chart(spec, point)
            res = 0.
            for weyl in ('cartan', 'spec'):
                conn = chart.connection(weyl)
                res = max(res, _amax(metricity_residual(conn, chart.g, conn.C, conn.theta)))
            return {'compatibility': res}

        conn = _manifold_connection(spec, point)
        chart = conn.chart
        values = {
            'compatibility': _amax(metricity_residual(conn, chart.gs, conn.C, chart.theta)),
            'leaf metricity': _amax(metricity_residual(conn, chart.gs, chart.christoffel)),
        }

        gamma = full_weyl_jet(chart)
        g, w = chart.metric, chart.weyl
        full = (jet.grad(g) - jet.einsum('dac,db->abc', gamma, g)
                - jet.einsum('dbc,ad->abc', gamma, g)).value
        values['full weyl'] = _amax(full + np.einsum('c,ab->abc', w.value, g.value))
        if spec.p == 0:
            values['full weyl = leaf'] = _amax(gamma.value - conn.C.value)
        return values

    def add_checks(self, b):
        b.upper('compatibility', 'compatibility', 'first')
        if b.has('leaf metricity'):
            b.upper('leaf Christoffel metricity', 'leaf metricity', 'first')
            b.upper('full Weyl connection compatibility', 'full weyl', 'first')
        if b.has('full weyl = leaf'):
            b.upper('full Weyl connection = leaf connection', 'full weyl = leaf', 'algebraic')


def gauge_potentials(spec):
    """Gauge potentials u used by the gauge suite, as text"""
    c = spec.coordinates
    last = len(c) - 1
    return [c[0], 'sin({})'.format(c[min(1, last)]), '{}*{}'.format(c[0], c[min(2, last)])]


class GaugeSuite(Suite):
    name = 'gauge'
    invariants = ('gauge-covariance', 'gauge-frame-invariance',
                  'gauge-double-transform', 'gauge-closedness')

    def point_values(self, spec, point, cfg, index):
        base = _manifold_connection(spec, point)
        coeffs = base.coefficients()
        A = base.chart.A.value
        dW = _weyl_derivative(base.chart)
        g, w = spec.metric_values(point), spec.weyl_values(point)

        values = dict.fromkeys(['vranceanu', 'compatible', 'frame', 'double metric',
                                'double weyl', 'closedness'], 0.)
        for text in gauge_potentials(spec):
            u = parse(text, spec.symbols)
            gauged = gauge_transform(spec, u)
            conn = _manifold_connection(gauged, point)
            other = conn.coefficients()
            back = gauge_transform(gauged, Neg(u))
            values['vranceanu'] = max(values['vranceanu'], coeffs.max_difference(other))
            values['compatible'] = max(values['compatible'],
                                       coeffs.max_difference(other, ['C', 'D']))
            values['frame'] = max(values['frame'], _amax(conn.chart.A.value - A))
            values['double metric'] = max(values['double metric'],
                                          _relative(back.metric_values(point), g))
            values['double weyl'] = max(values['double weyl'],
                                        _amax(back.weyl_values(point) - w))
            values['closedness'] = max(values['closedness'],
                                       _amax(_weyl_derivative(conn.chart) - dW))
        return values

    def add_checks(self, b):
        b.upper('Vranceanu coefficients invariant', 'vranceanu', 'first')
        b.upper('compatible coefficients invariant', 'compatible', 'first')
        b.upper('adapted frame invariant', 'frame', 'exact')
        b.upper('transform and inverse restore the metric', 'double metric', 'exact')
        b.upper('transform and inverse restore the Weyl form', 'double weyl', 'exact')
        b.upper('dW invariant', 'closedness', 'first')


def _weyl_derivative(chart):
    dw = jet.grad(chart.weyl).value
    return dw.T - dw


class OracleUniquenessSuite(Suite):
    name = 'oracle-uniqueness'
    invariants = ('uniqueness', 'orthogonality', 'A-symmetry',
                  'transversal-metric-symmetry', 'weyl-reconstruction',
                  'coefficient-symmetry')

    def point_values(self, spec, point, cfg, index):
        conn = _manifold_connection(spec, point)
        chart = conn.chart
        local = conn.coefficients()
        oracle = koszul_chart_coeffs(chart)

        gs, gm, A = chart.gs.value, chart.gm.value, chart.A.value
        gT = chart.g_trans.value
        M = A.T @ gm
        w = chart.weyl.value
        theta, rho = chart.theta.value, chart.rho.value
        recon = np.concatenate([theta, rho + theta @ A])
        return {
            'koszul': local.max_difference(oracle, ['C', 'D']),
            'orthogonality': _amax(gm - gs @ A),
            'A symmetry': _amax(M - M.T),
            'gT symmetry': _amax(gT - gT.T),
            'weyl reconstruction': _amax(recon - w),
            'C symmetry': _amax(local.C - local.C.transpose(0, 2, 1)),
            'F symmetry': _amax(local.F - local.F.transpose(0, 2, 1)),
            'L': _amax(local.L),
        }

    def add_checks(self, b):
        b.upper('C, D = Koszul oracle', 'koszul', 'algebraic')
        b.upper('g(delta_alpha, d_i) = 0', 'orthogonality', 'algebraic')
        b.upper('A symmetric against g', 'A symmetry', 'algebraic')
        b.upper('transversal metric symmetric', 'gT symmetry', 'algebraic')
        b.upper('W reconstructed from theta, rho', 'weyl reconstruction', 'algebraic')
        b.upper('C symmetric', 'C symmetry', 'algebraic')
        b.upper('F symmetric', 'F symmetry', 'algebraic')
        b.upper('L vanishes', 'L', 'exact')


class VranceanuOracleSuite(Suite):
    name = 'vranceanu-oracle'
    invariants = ('global-oracle',)

    def point_values(self, spec, point, cfg, index):
        conn = _manifold_connection(spec, point)
        local = conn.coefficients()
        oracle = global_oracle_coeffs(conn.chart)
        return {name: _amax(local.blocks()[name] - oracle.blocks()[name])
                for name in ('C', 'D', 'L', 'F')}

    def add_checks(self, b):
        for name in ('C', 'D', 'L', 'F'):
            b.upper('{} = global oracle'.format(name), name, 'first')


class DprimeTorsionSuite(Suite):
    name = 'dprime-torsion'
    invariants = ('dprime-torsion',)

    def point_values(self, spec, point, cfg, index):
        conn = _manifold_connection(spec, point)
        res = max(_amax(frame_dprime_residual(conn, a, b))
                  for a in range(conn.dim) for b in range(conn.dim))
        return {'residual': res}

    def add_checks(self, b):
        b.upper("torsion-free relative to the complement", 'residual', 'first')


class IntegrabilitySuite(Suite):
    name = 'integrability'
    invariants = ('torsion-integrability', 'nijenhuis-torsion')

    def point_values(self, spec, point, cfg, index):
        conn = _manifold_connection(spec, point)
        n, dim = conn.n, conn.dim
        T = conn.torsion_formula().value
        bracket = conn.structure.value[:n, n:, n:]

        transversal = mismatch = other = 0.
        for a in range(dim):
            for c in range(dim):
                N = frame_nijenhuis(conn, conn.basis(a), conn.basis(c)).value
                if a >= n and c >= n:
                    transversal = max(transversal, _amax(N))
                    expected = np.zeros(dim)
                    expected[:n] = 4 * T[:, a - n, c - n]
                    mismatch = max(mismatch, _amax(N - expected))
                else:
                    other = max(other, _amax(N))
        return {
            'torsion': _amax(T),
            'torsion bracket': _amax(T - bracket),
            'torsion antisymmetry': _amax(T + T.transpose(0, 2, 1)),
            'nijenhuis transversal': transversal,
            'nijenhuis = 4T': mismatch,
            'nijenhuis other': other,
        }

    def add_checks(self, b):
        b.upper('T* = structural part of [delta, delta]', 'torsion bracket', 'algebraic')
        b.upper('T* antisymmetric', 'torsion antisymmetry', 'exact')
        b.upper('N_P(delta, delta) = 4 T*', 'nijenhuis = 4T', 'algebraic')
        b.upper('N_P vanishes on other frame pairs', 'nijenhuis other', 'algebraic')
        tol = b.cfg.tolerance(self.name, 'algebraic')
        integrable = b.largest('nijenhuis transversal') < tol
        b.upper('T* vanishes', 'torsion', 'algebraic', expected=integrable)
        b.info('max |T*|', 'torsion')


class CurvatureOracleSuite(Suite):
    name = 'curvature-oracle'
    kind = 'any'
    invariants = ('curvature-commutator', 'curvature-antisymmetry', 'tss-vanishes')

    def point_values(self, spec, point, cfg, index):
        if spec.kind == 'finsler':
            conn = _finsler_chart(spec, point).connection('cartan')
            formulas = {
                'ttt': conn.curvature_ttt().value,
                'tts': conn.curvature_tts().value,
                'tss': conn.curvature_tss(),
                'sss': conn.curvature_sss().value,
            }
        else:
            conn = _manifold_connection(spec, point, order=2)
            formulas = curvature_from_formulas(conn).blocks()
        comm = conn.commutator_blocks()
        values = {name: _amax(formulas[name] - comm[name]) for name in comm}

        n = conn.n
        R = conn.frame_curvature.value
        values['tss commutator'] = _amax(comm['tss'])
        values['antisymmetry'] = _amax(R + R.transpose(0, 1, 3, 2))
        values['preserves distributions'] = max(_amax(R[:n, n:]), _amax(R[n:, :n]))
        return values

    def add_checks(self, b):
        for name in ('ttt', 'tts', 'tss', 'stt', 'sts', 'sss'):
            if b.has(name):
                b.upper('block {} = commutator'.format(name), name, 'curvature')
        b.upper('R(d_j, d_i) delta_a vanishes', 'tss commutator', 'curvature')
        b.upper('R(X, Y) = -R(Y, X)', 'antisymmetry', 'curvature')
        b.upper('R preserves both distributions', 'preserves distributions', 'curvature')


class RecurrenceSuite(Suite):
    name = 'recurrence'
    invariants = ('quasi-recurrence',)

    def point_values(self, spec, point, cfg, index):
        conn = _manifold_connection(spec, point)
        chart = conn.chart
        r = metricity_residual(conn, chart.gs, conn.C, chart.theta)
        Q = np.hstack([np.eye(conn.n), chart.A.value])
        return {'recurrence': _amax(np.einsum('ijk,ka->aij', r, Q))}

    def add_checks(self, b):
        b.upper('D_X g + W(QX) g = 0', 'recurrence', 'first')


def _transversal_metric_entry(spec, a, c):
    def field(xs):
        return adapted_frame(spec, xs).g_trans[a, c]
    return field


class BundleLikeSuite(Suite):
    name = 'bundle-like'
    invariants = ('closed-forms', 'mixed-block-vanishes', 'bundle-like-recurrence')

    def point_values(self, spec, point, cfg, index):
        conn = _manifold_connection(spec, point)
        chart = conn.chart
        n, dim = conn.n, conn.dim
        gT = chart.g_trans.value
        rho = chart.rho.value

        values = dict.fromkeys(['structural closed', 'transversal closed', 'mixed',
                                'transversal definition', 'structural definition',
                                'structural definition transversal X', 'recurrence'], 0.)
        for a in range(dim):
            X = np.eye(dim)[a]
            nm = nabla_metric(conn, X, chart.gs, chart.g_trans, chart.theta, chart.rho)
            d = nm.definition
            values['structural closed'] = max(values['structural closed'],
                                              _amax(nm.structural - nm.structural_closed))
            values['transversal closed'] = max(values['transversal closed'],
                                               _amax(nm.transversal - nm.transversal_closed))
            values['mixed'] = max(values['mixed'], _amax(nm.mixed), _amax(d[n:, :n]))
            values['transversal definition'] = max(values['transversal definition'],
                                                   _amax(nm.transversal - d[n:, n:]))
            key = 'structural definition' if a < n else 'structural definition transversal X'
            values[key] = max(values[key], _amax(nm.structural - d[:n, :n]))
            values['recurrence'] = max(values['recurrence'],
                                       _amax(nm.transversal + (X[n:] @ rho) * gT))

        # Leaf derivatives of the transversal metric by finite differences
        fd = 0.
        for i in range(n):
            idx = [0] * dim
            idx[i] = 1
            for a in range(spec.p):
                for c in range(a, spec.p):
                    field = _transversal_metric_entry(spec, a, c)
                    fd = max(fd, abs(jet.finite_difference(field, point, idx)))
        values['leaf derivative of gT'] = fd
        return values

    def add_checks(self, b):
        b.upper('structural block = closed form', 'structural closed', 'first')
        b.upper('transversal block = closed form', 'transversal closed', 'first')
        b.upper('mixed block vanishes', 'mixed', 'first')
        b.upper('transversal block = definition', 'transversal definition', 'first')
        b.upper('structural block = definition (structural X)', 'structural definition', 'first')
        b.info('structural block - definition (transversal X)',
               'structural definition transversal X')
        bundle_like = b.largest('leaf derivative of gT') < BUNDLE_LIKE_THRESHOLD
        b.upper('transversal metric recurrent', 'recurrence', 'first', expected=bundle_like)
        if not bundle_like:
            b.lower('transversal metric not recurrent', 'recurrence', RECURRENCE_VIOLATION_BOUND)


# Finsler suites ------------------------------------------------------------------

class HomogeneitySuite(Suite):
    name = 'homogeneity'
    kind = 'finsler'
    invariants = ('homogeneity-cascade', 'Gbc-symmetry')

    def point_values(self, spec, point, cfg, index):
        x, y = spec.split(point)
        chart = FinslerChart(spec, x, y)
        F = spec.F_value(x, y)
        g, G, Gb = chart.g.value, chart.G.value, chart.Gb.value
        values = dict.fromkeys(['F', 'energy', 'metric', 'spray', 'nonlinear'], 0.)
        for lam in HOMOGENEITY_FACTORS:
            scaled = FinslerChart(spec, x, lam * y, order=3)
            Fl = spec.F_value(x, lam * y)
            values['F'] = max(values['F'], _relative(Fl, lam * F))
            values['energy'] = max(values['energy'],
                                   _relative(scaled.energy.value, lam ** 2 * F * F))
            values['metric'] = max(values['metric'], _relative(scaled.g.value, g))
            values['spray'] = max(values['spray'], _relative(scaled.G.value, lam ** 2 * G))
            values['nonlinear'] = max(values['nonlinear'], _relative(scaled.Gb.value, lam * Gb))
        Gbc = chart.Gbc.value
        values['Gbc symmetry'] = _amax(Gbc - Gbc.transpose(0, 2, 1))
        return values

    def add_checks(self, b):
        b.upper('F homogeneous of degree 1', 'F', 'homogeneity')
        b.upper('F^2 homogeneous of degree 2', 'energy', 'homogeneity')
        b.upper('g homogeneous of degree 0', 'metric', 'homogeneity')
        b.upper('G homogeneous of degree 2', 'spray', 'homogeneity')
        b.upper('G^a_b homogeneous of degree 1', 'nonlinear', 'homogeneity')
        b.upper('dG^a_b/dy^c symmetric', 'Gbc symmetry', 'algebraic')


class FinslerAxiomsSuite(Suite):
    name = 'finsler-axioms'
    kind = 'finsler'
    invariants = ('finsler-positivity', 'euler-identity', 'frame-duality',
                  'sasaki-positive-definite')

    def point_values(self, spec, point, cfg, index):
        x, y = spec.split(point)
        chart = FinslerChart(spec, x, y, order=3)
        n = spec.n
        g = chart.g.value
        sasaki = chart.sasaki_coordinates().value
        frame = horizontal_frame(spec, x, y)
        return {
            'F': spec.F_value(x, y),
            'metric eigenvalue': float(np.linalg.eigvalsh(g)[0]),
            'euler': _amax(chart.cartan_rho.value - g @ y),
            'sasaki eigenvalue': float(np.linalg.eigvalsh(sasaki)[0]),
            'sasaki symmetry': _amax(sasaki - sasaki.T),
            'frame duality': _amax(frame.pairing() - np.eye(2 * n)),
        }

    def add_checks(self, b):
        b.lower('F positive', 'F', 0., use_min=True)
        b.lower('g positive definite', 'metric eigenvalue', 0., use_min=True)
        b.upper('1/2 dF^2/dy = g y', 'euler', 'first')
        b.lower('Sasaki metric positive definite', 'sasaki eigenvalue', 0., use_min=True)
        b.upper('Sasaki metric symmetric', 'sasaki symmetry', 'exact')
        b.upper('frame and coframe dual', 'frame duality', 'algebraic')


class RiemannianReductionSuite(RiemannianSuite):
    name = 'riemannian-reduction'
    invariants = ('riemannian-reduction',)

    def point_values(self, spec, point, cfg, index):
        chart = _finsler_chart(spec, point)
        conn = chart.connection('cartan')
        gamma = christoffel_form(chart.g_inv, chart.x_grad(chart.g)).value
        forms = cartan_transversal_forms(chart)
        return {
            'C': _amax(conn.C.value),
            'D': _amax(conn.D.value - gamma),
            'F': _amax(conn.F.value - (gamma + forms['minkowski'])),
        }

    def add_checks(self, b):
        b.upper('C vanishes', 'C', 'algebraic')
        b.upper('D = base Christoffel symbols', 'D', 'first')
        b.upper('F = Christoffel + Cartan terms', 'F', 'first')


class FlatnessSuite(RiemannianSuite):
    name = 'flatness'
    invariants = ('torsion-flatness',)

    def point_values(self, spec, point, cfg, index):
        chart = _finsler_chart(spec, point)
        conn = chart.connection('cartan')
        Rg = base_riemann(chart)
        T = conn.torsion_formula().value
        return {
            'base curvature': _amax(Rg),
            'torsion': _amax(T),
            'torsion formula': _amax(T + np.einsum('cdab,d->cab', Rg, chart.y)),
        }

    def add_checks(self, b):
        tol = b.cfg.tolerance(self.name, 'algebraic')
        flat = b.largest('base curvature') < tol
        b.upper('T* = -Rg y', 'torsion formula', 'first')
        b.upper('torsion vanishes', 'torsion', 'algebraic', expected=flat)
        if flat:
            b.upper('base flat: consistent', 'torsion', 'algebraic')
        else:
            b.lower('base not flat: consistent', 'torsion', CURVED_TORSION_BOUND)
        b.info('max |Rg|', 'base curvature')


class VerticalFlatSuite(Suite):
    name = 'vertical-flat'
    kind = 'finsler'
    invariants = ('vertical-flatness',)

    def point_values(self, spec, point, cfg, index):
        conn = _finsler_chart(spec, point).connection('cartan')
        comm = conn.commutator_blocks(('sss', 'tss'))
        return {'vertical': _amax(comm['sss']), 'horizontal': _amax(comm['tss'])}

    def add_checks(self, b):
        b.upper('R(V, V) on vertical fields vanishes', 'vertical', 'first')
        b.upper('R(V, V) on horizontal fields vanishes', 'horizontal', 'first')


def fixed_weyl_form(n):
    """A fixed Weyl form with nonzero theta and rho"""
    theta = 1. / np.arange(1, n + 1)
    rho = 0.5 * (-1.) ** np.arange(n)
    return TangentWeylAdapted(rho, theta, None, None)


class LiouvilleSuite(Suite):
    name = 'liouville'
    kind = 'finsler'
    invariants = ('liouville',)

    def point_values(self, spec, point, cfg, index):
        chart = _finsler_chart(spec, point)
        n = chart.n
        directions = list(np.eye(2 * n)) + [np.ones(2 * n)]
        values = dict.fromkeys(['cartan L', 'cartan L*', 'coefficients', 'frame',
                                'global'], 0.)
        for weyl in ('cartan', 'spec', fixed_weyl_form(n)):
            for X in directions:
                ld = chart_liouville_derivatives(chart, weyl, TangentVector.from_adapted(X, n))
                ref_L, ref_Ls = ld.forms['weyl']
                for name in ('coefficients', 'frame', 'global'):
                    L, Ls = ld.forms[name]
                    values[name] = max(values[name], _amax(L - ref_L), _amax(Ls - ref_Ls))
                if 'cartan' in ld.forms:
                    L, Ls = ld.forms['frame']
                    VX, cartan_Ls = ld.forms['cartan']
                    values['cartan L'] = max(values['cartan L'], _amax(L - VX))
                    values['cartan L*'] = max(values['cartan L*'], _amax(Ls - cartan_Ls))
        return values

    def add_checks(self, b):
        b.upper('nabla_X L = VX (Cartan form)', 'cartan L', 'algebraic')
        b.upper('nabla_X L* = Theta(X) + F^2/2 HX (Cartan form)', 'cartan L*', 'first')
        b.upper('coefficient form = simplified form', 'coefficients', 'first')
        b.upper('frame derivative = simplified form', 'frame', 'first')
        b.upper('global form = simplified form', 'global', 'first')


class NonvanishingSuite(RiemannianSuite):
    name = 'nonvanishing-47'
    invariants = ('nonvanishing',)

    def point_values(self, spec, point, cfg, index):
        chart = _finsler_chart(spec, point)
        tts = chart.connection('cartan').curvature_tts().value
        return {
            'tts': _amax(tts),
            'closed form': _amax(tts - closed_form_tts(chart.g.value)),
        }

    def add_checks(self, b):
        b.lower('R(d/dy, delta) delta never vanishes', 'tts', NONVANISHING_BOUND, use_min=True)
        b.upper('R(d/dy, delta) delta = closed form', 'closed form', 'curvature')


class LandsbergSuite(Suite):
    name = 'landsberg'
    kind = 'finsler'
    invariants = ('cartan-F-paths', 'landsberg', 'sasaki-pipeline')

    def point_values(self, spec, point, cfg, index):
        chart = _finsler_chart(spec, point)
        forms = cartan_transversal_forms(chart)
        weyl = forms['weyl']
        conn = chart.connection('cartan')
        pipeline = sasaki_pipeline_coeffs(spec, chart.x, chart.y)
        return {
            'landsberg residual': _amax(chart.horizontal_christoffel().value - chart.Gbc.value),
            'gradient': _amax(weyl - forms['gradient']),
            'euler': _amax(weyl - forms['euler']),
            'spray': _amax(weyl - forms['spray']),
            'minkowski': _amax(weyl - forms['minkowski']),
            'x dependence': _amax(chart.energy_grad.value[:chart.n]),
            'pipeline': conn.coefficients().max_difference(pipeline, ['C', 'D', 'L', 'F']),
        }

    def add_checks(self, b):
        tol = b.cfg.tolerance(self.name, 'first')
        b.upper('F: Weyl form = gradient form', 'gradient', 'first')
        b.upper('F: Weyl form = Euler form', 'euler', 'first')
        landsberg = b.largest('landsberg residual') < tol
        b.upper('F: spray form', 'spray', 'first', expected=landsberg)
        minkowski = b.largest('x dependence') < MINKOWSKI_THRESHOLD
        b.upper('F: Minkowski form', 'minkowski', 'first', expected=minkowski)
        b.upper('Sasaki metric through the foliated pipeline', 'pipeline', 'first')
        b.info('Landsberg residual', 'landsberg residual')


# Any spec ------------------------------------------------------------------------

# Finite difference steps for orders 3-4, also kept small against |y| on TN
HIGH_ORDER_STEP = 1e-2
HIGH_ORDER_STEP_FRACTION = 0.03


def _multi_indices(nvars, degree):
    if degree == 0:
        yield ()
        return
    if nvars == 1:
        yield (degree,)
        return
    for first in range(degree, -1, -1):
        for rest in _multi_indices(nvars - 1, degree - first):
            yield (first,) + rest


def _high_order_step(spec, point):
    if spec.kind == 'finsler':
        r = np.linalg.norm(point[spec.n:])
        return min(HIGH_ORDER_STEP, HIGH_ORDER_STEP_FRACTION * r)
    return HIGH_ORDER_STEP


class JetSoundnessSuite(Suite):
    name = 'jet-soundness'
    kind = 'any'
    invariants = ('jet-soundness',)

    def point_values(self, spec, point, cfg, index):
        dim = len(point)
        h = _high_order_step(spec, point)
        low = high = 0.
        for label, expr in spec.expressions():
            field = spec.field(expr)
            exact_jet = jet.expand(field, point, 4)
            for degree in (1, 2, 3, 4):
                for idx in _multi_indices(dim, degree):
                    # orders 3-4: pure and two-variable partials only
                    if degree > 2 and sum(1 for e in idx if e) > 2:
                        continue
                    exact = float(exact_jet.derivative(idx))
                    if degree <= 2:
                        approx = jet.finite_difference(field, point, idx)
                    else:
                        approx = jet.finite_difference(field, point, idx, h=h)
                    err = abs(exact - approx) / (1. + abs(exact))
                    if degree <= 2:
                        low = max(low, err)
                    else:
                        high = max(high, err)
        return {'orders 1-2': low, 'orders 3-4': high}

    def add_checks(self, b):
        b.upper('jet partials = finite differences (orders 1-2)', 'orders 1-2',
                'finite-difference')
        b.upper('jet partials = finite differences (orders 3-4)', 'orders 3-4',
                'high-order-finite-difference')


SUITES = {s.name: s for s in [
    CompatibilitySuite(), GaugeSuite(), OracleUniquenessSuite(),
    VranceanuOracleSuite(), DprimeTorsionSuite(), IntegrabilitySuite(),
    CurvatureOracleSuite(), RecurrenceSuite(), BundleLikeSuite(),
    HomogeneitySuite(), FinslerAxiomsSuite(), RiemannianReductionSuite(),
    FlatnessSuite(), VerticalFlatSuite(), LiouvilleSuite(), NonvanishingSuite(),
    LandsbergSuite(), JetSoundnessSuite(),
]}

# Other ids accepted for a suite
SUITE_ALIASES = {
    'nonvanishing': 'nonvanishing-47',
}

# Every invariant of the geometric modules, each covered by exactly one suite
INVARIANTS = (
    # geom
    'orthogonality', 'A-symmetry', 'transversal-metric-symmetry',
    'weyl-reconstruction', 'leaf-metricity', 'gauge-frame-invariance',
    'gauge-double-transform', 'gauge-closedness',
    # conn
    'compatibility', 'uniqueness', 'coefficient-symmetry', 'gauge-covariance',
    'quasi-recurrence', 'torsion-integrability', 'nijenhuis-torsion',
    'curvature-commutator', 'curvature-antisymmetry', 'tss-vanishes',
    'closed-forms', 'mixed-block-vanishes', 'bundle-like-recurrence',
    'full-weyl-compatibility', 'global-oracle', 'dprime-torsion',
    # finsler
    'homogeneity-cascade', 'Gbc-symmetry', 'finsler-positivity',
    'euler-identity', 'frame-duality', 'sasaki-positive-definite',
    'riemannian-reduction', 'cartan-F-paths', 'landsberg', 'sasaki-pipeline',
    'torsion-flatness', 'vertical-flatness', 'nonvanishing', 'liouville',
    # jet
    'jet-soundness',
)


def get_suite(name):
    try:
        return SUITES[SUITE_ALIASES.get(name, name)]
    except KeyError:
        raise UnknownSuite(name) from None


def _evaluate_point(args):
    suite_name, spec, index, point, cfg = args
    try:
        values = SUITES[suite_name].point_values(spec, point, cfg, index)
    except WeylGeomError as e:
        problem = dict(msg="Point evaluation failed", suite=suite_name, point=index,
                       error='{}: {}'.format(type(e).__name__, e))
        return index, {}, [problem]
    return index, values, []


def _run_points(suite, spec, points, cfg):
    tasks = [(suite.name, spec, i, p, cfg) for i, p in enumerate(points)]
    nproc = min(cfg.processes, len(tasks))
    if nproc > 1:
        log.debug("Evaluating %d points in %d processes", len(tasks), nproc)
        with Pool(nproc, initializer=ignore_sigint) as pool:
            results = list(pool.imap_unordered(_evaluate_point, tasks))
    else:
        results = [_evaluate_point(t) for t in tasks]

    # Completion order varies between runs; the report must not
    results.sort(key=lambda r: r[0])
    table = pd.DataFrame([r[1] for r in results], index=[r[0] for r in results])
    problems = [p for r in results for p in r[2]]
    return table, problems


def run_suite(spec, cfg):
    """Run the suite named in *cfg* (or every applicable suite for 'all')"""
    start = time.monotonic()
    if cfg.suite == 'all':
        names = []
        for name, suite in SUITES.items():
            reason = suite.inapplicable(spec)
            if reason:
                log.info("Skipping suite %s: %s", name, reason)
            else:
                names.append(name)
    else:
        suite = get_suite(cfg.suite)
        reason = suite.inapplicable(spec)
        if reason:
            raise SuiteInapplicable(cfg.suite, reason)
        names = [suite.name]

    points = sample_points(spec, cfg.samples, cfg.seed)
    checks, problems = [], []
    for name in names:
        suite = SUITES[name]
        log.info("Running suite %s on %s (%d points)", name, spec.name, len(points))
        t0 = time.monotonic()
        table, suite_problems = _run_points(suite, spec, points, cfg)
        suite_checks = suite.checks(table, cfg)
        checks.extend(suite_checks)
        problems.extend(suite_problems)
        log.info("Suite %s finished in %.2f s: %d of %d checks passed, %d problems",
                 name, time.monotonic() - t0, sum(c.passed for c in suite_checks),
                 len(suite_checks), len(suite_problems))

    return VerificationReport(cfg.suite, spec.name, checks, len(points), problems,
                              time.monotonic() - start, cfg.seed, suites=names)
