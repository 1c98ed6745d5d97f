"""Compute connections, curvature and Finsler objects; run property suites

Results are printed as indexed records ``name[1,2,3] = value`` with 1-based
frame labels, or as JSON with ``--format json``.
"""
import argparse
import json
import logging
import sys
from textwrap import dedent

import numpy as np
import xarray as xr

from .. import catalog
from ..conn import (
    compatible_coeffs, curvature, full_weyl_connection, labelled_dataset,
    nabla_g, torsion_transversal, vranceanu_coeffs,
)
from ..exceptions import DimensionMismatch, WeylGeomError
from ..finsler import (
    RIEMANNIAN_THRESHOLD, WEYL_CHOICES, TangentVector, cartan_form,
    finsler_curvature_torsion, horizontal_frame, liouville_derivatives,
    nabla_sasaki, riemannian_deviation, sasaki_coordinate_metric,
    sasaki_metric, spray, tangent_curvature, tangent_torsion,
    vranceanu_finsler,
)
from ..utils import format_real
from ..verify import (
    DEFAULT_SAMPLES, DEFAULT_SEED, SUITE_ALIASES, SUITES, SuiteConfig, run_suite,
)

log = logging.getLogger(__name__)

CONNECTIONS = ('compatible', 'vranceanu', 'full-weyl')


class UsageError(Exception):
    pass


def parse_reals(text):
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise UsageError("Expected comma-separated numbers, got {!r}".format(text))


def parse_pair(text, what):
    """'a1,a2;b1,b2' -> two lists of reals"""
    parts = text.split(';')
    if len(parts) != 2:
        raise UsageError("{} must be given as '{}', got {!r}".format(
            what, 'x1,..,xn;y1,..,yn' if what == 'point' else 'h1,..,hn;v1,..,vn', text))
    return parse_reals(parts[0]), parse_reals(parts[1])


def parse_settings(settings):
    values = {}
    for s in settings:
        name, sep, value = s.partition('=')
        if not sep:
            raise UsageError("--set expects NAME=VALUE, got {!r}".format(s))
        try:
            values[name.strip()] = float(value)
        except ValueError:
            raise UsageError("--set {}: {!r} is not a number".format(name, value))
    return values


def load_spec(args):
    spec = catalog.resolve(args.spec)
    if args.set:
        spec = spec.with_constants(**parse_settings(args.set))
    return spec


def manifold_point(spec, at):
    if at is None:
        return spec.center()
    return spec.check_point(parse_reals(at))


def finsler_point(spec, at):
    if at is None:
        return spec.center()
    return spec.check_point(*parse_pair(at, 'point'))


def manifold_vector(spec, text):
    if text is None:
        raise UsageError("--X is required for this command")
    X = np.array(parse_reals(text))
    dim = spec.n + spec.p
    if X.shape != (dim,):
        raise DimensionMismatch('X', dim, X.shape[0])
    return X


def finsler_vector(spec, text):
    if text is None:
        raise UsageError("--X is required for this command")
    h, v = parse_pair(text, 'X')
    for what, part in [('horizontal part of X', h), ('vertical part of X', v)]:
        if len(part) != spec.n:
            raise DimensionMismatch(what, spec.n, len(part))
    return TangentVector(np.array(h), np.array(v))


# Commands ----------------------------------------------------------------------

def cmd_coeffs(spec, args):
    if spec.kind == 'finsler':
        if args.connection == 'full-weyl':
            raise UsageError("--connection full-weyl needs a [manifold] spec")
        x, y = finsler_point(spec, args.at)
        coeffs = vranceanu_finsler(spec, args.weyl, x, y)
        if args.connection == 'compatible':
            coeffs.L = coeffs.F = None
        return coeffs.to_xarray()

    point = manifold_point(spec, args.at)
    if args.connection == 'full-weyl':
        Gamma = full_weyl_connection(spec, point)
        return labelled_dataset({'Gamma': (('c', 'a', 'b'), Gamma)}, spec.n, spec.p)
    elif args.connection == 'vranceanu':
        return vranceanu_coeffs(spec, point).to_xarray()
    return compatible_coeffs(spec, point).to_xarray()


def cmd_curvature(spec, args):
    if spec.kind == 'finsler':
        x, y = finsler_point(spec, args.at)
        if args.weyl == 'cartan' and riemannian_deviation(spec, x, y) <= RIEMANNIAN_THRESHOLD:
            return finsler_curvature_torsion(spec, x, y).to_xarray()
        log.info("Blocks R*^h_iab and R*^h_iak need a Riemannian base "
                 "and the Cartan form; leaving them out")
        return tangent_curvature(spec, x, y, args.weyl).to_xarray()
    return curvature(spec, manifold_point(spec, args.at)).to_xarray()


def cmd_torsion(spec, args):
    if spec.kind == 'finsler':
        return tangent_torsion(spec, *finsler_point(spec, args.at)).to_xarray()
    return torsion_transversal(spec, manifold_point(spec, args.at)).to_xarray()


def cmd_covderiv(spec, args):
    if spec.kind == 'finsler':
        x, y = finsler_point(spec, args.at)
        return nabla_sasaki(spec, finsler_vector(spec, args.X), x, y).to_xarray()
    point = manifold_point(spec, args.at)
    return nabla_g(spec, point, manifold_vector(spec, args.X)).to_xarray()


def cmd_finsler(spec, args):
    if spec.kind != 'finsler':
        raise UsageError("'finsler {}' needs a [finsler] spec".format(args.object))
    x, y = finsler_point(spec, args.at)
    if args.object == 'spray':
        return xr.merge([spray(spec, x, y).to_xarray(),
                         horizontal_frame(spec, x, y).to_xarray()])
    elif args.object == 'sasaki':
        return labelled_dataset({
            'adapted': (('a', 'b'), sasaki_metric(spec, x, y)),
            'coordinate': (('a', 'b'), sasaki_coordinate_metric(spec, x, y)),
        }, spec.n, spec.n, offset=0)
    elif args.object == 'cartan':
        return cartan_form(spec, x, y).to_xarray()
    X = finsler_vector(spec, args.X)
    return liouville_derivatives(spec, args.weyl, X, x, y).to_xarray()


COMPUTE_COMMANDS = {
    'coeffs': cmd_coeffs,
    'curvature': cmd_curvature,
    'torsion': cmd_torsion,
    'covderiv': cmd_covderiv,
    'finsler': cmd_finsler,
}


# Output -----------------------------------------------------------------------

def _labels(ds, dim):
    if dim in ds.coords:
        return list(ds[dim].values)
    return list(range(1, ds.sizes[dim] + 1))


def dataset_records(ds):
    """Lines 'name[l1,l2,..] = value' for every element of every variable"""
    lines = []
    for name, var in ds.data_vars.items():
        values = np.asarray(var.values)
        if not var.dims:
            lines.append('{} = {}'.format(name, format_real(float(values))))
            continue
        labels = [_labels(ds, d) for d in var.dims]
        for idx in np.ndindex(values.shape):
            key = ','.join(str(labels[k][i]) for k, i in enumerate(idx))
            lines.append('{}[{}] = {}'.format(name, key, format_real(values[idx])))
    return lines


def print_dataset(ds, fmt):
    if fmt == 'json':
        print(json.dumps(ds.to_dict(), indent=2, sort_keys=True, default=_jsonable))
    else:
        for line in dataset_records(ds):
            print(line)


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError("{!r} is not JSON serialisable".format(obj))


# Argument parsing ---------------------------------------------------------------

def _spec_options(ap):
    ap.add_argument('--spec', required=True,
                    help="Spec file, or the name of a built-in catalog spec")
    ap.add_argument('--set', action='append', default=[], metavar='NAME=VALUE',
                    help="Override a constant of the spec. Can be used more than once.")


def _compute_options(ap, vector=False):
    _spec_options(ap)
    ap.add_argument('--at', metavar='POINT',
                    help="Point as 'v1,v2,..' or, for Finsler specs, 'x1,..;y1,..'"
                         " (default: centre of the domain)")
    ap.add_argument('--format', choices=['text', 'json'], default='text')
    ap.add_argument('--weyl', choices=WEYL_CHOICES, default='cartan',
                    help="Weyl form on TN for Finsler specs (default: cartan)")
    if vector:
        ap.add_argument('--X', metavar='VECTOR',
                        help="Direction in adapted components; for Finsler specs"
                             " 'horizontal;vertical'")


def make_parser():
    example = dedent("""
        Examples:

          weylgeom coeffs --spec mixed --at 1,0,2
          weylgeom finsler spray --spec sphere-riemann --at '1,0;1,1'
          weylgeom verify --spec euclidean3 --suite all --samples 20
    """)
    ap = argparse.ArgumentParser(
        'weylgeom', epilog=example,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        description="Connections and curvature of foliated Weyl manifolds"
                    " and Finsler tangent bundles.",
    )
    ap.add_argument('-v', '--verbose', action='store_true',
                    help="Show debug messages")
    subparsers = ap.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True

    p = subparsers.add_parser('coeffs', help="Connection coefficients")
    _compute_options(p)
    p.add_argument('--connection', choices=CONNECTIONS, default='compatible')

    p = subparsers.add_parser('curvature', help="Curvature blocks")
    _compute_options(p)

    p = subparsers.add_parser('torsion', help="Torsion T*")
    _compute_options(p)

    p = subparsers.add_parser('covderiv', help="Covariant derivative of the metric along X")
    _compute_options(p, vector=True)

    p = subparsers.add_parser('finsler', help="Objects on the tangent bundle of a Finsler space")
    p.add_argument('object', choices=['spray', 'sasaki', 'cartan', 'liouville'])
    _compute_options(p, vector=True)

    p = subparsers.add_parser('verify', help="Run property suites on sampled points")
    _spec_options(p)
    p.add_argument('--suite', default='all',
                   choices=['all'] + list(SUITES) + list(SUITE_ALIASES),
                   metavar='NAME', help="Suite id, or 'all' (default)")
    p.add_argument('--samples', type=int, default=DEFAULT_SAMPLES, metavar='N')
    p.add_argument('--seed', type=int, default=DEFAULT_SEED, metavar='K')
    p.add_argument('--tol', type=float, metavar='T',
                   help="Replace every upper-bound tolerance")
    p.add_argument('--jobs', type=int, default=1, metavar='N',
                   help="Worker processes (0: one per available core)")
    p.add_argument('--format', choices=['text', 'json'], default='text')
    p.add_argument('-o', '--output', help="Also write the JSON report to this file")

    p = subparsers.add_parser('catalog', help="Built-in spec files")
    p.add_argument('action', choices=['list', 'export'])
    p.add_argument('name', nargs='?')
    p.add_argument('-o', '--output', help="File to write (default: stdout)")

    return ap


def run_verify(args):
    if args.tol is not None and not args.tol > 0:
        raise UsageError("--tol must be positive, got {}".format(args.tol))
    spec = load_spec(args)
    cfg = SuiteConfig(args.suite, samples=args.samples, seed=args.seed,
                      tol=args.tol, jobs=args.jobs)
    report = run_suite(spec, cfg)
    if args.output:
        report.write_json(args.output)
        log.info("Written report to %s", args.output)
    if args.format == 'json':
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        sys.stdout.write(report.to_text())
    return 0 if report.passed else 1


def run_catalog(args):
    if args.action == 'list':
        for name in catalog.NAMES:
            print(name)
        return 0
    if args.name is None:
        raise UsageError("catalog export needs a NAME")
    text = catalog.text(args.name)
    if args.output:
        with open(args.output, 'w', encoding='utf-8') as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None):
    ap = make_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)

    try:
        if args.command == 'verify':
            return run_verify(args)
        elif args.command == 'catalog':
            return run_catalog(args)
        spec = load_spec(args)
        print_dataset(COMPUTE_COMMANDS[args.command](spec, args), args.format)
        return 0
    except UsageError as e:
        ap.error(str(e))
    except WeylGeomError as e:
        print("{}: {}".format(type(e).__name__, e), file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
