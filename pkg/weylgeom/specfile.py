"""Reading and writing spec files

A spec file is an INI document with exactly one of the sections
``[manifold]`` or ``[finsler]``, plus optional ``[metric]``, ``[weyl]``,
``[constants]``, ``[domain]`` and ``[gauge]`` sections. Indices are 1-based
in files and 0-based in the Python objects.
"""
import logging
import re
from configparser import ConfigParser
from configparser import Error as ConfigError

from .exceptions import (
    ExprSyntaxError, ParseError, ValidationError, UnknownSymbol,
    WeylGeomError,
)
from .exprlang import CONSTANTS, FUNCTIONS, parse, unparse
from .finsler import DEFAULT_ZERO_RADIUS, FinslerChart, FinslerSpec
from .geom import DEFAULT_INTERVAL, FoliatedChart, ManifoldSpec

__all__ = ['load', 'loads', 'dumps', 'dump', 'SpecValidator', 'KIND_SECTIONS']

log = logging.getLogger(__name__)

KIND_SECTIONS = ('manifold', 'finsler')
DATA_SECTIONS = ('metric', 'weyl', 'constants', 'domain', 'gauge')

_SECTION_RE = re.compile(r'\s*\[(?P<name>[^\]]+)\]')
_OPTION_RE = re.compile(r'\s*(?P<key>[^=\s#;][^=]*?)\s*=')
_NAME_RE = re.compile(r'[A-Za-z_][A-Za-z_0-9]*$')


def _line_numbers(text):
    """(section, key) -> line number of the option in *text*"""
    linenos = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group('name').strip()
            linenos[(section, None)] = lineno
            continue
        m = _OPTION_RE.match(line)
        if m and section is not None and not line[:1].isspace():
            linenos.setdefault((section, m.group('key')), lineno)
    return linenos


def _read_config(text, path):
    cp = ConfigParser(delimiters=('=',), comment_prefixes=('#', ';'),
                      interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text, source=path)
    except ConfigError as e:
        lineno = getattr(e, 'lineno', None)
        if lineno is None and getattr(e, 'errors', None):
            lineno = e.errors[0][0]
        msg = e.message.splitlines()[0] if hasattr(e, 'message') else str(e)
        raise ParseError(msg, lineno, path) from None
    return cp


def _names(value):
    return [s.strip() for s in value.split(',') if s.strip()]


class SpecValidator:
    """Collect every problem with a spec file before raising

    :meth:`build` returns the spec, or raises :class:`ValidationError`
    listing all problems found. Syntax errors in expressions are raised
    immediately as :class:`ParseError`.
    """
    def __init__(self, text, path=None):
        self.text = text
        self.path = path or '<spec>'
        self.cp = _read_config(text, self.path)
        self.linenos = _line_numbers(text)
        self.problems = []

    def record(self, msg, section=None, key=None, **kwargs):
        lineno = self.linenos.get((section, key))
        if lineno is not None:
            kwargs['line'] = lineno
        if section is not None:
            kwargs['section'] = section
        if key is not None:
            kwargs['entry'] = key
        self.problems.append(dict(msg=msg, file=self.path, **kwargs))

    def build(self):
        self.problems = []
        kind = self.check_sections()
        if kind is None:
            raise ValidationError(self.problems)

        if kind == 'manifold':
            spec = self.build_manifold()
        else:
            spec = self.build_finsler()

        if spec is not None and not self.problems:
            self.check_center(spec)
        if self.problems:
            raise ValidationError(self.problems)
        log.debug("Loaded %s spec %s from %s", kind, spec.name, self.path)
        return spec

    def check_sections(self):
        present = [s for s in KIND_SECTIONS if self.cp.has_section(s)]
        for s in self.cp.sections():
            if s not in KIND_SECTIONS + DATA_SECTIONS:
                self.record("Unknown section", section=s,
                            known=", ".join(KIND_SECTIONS + DATA_SECTIONS))
        if len(present) != 1:
            self.record("Exactly one of [manifold] and [finsler] is required",
                        found=', '.join(present) or 'neither')
            return None
        return present[0]

    def expr(self, section, key, text, symbols):
        try:
            return parse(text, symbols)
        except ExprSyntaxError as e:
            lineno = self.linenos.get((section, key))
            raise ParseError("[{}] {}: {}".format(section, key, e), lineno, self.path) from None
        except UnknownSymbol as e:
            self.record("Expression uses an undeclared name", section, key,
                        name=e.name, kind=e.kind)
            return None

    def integer(self, section, key, lo):
        try:
            value = self.cp.getint(section, key)
        except ValueError:
            self.record("Value must be an integer", section, key, value=self.cp[section][key])
            return None
        if value < lo:
            self.record("Value must be at least {}".format(lo), section, key, value=value)
            return None
        return value

    def names(self, section, key, count, default):
        if not self.cp.has_option(section, key):
            return default
        names = _names(self.cp[section][key])
        if len(names) != count:
            self.record("Wrong number of names", section, key, expected=count, got=len(names))
            return default
        for name in names:
            if not _NAME_RE.match(name) or name in FUNCTIONS or name in CONSTANTS:
                self.record("Not a usable coordinate name", section, key, name=name)
        if len(set(names)) != len(names):
            self.record("Coordinate names repeated", section, key)
        return names

    def constants(self, coordinates):
        constants = {}
        if not self.cp.has_section('constants'):
            return constants
        for key, value in self.cp['constants'].items():
            if not _NAME_RE.match(key) or key in FUNCTIONS or key in CONSTANTS:
                self.record("Not a usable constant name", 'constants', key)
                continue
            if key in coordinates:
                self.record("Constant shadows a coordinate", 'constants', key)
                continue
            try:
                constants[key] = float(value)
            except ValueError:
                self.record("Constant must be a real number", 'constants', key, value=value)
        return constants

    def weyl(self, dim, symbols):
        weyl = {}
        if not self.cp.has_section('weyl'):
            return weyl
        for key, value in self.cp['weyl'].items():
            try:
                a = int(key)
            except ValueError:
                self.record("Weyl entry must be an index", 'weyl', key)
                continue
            if not 1 <= a <= dim:
                self.record("Weyl index out of range", 'weyl', key, range='1..{}'.format(dim))
                continue
            expr = self.expr('weyl', key, value, symbols)
            if expr is not None:
                weyl[a - 1] = expr
        return weyl

    def domain(self, coordinates):
        box = [DEFAULT_INTERVAL] * len(coordinates)
        if not self.cp.has_section('domain'):
            return box
        for key, value in self.cp['domain'].items():
            if key not in coordinates:
                self.record("Domain given for an unknown coordinate", 'domain', key)
                continue
            parts = _names(value)
            try:
                lo, hi = (float(v) for v in parts)
            except ValueError:
                self.record("Domain must be 'lo, hi'", 'domain', key, value=value)
                continue
            if hi < lo:
                self.record("Empty domain interval", 'domain', key, lo=lo, hi=hi)
                continue
            box[coordinates.index(key)] = (lo, hi)
        return box

    def build_manifold(self):
        sec = 'manifold'
        for key in ('n', 'p'):
            if not self.cp.has_option(sec, key):
                self.record("Missing required entry", sec, None, entry=key)
        if self.problems:
            return None
        n = self.integer(sec, 'n', 1)
        p = self.integer(sec, 'p', 0)
        if n is None or p is None:
            return None
        dim = n + p
        default = ['x{}'.format(i + 1) for i in range(dim)]
        coordinates = self.names(sec, 'coordinates', dim, default)
        constants = self.constants(coordinates)
        symbols = list(coordinates) + list(constants)

        metric = {}
        for key, value in (self.cp['metric'].items() if self.cp.has_section('metric') else []):
            try:
                a, b = (int(v) for v in key.split(','))
            except ValueError:
                self.record("Metric entry must be 'a,b'", 'metric', key)
                continue
            if not (1 <= a <= dim and 1 <= b <= dim):
                self.record("Metric index out of range", 'metric', key, range='1..{}'.format(dim))
                continue
            if a > b:
                self.record("Metric entry below the diagonal", 'metric', key,
                            hint='give it as {},{}'.format(b, a))
                continue
            expr = self.expr('metric', key, value, symbols)
            if expr is not None:
                metric[(a - 1, b - 1)] = expr

        weyl = self.weyl(dim, symbols)
        gauge = []
        for key, value in (self.cp['gauge'].items() if self.cp.has_section('gauge') else []):
            expr = self.expr('gauge', key, value, symbols)
            if expr is not None:
                gauge.append(expr)
        domain = self.domain(coordinates)
        if self.problems:
            return None
        return ManifoldSpec(
            n, p, metric, weyl, coordinates=coordinates, constants=constants,
            domain=domain, name=self.cp[sec].get('name'), gauge=gauge,
        )

    def build_finsler(self):
        sec = 'finsler'
        for key in ('n', 'F'):
            if not self.cp.has_option(sec, key):
                self.record("Missing required entry", sec, None, entry=key)
        if self.problems:
            return None
        n = self.integer(sec, 'n', 1)
        if n is None:
            return None
        base = self.names(sec, 'base', n, ['x{}'.format(i + 1) for i in range(n)])
        fiber = self.names(sec, 'fiber', n, ['y{}'.format(i + 1) for i in range(n)])
        coordinates = list(base) + list(fiber)
        constants = self.constants(coordinates)
        symbols = coordinates + list(constants)
        F = self.expr(sec, 'F', self.cp[sec]['F'], symbols)
        weyl = self.weyl(2 * n, symbols)
        domain = self.domain(coordinates)

        zero_radius = DEFAULT_ZERO_RADIUS
        if self.cp.has_option(sec, 'zero_radius'):
            try:
                zero_radius = self.cp.getfloat(sec, 'zero_radius')
            except ValueError:
                self.record("zero_radius must be a real number", sec, 'zero_radius')
            else:
                if not zero_radius > 0:
                    self.record("zero_radius must be positive", sec, 'zero_radius')
        if self.cp.has_section('metric') or self.cp.has_section('gauge'):
            self.record("[metric] and [gauge] do not apply to a Finsler spec",
                        'metric' if self.cp.has_section('metric') else 'gauge')
        if self.problems:
            return None
        return FinslerSpec(
            n, F, weyl, base=base, fiber=fiber, constants=constants, domain=domain,
            name=self.cp[sec].get('name'), zero_radius=zero_radius,
        )

    def check_center(self, spec):
        """Evaluate at the centre of the domain box to catch degenerate metrics"""
        try:
            if spec.kind == 'manifold':
                FoliatedChart.at(spec, spec.center(), order=1)
            else:
                FinslerChart(spec, *spec.center(), order=2)
        except WeylGeomError as e:
            self.record("Spec cannot be evaluated at the domain center",
                        error='{}: {}'.format(type(e).__name__, e))


def loads(text, path=None):
    return SpecValidator(text, path).build()


def load(path):
    with open(path, encoding='utf-8') as f:
        text = f.read()
    return loads(text, path)


def _format_interval(lo, hi):
    return '{!r}, {!r}'.format(float(lo), float(hi))


def dumps(spec):
    """Spec file text for *spec*; loading it gives an equivalent spec"""
    lines = []
    if spec.kind == 'manifold':
        lines.append('[manifold]')
        if spec.name:
            lines.append('name = {}'.format(spec.name))
        lines += ['n = {}'.format(spec.n), 'p = {}'.format(spec.p),
                  'coordinates = {}'.format(', '.join(spec.coordinates))]
        lines += ['', '[metric]']
        for (a, b), expr in sorted(spec.metric.items()):
            lines.append('{},{} = {}'.format(a + 1, b + 1, unparse(expr)))
    else:
        lines.append('[finsler]')
        if spec.name:
            lines.append('name = {}'.format(spec.name))
        lines += ['n = {}'.format(spec.n),
                  'base = {}'.format(', '.join(spec.base)),
                  'fiber = {}'.format(', '.join(spec.fiber)),
                  'F = {}'.format(unparse(spec.F)),
                  'zero_radius = {!r}'.format(spec.zero_radius)]

    if spec.weyl:
        lines += ['', '[weyl]']
        for a, expr in sorted(spec.weyl.items()):
            lines.append('{} = {}'.format(a + 1, unparse(expr)))
    if spec.constants:
        lines += ['', '[constants]']
        for name, value in spec.constants.items():
            lines.append('{} = {!r}'.format(name, float(value)))
    lines += ['', '[domain]']
    for name, (lo, hi) in zip(spec.coordinates, spec.domain):
        lines.append('{} = {}'.format(name, _format_interval(lo, hi)))
    if getattr(spec, 'gauge', ()):
        lines += ['', '[gauge]']
        for i, u in enumerate(spec.gauge, start=1):
            lines.append('{} = {}'.format(i, unparse(u)))
    return '\n'.join(lines) + '\n'


def dump(spec, path):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(dumps(spec))
