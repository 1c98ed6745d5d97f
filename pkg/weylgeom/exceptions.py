"""Exception classes specific to weylgeom."""


class WeylGeomError(Exception):
    """Base class for errors raised by weylgeom computations"""


# Jets ----------------------------------------------------------------------

class OrderOutOfRange(WeylGeomError, ValueError):
    def __init__(self, order, lo=1, hi=4):
        self.order = order
        self.lo = lo
        self.hi = hi

    def __str__(self):
        return "Jet order {!r} is outside the supported range [{}, {}]".format(
            self.order, self.lo, self.hi)


class SeedSetError(WeylGeomError, ValueError):
    def __init__(self, reason):
        self.reason = reason

    def __str__(self):
        return "Invalid seed directions: {}".format(self.reason)


class DomainError(WeylGeomError, ValueError):
    def __init__(self, func, value):
        self.func = func
        self.value = value

    def __str__(self):
        return "{} is not defined at {!r}".format(self.func, self.value)


# Expressions ----------------------------------------------------------------

class ExprSyntaxError(WeylGeomError, ValueError, SyntaxError):
    def __init__(self, msg, offset, text=None):
        self.msg = msg
        self.offset = offset
        self.text = text

    def __str__(self):
        s = "{} at offset {}".format(self.msg, self.offset)
        if self.text is not None:
            s += "\n  {}\n  {}^".format(self.text, ' ' * self.offset)
        return s


class UnknownSymbol(WeylGeomError, KeyError):
    def __init__(self, name, kind='symbol'):
        self.name = name
        self.kind = kind

    def __str__(self):
        return "Unknown {} {!r}".format(self.kind, self.name)


# Geometry -------------------------------------------------------------------

class DegenerateMetric(WeylGeomError, ValueError):
    def __init__(self, block, det, point=None):
        self.block = block
        self.det = det
        self.point = point

    def __str__(self):
        s = "The {} block of the metric is degenerate (det = {:.3g})".format(
            self.block, self.det)
        if self.point is not None:
            s += " at {}".format(list(self.point))
        return s


class DegenerateTransversalMetric(DegenerateMetric):
    def __init__(self, det, point=None):
        super().__init__('transversal', det, point)


class DegenerateFullMetric(DegenerateMetric):
    def __init__(self, det, point=None):
        super().__init__('full', det, point)


class BadCoordinateSplit(WeylGeomError, ValueError):
    def __init__(self, n, p):
        self.n = n
        self.p = p

    def __str__(self):
        return "Cannot split coordinates with n={!r}, p={!r}: need n >= 1, p >= 0".format(
            self.n, self.p)


class DimensionMismatch(WeylGeomError, ValueError):
    def __init__(self, what, expected, got):
        self.what = what
        self.expected = expected
        self.got = got

    def __str__(self):
        return "{} should have {} components, got {}".format(
            self.what, self.expected, self.got)


class BadFrameArgument(WeylGeomError, ValueError):
    def __init__(self, arg, size):
        self.arg = arg
        self.size = size

    def __str__(self):
        return "Frame index {!r} is not in 1..{}".format(self.arg, self.size)


class InsufficientOrder(WeylGeomError, ValueError):
    def __init__(self, what, needed, available):
        self.what = what
        self.needed = needed
        self.available = available

    def __str__(self):
        return "{} needs derivatives of order {}, only {} available".format(
            self.what, self.needed, self.available)


# Finsler --------------------------------------------------------------------

class OnZeroSection(WeylGeomError, ValueError):
    def __init__(self, y, radius):
        self.y = y
        self.radius = radius

    def __str__(self):
        return "Fibre point {} is within {:g} of the zero section".format(
            list(self.y), self.radius)


class NotPositiveDefinite(WeylGeomError, ValueError):
    def __init__(self, eigenvalue):
        self.eigenvalue = eigenvalue

    def __str__(self):
        return ("The fundamental tensor is not positive definite "
                "(smallest eigenvalue {:.3g})".format(self.eigenvalue))


class NotRiemannianBase(WeylGeomError, ValueError):
    def __init__(self, deviation):
        self.deviation = deviation

    def __str__(self):
        return ("The fundamental tensor depends on the fibre coordinates "
                "(deviation {:.3g}); the base is not Riemannian".format(self.deviation))


# Verification ---------------------------------------------------------------

class UnknownSuite(WeylGeomError, KeyError):
    def __init__(self, suite):
        self.suite = suite

    def __str__(self):
        return "No verification suite named {!r}".format(self.suite)


class SuiteInapplicable(WeylGeomError, ValueError):
    def __init__(self, suite, reason):
        self.suite = suite
        self.reason = reason

    def __str__(self):
        return "Suite {!r} does not apply: {}".format(self.suite, self.reason)


class EmptyDomain(WeylGeomError, ValueError):
    def __init__(self, reason):
        self.reason = reason

    def __str__(self):
        return "Cannot sample points: {}".format(self.reason)


# Spec files -----------------------------------------------------------------

class ParseError(WeylGeomError, ValueError):
    def __init__(self, msg, lineno=None, path=None):
        self.msg = msg
        self.lineno = lineno
        self.path = path

    def __str__(self):
        where = self.path or '<spec>'
        if self.lineno is not None:
            where += ':{}'.format(self.lineno)
        return "{}: {}".format(where, self.msg)


class ValidationError(WeylGeomError, ValueError):
    def __init__(self, problems):
        self.problems = problems

    def __str__(self):
        lines = []
        for prob in self.problems:
            lines.extend([prob['msg']] + [
                '  {}: {}'.format(k, v) for (k, v) in sorted(prob.items())
                if k != 'msg'
            ])

        return '\n'.join(lines)


class UnknownFixture(WeylGeomError, KeyError):
    def __init__(self, name, known=()):
        self.name = name
        self.known = known

    def __str__(self):
        s = "No spec file or catalog entry named {!r}".format(self.name)
        if self.known:
            s += " (catalog: {})".format(', '.join(self.known))
        return s
