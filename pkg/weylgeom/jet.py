"""Truncated multivariate Taylor expansions (jets) for exact derivatives.

A :class:`Jet` holds the Taylor coefficients of a (possibly tensor-valued)
function of a few seed variables around a point, up to total degree
``order``. Arithmetic and the elementary functions propagate the coefficients
exactly, so every partial derivative up to that order can be read off the
result.

Coefficients live in the last axis of ``Jet.coeffs`` and are stored as
derivative / multi-index factorial. Multi-indices are ordered by total degree,
so the coefficients of a lower order jet are a prefix of the higher order one.
"""
import logging
import math
import numbers
import string
from functools import lru_cache
from itertools import combinations, combinations_with_replacement, product

import numpy as np

from .exceptions import (
    DimensionMismatch, DomainError, InsufficientOrder, OrderOutOfRange,
    SeedSetError,
)

__all__ = [
    'MAX_ORDER', 'MAX_SEEDS', 'MultiIndex', 'JetSpace', 'Jet', 'jet_space',
    'lift', 'jet_apply', 'partial', 'expand', 'finite_difference',
    'exp', 'log', 'sqrt', 'sin', 'cos', 'power', 'reciprocal', 'divide',
    'diff', 'grad', 'einsum', 'tensordot', 'inv', 'stack', 'value_of',
]

logger = logging.getLogger(__name__)

MAX_ORDER = 4
MAX_SEEDS = 4


class MultiIndex(tuple):
    """Exponents of a mixed partial derivative, one per variable"""
    def __new__(cls, exponents):
        exps = tuple(int(e) for e in exponents)
        if any(e < 0 for e in exps):
            raise ValueError(
                "Multi-index exponents must be non-negative, got {}".format(exps))
        if sum(exps) > MAX_ORDER:
            raise OrderOutOfRange(sum(exps), 0, MAX_ORDER)
        return super().__new__(cls, exps)

    @property
    def degree(self):
        return sum(self)

    @property
    def support(self):
        """Variables that appear with a non-zero exponent"""
        return tuple(k for k, e in enumerate(self) if e)

    def factorial(self):
        return math.prod(math.factorial(e) for e in self)


class JetSpace:
    """Multi-index bookkeeping for jets in *nvars* variables up to *order*

    Use :func:`jet_space` rather than creating these directly, so the
    product tables are only built once.
    """
    def __init__(self, nvars, order):
        self.nvars = nvars
        self.order = order

        self.multi_indices = []
        for degree in range(order + 1):
            for combo in combinations_with_replacement(range(nvars), degree):
                exps = [0] * nvars
                for k in combo:
                    exps[k] += 1
                self.multi_indices.append(tuple(exps))
        self.index = {mi: i for i, mi in enumerate(self.multi_indices)}
        self.size = len(self.multi_indices)
        self.degrees = np.array([sum(mi) for mi in self.multi_indices])
        self.factorials = np.array(
            [MultiIndex(mi).factorial() for mi in self.multi_indices], dtype=np.float64
        )

        # Products are a truncated convolution: every pair of coefficients
        # whose degrees fit in the order contributes to one output coefficient.
        left, right, target = [], [], []
        for i, a in enumerate(self.multi_indices):
            for j, b in enumerate(self.multi_indices):
                if self.degrees[i] + self.degrees[j] <= order:
                    left.append(i)
                    right.append(j)
                    target.append(self.index[tuple(x + y for x, y in zip(a, b))])
        self.left = np.array(left, dtype=np.intp)
        self.right = np.array(right, dtype=np.intp)
        self.scatter = np.zeros((len(target), self.size))
        self.scatter[np.arange(len(target)), target] = 1.

        self._diff_tables = {}
        self._embeddings = {}

    def __repr__(self):
        return "JetSpace(nvars={}, order={})".format(self.nvars, self.order)

    def diff_table(self, s):
        """Source positions and factors for differentiating along variable *s*"""
        try:
            return self._diff_tables[s]
        except KeyError:
            pass

        lower = jet_space(self.nvars, self.order - 1)
        src, factor = [], []
        for mi in lower.multi_indices:
            up = list(mi)
            up[s] += 1
            src.append(self.index[tuple(up)])
            factor.append(up[s])
        table = (lower, np.array(src, dtype=np.intp), np.array(factor, dtype=np.float64))
        self._diff_tables[s] = table
        return table

    def embedding(self, subset):
        """Map the coefficients of a jet seeded on *subset* into this space

        Returns (dst, src): positions here of every multi-index supported on
        the subset, and the matching positions in the smaller space.
        """
        subset = tuple(subset)
        try:
            return self._embeddings[subset]
        except KeyError:
            pass

        sub = jet_space(len(subset), self.order)
        dst, src = [], []
        for i, mi in enumerate(self.multi_indices):
            if all(mi[k] == 0 for k in range(self.nvars) if k not in subset):
                dst.append(i)
                src.append(sub.index[tuple(mi[k] for k in subset)])
        res = (np.array(dst, dtype=np.intp), np.array(src, dtype=np.intp))
        self._embeddings[subset] = res
        return res


@lru_cache(maxsize=None)
def jet_space(nvars, order):
    if not 0 <= order <= MAX_ORDER:
        raise OrderOutOfRange(order, 0, MAX_ORDER)
    return JetSpace(nvars, order)


def _is_real(x):
    return isinstance(x, (numbers.Real, np.ndarray))


class Jet:
    """Truncated Taylor expansion of a scalar or tensor valued function

    ``coeffs`` has shape ``tensor_shape + (space.size,)``.
    """
    # Make numpy defer to our reflected operators (ndarray * Jet)
    __array_ufunc__ = None

    def __init__(self, space, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.float64)
        if coeffs.shape[-1:] != (space.size,):
            raise ValueError("Coefficient array of shape {} does not fit {}".format(
                coeffs.shape, space))
        self.space = space
        self.coeffs = coeffs

    @classmethod
    def constant(cls, value, space):
        value = np.asarray(value, dtype=np.float64)
        coeffs = np.zeros(value.shape + (space.size,))
        coeffs[..., 0] = value
        return cls(space, coeffs)

    @property
    def order(self):
        return self.space.order

    @property
    def nvars(self):
        return self.space.nvars

    @property
    def shape(self):
        return self.coeffs.shape[:-1]

    @property
    def ndim(self):
        return self.coeffs.ndim - 1

    @property
    def value(self):
        return self.coeffs[..., 0]

    def __repr__(self):
        return "<Jet order={} nvars={} shape={}>".format(
            self.order, self.nvars, self.shape)

    def truncate(self, order):
        if order > self.order:
            raise InsufficientOrder('truncation', order, self.order)
        if order == self.order:
            return self
        space = jet_space(self.nvars, order)
        return Jet(space, self.coeffs[..., :space.size])

    def coefficient(self, idx):
        return self.coeffs[..., self.space.index[tuple(idx)]]

    def derivative(self, idx):
        """The partial derivative for multi-index *idx* at the expansion point"""
        idx = MultiIndex(idx)
        if idx.degree > self.order:
            raise InsufficientOrder('derivative {}'.format(tuple(idx)), idx.degree, self.order)
        return self.coefficient(idx) * idx.factorial()

    def derivatives(self):
        return self.coeffs * self.space.factorials

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis for i in idx):
            return Jet(self.space, self.coeffs[idx + (slice(None),)])
        return Jet(self.space, self.coeffs[idx + (Ellipsis,)])

    def transpose(self, *axes):
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        return Jet(self.space, self.coeffs.transpose(tuple(axes) + (self.ndim,)))

    @property
    def T(self):
        return self.transpose()

    def sum(self, axis):
        if axis < 0:
            axis += self.ndim
        return Jet(self.space, self.coeffs.sum(axis=axis))

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b = _common(self, other)
            return Jet(a.space, a.coeffs + b.coeffs)
        if not _is_real(other):
            return NotImplemented
        other = np.asarray(other, dtype=np.float64)
        coeffs = self.coeffs + np.zeros(other.shape + (1,))
        coeffs[..., 0] += other
        return Jet(self.space, coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        if not (isinstance(other, Jet) or _is_real(other)):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = _common(self, other)
            sp = a.space
            return Jet(sp, (a.coeffs[..., sp.left] * b.coeffs[..., sp.right]) @ sp.scatter)
        if not _is_real(other):
            return NotImplemented
        other = np.asarray(other, dtype=np.float64)
        return Jet(self.space, self.coeffs * other[..., np.newaxis])

    __rmul__ = __mul__

    def __truediv__(self, other):
        return divide(self, other)

    def __rtruediv__(self, other):
        return divide(other, self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __rpow__(self, base):
        return power(base, self)


def _common(a, b):
    if a.nvars != b.nvars:
        raise SeedSetError(
            "jets seeded in {} and {} variables cannot be combined".format(a.nvars, b.nvars))
    order = min(a.order, b.order)
    return a.truncate(order), b.truncate(order)


def value_of(x):
    """The plain value of a jet, or *x* itself"""
    return x.value if isinstance(x, Jet) else x


def _scalar_value(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


# Elementary functions --------------------------------------------------------

def _real(func, name, x, defined=lambda v: True):
    x = float(x)
    if not defined(x):
        raise DomainError(name, x)
    try:
        return func(x)
    except (OverflowError, ValueError):
        raise DomainError(name, x) from None


def _compose(a, taylor):
    """Substitute a - a.value into a univariate Taylor series"""
    h = a - a.value
    result = Jet.constant(taylor[0], a.space)
    term = None
    for k in range(1, a.order + 1):
        term = h if term is None else term * h
        result = result + term * taylor[k]
    return result


def exp(x):
    if not isinstance(x, Jet):
        return _real(math.exp, 'exp', x)
    v = np.exp(x.value)
    return _compose(x, [v / math.factorial(k) for k in range(x.order + 1)])


def log(x):
    if not isinstance(x, Jet):
        return _real(math.log, 'log', x, lambda v: v > 0)
    v = x.value
    if np.any(v <= 0):
        raise DomainError('log', _scalar_value(v))
    taylor = [np.log(v)] + [
        (-1) ** (k + 1) / (k * v ** k) for k in range(1, x.order + 1)
    ]
    return _compose(x, taylor)


_SIN_CYCLE = (np.sin, np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v))


def sin(x):
    if not isinstance(x, Jet):
        return _real(math.sin, 'sin', x)
    v = x.value
    return _compose(x, [_SIN_CYCLE[k % 4](v) / math.factorial(k)
                        for k in range(x.order + 1)])


def cos(x):
    if not isinstance(x, Jet):
        return _real(math.cos, 'cos', x)
    v = x.value
    return _compose(x, [_SIN_CYCLE[(k + 1) % 4](v) / math.factorial(k)
                        for k in range(x.order + 1)])


def sqrt(x):
    if not isinstance(x, Jet):
        return _real(math.sqrt, 'sqrt', x, lambda v: v >= 0)
    if x.order == 0:
        if np.any(x.value < 0):
            raise DomainError('sqrt', _scalar_value(x.value))
        return Jet(x.space, np.sqrt(x.coeffs))
    if np.any(x.value <= 0):
        raise DomainError('sqrt', _scalar_value(x.value))
    return _real_power(x, 0.5)


def reciprocal(x):
    if not isinstance(x, Jet):
        return _real(lambda v: 1. / v, 'division', x, lambda v: v != 0)
    v = x.value
    if np.any(v == 0):
        raise DomainError('division', _scalar_value(v))
    return _compose(x, [(-1) ** k / v ** (k + 1) for k in range(x.order + 1)])


def divide(a, b):
    if isinstance(b, Jet):
        return a * reciprocal(b)
    if isinstance(a, Jet):
        b = np.asarray(b, dtype=np.float64)
        if np.any(b == 0):
            raise DomainError('division', _scalar_value(b))
        return a * (1. / b)
    return _real(lambda v: float(a) / v, 'division', b, lambda v: v != 0)


def _binomial(r, k):
    return math.prod(r - j for j in range(k)) / math.factorial(k)


def _real_power(x, r):
    v = x.value
    return _compose(x, [_binomial(r, k) * v ** (r - k) for k in range(x.order + 1)])


def _int_power(x, n):
    result = None
    base = x
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    return result


def _real_pow(base, exponent):
    base, exponent = float(base), float(exponent)
    if base == 0 and exponent < 0:
        raise DomainError('pow', base)
    if base < 0 and not exponent.is_integer():
        raise DomainError('pow', base)
    try:
        return base ** exponent
    except OverflowError:
        raise DomainError('pow', base) from None


def power(base, exponent):
    """base ** exponent for jets and plain numbers

    Integer exponents allow a negative base; anything else needs base > 0.
    """
    if isinstance(exponent, Jet):
        if not isinstance(base, Jet) and float(base) <= 0:
            raise DomainError('pow', float(base))
        return exp(exponent * log(base))
    if not isinstance(base, Jet):
        return _real_pow(base, exponent)

    exponent = float(exponent)
    if exponent.is_integer():
        n = int(exponent)
        if n == 0:
            return Jet.constant(np.ones(base.shape), base.space)
        if n < 0:
            return _int_power(reciprocal(base), -n)
        return _int_power(base, n)
    if np.any(base.value <= 0):
        raise DomainError('pow', _scalar_value(base.value))
    return _real_power(base, exponent)


_OPERATIONS = {
    '+': lambda a, b: a + b,
    '-': lambda a, b: a - b,
    '*': lambda a, b: a * b,
    '/': divide,
    'pow': power,
    'exp': exp,
    'log': log,
    'sqrt': sqrt,
    'sin': sin,
    'cos': cos,
}


def jet_apply(op, *args):
    """Apply an arithmetic operation or elementary function by name"""
    try:
        func = _OPERATIONS[op]
    except KeyError:
        raise ValueError("Unknown jet operation {!r}".format(op)) from None
    spaces = {a.space for a in args if isinstance(a, Jet)}
    if len(spaces) > 1:
        raise SeedSetError("operands of {!r} are seeded differently".format(op))
    return func(*args)


# Seeding and extraction -------------------------------------------------------

def _seed_directions(seeds, ndim):
    dirs = []
    for s in seeds:
        if isinstance(s, numbers.Integral):
            if not 0 <= s < ndim:
                raise SeedSetError("coordinate {} is not in 0..{}".format(s, ndim - 1))
            d = np.zeros(ndim)
            d[s] = 1.
        else:
            d = np.asarray(s, dtype=np.float64).ravel()
            if d.shape != (ndim,):
                raise SeedSetError("direction {} does not have {} components".format(
                    list(d), ndim))
        dirs.append(d)

    if len(dirs) > MAX_SEEDS:
        raise SeedSetError("{} directions given, at most {} supported".format(
            len(dirs), MAX_SEEDS))
    if dirs and np.linalg.matrix_rank(np.array(dirs)) < len(dirs):
        raise SeedSetError("directions are linearly dependent")
    return dirs


def lift(point, seeds, order):
    """Coordinate functions as jets at *point*

    *seeds* are coordinate indices or direction vectors; the jets are
    expansions in the parameters along those directions.
    """
    if not 1 <= order <= MAX_ORDER:
        raise OrderOutOfRange(order, 1, MAX_ORDER)
    point = np.asarray(point, dtype=np.float64).ravel()
    dirs = _seed_directions(seeds, len(point))
    space = jet_space(len(dirs), order)

    coeffs = np.zeros((len(point), space.size))
    coeffs[:, 0] = point
    for s, d in enumerate(dirs):
        coeffs[:, 1 + s] = d
    return [Jet(space, c) for c in coeffs]


def _flatten(items):
    if isinstance(items, (list, tuple)):
        flat, shapes = [], set()
        for item in items:
            f, s = _flatten(item)
            flat.extend(f)
            shapes.add(s)
        if len(shapes) > 1:
            raise ValueError("ragged nested sequence")
        inner = shapes.pop() if shapes else ()
        return flat, (len(items),) + inner
    if isinstance(items, Jet):
        if items.ndim:
            raise ValueError("stack() takes scalar jets")
        return [items], ()
    return [items], ()


def stack(items, space=None):
    """Build a tensor jet from nested lists of scalar jets and numbers"""
    flat, shape = _flatten(items)
    jets = [x for x in flat if isinstance(x, Jet)]
    if space is None:
        if not jets:
            raise ValueError("stack() needs a jet space when no item is a jet")
        space = min((j.space for j in jets), key=lambda sp: sp.order)
    coeffs = np.zeros((len(flat), space.size))
    for i, x in enumerate(flat):
        if isinstance(x, Jet):
            if x.nvars != space.nvars:
                raise SeedSetError("cannot stack jets seeded in {} and {} variables".format(
                    x.nvars, space.nvars))
            coeffs[i] = x.truncate(space.order).coeffs
        else:
            coeffs[i, 0] = x
    return Jet(space, coeffs.reshape(shape + (space.size,)))


def _as_jet(result, space):
    if isinstance(result, Jet):
        return result.truncate(space.order)
    if isinstance(result, (list, tuple)):
        return stack(result, space)
    return Jet.constant(result, space)


def partial(field, point, idx):
    """Exact mixed partial derivative of *field* at *point*

    *field* takes a list of coordinate values (jets or floats) and returns a
    scalar or tensor; *idx* has one exponent per coordinate.
    """
    point = np.asarray(point, dtype=np.float64).ravel()
    idx = MultiIndex(idx)
    if len(idx) != len(point):
        raise DimensionMismatch('multi-index', len(point), len(idx))
    support = idx.support
    order = max(idx.degree, 1)
    xs = lift(point, support, order)
    res = _as_jet(field(xs), jet_space(len(support), order))
    return _scalar_value(res.derivative(tuple(idx[k] for k in support)))


def expand(field, point, order):
    """Jet of *field* at *point* in every coordinate direction

    Up to four coordinates are seeded at once. With more coordinates, the
    field is evaluated on each subset of four and every coefficient is taken
    from a subset containing its variables.
    """
    point = np.asarray(point, dtype=np.float64).ravel()
    nvars = len(point)
    space = jet_space(nvars, order)
    if nvars <= MAX_SEEDS:
        return _as_jet(field(lift(point, range(nvars), order)), space)

    sub_space = jet_space(MAX_SEEDS, order)
    coeffs = None
    filled = np.zeros(space.size, dtype=bool)
    subsets = list(combinations(range(nvars), MAX_SEEDS))
    logger.debug("Expanding over %d coordinates with %d seed subsets", nvars, len(subsets))
    for subset in subsets:
        sub = _as_jet(field(lift(point, subset, order)), sub_space)
        if coeffs is None:
            coeffs = np.zeros(sub.shape + (space.size,))
        dst, src = space.embedding(subset)
        new = ~filled[dst]
        coeffs[..., dst[new]] = sub.coeffs[..., src[new]]
        filled[dst] = True
    return Jet(space, coeffs)


_STENCILS = {
    0: ((0, 1.),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.), (0, -2.), (1, 1.)),
    3: ((-2, -0.5), (-1, 1.), (1, -1.), (2, 0.5)),
    4: ((-2, 1.), (-1, -4.), (0, 6.), (1, -4.), (2, 1.)),
}


def _central_difference(field, point, idx, h):
    total = 0.
    for terms in product(*(_STENCILS[e] for e in idx)):
        offset = np.array([o for o, _ in terms], dtype=np.float64) * h
        weight = math.prod(w for _, w in terms)
        total += weight * float(field(list(point + offset)))
    return total / h ** sum(idx)


def finite_difference(field, point, idx, h=None):
    """Richardson-extrapolated central difference estimate of a mixed partial

    Used as an independent check on :func:`partial`. *field* is called with
    plain floats.
    """
    point = np.asarray(point, dtype=np.float64).ravel()
    idx = MultiIndex(idx)
    if h is None:
        h = 1e-3 if idx.degree <= 2 else 2e-2
    coarse = _central_difference(field, point, idx, h)
    fine = _central_difference(field, point, idx, h / 2)
    return fine + (fine - coarse) / 3


# Derivatives and tensor algebra on jets -----------------------------------------

def diff(x, s):
    """Jet of the partial derivative along seed variable *s* (one order lower)"""
    if x.order == 0:
        raise InsufficientOrder('differentiation', 1, 0)
    lower, src, factor = x.space.diff_table(s)
    return Jet(lower, x.coeffs[..., src] * factor)


def grad(x):
    """Partial derivatives along every seed variable, as a new last tensor axis"""
    if x.order == 0:
        raise InsufficientOrder('differentiation', 1, 0)
    parts = [diff(x, s) for s in range(x.nvars)]
    return Jet(parts[0].space, np.stack([p.coeffs for p in parts], axis=-2))


def einsum(subscripts, *operands):
    """numpy.einsum over the tensor axes of one or two jets

    Subscripts must be explicit (with ``->``) and must not use ellipsis.
    Plain arrays are accepted as constant operands.
    """
    inputs, output = subscripts.replace(' ', '').split('->')
    terms = inputs.split(',')
    if len(terms) != len(operands) or len(operands) > 2:
        raise ValueError("einsum on jets takes one or two operands: {!r}".format(subscripts))
    if not any(isinstance(op, Jet) for op in operands):
        return np.einsum(subscripts, *operands)

    z = next(c for c in string.ascii_letters if c not in subscripts)
    if len(operands) == 1:
        a, = operands
        return Jet(a.space, np.einsum('{0}{2}->{1}{2}'.format(terms[0], output, z), a.coeffs))

    a, b = operands
    ta, tb = terms
    if isinstance(a, Jet) and isinstance(b, Jet):
        a, b = _common(a, b)
        sp = a.space
        pairs = np.einsum('{0}{3},{1}{3}->{2}{3}'.format(ta, tb, output, z),
                          a.coeffs[..., sp.left], b.coeffs[..., sp.right])
        return Jet(sp, pairs @ sp.scatter)
    if isinstance(a, Jet):
        return Jet(a.space, np.einsum('{0}{3},{1}->{2}{3}'.format(ta, tb, output, z),
                                      a.coeffs, np.asarray(b, dtype=np.float64)))
    return Jet(b.space, np.einsum('{0},{1}{3}->{2}{3}'.format(ta, tb, output, z),
                                  np.asarray(a, dtype=np.float64), b.coeffs))


def tensordot(a, b):
    """Contract the last tensor axis of *a* with the first axis of *b*"""
    na = a.ndim if isinstance(a, Jet) else np.ndim(a)
    nb = b.ndim if isinstance(b, Jet) else np.ndim(b)
    letters = string.ascii_lowercase
    sa = letters[:na]
    sb = sa[-1] + letters[na:na + nb - 1]
    return einsum('{},{}->{}'.format(sa, sb, sa[:-1] + sb[1:]), a, b)


def inv(m):
    """Inverse of a square matrix jet

    Expands (M0 + H)^-1 = sum_k (-M0^-1 H)^k M0^-1, which terminates because
    H has no value part.
    """
    if not isinstance(m, Jet):
        return np.linalg.inv(m)
    if m.shape[0] == 0:
        return Jet(m.space, np.zeros(m.coeffs.shape))
    m0_inv = np.linalg.inv(m.value)
    step = -einsum('ij,jk->ik', m0_inv, m - m.value)
    term = Jet.constant(m0_inv, m.space)
    result = term
    for _ in range(m.order):
        term = einsum('ij,jk->ik', step, term)
        result = result + term
    return result
