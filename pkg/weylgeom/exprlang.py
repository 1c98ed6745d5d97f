"""A small expression language for metric, one-form and Finsler functions

Expressions are written in named coordinates and constants, e.g.
``exp(2*x2)`` or ``sqrt(y1^2 + sin(x1)^2*y2^2)``, and can be evaluated on
plain floats or on jets. The grammar, by increasing precedence::

    expr    := expr ('+' | '-') expr
             | expr ('*' | '/') expr
             | '-' expr
             | expr '^' expr            (right associative)
             | NAME '(' expr ')'
             | NAME | NUMBER | '(' expr ')'

Unary minus binds less tightly than ``^``, so ``-x^2`` is ``-(x^2)``; the
exponent of ``^`` may itself start with a minus (``2^-x``).
"""
import math
import operator
import re
from dataclasses import dataclass

from . import jet
from .exceptions import ExprSyntaxError, UnknownSymbol

__all__ = [
    'Expr', 'Num', 'Sym', 'Neg', 'BinOp', 'Call', 'FUNCTIONS', 'CONSTANTS',
    'parse', 'unparse', 'evaluate', 'eval_jet', 'free_symbols', 'compile_field',
]


class Expr:
    """Base class of expression tree nodes"""
    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Sym(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


FUNCTIONS = {
    'sin': jet.sin,
    'cos': jet.cos,
    'exp': jet.exp,
    'log': jet.log,
    'sqrt': jet.sqrt,
}

CONSTANTS = {'pi': math.pi}

# Binary operators in groups of increasing binding power, with associativity
OPERATORS = [
    [('+', 'left'), ('-', 'left')],
    [('*', 'left'), ('/', 'left')],
    [('^', 'right')],
]
OPERATOR_PREC = {
    name: idx for (idx, group) in enumerate(OPERATORS) for name, _ in group
}
OPERATOR_ASSOC = {name: assoc for group in OPERATORS for name, assoc in group}
# Unary minus sits between the products and the power
UNARY_PREC = OPERATOR_PREC['^']

_BINARY = {
    '+': operator.add,
    '-': operator.sub,
    '*': operator.mul,
    '/': jet.divide,
    '^': jet.power,
}

_TOKEN_RE = re.compile(r"""
    (?P<space>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^])
  | (?P<lparen>\()
  | (?P<rparen>\))
""", re.VERBOSE | re.ASCII)


def tokenize(text):
    """List of (kind, text, offset) tokens, ending with an 'end' token

    Only ASCII is accepted, so character offsets are also byte offsets.
    """
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(
                "unexpected character {!r}".format(text[pos]), pos, text)
        if m.lastgroup != 'space':
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(('end', '', len(text)))
    return tokens


class _Parser:
    def __init__(self, text, symbols):
        self.text = text
        self.symbols = symbols
        self.tokens = tokenize(text)
        self.index = 0

    def peek(self):
        return self.tokens[self.index]

    def advance(self):
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def error(self, msg, tok):
        return ExprSyntaxError(msg, tok[2], self.text)

    def expect(self, kind, what):
        tok = self.advance()
        if tok[0] != kind:
            raise self.error("expected {}, found {}".format(what, _describe(tok)), tok)
        return tok

    def parse(self):
        expr = self.expression(0)
        tok = self.peek()
        if tok[0] != 'end':
            raise self.error("unexpected {}".format(_describe(tok)), tok)
        return expr

    def expression(self, min_prec):
        lhs = self.atom()
        while True:
            kind, op, _ = self.peek()
            if kind != 'op' or OPERATOR_PREC[op] < min_prec:
                return lhs
            self.advance()
            prec = OPERATOR_PREC[op]
            next_prec = prec + 1 if OPERATOR_ASSOC[op] == 'left' else prec
            rhs = self.expression(next_prec)
            lhs = BinOp(op, lhs, rhs)

    def atom(self):
        tok = self.advance()
        kind, text, _ = tok
        if kind == 'op' and text == '-':
            return Neg(self.expression(UNARY_PREC))
        if kind == 'lparen':
            expr = self.expression(0)
            self.expect('rparen', "')'")
            return expr
        if kind == 'num':
            return Num(float(text))
        if kind == 'name':
            if self.peek()[0] == 'lparen':
                if text not in FUNCTIONS:
                    raise UnknownSymbol(text, 'function')
                self.advance()
                arg = self.expression(0)
                self.expect('rparen', "')' closing the call to {}".format(text))
                return Call(text, arg)
            if text not in self.symbols and text not in CONSTANTS:
                raise UnknownSymbol(text)
            return Sym(text)
        raise self.error("unexpected {}".format(_describe(tok)), tok)


def _describe(tok):
    if tok[0] == 'end':
        return 'end of input'
    return repr(tok[1])


def parse(text, symbols=()):
    """Parse *text* into an expression tree

    Every name must be one of *symbols* or a builtin constant (``pi``).
    """
    return _Parser(text, frozenset(symbols)).parse()


def _unparse_num(value):
    s = repr(float(value))
    return '({})'.format(s) if value < 0 else s


def unparse(expr):
    """Fully parenthesized text for *expr*, which parses back to the same tree"""
    if isinstance(expr, Num):
        return _unparse_num(expr.value)
    if isinstance(expr, Sym):
        return expr.name
    if isinstance(expr, Neg):
        return '(-{})'.format(unparse(expr.operand))
    if isinstance(expr, BinOp):
        return '({} {} {})'.format(unparse(expr.left), expr.op, unparse(expr.right))
    if isinstance(expr, Call):
        return '{}({})'.format(expr.func, unparse(expr.arg))
    raise TypeError("Not an expression: {!r}".format(expr))


def free_symbols(expr):
    if isinstance(expr, Sym):
        return frozenset() if expr.name in CONSTANTS else frozenset([expr.name])
    if isinstance(expr, Neg):
        return free_symbols(expr.operand)
    if isinstance(expr, BinOp):
        return free_symbols(expr.left) | free_symbols(expr.right)
    if isinstance(expr, Call):
        return free_symbols(expr.arg)
    return frozenset()


def evaluate(expr, env):
    """Evaluate *expr* with names bound by *env*

    Values in *env* may be floats or jets; the result is a jet if any jet
    takes part in the computation.
    """
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Sym):
        try:
            return env[expr.name]
        except KeyError:
            pass
        try:
            return CONSTANTS[expr.name]
        except KeyError:
            raise UnknownSymbol(expr.name) from None
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, env)
    if isinstance(expr, BinOp):
        return _BINARY[expr.op](evaluate(expr.left, env), evaluate(expr.right, env))
    if isinstance(expr, Call):
        return FUNCTIONS[expr.func](evaluate(expr.arg, env))
    raise TypeError("Not an expression: {!r}".format(expr))


def eval_jet(expr, assignment):
    """Evaluate *expr* on jets, returning a jet even for constant expressions"""
    jets = [v for v in assignment.values() if isinstance(v, jet.Jet)]
    if not jets:
        raise ValueError("eval_jet() needs at least one jet in the assignment")
    res = evaluate(expr, assignment)
    if isinstance(res, jet.Jet):
        return res
    return jet.Jet.constant(res, jets[0].space)


def compile_field(expr, coordinates, constants=None):
    """A callable of the coordinate values (floats or jets) evaluating *expr*

    The result can be passed to :func:`weylgeom.jet.partial` and
    :func:`weylgeom.jet.expand`.
    """
    coordinates = list(coordinates)
    constants = dict(constants or {})

    def field(values):
        env = dict(constants)
        env.update(zip(coordinates, values))
        return evaluate(expr, env)

    return field
