"""Multivariate range queries with AND/OR, evaluated by full scan.

Grammar (AND binds tighter than OR, keywords case-insensitive)::

    expr       := and_expr ("OR" and_expr)*
    and_expr   := atom ("AND" atom)*
    atom       := "(" expr ")" | comparison
    comparison := NAME op NUMBER | NUMBER op NAME | NUMBER op NAME op NUMBER
    op         := "<" | "<=" | ">" | ">="

Numbers accept a sign, decimals, exponents and ``inf``. A chained comparison
whose bounds are given in descending order (``-100 < P < -4900``) is read as
the range between them, with a warning.
"""

import re
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, QuerySyntaxError, UnknownOperator, ValidationError

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>[+-]?(?:inf|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?![A-Za-z_0-9]))
  | (?P<op><=|>=|==|!=|=<|=>|<>|<|>|=|!)
  | (?P<andop>&&|&)
  | (?P<orop>\|\||\|)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<name>[A-Za-z_][A-Za-z0-9_.]*)
""", re.VERBOSE | re.IGNORECASE)

_VALID_OPS = {"<", "<=", ">", ">="}


@dataclass(frozen=True)
class Leaf:
    variable: str
    lo: float = -np.inf
    hi: float = np.inf
    lo_inclusive: bool = False
    hi_inclusive: bool = False

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValidationError(f"empty range for {self.variable}: {self.lo} > {self.hi}")

    def mask(self, get):
        return self.test(get(self.variable))

    def test(self, values):
        values = np.asarray(values)
        lo = values >= self.lo if self.lo_inclusive else values > self.lo
        hi = values <= self.hi if self.hi_inclusive else values < self.hi
        return lo & hi

    def variables(self):
        return {self.variable}

    def __str__(self):
        parts = []
        if self.lo != -np.inf:
            parts.append(f"{_fmt(self.lo)} {'<=' if self.lo_inclusive else '<'} ")
        parts.append(self.variable)
        if self.hi != np.inf:
            parts.append(f" {'<=' if self.hi_inclusive else '<'} {_fmt(self.hi)}")
        if len(parts) == 1:
            return f"{self.variable} > -inf"
        return "".join(parts)


def _fmt(x):
    return repr(float(x)) if np.isfinite(x) else ("inf" if x > 0 else "-inf")


@dataclass(frozen=True)
class And:
    children: tuple

    def mask(self, get):
        out = self.children[0].mask(get)
        for c in self.children[1:]:
            out = out & c.mask(get)
        return out

    def variables(self):
        return set().union(*(c.variables() for c in self.children))

    def __str__(self):
        return " AND ".join(_wrap(c, Or) for c in self.children)


@dataclass(frozen=True)
class Or:
    children: tuple

    def mask(self, get):
        out = self.children[0].mask(get)
        for c in self.children[1:]:
            out = out | c.mask(get)
        return out

    def variables(self):
        return set().union(*(c.variables() for c in self.children))

    def __str__(self):
        return " OR ".join(_wrap(c, None) for c in self.children)


def _wrap(node, parens_for):
    s = str(node)
    return f"({s})" if parens_for is not None and isinstance(node, parens_for) else s


def _combine(cls, items):
    flat = []
    for it in items:
        flat.extend(it.children if isinstance(it, cls) else (it,))
    return flat[0] if len(flat) == 1 else cls(tuple(flat))


def _tokenize(text):
    text = text.replace("−", "-")
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            val = m.group()
            if kind == "name" and val.upper() in ("AND", "OR"):
                kind = val.lower() + "op"
            elif kind == "name" and val.lower() in ("inf", "infinity"):
                kind = "num"
            tokens.append((kind, val, pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise QuerySyntaxError(f"expected {kind}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise QuerySyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return node

    def expr(self):
        items = [self.and_expr()]
        while self.peek()[0] == "orop":
            self.take()
            items.append(self.and_expr())
        return _combine(Or, items)

    def and_expr(self):
        items = [self.atom()]
        while self.peek()[0] == "andop":
            self.take()
            items.append(self.atom())
        return _combine(And, items)

    def atom(self):
        if self.peek()[0] == "lpar":
            self.take()
            node = self.expr()
            self.take("rpar")
            return node
        return self.comparison()

    def operand(self):
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            return ("num", float(tok[1]), tok[2])
        if tok[0] == "name":
            self.take()
            return ("name", tok[1], tok[2])
        raise QuerySyntaxError(f"expected a number or variable, found {tok[1] or 'end of input'!r}",
                               tok[2])

    def op(self):
        tok = self.peek()
        if tok[0] != "op":
            raise QuerySyntaxError(f"expected a comparison operator, found {tok[1] or 'end of input'!r}",
                                   tok[2])
        if tok[1] not in _VALID_OPS:
            raise UnknownOperator(f"unsupported operator {tok[1]!r}", tok[2])
        self.take()
        return tok[1], tok[2]

    def comparison(self):
        first = self.operand()
        op1, p1 = self.op()
        second = self.operand()
        if self.peek()[0] == "op":
            op2, p2 = self.op()
            third = self.operand()
            if first[0] != "num" or second[0] != "name" or third[0] != "num":
                raise QuerySyntaxError("chained comparison must read NUMBER op NAME op NUMBER",
                                       first[2])
            return _chained(second[1], first[1], op1, third[1], op2, p2)
        if first[0] == "name" and second[0] == "num":
            return _bound(first[1], op1, second[1], var_left=True)
        if first[0] == "num" and second[0] == "name":
            return _bound(second[1], op1, first[1], var_left=False)
        raise QuerySyntaxError("comparison needs one variable and one number", p1)


def _bound(var, op, value, var_left):
    """Leaf for ``var op value`` (or ``value op var`` when not var_left)."""
    incl = op.endswith("=")
    upper = (op[0] == "<") == var_left
    if upper:
        return Leaf(var, hi=value, hi_inclusive=incl)
    return Leaf(var, lo=value, lo_inclusive=incl)


def _chained(var, a, op1, b, op2, pos):
    if op1[0] != op2[0]:
        raise QuerySyntaxError("chained comparison mixes < and >", pos)
    incl_a, incl_b = op1.endswith("="), op2.endswith("=")
    if op1[0] == ">":
        a, b, incl_a, incl_b = b, a, incl_b, incl_a
    if a > b:
        warnings.warn(f"bounds of {var} given in descending order; using [{b}, {a}]",
                      stacklevel=4)
        a, b, incl_a, incl_b = b, a, incl_b, incl_a
    return Leaf(var, lo=a, hi=b, lo_inclusive=incl_a, hi_inclusive=incl_b)


def parse_query(text):
    """Parse ``text`` into a canonical query tree of :class:`Leaf`, :class:`And`, :class:`Or`."""
    return _Parser(text).parse()


@dataclass(frozen=True, eq=False)
class QueryResult:
    indices: np.ndarray
    source: str
    dims: object

    def __len__(self):
        return int(self.indices.shape[0])


def query_raw(mf, q):
    """Exact result over every grid point of ``mf`` (raises UnknownVariable)."""
    mask = q.mask(lambda name: mf[name].values)
    return QueryResult(np.flatnonzero(mask).astype(np.uint64), "raw", mf.dims)


def query_sampled(ps, q):
    mask = q.mask(ps.column)
    return QueryResult(ps.indices[mask], "sampled", ps.dims)


def jaccard(a, b):
    """``|A & B| / |A | B|``; two empty results count as identical (1.0)."""
    if a.dims != b.dims:
        raise GridMismatch(f"results come from different grids: {a.dims} vs {b.dims}")
    if len(a) == 0 and len(b) == 0:
        warnings.warn("both query results are empty; Jaccard index taken as 1", stacklevel=2)
        return 1.0
    inter = np.intersect1d(a.indices, b.indices, assume_unique=True).size
    return inter / (len(a) + len(b) - inter)
