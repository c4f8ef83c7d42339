"""Scalar coefficient expressions.

Closed expression trees over named real variables: constants, variables,
n-ary sums and products, integer powers and the unary functions
``exp``, ``sin``, ``cos`` and ``log``.  Trees are immutable.  The only
simplification performed is constant folding and elimination of zeros and
ones, so two expressions are compared by evaluating them, never structurally.

>>> e = parse("x*exp(t)")
>>> round(e.eval({"x": 2, "t": 1}), 5)
5.43656
>>> print(diff(parse("x^2"), "x"))
2*x
"""

from __future__ import annotations

import math
import re
from functools import lru_cache
from numbers import Real

from .errors import DomainError, EvaluationError, ExpressionSyntaxError, UnboundVariable

FUNCTIONS = ("exp", "sin", "cos", "log")

_MATH = {"exp": math.exp, "sin": math.sin, "cos": math.cos, "log": math.log}


class Expr:
    """Base class of expression nodes."""

    __slots__ = ("_key", "_hash")

    def _init_key(self, key):
        self._key = key
        self._hash = hash(key)

    def __eq__(self, other):
        return isinstance(other, Expr) and self._key == other._key

    def __hash__(self):
        return self._hash

    # arithmetic sugar
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        return power(self, n)

    def __str__(self):
        return to_string(self)

    def __repr__(self):
        return f"Expr({to_string(self)!r})"

    def eval(self, point):
        return evaluate(self, point)

    @property
    def is_zero(self):
        return isinstance(self, Const) and self.value == 0.0

    @property
    def is_one(self):
        return isinstance(self, Const) and self.value == 1.0


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = float(value)
        self._init_key(("c", self.value))


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name
        self._init_key(("v", name))


class Sum(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = tuple(terms)
        self._init_key(("+",) + tuple(t._key for t in self.terms))


class Prod(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        self.factors = tuple(factors)
        self._init_key(("*",) + tuple(f._key for f in self.factors))


class Pow(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base, exponent):
        self.base = base
        self.exponent = int(exponent)
        self._init_key(("^", base._key, self.exponent))


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name, arg):
        if name not in FUNCTIONS:
            raise ValueError(f"unsupported function {name!r}; available: {', '.join(FUNCTIONS)}")
        self.name = name
        self.arg = arg
        self._init_key(("f", name, arg._key))


ZERO = Const(0.0)
ONE = Const(1.0)


def as_expr(value):
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return Var(value)
    if isinstance(value, Real):
        return Const(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an expression")


def const(value):
    return Const(value)


def var(name):
    return Var(name)


def add(*terms):
    flat = []
    c = 0.0
    for t in terms:
        t = as_expr(t)
        if isinstance(t, Sum):
            parts = t.terms
        else:
            parts = (t,)
        for s in parts:
            if isinstance(s, Const):
                c += s.value
            else:
                flat.append(s)
    if c != 0.0:
        flat.append(Const(c))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Sum(flat)


def mul(*factors):
    flat = []
    c = 1.0
    for f in factors:
        f = as_expr(f)
        parts = f.factors if isinstance(f, Prod) else (f,)
        for g in parts:
            if isinstance(g, Const):
                c *= g.value
            else:
                flat.append(g)
    if c == 0.0:
        return ZERO
    if c != 1.0:
        flat.insert(0, Const(c))
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    return Prod(flat)


def neg(e):
    return mul(Const(-1.0), e)


def power(base, n):
    if int(n) != n:
        raise ValueError("only integer exponents are supported")
    n = int(n)
    base = as_expr(base)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        if base.value != 0.0 or n > 0:
            try:
                return Const(base.value**n)
            except OverflowError:
                pass
        return Pow(base, n)
    if isinstance(base, Pow):
        return power(base.base, base.exponent * n)
    return Pow(base, n)


def func(name, arg):
    arg = as_expr(arg)
    if isinstance(arg, Const):
        v = arg.value
        if name == "exp" and v == 0.0:
            return ONE
        if name in ("sin",) and v == 0.0:
            return ZERO
        if name == "cos" and v == 0.0:
            return ONE
        if name == "log" and v == 1.0:
            return ZERO
    return Func(name, arg)


def exp(e):
    return func("exp", e)


def sin(e):
    return func("sin", e)


def cos(e):
    return func("cos", e)


def log(e):
    return func("log", e)


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e, point):
    """Value of ``e`` with variables looked up in the mapping ``point``."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return float(point[e.name])
        except KeyError:
            raise UnboundVariable(e.name) from None
    if isinstance(e, Sum):
        v = math.fsum(evaluate(t, point) for t in e.terms)
    elif isinstance(e, Prod):
        v = 1.0
        for f in e.factors:
            v *= evaluate(f, point)
    elif isinstance(e, Pow):
        b = evaluate(e.base, point)
        if b == 0.0 and e.exponent < 0:
            raise DomainError(f"zero raised to negative power in {to_string(e)}")
        try:
            v = b**e.exponent
        except OverflowError:
            raise DomainError(f"overflow in {to_string(e)}") from None
    elif isinstance(e, Func):
        a = evaluate(e.arg, point)
        if e.name == "log" and a <= 0.0:
            raise DomainError(f"log of non-positive value {a!r}")
        try:
            v = _MATH[e.name](a)
        except OverflowError:
            raise DomainError(f"overflow in {to_string(e)}") from None
    else:
        raise TypeError(f"unknown node {e!r}")
    if not math.isfinite(v):
        raise DomainError(f"non-finite value in {to_string(e)}")
    return v


def variables(e):
    """Set of variable names occurring in ``e``."""
    return _variables(e)


@lru_cache(maxsize=None)
def _variables(e):
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Sum):
        return frozenset().union(*(_variables(t) for t in e.terms))
    if isinstance(e, Prod):
        return frozenset().union(*(_variables(f) for f in e.factors))
    if isinstance(e, Pow):
        return _variables(e.base)
    return _variables(e.arg)


def subs(e, mapping):
    """Replace variables by expressions (simultaneously)."""
    if not mapping:
        return e
    if isinstance(e, Const):
        return e
    if isinstance(e, Var):
        return as_expr(mapping[e.name]) if e.name in mapping else e
    if isinstance(e, Sum):
        return add(*(subs(t, mapping) for t in e.terms))
    if isinstance(e, Prod):
        return mul(*(subs(f, mapping) for f in e.factors))
    if isinstance(e, Pow):
        return power(subs(e.base, mapping), e.exponent)
    return func(e.name, subs(e.arg, mapping))


# ---------------------------------------------------------------------------
# differentiation


@lru_cache(maxsize=65536)
def diff(e, v):
    """Exact partial derivative of ``e`` with respect to the variable named ``v``."""
    if isinstance(v, Var):
        v = v.name
    if isinstance(e, Const):
        return ZERO
    if v not in _variables(e):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Sum):
        return add(*(diff(t, v) for t in e.terms))
    if isinstance(e, Prod):
        out = []
        fs = e.factors
        for i, f in enumerate(fs):
            df = diff(f, v)
            if df.is_zero:
                continue
            out.append(mul(*fs[:i], df, *fs[i + 1 :]))
        return add(*out)
    if isinstance(e, Pow):
        n = e.exponent
        return mul(Const(n), power(e.base, n - 1), diff(e.base, v))
    du = diff(e.arg, v)
    u = e.arg
    if e.name == "exp":
        return mul(e, du)
    if e.name == "sin":
        return mul(func("cos", u), du)
    if e.name == "cos":
        return mul(Const(-1.0), func("sin", u), du)
    return mul(power(u, -1), du)


def diff_multi(e, names, orders):
    """Mixed partial derivative; ``orders[i]`` derivatives in ``names[i]``."""
    for name, k in zip(names, orders):
        for _ in range(k):
            e = diff(e, name)
    return e


# ---------------------------------------------------------------------------
# printing


def _fmt_number(x):
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def to_string(e):
    return _str(e, 0)


# precedence: 1 sum, 2 product, 3 power, 4 atom
def _str(e, ctx):
    if isinstance(e, Const):
        s = _fmt_number(e.value)
        if e.value < 0 and ctx > 2:
            return f"({s})"
        return s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({_str(e.arg, 0)})"
    if isinstance(e, Pow):
        s = f"{_str(e.base, 4)}^{e.exponent}"
        return f"({s})" if ctx > 3 else s
    if isinstance(e, Prod):
        s = "*".join(_str(f, 3 if i else 2) for i, f in enumerate(e.factors))
        return f"({s})" if ctx > 2 else s
    s = " + ".join(_str(t, 1) for t in e.terms)
    return f"({s})" if ctx > 1 else s


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value or kind != "op":
            raise ExpressionSyntaxError(f"expected {value!r}", pos)

    def parse(self):
        if self.peek()[0] == "end":
            raise ExpressionSyntaxError("empty expression", 0)
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {val!r}", pos)
        return e

    def expr(self):
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                e = add(e, rhs) if val == "+" else add(e, neg(rhs))
            else:
                return e

    def term(self):
        e = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.unary()
                e = mul(e, rhs) if val == "*" else mul(e, power(rhs, -1))
            else:
                return e

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            inner = self.unary()
            return neg(inner) if val == "-" else inner
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.take()
            exponent = self.unary()
            if not isinstance(exponent, Const) or not exponent.value.is_integer():
                raise ExpressionSyntaxError("exponent must be an integer constant", pos + 1)
            return power(base, int(exponent.value))
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "id":
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "(":
                if val not in FUNCTIONS:
                    raise ExpressionSyntaxError(
                        f"unknown function {val!r}; supported: {', '.join(FUNCTIONS)}", pos
                    )
                self.take()
                arg = self.expr()
                self.expect(")")
                return func(val, arg)
            return Var(val)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "end":
            raise ExpressionSyntaxError("unexpected end of input", pos)
        raise ExpressionSyntaxError(f"unexpected token {val!r}", pos)


def parse(text):
    """Parse expression text (see the grammar in the README)."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# compilation to Python callables


def _py(e, names):
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return names[e.name]
    if isinstance(e, Sum):
        return "(" + " + ".join(_py(t, names) for t in e.terms) + ")"
    if isinstance(e, Prod):
        return "(" + "*".join(_py(f, names) for f in e.factors) + ")"
    if isinstance(e, Pow):
        return f"({_py(e.base, names)})**{e.exponent}"
    if e.name == "log":
        return f"_log({_py(e.arg, names)})"
    return f"_m.{e.name}({_py(e.arg, names)})"


def _checked_log(a):
    if a <= 0.0:
        raise ValueError("log of non-positive value")
    return math.log(a)


def compile_exprs(exprs, argnames):
    """Compile expressions into ``f(*values) -> list`` over ``argnames``.

    Domain violations surface as :class:`EvaluationError`.
    """
    names = {n: f"a{i}" for i, n in enumerate(argnames)}
    exprs = list(exprs)
    for e in exprs:
        missing = variables(e) - set(argnames)
        if missing:
            raise UnboundVariable(sorted(missing)[0])
    body = ", ".join(_py(e, names) for e in exprs)
    src = f"def _f({', '.join(names[n] for n in argnames)}):\n    return [{body}]\n"
    scope = {"_m": math, "_log": _checked_log}
    exec(src, scope)
    raw = scope["_f"]

    def f(*values):
        try:
            return raw(*values)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise EvaluationError(f"cannot evaluate coefficient at {values}: {exc}") from None

    return f
