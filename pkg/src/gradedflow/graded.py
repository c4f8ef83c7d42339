"""Graded coordinates, multi-indices, Koszul signs and truncated series.

A :class:`GradedSignature` orders the coordinates of a graded domain.  Degree
zero coordinates are the base coordinates; the others are the graded
coordinates, over which multi-indices are exponent tuples.  A
:class:`GradedFunction` is a homogeneous formal power series stored as a
sparse ``{multi-index: coefficient}`` map, truncated above a weight cap.

Coordinates may be declared ``weighted=False``.  Such coordinates (used for
graded time parameters) do not count towards the truncation weight, so
attaching a time parameter to a series never pushes its terms past the cap.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass

from . import expr as E
from .config import DEFAULT
from .errors import (
    DegreeError,
    EvaluationError,
    IndexNotDominated,
    SignatureMismatch,
    ValidationError,
)
from .sampling import base_points


@dataclass(frozen=True)
class Coordinate:
    name: str
    degree: int
    weighted: bool = True

    @property
    def is_base(self):
        return self.degree == 0

    @property
    def is_odd(self):
        return self.degree % 2 != 0


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class GradedSignature:
    """Ordered coordinate system of a graded domain."""

    def __init__(self, coords):
        items = []
        for c in coords:
            if isinstance(c, Coordinate):
                items.append(c)
            else:
                items.append(Coordinate(*c))
        if not items:
            raise ValueError("a signature needs at least one coordinate")
        names = [c.name for c in items]
        for c in items:
            if not _IDENT.match(c.name):
                raise ValueError(f"invalid coordinate name {c.name!r}")
            if c.name in E.FUNCTIONS:
                raise ValueError(f"coordinate name {c.name!r} clashes with a function name")
            if int(c.degree) != c.degree:
                raise ValueError(f"degree of {c.name!r} must be an integer")
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise ValueError(f"duplicate coordinate names: {sorted(dup)}")
        self.coords = tuple(items)
        self.names = tuple(names)
        self._by_name = {c.name: c for c in items}
        self.base = tuple(c.name for c in items if c.is_base)
        graded = tuple(c for c in items if not c.is_base)
        self.graded = tuple(c.name for c in graded)
        self.graded_degrees = tuple(c.degree for c in graded)
        self.odd = tuple(c.is_odd for c in graded)
        self.weighted = tuple(c.weighted for c in graded)
        self._gpos = {n: i for i, n in enumerate(self.graded)}
        self._key = tuple((c.name, c.degree, c.weighted) for c in items)

    # identity -----------------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, GradedSignature) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        body = ", ".join(f"{c.name}:{c.degree}" + ("" if c.weighted else "~") for c in self.coords)
        return f"GradedSignature({body})"

    def __contains__(self, name):
        return name in self._by_name

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    # counts ------------------------------------------------------------
    @property
    def n0(self):
        return len(self.base)

    @property
    def n_star(self):
        return len(self.graded)

    def counts(self):
        """The sequence ``n_j`` as a dict over degrees that occur."""
        out = {}
        for c in self.coords:
            out[c.degree] = out.get(c.degree, 0) + 1
        return dict(sorted(out.items()))

    def coordinate(self, name):
        try:
            return self._by_name[name]
        except KeyError:
            raise SignatureMismatch(f"unknown coordinate {name!r}") from None

    def degree(self, name):
        return self.coordinate(name).degree

    def is_base(self, name):
        return self.coordinate(name).is_base

    def graded_position(self, name):
        return self._gpos[name]

    def extend(self, *coords):
        """Signature with extra coordinates appended (e.g. a time coordinate)."""
        return GradedSignature(self.coords + tuple(coords))

    def without(self, *names):
        return GradedSignature([c for c in self.coords if c.name not in names])

    # multi-indices -----------------------------------------------------
    @property
    def zero_index(self):
        return (0,) * self.n_star

    def unit(self, name):
        p = [0] * self.n_star
        p[self._gpos[name]] = 1
        return tuple(p)

    def multiindex(self, exps=None, **kw):
        """Build a validated multi-index from ``{graded name: exponent}``."""
        exps = dict(exps or {}, **kw)
        p = [0] * self.n_star
        for name, e in exps.items():
            if name not in self._gpos:
                raise SignatureMismatch(f"{name!r} is not a graded coordinate")
            p[self._gpos[name]] = int(e)
        return self.check_index(tuple(p))

    def check_index(self, p):
        p = tuple(int(a) for a in p)
        if len(p) != self.n_star:
            raise SignatureMismatch(f"multi-index {p} has length {len(p)}, expected {self.n_star}")
        for a, odd, name in zip(p, self.odd, self.graded):
            if a < 0:
                raise ValueError(f"negative exponent in {p}")
            if odd and a > 1:
                raise ValueError(f"odd coordinate {name!r} has exponent {a} > 1")
        return p

    def weight(self, p):
        """Total exponent count w(p) over all graded coordinates."""
        return sum(p)

    def cap_weight(self, p):
        """Exponent count over weighted coordinates; compared against the cap."""
        return sum(a for a, w in zip(p, self.weighted) if w)

    def index_degree(self, p):
        return sum(a * d for a, d in zip(p, self.graded_degrees))

    def index_names(self, p):
        return {n: a for n, a in zip(self.graded, p) if a}

    def format_index(self, p):
        parts = []
        for n, a in zip(self.graded, p):
            if a == 1:
                parts.append(n)
            elif a > 1:
                parts.append(f"{n}^{a}")
        return "*".join(parts) if parts else "1"


# ---------------------------------------------------------------------------
# combinatorics


def enumerate_multiindices(sig, degree, max_weight):
    """All multi-indices of the given degree and weight <= max_weight, sorted."""
    if max_weight < 0:
        raise ValueError("max_weight must be non-negative")
    if not all(sig.weighted):
        raise ValueError("enumeration requires every graded coordinate to carry weight")
    n = sig.n_star
    degs = sig.graded_degrees
    out = []

    def rec(i, prefix, w, d):
        if i == n:
            if d == degree:
                out.append(tuple(prefix))
            return
        top = 1 if sig.odd[i] else max_weight - w
        for a in range(0, min(top, max_weight - w) + 1):
            prefix.append(a)
            rec(i + 1, prefix, w + a, d + a * degs[i])
            prefix.pop()

    rec(0, [], 0, 0)
    out.sort()
    return out


def product_sign(sig, p, q):
    """Sign ε with ξ^p·ξ^q = ε·ξ^(p+q); 0 when an odd coordinate repeats."""
    n = 0
    seen = 0
    for a, b, odd in zip(p, q, sig.odd):
        if not odd:
            continue
        if a and b:
            return 0
        if a:
            n += seen
        if b:
            seen += 1
    return -1 if n % 2 else 1


def split_sign(sig, p, q):
    """Sign ε with ξ^(p−q)·ξ^q = ε·ξ^p."""
    if any(b > a for a, b in zip(p, q)):
        raise IndexNotDominated(f"{q} is not dominated by {p}")
    rest = tuple(a - b for a, b in zip(p, q))
    return product_sign(sig, rest, q)


def dominated(p):
    """All q <= p componentwise."""
    return itertools.product(*(range(a + 1) for a in p))


# ---------------------------------------------------------------------------
# truncated series


class GradedFunction:
    """Homogeneous formal power series truncated above ``cap``.

    ``terms`` maps multi-indices (tuples over the graded coordinates) to
    coefficient expressions in the base coordinates.
    """

    __slots__ = ("sig", "degree", "cap", "terms")

    def __init__(self, sig, degree, terms=None, cap=None, check=True):
        self.sig = sig
        self.degree = int(degree)
        self.cap = DEFAULT.weight_cap if cap is None else int(cap)
        if self.cap < 0:
            raise ValueError("weight cap must be non-negative")
        clean = {}
        for p, c in (terms or {}).items():
            c = E.as_expr(c)
            if c.is_zero:
                continue
            if check:
                p = sig.check_index(p)
                d = sig.index_degree(p)
                if d != self.degree:
                    raise DegreeError(
                        f"monomial {sig.format_index(p)} has degree {d}, function has degree {self.degree}"
                    )
            if sig.cap_weight(p) > self.cap:
                continue
            clean[p] = c
        self.terms = clean

    # constructors ------------------------------------------------------
    @classmethod
    def zero(cls, sig, degree=0, cap=None):
        return cls(sig, degree, {}, cap)

    @classmethod
    def constant(cls, sig, value, cap=None):
        return cls(sig, 0, {sig.zero_index: E.as_expr(value)}, cap)

    @classmethod
    def scalar(cls, sig, e, cap=None):
        return cls(sig, 0, {sig.zero_index: E.as_expr(e)}, cap)

    @classmethod
    def coordinate(cls, sig, name, cap=None):
        c = sig.coordinate(name)
        if c.is_base:
            return cls(sig, 0, {sig.zero_index: E.Var(name)}, cap)
        return cls(sig, c.degree, {sig.unit(name): E.ONE}, cap)

    @classmethod
    def monomial(cls, sig, p, coeff=1.0, cap=None):
        p = sig.check_index(p)
        return cls(sig, sig.index_degree(p), {p: E.as_expr(coeff)}, cap)

    # basic access ------------------------------------------------------
    def __repr__(self):
        return f"GradedFunction(degree={self.degree}, cap={self.cap}, {self.to_string()})"

    def __str__(self):
        return self.to_string()

    def __len__(self):
        return len(self.terms)

    def coefficient(self, p):
        return self.terms.get(tuple(p), E.ZERO)

    def body(self):
        return self.terms.get(self.sig.zero_index, E.ZERO)

    @property
    def is_literal_zero(self):
        return not self.terms

    def variables(self):
        out = set()
        for c in self.terms.values():
            out |= E.variables(c)
        return out

    def max_weight(self):
        return max((self.sig.cap_weight(p) for p in self.terms), default=0)

    def min_weight(self):
        return min((self.sig.cap_weight(p) for p in self.terms), default=None)

    def to_string(self):
        if not self.terms:
            return "0"
        parts = []
        for p in sorted(self.terms):
            c = self.terms[p]
            mono = self.sig.format_index(p)
            cs = E.to_string(c)
            if mono == "1":
                parts.append(f"({cs})")
            elif c.is_one:
                parts.append(mono)
            else:
                parts.append(f"({cs})*{mono}")
        return " + ".join(parts)

    # structure-preserving helpers -------------------------------------
    def _like(self, degree, terms, cap=None):
        return GradedFunction(self.sig, degree, terms, self.cap if cap is None else cap, check=False)

    def _compatible(self, other):
        if not isinstance(other, GradedFunction):
            raise TypeError(f"expected GradedFunction, got {type(other).__name__}")
        if other.sig != self.sig:
            raise SignatureMismatch(f"{self.sig!r} vs {other.sig!r}")
        return min(self.cap, other.cap)

    def with_cap(self, cap):
        return GradedFunction(self.sig, self.degree, self.terms, cap, check=False)

    def truncate(self, max_weight):
        """Drop terms of cap weight above ``max_weight`` (the cap is kept)."""
        return self._like(
            self.degree, {p: c for p, c in self.terms.items() if self.sig.cap_weight(p) <= max_weight}
        )

    def map_coefficients(self, fn):
        return self._like(self.degree, {p: fn(c) for p, c in self.terms.items()})

    def subs(self, mapping):
        return self.map_coefficients(lambda c: E.subs(c, mapping))

    # arithmetic --------------------------------------------------------
    def add(self, other):
        cap = self._compatible(other)
        if self.terms and other.terms and self.degree != other.degree:
            raise DegreeError(f"cannot add functions of degree {self.degree} and {other.degree}")
        degree = self.degree if self.terms or not other.terms else other.degree
        terms = dict(self.terms)
        for p, c in other.terms.items():
            terms[p] = E.add(terms[p], c) if p in terms else c
        return self._like(degree, terms, cap)

    def scalar_mul(self, c):
        c = E.as_expr(c)
        return self._like(self.degree, {p: E.mul(c, a) for p, a in self.terms.items()})

    def neg(self):
        return self.scalar_mul(-1.0)

    def sub(self, other):
        return self.add(other.neg())

    def mul(self, other):
        cap = self._compatible(other)
        sig = self.sig
        terms = {}
        weighted = sig.weighted
        for p, a in self.terms.items():
            wp = sum(x for x, w in zip(p, weighted) if w)
            for q, b in other.terms.items():
                sgn = product_sign(sig, p, q)
                if sgn == 0:
                    continue
                r = tuple(x + y for x, y in zip(p, q))
                if wp + sum(y for y, w in zip(q, weighted) if w) > cap:
                    continue
                term = E.mul(a, b) if sgn > 0 else E.mul(E.Const(-1.0), a, b)
                terms.setdefault(r, []).append(term)
        return self._like(
            self.degree + other.degree, {r: E.add(*ts) for r, ts in terms.items()}, cap
        )

    def pow(self, n):
        if n < 0:
            raise ValueError("negative powers require an invertible degree-zero function")
        out = GradedFunction.constant(self.sig, 1.0, self.cap)
        for _ in range(n):
            out = out.mul(self)
        return out

    def __add__(self, other):
        if not isinstance(other, GradedFunction):
            other = GradedFunction.constant(self.sig, other, self.cap)
        return self.add(other)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, GradedFunction):
            other = GradedFunction.constant(self.sig, other, self.cap)
        return self.sub(other)

    def __neg__(self):
        return self.neg()

    def __mul__(self, other):
        if isinstance(other, GradedFunction):
            return self.mul(other)
        return self.scalar_mul(other)

    def __rmul__(self, other):
        return self.scalar_mul(other)

    # numerics ----------------------------------------------------------
    def evaluate(self, point):
        """Numeric coefficients ``{p: value}`` at a base point."""
        return {p: E.evaluate(c, point) for p, c in self.terms.items()}

    def sample_names(self, other=None):
        names = set(self.sig.base) | self.variables()
        if other is not None:
            names |= other.variables()
        return sorted(names)

    def max_deviation(self, other, points, max_weight=None):
        """Largest coefficient difference over the given base points."""
        self._compatible(other)
        keys = set(self.terms) | set(other.terms)
        if max_weight is not None:
            keys = {p for p in keys if self.sig.cap_weight(p) <= max_weight}
        if not keys:
            return 0.0
        keys = sorted(keys)
        diffs = [E.add(self.coefficient(p), E.neg(other.coefficient(p))) for p in keys]
        return max_abs(diffs, points)

    def equal_sampled(self, other, points=None, tol=None, max_weight=None, config=DEFAULT):
        if points is None:
            points = base_points(self.sample_names(other), config)
        tol = config.zero_tol if tol is None else tol
        if self.terms and other.terms and self.degree != other.degree:
            return False
        return self.max_deviation(other, points, max_weight) <= tol

    def is_zero_sampled(self, points=None, tol=None, max_weight=None, config=DEFAULT):
        return self.equal_sampled(
            GradedFunction.zero(self.sig, self.degree, self.cap), points, tol, max_weight, config
        )


def max_abs(exprs, points):
    """max |e(point)| over expressions and points, via one compiled function."""
    exprs = [e for e in exprs if not e.is_zero]
    if not exprs or not points:
        return 0.0
    names = sorted(set(points[0]) | set().union(*(E.variables(e) for e in exprs)))
    f = E.compile_exprs(exprs, names)
    worst = 0.0
    for pt in points:
        vals = f(*(pt[n] for n in names))
        for v in vals:
            if not math.isfinite(v):
                raise EvaluationError(f"non-finite coefficient value at {pt}")
            worst = max(worst, abs(v))
    return worst


def equal_sampled(f, g, points=None, tol=None, config=DEFAULT):
    return f.equal_sampled(g, points, tol, config=config)


def coordinate_functions(sig, cap=None):
    return {n: GradedFunction.coordinate(sig, n, cap) for n in sig.names}


# ---------------------------------------------------------------------------
# graded expressions


def _taylor(name, f, cap):
    """g(f) for a degree-zero graded f via the Taylor series at its body."""
    sig = f.sig
    b = f.body()
    nil = GradedFunction(sig, 0, {p: c for p, c in f.terms.items() if p != sig.zero_index}, cap)
    u = E.Var("_taylor_u")
    if name == "inv":
        g = E.power(u, -1)
    else:
        g = E.func(name, u)
    out = GradedFunction.scalar(sig, E.subs(g, {"_taylor_u": b}), cap)
    term = GradedFunction.constant(sig, 1.0, cap)
    deriv = g
    k = 0
    limit = cap + sig.n_star + 1
    while True:
        k += 1
        term = term.mul(nil)
        if term.is_literal_zero or k > limit:
            break
        deriv = E.diff(deriv, "_taylor_u")
        coeff = E.mul(E.Const(1.0 / math.factorial(k)), E.subs(deriv, {"_taylor_u": b}))
        out = out.add(term.scalar_mul(coeff))
    return out


def graded_from_expr(sig, e, cap=None, where=None):
    """Evaluate an expression tree over the graded algebra of ``sig``.

    Graded coordinates become monomials, products keep their written order
    (so Koszul signs follow the text) and functions of degree-zero graded
    arguments expand as Taylor series.
    """
    cap = DEFAULT.weight_cap if cap is None else cap
    suffix = f" in {where}" if where else ""

    def rec(node):
        if isinstance(node, E.Const):
            return GradedFunction.constant(sig, node.value, cap)
        if isinstance(node, E.Var):
            if node.name not in sig:
                raise ValidationError(f"undeclared coordinate {node.name!r}{suffix}")
            return GradedFunction.coordinate(sig, node.name, cap)
        if isinstance(node, E.Sum):
            out = None
            for t in node.terms:
                v = rec(t)
                if out is None:
                    out = v
                elif out.terms and v.terms and out.degree != v.degree:
                    raise ValidationError(
                        f"inhomogeneous sum: degrees {out.degree} and {v.degree}{suffix}"
                    )
                else:
                    out = out.add(v)
            return out
        if isinstance(node, E.Prod):
            out = None
            for fct in node.factors:
                v = rec(fct)
                if out is None:
                    out = v
                    continue
                _check_odd_square(out, v, suffix)
                out = out.mul(v)
            return out
        if isinstance(node, E.Pow):
            base = rec(node.base)
            n = node.exponent
            if base.degree % 2 != 0 and base.terms and n >= 2:
                raise ValidationError(f"odd element raised to power {n}{suffix}")
            if n >= 0:
                return base.pow(n)
            if base.degree != 0:
                raise ValidationError(f"negative power of a degree-{base.degree} element{suffix}")
            return _taylor("inv", base, cap).pow(-n)
        if isinstance(node, E.Func):
            arg = rec(node.arg)
            if arg.terms and arg.degree != 0:
                raise ValidationError(f"{node.name} of a degree-{arg.degree} element{suffix}")
            return _taylor(node.name, arg, cap)
        raise TypeError(node)

    return rec(e)


def _check_odd_square(a, b, suffix):
    if len(a.terms) == 1 and len(b.terms) == 1:
        (p,), (q,) = a.terms, b.terms
        for x, y, odd, name in zip(p, q, a.sig.odd, a.sig.graded):
            if odd and x and y:
                raise ValidationError(f"odd coordinate {name!r} squared{suffix}")


def parse_graded(sig, text, cap=None, degree=None, where=None):
    """Parse text such as ``"x^2*xi1*xi2 + exp(x)"`` into a GradedFunction."""
    f = graded_from_expr(sig, E.parse(text), cap, where)
    if degree is not None:
        if f.terms and f.degree != degree:
            suffix = f" in {where}" if where else ""
            raise ValidationError(f"expected degree {degree}, got {f.degree}{suffix}")
        f = GradedFunction(sig, degree, f.terms, f.cap, check=False)
    return f


def embed(f, target):
    """View ``f`` as a function on a signature containing all of ``f.sig``."""
    src = f.sig
    if target == src:
        return f
    pos = []
    for name in src.graded:
        c = target.coordinate(name)
        if c.degree != src.degree(name):
            raise SignatureMismatch(f"coordinate {name!r} changes degree")
        pos.append(target.graded_position(name))
    if pos != sorted(pos):
        raise SignatureMismatch("embedding must preserve the order of graded coordinates")
    for name in src.base:
        target.coordinate(name)
    terms = {}
    for p, c in f.terms.items():
        q = [0] * target.n_star
        for a, i in zip(p, pos):
            q[i] = a
        terms[tuple(q)] = c
    return GradedFunction(target, f.degree, terms, f.cap, check=False)


def restrict(f, target):
    """Inverse of :func:`embed`: drop coordinates absent from ``target``.

    Terms involving a dropped graded coordinate must not occur.
    """
    src = f.sig
    keep = [i for i, n in enumerate(src.graded) if n in target]
    drop = [i for i, n in enumerate(src.graded) if n not in target]
    terms = {}
    for p, c in f.terms.items():
        if any(p[i] for i in drop):
            raise ValueError("function depends on a coordinate being dropped")
        terms[tuple(p[i] for i in keep)] = c
    return GradedFunction(target, f.degree, terms, f.cap, check=False)
