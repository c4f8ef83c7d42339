"""Graded derivations stored by their components.

A vector field of degree k on a signature assigns to every coordinate z a
component X(z) of degree k + |z|.  It acts as ``X(f) = sum X(z) * d_z f`` with
left partial derivatives.
"""

from __future__ import annotations

from .config import DEFAULT
from . import expr as E
from .errors import DegreeError, DegreeMismatch, SignatureMismatch
from .graded import GradedFunction, embed, parse_graded


def partial(name, f):
    """Left partial derivative of ``f`` by the coordinate ``name``."""
    sig = f.sig
    c = sig.coordinate(name)
    if c.is_base:
        return f.map_coefficients(lambda e: E.diff(e, name))
    mu = sig.graded_position(name)
    odd_mu = c.is_odd
    terms = {}
    for p, coeff in f.terms.items():
        a = p[mu]
        if not a:
            continue
        sign = 1
        if odd_mu:
            before = sum(p[nu] for nu in range(mu) if sig.odd[nu])
            sign = -1 if before % 2 else 1
        q = p[:mu] + (a - 1,) + p[mu + 1 :]
        factor = sign * a
        terms[q] = coeff if factor == 1 else E.mul(E.Const(float(factor)), coeff)
    return GradedFunction(sig, f.degree - c.degree, terms, f.cap, check=False)


class VectorField:
    """Vector field of a fixed degree, one component per coordinate."""

    def __init__(self, sig, degree, components=None, cap=None):
        self.sig = sig
        self.degree = int(degree)
        cap = DEFAULT.weight_cap if cap is None else cap
        self.cap = cap
        comps = {}
        given = dict(components or {})
        for name in given:
            sig.coordinate(name)
        for c in sig.coords:
            want = self.degree + c.degree
            f = given.get(c.name)
            if f is None:
                f = GradedFunction.zero(sig, want, cap)
            else:
                if f.sig != sig:
                    raise SignatureMismatch(f"component {c.name!r} lives on another signature")
                if f.terms and f.degree != want:
                    raise DegreeError(
                        f"component {c.name!r} has degree {f.degree}; a degree-{self.degree} "
                        f"field needs {want}"
                    )
                f = GradedFunction(sig, want, f.terms, min(cap, f.cap), check=False)
            comps[c.name] = f
        self.components = comps

    @classmethod
    def from_strings(cls, sig, exprs, degree=None, cap=None):
        """Build from ``{coordinate: graded expression text}``.

        The degree is inferred from the first nonzero component if omitted.
        """
        cap = DEFAULT.weight_cap if cap is None else cap
        comps = {}
        for name, text in exprs.items():
            want = None if degree is None else degree + sig.degree(name)
            comps[name] = parse_graded(sig, text, cap, want, where=f"component {name!r}")
        if degree is None:
            degree = 0
            for name, f in comps.items():
                if f.terms:
                    degree = f.degree - sig.degree(name)
                    break
        return cls(sig, degree, comps, cap)

    @classmethod
    def zero(cls, sig, degree=0, cap=None):
        return cls(sig, degree, {}, cap)

    @classmethod
    def euler(cls, sig, cap=None):
        """The field with components |z|·z."""
        comps = {}
        for c in sig.coords:
            if c.degree:
                comps[c.name] = GradedFunction.coordinate(sig, c.name, cap).scalar_mul(float(c.degree))
        return cls(sig, 0, comps, cap)

    @classmethod
    def coordinate_field(cls, sig, name, cap=None):
        """The partial derivative field d/dz for a single coordinate z."""
        return cls(sig, -sig.degree(name), {name: GradedFunction.constant(sig, 1.0, cap)}, cap)

    def __repr__(self):
        comps = ", ".join(f"{n}: {f}" for n, f in self.components.items() if f.terms)
        return f"VectorField(degree={self.degree}, {{{comps}}})"

    def __getitem__(self, name):
        return self.components[name]

    def nonzero_components(self):
        return {n: f for n, f in self.components.items() if f.terms}

    # algebra -----------------------------------------------------------
    def _check(self, other):
        if other.sig != self.sig:
            raise SignatureMismatch(f"{self.sig!r} vs {other.sig!r}")

    def add(self, other):
        self._check(other)
        if self.degree != other.degree:
            raise DegreeMismatch(f"cannot add fields of degree {self.degree} and {other.degree}")
        comps = {n: self.components[n].add(other.components[n]) for n in self.sig.names}
        return VectorField(self.sig, self.degree, comps, min(self.cap, other.cap))

    def scalar_mul(self, c):
        comps = {n: f.scalar_mul(c) for n, f in self.components.items()}
        return VectorField(self.sig, self.degree, comps, self.cap)

    def __add__(self, other):
        return self.add(other)

    def __sub__(self, other):
        return self.add(other.scalar_mul(-1.0))

    def __rmul__(self, c):
        return self.scalar_mul(c)

    def __call__(self, f):
        return apply(self, f)

    def with_cap(self, cap):
        return VectorField(
            self.sig, self.degree, {n: f.with_cap(cap) for n, f in self.components.items()}, cap
        )

    def weight_drop(self):
        """How far the field can lower weight: 1 if a graded component has a body."""
        for name in self.sig.graded:
            f = self.components[name]
            if f.terms and f.min_weight() == 0:
                return 1
        return 0

    def is_zero(self, config=DEFAULT):
        return all(f.is_zero_sampled(config=config) for f in self.components.values())

    def max_deviation(self, other, points):
        self._check(other)
        return max(self.components[n].max_deviation(other.components[n], points) for n in self.sig.names)

    def extended(self, target):
        """X⊗1: the same components viewed on a product signature."""
        comps = {n: embed(f, target) for n, f in self.components.items()}
        return VectorField(target, self.degree, comps, self.cap)


def apply(X, f):
    """X(f) = sum over coordinates of X(z)·d_z f."""
    if X.sig != f.sig:
        raise SignatureMismatch(f"{X.sig!r} vs {f.sig!r}")
    out = GradedFunction.zero(f.sig, X.degree + f.degree, min(X.cap, f.cap))
    for name, comp in X.components.items():
        if not comp.terms:
            continue
        d = partial(name, f)
        if not d.terms:
            continue
        out = out.add(comp.mul(d))
    return GradedFunction(f.sig, X.degree + f.degree, out.terms, out.cap, check=False)


def apply_power(X, f, n):
    for _ in range(n):
        f = apply(X, f)
    return f


def bracket(X, Y):
    """Graded commutator [X, Y] computed on components."""
    X._check(Y)
    sign = -1.0 if (X.degree * Y.degree) % 2 else 1.0
    comps = {}
    for name in X.sig.names:
        a = apply(X, Y.components[name])
        b = apply(Y, X.components[name])
        comps[name] = a.sub(b) if sign > 0 else a.add(b)
    return VectorField(X.sig, X.degree + Y.degree, comps, min(X.cap, Y.cap))


def is_homological(X, config=DEFAULT):
    if X.degree % 2 == 0:
        raise DegreeError("homologicity is only meaningful for odd fields")
    return bracket(X, X).is_zero(config)


def underlying_vector_field(X):
    """Bodies of the base components of a degree-zero field, keyed by coordinate."""
    if X.degree != 0:
        raise DegreeError(f"underlying field needs degree 0, got {X.degree}")
    return {name: X.components[name].body() for name in X.sig.base}
