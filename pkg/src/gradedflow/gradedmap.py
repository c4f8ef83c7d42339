"""Graded maps as pullback data.

A map φ from a source domain to a target domain is stored as the pullbacks
φ*(z) of the target coordinates.  The pullback of a general target function
``f = sum_r f_r ξ^r`` is

    φ*(f) = sum_r  φ̄*(f_r) · ξ_*^r,
    φ̄*(f_r) = sum_I (1/I!) (∂_I f_r ∘ φ₀) · x̄_*^I,

where ``x̄_*`` is the nilpotent part of the pulled-back base coordinates and
``ξ_*^r`` is the product of pulled-back graded coordinates in canonical
order.  Expanding the product coefficientwise reproduces the Koszul-signed
double sum over ``q <= p``; the Taylor sum stops once ``x̄_*^I`` vanishes
below the weight cap.
"""

from __future__ import annotations

import math

from . import expr as E
from .config import DEFAULT
from .errors import (
    DegreeError,
    DegreeMismatch,
    NonzeroValueForGradedTime,
    SignatureMismatch,
    ValidationError,
)
from .graded import GradedFunction, Coordinate, embed, parse_graded
from .sampling import base_points
from .vectorfield import apply


class GradedMap:
    """Map ``source -> target`` given by pullbacks of the target coordinates."""

    def __init__(self, source, target, pullbacks, cap=None):
        self.source = source
        self.target = target
        self.cap = DEFAULT.weight_cap if cap is None else cap
        pb = {}
        missing = [n for n in target.names if n not in pullbacks]
        if missing:
            raise ValidationError(f"no pullback given for target coordinate(s) {missing}")
        for name, f in pullbacks.items():
            c = target.coordinate(name)
            if f.sig != source:
                raise SignatureMismatch(f"pullback of {name!r} is not a function on the source")
            if f.terms and f.degree != c.degree:
                raise DegreeError(f"pullback of {name!r} has degree {f.degree}, expected {c.degree}")
            pb[name] = GradedFunction(source, c.degree, f.terms, min(self.cap, f.cap), check=False)
        self.pullbacks = pb
        self._cache = {}

    @classmethod
    def from_strings(cls, source, target, exprs, cap=None):
        cap = DEFAULT.weight_cap if cap is None else cap
        pb = {}
        for name, text in exprs.items():
            deg = target.degree(name)
            pb[name] = parse_graded(source, text, cap, deg, where=f"pullback of {name!r}")
        return cls(source, target, pb, cap)

    def __repr__(self):
        body = ", ".join(f"{n} <- {f}" for n, f in self.pullbacks.items())
        return f"GradedMap({body})"

    def underlying(self):
        """Bodies of the pulled-back base coordinates."""
        return {n: self.pullbacks[n].body() for n in self.target.base}

    def with_cap(self, cap):
        return GradedMap(self.source, self.target, {n: f.with_cap(cap) for n, f in self.pullbacks.items()}, cap)

    def weight_drop(self):
        """1 if some pulled-back graded coordinate has a weight-zero term."""
        for name in self.target.graded:
            f = self.pullbacks[name]
            if f.terms and f.min_weight() == 0:
                return 1
        return 0

    # pullback ----------------------------------------------------------
    def _parts(self):
        if "parts" not in self._cache:
            bodies = []
            nil = []
            for name in self.target.base:
                f = self.pullbacks[name]
                b = f.body()
                bodies.append(b)
                rest = {p: c for p, c in f.terms.items() if p != self.source.zero_index}
                nil.append(GradedFunction(self.source, 0, rest, self.cap, check=False))
            self._cache["parts"] = (bodies, nil, {}, {})
        return self._cache["parts"]

    def _nil_power(self, I):
        bodies, nil, powers, _ = self._parts()
        if I in powers:
            return powers[I]
        if not any(I):
            out = GradedFunction.constant(self.source, 1.0, self.cap)
        else:
            j = max(i for i, a in enumerate(I) if a)
            prev = I[:j] + (I[j] - 1,) + I[j + 1 :]
            out = self._nil_power(prev).mul(nil[j])
        powers[I] = out
        return out

    def _graded_power(self, r):
        _, _, _, gp = self._parts()
        if r in gp:
            return gp[r]
        if not any(r):
            out = GradedFunction.constant(self.source, 1.0, self.cap)
        else:
            j = max(i for i, a in enumerate(r) if a)
            prev = r[:j] + (r[j] - 1,) + r[j + 1 :]
            out = self._graded_power(prev).mul(self.pullbacks[self.target.graded[j]])
        gp[r] = out
        return out

    def _taylor_indices(self):
        """Base multi-indices I whose x̄_*^I survives the cap, by total order."""
        if "taylor" in self._cache:
            return self._cache["taylor"]
        n0 = self.target.n0
        out = [(0,) * n0]
        frontier = [(0,) * n0]
        limit = self.cap + 2 * self.source.n_star + 1
        order = 0
        while frontier:
            order += 1
            nxt = set()
            for I in frontier:
                for i in range(n0):
                    J = I[:i] + (I[i] + 1,) + I[i + 1 :]
                    if J in nxt:
                        continue
                    if not self._nil_power(J).is_literal_zero:
                        nxt.add(J)
            if nxt and order > limit:
                raise ValueError("Taylor expansion of the pullback does not terminate under the cap")
            frontier = sorted(nxt)
            out.extend(frontier)
        self._cache["taylor"] = out
        return out

    def pullback_scalar(self, e):
        """φ̄* of a coefficient expression over the target base coordinates."""
        bodies = self._parts()[0]
        names = list(self.target.base)
        sub = dict(zip(names, bodies))
        out = GradedFunction.zero(self.source, 0, self.cap)
        for I in self._taylor_indices():
            d = E.diff_multi(e, names, I)
            if d.is_zero:
                continue
            fact = math.prod(math.factorial(a) for a in I)
            coeff = E.subs(d, sub)
            if fact != 1:
                coeff = E.mul(E.Const(1.0 / fact), coeff)
            out = out.add(self._nil_power(I).scalar_mul(coeff))
        return out

    def pullback(self, f):
        if f.sig != self.target:
            raise SignatureMismatch(f"function lives on {f.sig!r}, map target is {self.target!r}")
        out = GradedFunction.zero(self.source, f.degree, min(self.cap, f.cap))
        for r, fr in f.terms.items():
            out = out.add(self.pullback_scalar(fr).mul(self._graded_power(r)))
        return GradedFunction(self.source, f.degree, out.terms, out.cap, check=False)

    __call__ = pullback


def pullback(phi, f):
    return phi.pullback(f)


def identity(sig, cap=None):
    return GradedMap(sig, sig, {n: GradedFunction.coordinate(sig, n, cap) for n in sig.names}, cap)


def compose(psi, phi):
    """ψ∘φ, with pullbacks φ*(ψ*(z))."""
    if phi.target != psi.source:
        raise SignatureMismatch("target of the inner map differs from the source of the outer map")
    pb = {n: phi.pullback(f) for n, f in psi.pullbacks.items()}
    return GradedMap(phi.source, psi.target, pb, min(phi.cap, psi.cap))


def product_signature(sig, *extra):
    """``sig`` with further coordinates appended, given as Coordinates or (name, degree)."""
    coords = [c if isinstance(c, Coordinate) else Coordinate(*c) for c in extra]
    return sig.extend(*coords)


def projection(product, factor, cap=None):
    """First-factor projection p₁: product -> factor."""
    pb = {n: GradedFunction.coordinate(product, n, cap) for n in factor.names}
    for n in factor.names:
        if product.degree(n) != factor.degree(n):
            raise SignatureMismatch(f"coordinate {n!r} changes degree")
    return GradedMap(product, factor, pb, cap)


def section_at(product, factor, time, t0=0.0, cap=None):
    """Section factor -> product setting the time coordinate to t0."""
    c = product.coordinate(time)
    if c.degree != 0 and t0 != 0:
        raise NonzeroValueForGradedTime(f"graded time {time!r} can only be set to 0, got {t0!r}")
    pb = {}
    for n in product.names:
        if n == time:
            if c.degree == 0:
                pb[n] = GradedFunction.constant(factor, float(t0), cap)
            else:
                pb[n] = GradedFunction.zero(factor, c.degree, cap)
        else:
            pb[n] = GradedFunction.coordinate(factor, n, cap)
    return GradedMap(factor, product, pb, cap)


def times_identity(phi, coords, cap=None):
    """φ × 1 : source × R -> target × R for appended coordinates ``coords``."""
    src = product_signature(phi.source, *coords)
    tgt = product_signature(phi.target, *coords)
    pb = {n: embed(f, src) for n, f in phi.pullbacks.items()}
    for c in coords:
        name = c.name if isinstance(c, Coordinate) else c[0]
        pb[name] = GradedFunction.coordinate(src, name, cap)
    return GradedMap(src, tgt, pb, phi.cap if cap is None else cap)


def related_deviation(phi, X, Y, points=None, config=DEFAULT):
    """Worst per-coordinate deviation of X(φ*z) from φ*(Y z), plus the coordinate."""
    if X.degree != Y.degree:
        raise DegreeMismatch(f"fields have degrees {X.degree} and {Y.degree}")
    if X.sig != phi.source or Y.sig != phi.target:
        raise SignatureMismatch("fields do not live on the source and target of the map")
    max_weight = min(phi.cap, X.cap) - X.weight_drop()
    worst, where = 0.0, None
    for name in phi.target.names:
        lhs = apply(X, phi.pullbacks[name])
        rhs = phi.pullback(Y.components[name])
        pts = points if points is not None else base_points(lhs.sample_names(rhs), config)
        d = lhs.max_deviation(rhs, pts, max_weight)
        if where is None or d > worst:
            worst, where = d, name
    return worst, where


def related(phi, X, Y, points=None, config=DEFAULT):
    """True iff X is φ-related to Y: X∘φ* = φ*∘Y on all target coordinates."""
    worst, _ = related_deviation(phi, X, Y, points, config)
    return worst <= config.zero_tol
