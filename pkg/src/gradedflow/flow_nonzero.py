"""Closed-form flows of vector fields of nonzero degree k.

The flow lives on M × R[-k] with a graded time coordinate τ of degree -k.
For odd k (and homological X) it is ``θ*(f) = f + τ X(f)``; for even k it is
the exponential series ``θ*(f) = Σ_ℓ τ^ℓ X^ℓ(f) / ℓ!``, which terminates
under the weight cap because X^ℓ(z) has degree |z| + ℓk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import expr as E
from .config import DEFAULT
from .errors import DegreeError, NotHomological
from .graded import Coordinate, GradedFunction, embed, restrict
from .gradedmap import GradedMap
from .vectorfield import apply, is_homological, partial


def time_coordinate(k, name="tau"):
    """Weightless time coordinate of degree -k."""
    return Coordinate(name, -k, weighted=False)


@dataclass
class NonzeroFlow:
    X: object
    tau: str
    sig: object  # M × R[-k]
    powers: dict  # coordinate -> [X^ℓ(z) for ℓ = 0..L]
    power_bound: int
    cap: int
    map: GradedMap = None

    @property
    def degree(self):
        return self.X.degree

    @property
    def base_sig(self):
        return self.X.sig

    @property
    def max_power(self):
        return max((len(v) - 1 for v in self.powers.values()), default=0)

    @property
    def pullbacks(self):
        return self.map.pullbacks

    @property
    def reliable_weight(self):
        """Weight up to which truncation cannot disturb comparisons."""
        drop = self.X.weight_drop()
        if self.degree % 2:
            return max(0, self.cap - drop)
        return max(0, self.cap - max(1, self.max_power) * drop)

    def pullback(self, f):
        return self.map.pullback(f)

    def on(self, product, tau):
        """The stored flow map rewritten on ``product`` with time coordinate ``tau``.

        ``product`` must contain M and ``tau`` (of the flow's time degree), with
        the graded coordinates of M preceding ``tau``.
        """
        renamed = self.sig.without(self.tau).extend(Coordinate(tau, -self.degree, weighted=False))
        pb = {}
        for name, f in self.map.pullbacks.items():
            g = GradedFunction(renamed, f.degree, f.terms, f.cap, check=False)
            pb[name] = embed(g, product)
        return GradedMap(product, self.base_sig, pb, self.cap)

    def to_json(self):
        """``{coordinate: [{tau_power, multiindex, coefficient_expression}]}``."""
        sig = self.sig
        pos = sig.graded_position(self.tau)
        names = [n for n in sig.graded if n != self.tau]
        out = {}
        for zname in self.base_sig.names:
            rows = []
            f = self.map.pullbacks[zname]
            for p in sorted(f.terms, key=lambda p: (p[pos], p)):
                mi = {n: a for n, a in zip(sig.graded, p) if n != self.tau}
                rows.append(
                    {
                        "tau_power": p[pos],
                        "multiindex": {n: mi[n] for n in names},
                        "coefficient_expression": E.to_string(f.terms[p]),
                    }
                )
            out[zname] = rows
        return out


def _power_bound(sig, k, degree, cap):
    degs = [0] + list(sig.graded_degrees)
    lo, hi = cap * min(degs), cap * max(degs)
    best = -1
    for ell in range(0, (hi - lo) // abs(k) + 2):
        d = degree + ell * k
        if lo <= d <= hi:
            best = ell
    return max(best, 0)


def series_map(flow, product, tau):
    """Build θ* on ``product`` (M plus the time ``tau``) from the stored powers."""
    odd = flow.degree % 2 != 0
    t = GradedFunction.coordinate(product, tau, flow.cap)
    pb = {}
    for name, pw in flow.powers.items():
        out = GradedFunction.zero(product, flow.base_sig.degree(name), flow.cap)
        tpow = GradedFunction.constant(product, 1.0, flow.cap)
        for ell, g in enumerate(pw):
            if ell:
                tpow = tpow.mul(t)
            if g.is_literal_zero:
                continue
            term = tpow.mul(embed(g, product))
            if not odd and ell > 1:
                term = term.scalar_mul(1.0 / math.factorial(ell))
            out = out.add(term)
        pb[name] = out
    return GradedMap(product, flow.base_sig, pb, flow.cap)


def flow_odd(X, tau="tau", config=DEFAULT):
    """θ*(z) = z + τ·X(z) for an odd homological field."""
    k = X.degree
    if k % 2 == 0:
        raise DegreeError(f"flow_odd needs an odd field, got degree {k}")
    if not is_homological(X, config):
        raise NotHomological("[X, X] does not vanish; an odd field without [X, X] = 0 has no flow")
    sig = X.sig
    product = sig.extend(time_coordinate(k, tau))
    powers = {}
    for c in sig.coords:
        z = GradedFunction.coordinate(sig, c.name, X.cap)
        xz = X.components[c.name]
        powers[c.name] = [z] if xz.is_literal_zero else [z, xz]
    flow = NonzeroFlow(X, tau, product, powers, 1, X.cap)
    flow.map = series_map(flow, product, tau)
    return flow


def flow_even(X, cap=None, tau="tau"):
    """Exponential series flow of an even nonzero-degree field, up to the weight cap."""
    k = X.degree
    if k == 0 or k % 2:
        raise DegreeError(f"flow_even needs an even nonzero degree, got {k}")
    cap = X.cap if cap is None else cap
    X = X.with_cap(cap) if cap != X.cap else X
    sig = X.sig
    product = sig.extend(time_coordinate(k, tau))
    powers = {}
    bound = 0
    for c in sig.coords:
        b = _power_bound(sig, k, c.degree, cap)
        bound = max(bound, b)
        g = GradedFunction.coordinate(sig, c.name, cap)
        seq = [g]
        for _ in range(b):
            g = apply(X, g)
            seq.append(g)
        while len(seq) > 1 and seq[-1].is_literal_zero:
            seq.pop()
        powers[c.name] = seq
    flow = NonzeroFlow(X, tau, product, powers, bound, cap)
    flow.map = series_map(flow, product, tau)
    return flow


def flow_nonzero(X, config=DEFAULT, tau="tau"):
    if X.degree % 2:
        return flow_odd(X, tau, config)
    return flow_even(X, tau=tau)


def component_function(flow, f, ell):
    """h_ℓ = s₀*∘(1⊗∂_τ)^ℓ applied to θ*(f), as a function on M."""
    if ell < 0:
        raise ValueError("component index must be non-negative")
    h = flow.pullback(f)
    for _ in range(ell):
        h = partial(flow.tau, h)
    pos = flow.sig.graded_position(flow.tau)
    h0 = GradedFunction(
        flow.sig, h.degree, {p: c for p, c in h.terms.items() if p[pos] == 0}, h.cap, check=False
    )
    return restrict(h0, flow.base_sig)
