"""Numeric jets: graded coefficients at a base point, with base sensitivities.

A jet of degree d is a real vector over the basis ``(p, J)`` where ``p`` is a
graded multi-index of degree d and weight <= W, and ``J`` is an exponent
vector over n₀ infinitesimal base displacements δ with ``|J| <= K``.  The
entry at ``(p, J)`` is the coefficient of ``ξ^p δ^J``; with K = 0 a jet is
just the coefficient list of a function at one base point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import expr as E
from .graded import enumerate_multiindices, product_sign


def _delta_indices(n, order):
    out = [J for J in itertools.product(range(order + 1), repeat=n) if sum(J) <= order]
    out.sort(key=lambda J: (sum(J), tuple(-a for a in J)))
    return out


@dataclass
class Jet:
    degree: int
    coeffs: np.ndarray

    def copy(self):
        return Jet(self.degree, self.coeffs.copy())


class JetAlgebra:
    """Truncated product structure on jets over a graded signature."""

    def __init__(self, sig, cap, order=0):
        if not all(sig.weighted):
            raise ValueError("jets need every graded coordinate to carry weight")
        self.sig = sig
        self.cap = int(cap)
        self.order = int(order)
        self.n0 = sig.n0
        self.deltas = _delta_indices(self.n0, self.order)
        self._delta_pos = {J: i for i, J in enumerate(self.deltas)}
        degs = set()
        for p in itertools.product(
            *[range(2) if odd else range(self.cap + 1) for odd in sig.odd]
        ):
            if sum(p) <= self.cap:
                degs.add(sig.index_degree(p))
        self.degrees = sorted(degs)
        self._bases = {}
        self._pos = {}
        self._tables = {}
        self._gpartial = {}
        self._dpartial = {}

    # bases -------------------------------------------------------------
    def basis(self, degree):
        if degree not in self._bases:
            ps = enumerate_multiindices(self.sig, degree, self.cap) if degree in self.degrees else []
            ps.sort(key=lambda p: (sum(p), p))
            basis = [(p, J) for p in ps for J in self.deltas]
            self._bases[degree] = basis
            self._pos[degree] = {b: i for i, b in enumerate(basis)}
        return self._bases[degree]

    def size(self, degree):
        return len(self.basis(degree))

    def position(self, degree, p, J=None):
        self.basis(degree)
        J = (0,) * self.n0 if J is None else tuple(J)
        return self._pos[degree].get((tuple(p), J))

    def weights(self, degree):
        return np.array([sum(p) for p, _ in self.basis(degree)], dtype=int)

    def delta_orders(self, degree):
        return np.array([sum(J) for _, J in self.basis(degree)], dtype=int)

    def zero(self, degree):
        return Jet(degree, np.zeros(self.size(degree)))

    def one(self):
        j = self.zero(0)
        j.coeffs[0] = 1.0
        return j

    def constant(self, value):
        j = self.zero(0)
        j.coeffs[0] = float(value)
        return j

    def coordinate(self, name, x0=None):
        """Jet of a coordinate function: x0 + δ for base, ξ for graded."""
        sig = self.sig
        c = sig.coordinate(name)
        if c.is_base:
            i = sig.base.index(name)
            j = self.zero(0)
            j.coeffs[0] = 0.0 if x0 is None else float(x0[i])
            if self.order:
                J = tuple(1 if k == i else 0 for k in range(self.n0))
                j.coeffs[self.position(0, sig.zero_index, J)] = 1.0
            return j
        j = self.zero(c.degree)
        j.coeffs[self.position(c.degree, sig.unit(name))] = 1.0
        return j

    # products ----------------------------------------------------------
    def _table(self, da, db):
        key = (da, db)
        if key not in self._tables:
            A, B, C = self.basis(da), self.basis(db), self.basis(da + db)
            cpos = self._pos[da + db]
            ia, ib, ic, sg = [], [], [], []
            for i, (p, J) in enumerate(A):
                for j, (q, L) in enumerate(B):
                    if sum(J) + sum(L) > self.order or sum(p) + sum(q) > self.cap:
                        continue
                    s = product_sign(self.sig, p, q)
                    if s == 0:
                        continue
                    r = tuple(a + b for a, b in zip(p, q))
                    M = tuple(a + b for a, b in zip(J, L))
                    k = cpos.get((r, M))
                    if k is None:
                        continue
                    ia.append(i)
                    ib.append(j)
                    ic.append(k)
                    sg.append(float(s))
            self._tables[key] = (
                np.array(ia, dtype=np.intp),
                np.array(ib, dtype=np.intp),
                np.array(ic, dtype=np.intp),
                np.array(sg),
                len(C),
            )
        return self._tables[key]

    def mul(self, a, b):
        ia, ib, ic, sg, n = self._table(a.degree, b.degree)
        if n == 0:
            return Jet(a.degree + b.degree, np.zeros(0))
        vals = sg * a.coeffs[ia] * b.coeffs[ib]
        return Jet(a.degree + b.degree, np.bincount(ic, weights=vals, minlength=n))

    def add(self, a, b):
        if a.degree != b.degree:
            raise ValueError("degree mismatch in jet addition")
        return Jet(a.degree, a.coeffs + b.coeffs)

    def scale(self, a, c):
        return Jet(a.degree, a.coeffs * c)

    # derivatives -------------------------------------------------------
    def graded_partial(self, name, a):
        sig = self.sig
        c = sig.coordinate(name)
        key = (name, a.degree)
        if key not in self._gpartial:
            mu = sig.graded_position(name)
            src = self.basis(a.degree)
            dst_deg = a.degree - c.degree
            self.basis(dst_deg)
            dpos = self._pos[dst_deg]
            i_s, i_d, f = [], [], []
            for i, (p, J) in enumerate(src):
                if not p[mu]:
                    continue
                sign = 1
                if c.is_odd:
                    before = sum(p[nu] for nu in range(mu) if sig.odd[nu])
                    sign = -1 if before % 2 else 1
                q = p[:mu] + (p[mu] - 1,) + p[mu + 1 :]
                k = dpos.get((q, J))
                if k is None:
                    continue
                i_s.append(i)
                i_d.append(k)
                f.append(sign * p[mu])
            self._gpartial[key] = (np.array(i_s, dtype=np.intp), np.array(i_d, dtype=np.intp), np.array(f, float), dst_deg)
        i_s, i_d, f, dst_deg = self._gpartial[key]
        out = np.zeros(self.size(dst_deg))
        out[i_d] = a.coeffs[i_s] * f
        return Jet(dst_deg, out)

    def delta_partial(self, i, a):
        """Derivative in the i-th base displacement (lowers the δ order by one)."""
        key = (i, a.degree)
        if key not in self._dpartial:
            src = self.basis(a.degree)
            pos = self._pos[a.degree]
            i_s, i_d, f = [], [], []
            for k, (p, J) in enumerate(src):
                if not J[i]:
                    continue
                L = J[:i] + (J[i] - 1,) + J[i + 1 :]
                i_s.append(k)
                i_d.append(pos[(p, L)])
                f.append(float(J[i]))
            self._dpartial[key] = (np.array(i_s, dtype=np.intp), np.array(i_d, dtype=np.intp), np.array(f))
        i_s, i_d, f = self._dpartial[key]
        out = np.zeros_like(a.coeffs)
        out[i_d] = a.coeffs[i_s] * f
        return Jet(a.degree, out)

    def at_base(self, a):
        """Entries with J = 0, as ``{p: value}``."""
        z = (0,) * self.n0
        return {p: float(v) for (p, J), v in zip(self.basis(a.degree), a.coeffs) if J == z}

    def truncate_delta(self, a, order):
        mask = self.delta_orders(a.degree) <= order
        return Jet(a.degree, np.where(mask, a.coeffs, 0.0))

    # conversion --------------------------------------------------------
    def from_function(self, f, x0):
        """Jet of a symbolic function at x0: Taylor expansion of coefficients in δ."""
        if f.sig != self.sig:
            raise ValueError("function lives on a different signature")
        out = self.zero(f.degree)
        names = list(self.sig.base)
        exprs, slots = [], []
        for p, c in f.terms.items():
            if sum(p) > self.cap:
                continue
            for J in self.deltas:
                d = E.diff_multi(c, names, J)
                if d.is_zero:
                    continue
                fact = math.prod(math.factorial(a) for a in J)
                exprs.append(d if fact == 1 else E.mul(E.Const(1.0 / fact), d))
                slots.append(self.position(f.degree, p, J))
        if exprs:
            vals = E.compile_exprs(exprs, names)(*map(float, x0))
            out.coeffs[np.array(slots, dtype=np.intp)] = vals
        return out


class PullbackEvaluator:
    """Numeric pullback of fixed target functions through a jet-valued map.

    The map is given by one jet per target coordinate (base coordinates as
    degree-0 jets, graded coordinates as jets of their degree).  For each
    function ``g = sum_r g_r ξ^r`` it forms ``sum_r (sum_I ∂_I g_r(c) n^I / I!)
    · ξ_*^r`` where ``c`` is the constant part of the base jets and ``n`` the
    remainder.
    """

    def __init__(self, alg, target, functions):
        self.alg = alg
        self.target = target
        self.functions = list(functions)
        names = list(target.base)
        self.names = names
        # n^I vanishes once |I| exceeds this: base coordinate jets have no
        # weight-1 part, so each factor carries weight >= 2 or a δ.
        self.max_order = alg.cap // 2 + alg.order
        self.orders = _delta_indices(len(names), self.max_order)
        exprs = []
        plan = []
        for g in self.functions:
            if g.sig != target:
                raise ValueError("function lives on a different signature")
            items = []
            for r, c in g.terms.items():
                if sum(r) > alg.cap:
                    continue
                for I in self.orders:
                    d = E.diff_multi(c, names, I)
                    if d.is_zero:
                        continue
                    fact = math.prod(math.factorial(a) for a in I)
                    exprs.append(d if fact == 1 else E.mul(E.Const(1.0 / fact), d))
                    items.append((r, I, len(exprs) - 1))
            plan.append((g.degree, items))
        self.plan = plan
        self._fn = E.compile_exprs(exprs, names) if exprs else None

    def __call__(self, jets):
        """``jets``: dict target coordinate -> Jet.  Returns a list of Jets."""
        alg = self.alg
        base = [jets[n] for n in self.names]
        c = [float(j.coeffs[0]) for j in base]
        nil = []
        for j in base:
            k = j.copy()
            k.coeffs[0] = 0.0
            nil.append(k)
        vals = self._fn(*c) if self._fn is not None else []
        npow = {(0,) * len(self.names): alg.one()}

        def nil_power(I):
            if I not in npow:
                j = max(i for i, a in enumerate(I) if a)
                prev = I[:j] + (I[j] - 1,) + I[j + 1 :]
                npow[I] = alg.mul(nil_power(prev), nil[j])
            return npow[I]

        gpow = {self.target.zero_index: alg.one()}
        graded = self.target.graded

        def graded_power(r):
            if r not in gpow:
                j = max(i for i, a in enumerate(r) if a)
                prev = r[:j] + (r[j] - 1,) + r[j + 1 :]
                gpow[r] = alg.mul(graded_power(prev), jets[graded[j]])
            return gpow[r]

        out = []
        for degree, items in self.plan:
            scal = {}
            for r, I, k in items:
                v = vals[k]
                if v == 0.0:
                    continue
                term = nil_power(I).coeffs * v
                scal[r] = term if r not in scal else scal[r] + term
            acc = np.zeros(alg.size(degree))
            for r, s in scal.items():
                acc += alg.mul(Jet(0, s), graded_power(r)).coeffs
            out.append(Jet(degree, acc))
        return out
