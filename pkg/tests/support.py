"""Shared signatures, hypothesis strategies and independent oracles."""

import itertools
import re

from hypothesis import strategies as st

from gradedflow import expr as E
from gradedflow.graded import GradedFunction, GradedSignature, enumerate_multiindices, graded_from_expr
from gradedflow.vectorfield import VectorField

# one base coordinate, odd coordinates of both signs, one even graded one
T = GradedSignature([("x", 0), ("xi", 1), ("eta", -1), ("z", 2)])
# two base coordinates and two odd coordinates of the same degree
U = GradedSignature([("x", 0), ("y", 0), ("a", 1), ("b", 1), ("w", 2)])
# three odd and two even graded coordinates, for sign tests
S5 = GradedSignature([("u", 0), ("o1", 1), ("e1", 2), ("o2", -1), ("e2", -2), ("o3", 3)])

SIGNATURES = {"T": T, "U": U}

COEFFS = ["1", "2", "-1", "0.5", "x", "x^2", "1 + x", "3*x - 2", "sin(x)", "exp(x)", "cos(x)*x"]
COEFFS_U = COEFFS + ["y", "x*y", "exp(y) - x", "y^2"]


def coefficient(sig):
    return st.sampled_from(COEFFS_U if "y" in sig else COEFFS).map(E.parse)


@st.composite
def graded_functions(draw, sig, degree=None, cap=4, max_terms=4):
    if degree is None:
        degree = draw(st.sampled_from(available_degrees(sig, cap)))
    monos = enumerate_multiindices(sig, degree, cap)
    if not monos:
        return GradedFunction.zero(sig, degree, cap)
    chosen = draw(st.lists(st.sampled_from(monos), max_size=max_terms, unique=True))
    terms = {p: draw(coefficient(sig)) for p in chosen}
    return GradedFunction(sig, degree, terms, cap)


def available_degrees(sig, cap):
    degs = set()
    for p in itertools.product(*[range(2) if o else range(cap + 1) for o in sig.odd]):
        if sum(p) <= cap:
            degs.add(sig.index_degree(p))
    return sorted(d for d in degs if -3 <= d <= 3)


@st.composite
def vector_fields(draw, sig, degree=None, cap=4, max_terms=2):
    if degree is None:
        degree = draw(st.sampled_from([-1, 0, 1, 2]))
    comps = {}
    for c in sig.coords:
        comps[c.name] = draw(graded_functions(sig, degree + c.degree, cap, max_terms))
    return VectorField(sig, degree, comps, cap)


# ---------------------------------------------------------------------------
# oracles


def bubble_sign(sig, p, q):
    """Sign of ξ^p·ξ^q by sorting the concatenated odd factors with adjacent swaps."""
    factors = [i for i, a in enumerate(p) if a and sig.odd[i]] + [i for i, a in enumerate(q) if a and sig.odd[i]]
    if len(factors) != len(set(factors)):
        return 0
    sign = 1
    items = list(factors)
    changed = True
    while changed:
        changed = False
        for k in range(len(items) - 1):
            if items[k] > items[k + 1]:
                items[k], items[k + 1] = items[k + 1], items[k]
                sign = -sign
                changed = True
    return sign


def brute_multiindices(sig, degree, cap):
    ranges = [range(2) if o else range(cap + 1) for o in sig.odd]
    return sorted(
        p for p in itertools.product(*ranges) if sum(p) <= cap and sig.index_degree(p) == degree
    )


def substitute_pullback(phi, f):
    """φ*(f) by textual substitution of every target coordinate and re-expansion."""
    text = f.to_string()
    repl = {n: "(" + phi.pullbacks[n].to_string() + ")" for n in phi.target.names}
    pattern = re.compile(r"\b(" + "|".join(map(re.escape, repl)) + r")\b")
    out = pattern.sub(lambda m: repl[m.group(1)], text)
    return graded_from_expr(phi.source, E.parse(out), phi.cap)


BODIES = ["x", "2*x", "x + 1", "x^2 + 0.5", "sin(x) + 2", "exp(x)"]
BODIES_U = BODIES + ["y", "x*y + 1", "y - x"]
LEADS = ["1", "2", "x + 1"]


@st.composite
def graded_maps(draw, sig, cap=4, max_terms=2):
    """Random self-maps: each coordinate goes to a body or a multiple of itself, plus extra terms."""
    from gradedflow.gradedmap import GradedMap

    pb = {}
    for c in sig.coords:
        if c.is_base:
            own = sig.zero_index
            lead = draw(st.sampled_from(BODIES_U if "y" in sig else BODIES))
        else:
            own = sig.unit(c.name)
            lead = draw(st.sampled_from(LEADS))
        terms = {own: E.parse(lead)}
        extra = [p for p in enumerate_multiindices(sig, c.degree, cap) if p != own]
        if extra:
            for p in draw(st.lists(st.sampled_from(extra), max_size=max_terms, unique=True)):
                terms[p] = draw(coefficient(sig))
        pb[c.name] = GradedFunction(sig, c.degree, terms, cap)
    return GradedMap(sig, sig, pb, cap)
