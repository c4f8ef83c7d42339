"""Acceptance criteria 1-8.  Each test prints one ``criterion N: PASS|FAIL`` line."""

import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gradedflow.config import DEFAULT
from gradedflow.errors import NotHomological
from gradedflow.flow_nonzero import component_function, flow_even, flow_odd
from gradedflow.flow_zero import crosscheck_weight_one, solve_pivotal
from gradedflow.graded import GradedFunction, GradedSignature, enumerate_multiindices
from gradedflow.gradedmap import compose, related
from gradedflow.sampling import base_points
from gradedflow.vectorfield import VectorField, apply, apply_power, bracket
from gradedflow.verify import (
    INDETERMINATE,
    check_commuting_flows,
    check_flow_axioms,
    check_invariance,
    check_related_equivariance,
)

from corpus import commuting_corpus, invariance_corpus, related_corpus
from support import T, U, graded_functions, graded_maps, vector_fields

EULER_SIG = GradedSignature([("x", 0), ("xi1", 1), ("xi2", 1), ("z", 2)])


def test_criterion_1_euler_flow(acceptance):
    with acceptance(1, "Euler flow matches exp(t|f|) f") as rec:
        start = time.perf_counter()
        fj = solve_pivotal(VectorField.euler(EULER_SIG), [1.0], (-1.0, 1.0), DEFAULT)
        worst = 0.0
        for t in np.linspace(-1.0, 1.0, 41):
            for c in EULER_SIG.coords:
                for p in enumerate_multiindices(EULER_SIG, c.degree, DEFAULT.weight_cap):
                    if c.is_base:
                        want = 1.0 if p == EULER_SIG.zero_index else 0.0
                    else:
                        want = math.exp(t * c.degree) if p == EULER_SIG.unit(c.name) else 0.0
                    worst = max(worst, abs(fj.coefficient(c.name, p, t) - want))
        elapsed = time.perf_counter() - start
        rec.detail = f"max error {worst:.2e}, {elapsed:.2f} s"
        assert worst < 1e-6
        assert elapsed < 5.0


def test_criterion_2_odd_flow_exact(acceptance):
    with acceptance(2, "odd flow satisfies the axioms exactly") as rec:
        start = time.perf_counter()
        sig = GradedSignature([("xi", 1), ("y", 2)])
        report = check_flow_axioms(flow_odd(VectorField.from_strings(sig, {"y": "xi"})))
        S = GradedSignature([("a", 1), ("b", 1), ("c", 2)])
        bad = VectorField.from_strings(S, {"a": "c", "c": "a*c"}, degree=1)
        with pytest.raises(NotHomological):
            flow_odd(bad)
        elapsed = time.perf_counter() - start
        rec.detail = f"{len(report.checks)} checks, {elapsed:.3f} s"
        assert {c.name for c in report.checks} == {"zero-section", "group-law", "generator"}
        assert all(c.mode == "symbolic" and c.deviation == 0.0 for c in report.checks)
        assert elapsed < 1.0


def test_criterion_3_even_flow_oracle(acceptance):
    with acceptance(3, "even flow equals normalized iterated application") as rec:
        Z = GradedSignature([("z", 2)])
        X = VectorField.from_strings(Z, {"z": "z^2"}, cap=6)
        flow = flow_even(X, cap=6)
        z = GradedFunction.coordinate(Z, "z", 6)
        pts = base_points([], DEFAULT, 20)
        tau = flow.sig.graded_position(flow.tau)
        for ell in range(flow.max_power + 2):
            oracle = apply_power(X, z, ell)
            got = component_function(flow, z, ell)
            assert got.max_deviation(oracle, pts) <= 1e-12
            # the tau^ell coefficient of θ*(z), times ell!
            raw = {
                p[:tau] + p[tau + 1:]: c
                for p, c in flow.pullbacks["z"].terms.items()
                if p[tau] == ell
            }
            coeff = GradedFunction(Z, oracle.degree, raw, 6).scalar_mul(float(math.factorial(ell)))
            assert coeff.max_deviation(oracle, pts) <= 1e-12
        assert apply_power(X, z, flow.max_power + 1).is_zero_sampled()
        rec.detail = f"powers 0..{flow.max_power} plus termination"


def test_criterion_4_pivotal_crosscheck(acceptance):
    with acceptance(4, "joint integration agrees with fundamental matrices") as rec:
        start = time.perf_counter()
        cfg = DEFAULT.tight()
        euler = solve_pivotal(VectorField.euler(EULER_SIG), [1.0], (-1.0, 1.0), cfg)
        varying = VectorField.from_strings(
            EULER_SIG,
            {"x": "sin(x)", "xi1": "x*xi1 + cos(x)*xi2", "xi2": "-xi1 + x^2*xi2", "z": "exp(-x)*z + x*xi1*xi2"},
        )
        other = solve_pivotal(varying, [0.8], (-1.0, 1.0), cfg)
        reports = [crosscheck_weight_one(fj, raise_on_mismatch=False) for fj in (euler, other)]
        elapsed = time.perf_counter() - start
        rec.detail = ", ".join(f"mismatch {r.mismatch:.1e}" for r in reports) + f", {elapsed:.2f} s"
        assert all(r.mismatch < 1e-7 for r in reports)
        assert elapsed < 10.0


def test_criterion_5_invariance_vs_bracket(acceptance):
    with acceptance(5, "invariance verdict agrees with vanishing bracket") as rec:
        corpus = invariance_corpus()
        degrees_x = {X.degree for _, X, _ in corpus}
        degrees_y = {Y.degree for _, _, Y in corpus}
        disagree, indeterminate, zero = [], 0, 0
        for label, X, Y in corpus:
            r = check_invariance(X, Y)
            zero += r.bracket_zero
            indeterminate += r.check.verdict == INDETERMINATE
            if r.invariant != bracket(X, Y).is_zero():
                disagree.append(label)
        rec.detail = f"{len(corpus)} pairs, {zero} with zero bracket, {len(disagree)} disagreements"
        assert len(corpus) >= 50
        assert {-1, 0, 1, 2} <= degrees_x and {-1, 0, 1, 2} <= degrees_y
        assert 0 < zero < len(corpus)
        assert not disagree and indeterminate == 0


def test_criterion_6_commuting_vs_bracket(acceptance):
    with acceptance(6, "commuting verdict agrees with vanishing bracket") as rec:
        disagree = []
        corpus = commuting_corpus()
        for label, X, Y in corpus:
            r = check_commuting_flows(X, Y)
            if r.check.verdict == INDETERMINATE or r.commute != bracket(X, Y).is_zero():
                disagree.append(label)
        # non-complete flows: x^2 d/dx escapes at t = 1 from x = 1
        X1 = GradedSignature([("x", 0)])
        cfg = DEFAULT.replace(base_points=((1.0,),), t_max=1.5)
        blow = VectorField.from_strings(X1, {"x": "x^2"})
        r = check_commuting_flows(blow, blow, cfg)
        assert r.commute and r.bracket_zero
        assert r.domains[0].is_proper() and r.domains[0].is_rectangle_closed()
        # negative control: [x d/dx, d/dx] = -d/dx
        A, B = VectorField.from_strings(X1, {"x": "x"}), VectorField.from_strings(X1, {"x": "1"})
        r = check_commuting_flows(A, B, cfg)
        assert not r.commute and not r.bracket_zero
        loc = r.check.location
        assert {"point", "s", "t", "coordinate"} <= set(loc)
        rec.detail = f"{len(corpus) + 2} pairs, control located at s={loc['s']:.3g}, t={loc['t']:.3g}"
        assert not disagree, disagree


def test_criterion_7_related_equivariance(acceptance):
    with acceptance(7, "equivariance verdict agrees with relatedness") as rec:
        corpus = related_corpus()
        disagree = []
        negatives = 0
        for label, phi, X, Y, expected in corpus:
            r = check_related_equivariance(phi, X, Y)
            rel = related(phi, X, Y)
            negatives += not rel
            if r.check.verdict == INDETERMINATE or r.equivariant != rel or rel != expected:
                disagree.append(label)
        rec.detail = f"{len(corpus)} triples, {negatives} negative"
        assert len(corpus) >= 10 and negatives >= 1
        assert not disagree, disagree


def _close(f, g, max_weight=None):
    return f.max_deviation(g, base_points(f.sig.base, DEFAULT, 20), max_weight) <= 1e-9


def _sign(a, b):
    return -1.0 if (a * b) % 2 else 1.0


laws = settings(max_examples=40, deadline=None, derandomize=True)
sigs = st.sampled_from([T, U])


@laws
@given(st.data())
def _commutativity_and_associativity(data):
    sig = data.draw(sigs)
    f, g, h = (data.draw(graded_functions(sig, max_terms=3)) for _ in range(3))
    assert _close(f * g, (g * f).scalar_mul(_sign(f.degree, g.degree)))
    assert _close((f * g) * h, f * (g * h))


@laws
@given(st.data())
def _leibniz(data):
    sig = data.draw(sigs)
    X = data.draw(vector_fields(sig))
    f, g = data.draw(graded_functions(sig, max_terms=3)), data.draw(graded_functions(sig, max_terms=3))
    rhs = apply(X, f) * g + (f * apply(X, g)).scalar_mul(_sign(X.degree, f.degree))
    assert _close(apply(X, f * g), rhs, X.cap - X.weight_drop())


@laws
@given(st.data())
def _antisymmetry_and_jacobi(data):
    sig = data.draw(sigs)
    X, Y, Z = (data.draw(vector_fields(sig, max_terms=1)) for _ in range(3))
    a, b = bracket(X, Y), bracket(Y, X).scalar_mul(-_sign(X.degree, Y.degree))
    lhs = bracket(X, bracket(Y, Z))
    rhs = bracket(bracket(X, Y), Z) + bracket(Y, bracket(X, Z)).scalar_mul(_sign(X.degree, Y.degree))
    w = X.cap - X.weight_drop() - Y.weight_drop() - Z.weight_drop()
    for n in sig.names:
        assert _close(a.components[n], b.components[n])
        assert _close(lhs.components[n], rhs.components[n], w)


@laws
@given(st.data())
def _functoriality(data):
    sig = data.draw(sigs)
    phi, psi = data.draw(graded_maps(sig, max_terms=1)), data.draw(graded_maps(sig, max_terms=1))
    f = data.draw(graded_functions(sig, max_terms=2))
    assert _close(compose(psi, phi).pullback(f), phi.pullback(psi.pullback(f)))


def test_criterion_8_algebra_laws(acceptance):
    with acceptance(8, "algebra laws on random instances") as rec:
        start = time.perf_counter()
        for law in (_commutativity_and_associativity, _leibniz, _antisymmetry_and_jacobi, _functoriality):
            law()
        elapsed = time.perf_counter() - start
        rec.detail = f"4 law groups x 40 instances, {elapsed:.1f} s"
        assert elapsed < 60.0
