import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gradedflow.config import DEFAULT
from gradedflow.errors import DegreeMismatch, SignatureMismatch
from gradedflow.flow_nonzero import flow_even
from gradedflow.flow_zero import solve_pivotal
from gradedflow.graded import GradedSignature, parse_graded
from gradedflow.gradedmap import GradedMap
from gradedflow.vectorfield import VectorField
from gradedflow.verify import (
    FAILS,
    HOLDS,
    INDETERMINATE,
    check_commuting_flows,
    check_flow_axioms,
    check_invariance,
    check_related_equivariance,
    estimate_commuting_domain,
    numeric_verdict,
    rectangle_hull,
    relative_discrepancy,
    symbolic_verdict,
)

from support import T

X1 = GradedSignature([("x", 0)])
Z = GradedSignature([("z", 2)])
EULER_SIG = GradedSignature([("x", 0), ("xi1", 1), ("xi2", 1), ("z", 2)])
ONE_POINT = DEFAULT.replace(base_points=((1.0,),))


def field(sig, comps, degree=None):
    return VectorField.from_strings(sig, comps, degree=degree)


def test_verdict_thresholds():
    assert numeric_verdict(1e-8, DEFAULT) == HOLDS
    assert numeric_verdict(1e-4, DEFAULT) == INDETERMINATE
    assert numeric_verdict(1e-2, DEFAULT) == FAILS
    assert symbolic_verdict(1e-10, DEFAULT) == HOLDS
    assert symbolic_verdict(1e-8, DEFAULT) == FAILS
    assert relative_discrepancy(1e6, 1e6 + 1) < 1e-6
    assert relative_discrepancy(0.0, 1e-3) == pytest.approx(1e-3 / (1 + 1e-3))


def test_rectangle_hull_examples():
    mask = np.ones((3, 3), dtype=bool)
    assert rectangle_hull(mask, 1, 1).all()
    mask[0, 0] = False
    hull = rectangle_hull(mask, 1, 1)
    assert not hull[0, 0] and hull[0, 1] and hull[1, 0]
    # an island not connected to the origin by rectangles is dropped
    mask = np.array([[1, 0, 1], [0, 1, 0], [1, 0, 1]], dtype=bool)
    assert rectangle_hull(mask, 1, 1).sum() == 1
    assert not rectangle_hull(np.zeros((3, 3), dtype=bool), 1, 1).any()


@settings(max_examples=50, deadline=None)
@given(st.lists(st.booleans(), min_size=25, max_size=25))
def test_rectangle_hull_properties(bits):
    mask = np.array(bits).reshape(5, 5)
    mask[2, 2] = True
    hull = rectangle_hull(mask, 2, 2)
    assert not (hull & ~mask).any()
    assert np.array_equal(rectangle_hull(hull, 2, 2), hull)
    for i, j in np.argwhere(hull):
        lo_i, hi_i = sorted((i, 2))
        lo_j, hi_j = sorted((j, 2))
        assert hull[lo_i:hi_i + 1, lo_j:hi_j + 1].all()


def test_domain_estimate_blow_up():
    X = field(X1, {"x": "x^2"})
    est = estimate_commuting_domain(X, X, [1.0], config=DEFAULT.replace(t_max=1.5), n=31)
    assert est.is_proper() and est.is_rectangle_closed()
    s, t = np.meshgrid(est.s_grid, est.t_grid, indexing="ij")
    # away from the boundary, membership matches s + t < 1 and both times < 1
    inside = (s + t < 0.9) & (s < 0.9) & (t < 0.9)
    outside = (s + t > 1.1) | (s > 1.1) | (t > 1.1)
    assert est.maximal[inside].all()
    assert not est.maximal[outside].any()


def test_domain_estimate_complete_fields():
    A, B = field(X1, {"x": "x"}), field(X1, {"x": "1"})
    est = estimate_commuting_domain(A, B, [1.0], n=11)
    assert not est.is_proper()
    with pytest.raises(ValueError):
        estimate_commuting_domain(A, B, [1.0], s_grid=[0.5, 1.0])


def test_domain_symmetry_and_lattice_closure():
    X, Y = field(X1, {"x": "x^2"}), field(X1, {"x": "-x^2 + 1"})
    cfg = DEFAULT.replace(t_max=1.5)
    a = estimate_commuting_domain(X, Y, [1.0], config=cfg, n=21)
    b = estimate_commuting_domain(Y, X, [1.0], config=cfg, n=21)
    assert np.array_equal(a.flipped().maximal, b.maximal)
    c = estimate_commuting_domain(X, field(X1, {"x": "x^3"}), [1.0], config=cfg, n=21)
    for m in (a.union(c), a.intersection(c)):
        assert a.is_rectangle_closed(m)


def test_corrupted_flow_fails_group_law():
    # a perturbation linear in tau keeps the group law, so corrupt the tau^2 term
    flow = flow_even(field(Z, {"z": "z^2"}))
    assert check_flow_axioms(flow).passed
    pb = dict(flow.map.pullbacks)
    pb["z"] = pb["z"] + parse_graded(flow.sig, "0.001*tau^2*z^3")
    bad = dataclasses.replace(flow, map=GradedMap(flow.sig, flow.base_sig, pb, flow.cap))
    report = check_flow_axioms(bad)
    verdicts = {c.name: c.verdict for c in report.checks}
    assert verdicts["group-law"] == FAILS and verdicts["zero-section"] == HOLDS
    assert report.verdict() == FAILS
    failed = next(c for c in report.checks if c.name == "group-law")
    assert failed.location["coordinate"] == "z"
    # the rho*sigma*z^3 coefficient alone is off by 2e-3
    assert failed.deviation >= 2e-3 - 1e-12


def test_numeric_axioms_on_euler_and_nonlinear_fields():
    fj = solve_pivotal(VectorField.euler(EULER_SIG), [1.0], (-1, 1))
    report = check_flow_axioms(fj)
    assert report.passed
    json.dumps(report.to_dict())
    X = field(T, {"x": "sin(x) + 0.5", "xi": "x*xi", "eta": "-eta*x", "z": "cos(x)*z + xi*eta*z"})
    assert check_flow_axioms(solve_pivotal(X, [0.7], (-1, 1))).passed
    with pytest.raises(TypeError):
        check_flow_axioms(X)


def test_invariance_examples():
    E_ = VectorField.euler(T)
    Q = field(T, {"x": "x*xi", "eta": "x*xi*eta", "z": "xi*z"}, degree=1)
    assert check_invariance(Q, Q).invariant
    rep = check_invariance(E_, Q, ONE_POINT)
    assert not rep.invariant and not rep.bracket_zero and rep.consistent
    D = field(T, {"x": "x", "xi": "xi"})
    rep = check_invariance(E_, D, ONE_POINT)
    assert rep.invariant and rep.bracket_zero
    json.dumps(rep.to_dict())
    with pytest.raises(SignatureMismatch):
        check_invariance(E_, VectorField.euler(EULER_SIG))


def test_commuting_examples():
    cfg = DEFAULT.replace(base_points=((1.0,),), t_max=1.5)
    X = field(X1, {"x": "x^2"})
    rep = check_commuting_flows(X, X, cfg)
    assert rep.commute and rep.consistent and rep.domains[0].is_proper()
    rep = check_commuting_flows(field(X1, {"x": "x"}), field(X1, {"x": "1"}), ONE_POINT)
    assert rep.check.verdict == FAILS and rep.consistent
    assert {"point", "s", "t"} <= set(rep.check.location)
    # mixed degrees: Euler and a homological field
    Q = field(T, {"x": "x*xi", "eta": "x*xi*eta", "z": "xi*z"}, degree=1)
    rep = check_commuting_flows(VectorField.euler(T), Q, ONE_POINT)
    assert not rep.commute and rep.consistent


def test_related_examples():
    M = GradedSignature([("x", 0), ("xi", 1)])
    N = GradedSignature([("y", 0), ("zeta", 1)])
    phi = GradedMap.from_strings(M, N, {"y": "2*x", "zeta": "xi"})
    cfg = DEFAULT.replace(base_points=((0.5,),))
    rep = check_related_equivariance(phi, field(M, {"x": "x", "xi": "xi"}), field(N, {"y": "y", "zeta": "zeta"}), cfg)
    assert rep.equivariant and rep.related and rep.consistent
    rep = check_related_equivariance(phi, field(M, {"x": "x", "xi": "xi"}), field(N, {"y": "y^2", "zeta": "zeta"}), cfg)
    assert not rep.equivariant and not rep.related and rep.consistent
    rep = check_related_equivariance(phi, field(M, {"x": "xi"}), field(N, {"y": "2*zeta"}))
    assert rep.equivariant and rep.related
    with pytest.raises(DegreeMismatch):
        check_related_equivariance(phi, field(M, {"x": "xi"}), field(N, {"y": "y"}))
