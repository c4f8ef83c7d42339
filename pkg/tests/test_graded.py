import itertools

import pytest
from hypothesis import given, settings, strategies as st

from gradedflow import expr as E
from gradedflow.config import DEFAULT
from gradedflow.errors import DegreeError, IndexNotDominated, SignatureMismatch, ValidationError
from gradedflow.graded import (
    Coordinate,
    GradedFunction,
    GradedSignature,
    embed,
    enumerate_multiindices,
    parse_graded,
    product_sign,
    restrict,
    split_sign,
)
from gradedflow.sampling import base_points

from support import S5, T, U, brute_multiindices, bubble_sign, graded_functions

TWO_ODD = GradedSignature([("x", 0), ("y", 0), ("xi1", 1), ("xi2", 1)])


def pts(sig, n=20):
    return base_points(sig.base, DEFAULT, n)


def close(f, g, max_weight=None):
    return f.max_deviation(g, pts(f.sig), max_weight) <= 1e-9


# signature --------------------------------------------------------------


def test_signature_basics():
    assert T.base == ("x",) and T.graded == ("xi", "eta", "z")
    assert T.odd == (True, True, False)
    assert T.counts() == {-1: 1, 0: 1, 1: 1, 2: 1}
    assert T.multiindex(xi=1, z=2) == (1, 0, 2)
    with pytest.raises(ValueError):
        T.multiindex(xi=2)
    with pytest.raises(SignatureMismatch):
        T.coordinate("nope")


@pytest.mark.parametrize("bad", [[("x", 0), ("x", 1)], [("exp", 0)], [("1x", 0)]])
def test_signature_rejects(bad):
    with pytest.raises(ValueError):
        GradedSignature(bad)


# enumeration ------------------------------------------------------------


def test_enumeration_examples():
    one = GradedSignature([("xi", 1)])
    assert enumerate_multiindices(one, 1, 3) == [(1,)]
    two = GradedSignature([("xi1", 1), ("xi2", 1)])
    assert enumerate_multiindices(two, 2, 3) == [(1, 1)]
    zw = GradedSignature([("z", 2), ("w", 4)])
    assert set(enumerate_multiindices(zw, 8, 4)) == {(4, 0), (2, 1), (0, 2)}


@pytest.mark.parametrize("sig", [T, U, S5], ids=["T", "U", "S5"])
@pytest.mark.parametrize("cap", [0, 2, 4])
def test_enumeration_matches_brute_force(sig, cap):
    for d in range(-6, 7):
        assert enumerate_multiindices(sig, d, cap) == brute_multiindices(sig, d, cap)


# signs ------------------------------------------------------------------


def test_sign_examples():
    two = GradedSignature([("xi1", 1), ("xi2", 1)])
    assert split_sign(two, (1, 1), (1, 0)) == -1
    three = GradedSignature([("a", 1), ("b", 1), ("c", 1)])
    assert split_sign(three, (1, 1, 1), (1, 1, 0)) == 1
    zw = GradedSignature([("z", 2), ("w", 2)])
    assert split_sign(zw, (3, 2), (0, 2)) == 1
    with pytest.raises(IndexNotDominated):
        split_sign(two, (1, 0), (0, 1))


def test_signs_match_bubble_sort_exhaustively():
    ranges = [range(2) if o else range(6) for o in S5.odd]
    indices = [p for p in itertools.product(*ranges) if sum(p) <= 5]
    for p in indices:
        for q in itertools.product(*(range(a + 1) for a in p)):
            rest = tuple(a - b for a, b in zip(p, q))
            assert split_sign(S5, p, q) == bubble_sign(S5, rest, q)
    for p, q in itertools.product(indices[:80], repeat=2):
        assert product_sign(S5, p, q) == bubble_sign(S5, p, q)


# functions -------------------------------------------------------------


def test_products_follow_koszul_rule():
    f = parse_graded(TWO_ODD, "x*xi1")
    g = parse_graded(TWO_ODD, "y*xi2")
    xy12 = parse_graded(TWO_ODD, "x*y*xi1*xi2")
    assert close(f * g, xy12)
    assert close(g * f, -xy12)
    xi1 = GradedFunction.coordinate(TWO_ODD, "xi1")
    assert (xi1 * xi1).is_literal_zero
    one = GradedFunction.constant(TWO_ODD, 1.0)
    assert close(f * one, f)


def test_body_and_zero():
    # opposite degrees make xi1*xi2 a degree-0 monomial
    sig = GradedSignature([("x", 0), ("xi1", 1), ("xi2", -1)])
    f = parse_graded(sig, "x + x^2*xi1*xi2")
    assert E.evaluate(f.body(), {"x": 2.0}) == 2.0
    assert GradedFunction.coordinate(TWO_ODD, "xi1").body().is_zero
    assert GradedFunction.constant(TWO_ODD, 1.0).body().is_one
    assert close(f + GradedFunction.zero(sig, 0), f)


def test_equal_sampled_tolerance():
    sig = GradedSignature([("x", 0), ("xi1", 1)])
    f = parse_graded(sig, "x*xi1")
    g = parse_graded(sig, "(x + 1e-12)*xi1")
    assert f.equal_sampled(f)
    assert f.equal_sampled(g, points=[{"x": 1.0}], tol=1e-9)
    assert not f.equal_sampled(parse_graded(sig, "(x + 1e-6)*xi1"), points=[{"x": 1.0}], tol=1e-9)


def test_homogeneity_enforced():
    with pytest.raises(DegreeError):
        GradedFunction(T, 1, {(0, 0, 1): E.ONE})
    with pytest.raises(ValidationError):
        parse_graded(T, "xi + z")
    with pytest.raises(ValidationError):
        parse_graded(T, "xi*xi")
    with pytest.raises(ValidationError):
        parse_graded(T, "(xi + x*xi)^2")
    with pytest.raises(ValidationError):
        parse_graded(T, "exp(xi)")
    with pytest.raises(ValidationError):
        parse_graded(T, "w*x")


def test_truncation_at_cap():
    z = GradedFunction.coordinate(T, "z", cap=3)
    assert z.pow(3).terms and z.pow(4).is_literal_zero


def test_functions_of_nilpotent_arguments_expand():
    # exp(x + xi*eta) = exp(x)·(1 + xi*eta) because (xi*eta)^2 = 0
    f = parse_graded(T, "exp(x + xi*eta)")
    g = parse_graded(T, "exp(x) + exp(x)*xi*eta")
    assert close(f, g)
    h = parse_graded(T, "1/(x + xi*eta)")
    assert close(h, parse_graded(T, "1/x - xi*eta/x^2"))


def test_embed_restrict_round_trip():
    P = T.extend(Coordinate("tau", -1, weighted=False))
    f = parse_graded(T, "x*xi*eta + exp(x)")
    assert restrict(embed(f, P), T).max_deviation(f, pts(T)) == 0.0


# algebra laws over random instances ------------------------------------

fast = settings(max_examples=40, deadline=None)


@fast
@given(st.data())
def test_graded_commutativity(data):
    sig = data.draw(st.sampled_from([T, U]))
    f = data.draw(graded_functions(sig))
    g = data.draw(graded_functions(sig))
    sign = -1.0 if (f.degree * g.degree) % 2 else 1.0
    assert close(f * g, (g * f).scalar_mul(sign))


@fast
@given(st.data())
def test_associativity(data):
    sig = data.draw(st.sampled_from([T, U]))
    f, g, h = (data.draw(graded_functions(sig, max_terms=3)) for _ in range(3))
    assert close((f * g) * h, f * (g * h))


@fast
@given(st.data())
def test_distributivity(data):
    sig = data.draw(st.sampled_from([T, U]))
    f = data.draw(graded_functions(sig))
    g = data.draw(graded_functions(sig, degree=f.degree))
    h = data.draw(graded_functions(sig))
    assert close(h * (f + g), h * f + h * g)


@fast
@given(st.data())
def test_print_parse_round_trip(data):
    sig = data.draw(st.sampled_from([T, U]))
    f = data.draw(graded_functions(sig))
    back = parse_graded(sig, f.to_string(), f.cap, f.degree)
    assert close(back, f)
