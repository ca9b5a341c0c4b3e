import random
from fractions import Fraction as Fr

import pytest

from qwz.exactnum import (MalformedInput, MultiPoly, RatFunc, q_resultant_roots, rat_is_zero,
                          ratfunc_normalize)
from qwz.grammar import parse_ratfunc as P


def X(text):
    return P(text).num


def _random_point(rng, letters):
    return {l: Fr(rng.randint(-20, 20), rng.randint(1, 15)) for l in letters}


def test_normalize_cancels_common_factor():
    assert ratfunc_normalize(P("(x^2-1)/(x-1)")) == P("x+1")


def test_normalize_p_over_p_is_one():
    p = X("1 - a*x*q + b^2*x^3")
    assert RatFunc(p, p) == RatFunc(1)


def test_normalize_matches_evaluation_oracle():
    r_raw = (X("(1-a*x)*(1-q*x)"), X("(1-q*x)*(1-b*x)"))
    r = ratfunc_normalize(RatFunc(*r_raw))
    assert r == P("(1-a*x)/(1-b*x)")
    rng = random.Random(5)
    seen = 0
    while seen < 20:
        pt = _random_point(rng, "xqab")
        den = r_raw[1].evaluate(pt)
        if den == 0:
            continue
        assert Fr(r.evaluate(pt)) == Fr(r_raw[0].evaluate(pt)) / Fr(den)
        seen += 1


def test_normalize_is_idempotent():
    r = P("(a*x - q)*(x + b)/((x + b)*(q*x - 1)*y)")
    assert ratfunc_normalize(ratfunc_normalize(r)) == ratfunc_normalize(r)


def test_canonical_form_is_structural():
    assert P("(1-a*x)/(1-b*x)") == P("(2*a*x - 2)/(2*b*x - 2)")
    assert hash(P("(1-a*x)/(1-b*x)")) == hash(P("(a*x-1)/(b*x-1)"))


def test_zero_denominator_rejected():
    with pytest.raises((MalformedInput, ZeroDivisionError)):
        RatFunc(X("x"), MultiPoly())


def test_rat_is_zero_examples():
    assert rat_is_zero(P("(x-x)/(1-q*x)"))
    assert not rat_is_zero(P("(1-a*x)/(1-b*x)"))


def test_rat_is_zero_agrees_with_sampling():
    rng = random.Random(11)
    zero = P("1/(1-x) - 1/(1-x)*(1-q*x)/(1-q*x)")
    nonzero = P("1/(1-x) - q/(1-q*x)")
    assert rat_is_zero(zero)
    assert not rat_is_zero(nonzero)
    found = False
    for _ in range(20):
        pt = _random_point(rng, "xq")
        try:
            if Fr(nonzero.evaluate(pt)) != 0:
                found = True
                break
        except ZeroDivisionError:
            continue
    assert found


@pytest.mark.parametrize("p1, p2, expected", [
    ("1-q*x", "1-x", {1}),
    ("1-x", "1-q^2*x", set()),
    ("1-x", "1-x", {0}),
    ("(1-a*x)*(1-q^3*x)", "(1-x)*(1-a*q^2*x)", {3}),
    ("1-a*x*q^2", "1-a*x", {2}),
])
def test_q_resultant_roots(p1, p2, expected):
    assert q_resultant_roots(X(p1), X(p2)) == expected


@pytest.mark.parametrize("p1, p2", [("1-q*x", "1-x"), ("1-x", "1-q^2*x"), ("(1-a*q*x)*(1-b*x)", "(1-a*x)*(1-b*q^2*x)")])
def test_q_resultant_roots_matches_resultant_oracle(p1, p2):
    assert q_resultant_roots(X(p1), X(p2)) == q_resultant_roots(X(p1), X(p2), use_resultant=True)


@pytest.mark.parametrize("p1, p2", [("(1-a*x)*(1-q^3*x)", "(1-x)*(1-a*q^2*x)"), ("1-x*b*q^2", "(1-b*x)*(1+x)")])
def test_q_resultant_roots_confirmed_by_gcd(p1, p2):
    a, b = X(p1), X(p2)
    roots = q_resultant_roots(a, b)
    for j in range(8):
        g = a.gcd(b.q_scale("x", j).num)
        assert (g.degree("x") > 0) == (j in roots)
