"""Property suites: shift ratios, finite telescoping, Pochhammer laws, round trips."""

from fractions import Fraction as Fr

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from qwz import catalog
from qwz.exactnum import MultiPoly, RatFunc, ratfunc_normalize
from qwz.grammar import parse_ratfunc, parse_term, print_term
from qwz.numeric import PoleError, eval_poch, eval_term_exact
from qwz.terms import QHyperTerm, quotient

import helpers

PROPS = settings(max_examples=60, deadline=None, derandomize=True,
                 suppress_health_check=[HealthCheck.function_scoped_fixture])


@pytest.fixture(scope="module")
def catalog_terms(pairs):
    return helpers.catalog_terms(pairs)


def test_shift_ratio_consistency(catalog_terms, policy):
    """50 random (k, n) in [0,12]^2 times 5 assignments per catalog term, 10 epsilon."""
    checked, failures = helpers.shift_ratio_check(catalog_terms, policy)
    assert not failures, failures[:5]
    assert checked > 0.6 * len(catalog_terms) * 5 * 50 * 2


@PROPS
@given(data=st.data())
def test_finite_telescoping_windows(pairs, policy, data):
    ident = data.draw(st.sampled_from(sorted(pairs)))
    e = catalog.get(ident)
    pair, pt = pairs[ident], e.sample_point()
    lo = -8 if e.bilateral else 0
    k1 = data.draw(st.integers(lo, 12))
    k2 = data.draw(st.integers(k1, 12))
    n = data.draw(st.integers(0, 4))
    res = helpers.telescoping_window_residual(pair, pt, n, k1, k2, policy)
    if res is not None:
        assert res[0] < 10 * policy.eps * res[1]


rationals = st.fractions(min_value=-3, max_value=3, max_denominator=12)
small_q = st.sampled_from(helpers.QS)


@PROPS
@given(a=rationals, q=small_q, m=st.integers(0, 8), n=st.integers(0, 8))
def test_poch_index_law_numeric(a, q, m, n, policy):
    with policy.workdps():
        lhs = eval_poch(a, q, m + n, policy)
        rhs = eval_poch(a, q, m, policy) * eval_poch(a * q ** m, q, n, policy)
        assert abs(lhs - rhs) <= 10 * policy.eps * max(1, abs(lhs))


def test_poch_index_law_symbolic():
    for lhs, rhs in [("poch(a;q;k+n)", "poch(a;q;k)*poch(a*q^k;q;n)"),
                     ("poch(a;q;2*n)", "poch(a;q;n)*poch(a*q^n;q;n)"),
                     ("poch(a*q^n;q;inf)", "poch(a*q^n;q;k)*poch(a*q^(n+k);q;inf)")]:
        assert quotient(parse_term(lhs), parse_term(rhs)) == RatFunc(1)


@PROPS
@given(a=rationals, q=small_q, n=st.integers(0, 8))
def test_negative_index_law_exact(a, q, n):
    t = parse_term("poch(a;q;-n)*poch(a*q^(-n);q;n)")
    try:
        assert eval_term_exact(t, {"a": a, "q": q}, 0, n) == 1
    except PoleError:
        assert any(a * q ** (j - n) == 1 for j in range(n))


def test_negative_index_law_symbolic():
    assert quotient(parse_term("poch(a;q;-n)*poch(a*q^(-n);q;n)"), QHyperTerm()) == RatFunc(1)


# random terms built from grammar pieces
_monos = st.sampled_from(["a", "b*q", "a*z*q^n", "q^(1-n)/a", "c/(a*b)", "2*d", "q", "a^2*q/(b*c*d*e)"])
_lens = st.sampled_from(["k", "n", "2*n", "k+n", "n-1", "inf", "3"])
_piece = st.one_of(
    st.tuples(_monos, _lens, st.integers(-2, 2).filter(bool)).map(lambda p: f"poch({p[0]};q;{p[1]})^{p[2]}"),
    st.tuples(st.sampled_from(["a", "z", "q", "c/(a*b)"]), st.sampled_from(["k", "n", "2*k-n"]))
      .map(lambda p: f"pow({p[0]},{p[1]})"),
    st.sampled_from(["qbin2(k)", "qbin2(n)", "sgn(k)", "sgn(n)", "qkn()", "rf((1 - a*x^2)/(1 - a*y))", "3/4"]),
)


@PROPS
@given(st.lists(_piece, min_size=1, max_size=6))
def test_parse_print_round_trip(pieces):
    t = parse_term("*".join(pieces))
    text = print_term(t)
    assert parse_term(text) == t
    assert print_term(parse_term(text)) == text


_polys = st.lists(st.sampled_from(["1 - a*x", "1 - q*x", "x - b", "a*x*y - q", "1 + x^2*c", "q - y", "2"]),
                  min_size=1, max_size=4)


@PROPS
@given(num=_polys, den=_polys, pts=st.lists(st.tuples(rationals, rationals, rationals, rationals, rationals,
                                                        rationals), min_size=3, max_size=3))
def test_normalize_agrees_with_evaluation(num, den, pts):
    N = MultiPoly.const(1)
    D = MultiPoly.const(1)
    for f in num:
        N = N * parse_ratfunc(f).num
    for f in den:
        D = D * parse_ratfunc(f).num
    r = ratfunc_normalize(RatFunc(N, D))
    for vals in pts:
        pt = dict(zip("xyqabc", vals))
        dv = D.evaluate(pt)
        if Fr(dv) == 0 or Fr(r.den.evaluate(pt)) == 0:
            continue
        assert Fr(r.evaluate(pt)) == Fr(N.evaluate(pt)) / Fr(dv)
