import pytest

from qwz.exactnum import MultiPoly, RatFunc, q_resultant_roots
from qwz.gosper import antidifference, gosper_normal_form, qgosper_solve
from qwz.grammar import parse_ratfunc as P, parse_term
from qwz.terms import quotient


def _normal_form_invariant(r, nf):
    assert nf.ratio() == RatFunc.lift(r)
    assert q_resultant_roots(nf.a_poly, nf.b_poly) == set() or all(
        nf.a_poly.gcd(nf.b_poly.q_scale("x", j).num).degree("x") <= 0
        for j in q_resultant_roots(nf.a_poly, nf.b_poly))


def _same_up_to_constant(p, text):
    r = RatFunc(p, P(text).num)
    return "x" not in r.variables() and not r.is_zero()


def test_normal_form_generic_q_binomial():
    r = P("z*(1-a*x)/(1-q*x)")
    nf = gosper_normal_form(r)
    _normal_form_invariant(r, nf)
    assert _same_up_to_constant(nf.a_poly, "z*(1-a*x)")
    assert _same_up_to_constant(nf.b_poly, "1-q*x")
    assert nf.c_poly.is_const()


def test_normal_form_moves_shift_into_c():
    r = P("(1-q*x)/(1-x)")
    nf = gosper_normal_form(r)
    _normal_form_invariant(r, nf)
    assert nf.a_poly.is_const() and nf.b_poly.is_const()
    assert _same_up_to_constant(nf.c_poly, "1-x")


def test_normal_form_trivial():
    nf = gosper_normal_form(RatFunc(1))
    assert nf.a_poly.is_const() and nf.b_poly.is_const() and nf.c_poly.is_const()


def test_normal_form_longer_dispersion():
    r = P("(1-a*q^3*x)*(1-b*x)/((1-a*x)*(1-q*x))")
    nf = gosper_normal_form(r)
    _normal_form_invariant(r, nf)
    assert nf.c_poly.degree("x") == 3


def test_solve_q_power():
    sol = qgosper_solve(P("q"))
    assert sol.y_rat == P("1/(q-1)")


def test_solve_constant_term_has_no_certificate():
    assert qgosper_solve(RatFunc(1)) is None


def test_solve_non_q_structure():
    assert qgosper_solve(RatFunc(2)).y_rat == RatFunc(1)  # 2^k: (2^{k+1}-2^k) = 2^k
    assert qgosper_solve(P("x")) is None                  # q^{C(k,2)} is not q-Gosper summable


def test_q_binomial_pair_via_difference_ratio():
    from qwz.engine import difference_ratio
    F = parse_term("poch(a*q^n;q;k)*poch(z;q;inf)*pow(z,k)/poch(q;q;k)/poch(a*z*q^n;q;inf)")
    sol = qgosper_solve(difference_ratio(F))
    assert sol is not None
    r = difference_ratio(F)
    assert (r * sol.y_rat.q_scale("x", 1) - sol.y_rat - 1).is_zero()


def test_antidifference_q_power():
    ad = antidifference(parse_term("pow(q,k)"))
    assert ad.cert == P("1/(q-1)")


def test_antidifference_in_n_of_partial_theta_combination():
    from qwz import catalog
    from qwz.engine import telescope_combination
    e = catalog.get("andrews-warnaar-1")
    T = telescope_combination(e.recurrence, e.D)
    ad = antidifference(T, "n")
    assert quotient(ad.term, e.reference_z) == RatFunc(1)


def test_antidifference_none():
    assert antidifference(parse_term("qbin2(k)")) is None
