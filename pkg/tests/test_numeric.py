from fractions import Fraction as Fr

import mpmath
import pytest

from qwz.grammar import parse_term
from qwz.numeric import (NonConvergence, PoleError, TruncationPolicy, eval_poch, eval_term, mp,
                         partial_sum, reflect_sum, sum_series)


def close(u, v, tol=Fr(1, 10 ** 29)):
    with mpmath.workdps(50):
        return abs(mp(u) - mp(v)) <= mp(tol) * max(1, abs(mp(v)))


def test_policy_invariant():
    with pytest.raises(ValueError):
        TruncationPolicy(precision_digits=20, epsilon=Fr(1, 10 ** 30))
    TruncationPolicy(precision_digits=31, epsilon=Fr(1, 10 ** 30))


@pytest.mark.parametrize("arg, length, expected", [
    (Fr(1, 2), 0, 1),
    (Fr(1, 2), 2, Fr(3, 8)),
    (Fr(1, 3), -1, 3),          # 1/(1 - a/q) with a = 1/3, q = 1/2
    (Fr(1, 3), -2, 1 / ((1 - Fr(1, 3) * 4) * (1 - Fr(1, 3) * 2))),
])
def test_eval_poch_finite(arg, length, expected, policy):
    assert close(eval_poch(arg, Fr(1, 2), length, policy), expected)


def test_eval_poch_negative_pole(policy):
    with pytest.raises(PoleError):
        eval_poch(Fr(1, 2), Fr(1, 2), -1, policy)


def test_eval_poch_infinite_against_mpmath(policy):
    with mpmath.workdps(60):
        ref = mpmath.qp(mpmath.mpf(1) / 3, mpmath.mpf(1) / 2)
    assert close(eval_poch(Fr(1, 3), Fr(1, 2), None, policy), ref)


def test_infinite_product_digits_stable_under_smaller_eps():
    coarse = eval_poch(Fr(2, 7), Fr(3, 5), None, TruncationPolicy(40, Fr(1, 10 ** 20)))
    fine = eval_poch(Fr(2, 7), Fr(3, 5), None, TruncationPolicy(40, Fr(1, 10 ** 35)))
    assert abs(coarse - fine) < 1e-19


def test_eval_term_examples(policy):
    t = parse_term("poch(a;q;k)*pow(z,k)/poch(q;q;k)")
    pt = {"q": Fr(1, 2), "a": Fr(1, 3), "z": Fr(1, 4)}
    assert close(eval_term(t, pt, 0, 0, policy), 1)
    assert close(eval_term(t, pt, 1, 0, policy), Fr(1, 3))
    theta = parse_term("sgn(k)*pow(a,k)*qbin2(k)")
    assert close(eval_term(theta, pt, 2, 0, policy), Fr(1, 18))


def test_reciprocal_q_factorial_vanishes_at_negative_k(policy):
    t = parse_term("pow(z,k)/poch(q;q;k)")
    assert eval_term(t, {"q": Fr(1, 2), "z": Fr(1, 3)}, -2, 0, policy) == 0


def test_removable_singularity_is_a_limit(policy):
    # (q^-2;q)_k / (q^-2;q)_k would be 0/0 at k >= 3 if evaluated factor by factor
    t = parse_term("poch(a;q;k)/poch(a*q;q;k)")
    v = eval_term(t, {"q": Fr(1, 2), "a": Fr(1, 2)}, 3, 0, policy)
    # (a;q)_3/(aq;q)_3 = (1-a)/(1-aq^3)
    assert close(v, (1 - Fr(1, 2)) / (1 - Fr(1, 16)))


def test_geometric_series(policy):
    res = sum_series(parse_term("pow(q,k)"), assignment={"q": Fr(1, 2)}, policy=policy)
    assert close(res.value, 2)
    assert res.error_estimate < policy.eps


def test_q_binomial_theorem(policy):
    pt = {"q": Fr(1, 2), "a": Fr(1, 3), "z": Fr(1, 4)}
    lhs = sum_series(parse_term("poch(a;q;k)*pow(z,k)/poch(q;q;k)"), assignment=pt, policy=policy).value
    with policy.workdps():
        rhs = eval_poch(Fr(1, 12), Fr(1, 2), None, policy) / eval_poch(Fr(1, 4), Fr(1, 2), None, policy)
    assert close(lhs, rhs)


def test_ramanujan_1psi1_bilateral(policy):
    pt = {"q": Fr(1, 2), "a": Fr(4), "b": Fr(1, 2), "z": Fr(1, 3)}
    t = parse_term("poch(a;q;k)*pow(z,k)/poch(b;q;k)")
    lhs = sum_series(t, support="bilateral", assignment=pt, policy=policy).value
    rhs = eval_term(parse_term(
        "poch(q;q;inf)*poch(b/a;q;inf)*poch(a*z;q;inf)*poch(q/(a*z);q;inf)"
        "/poch(b;q;inf)/poch(q/a;q;inf)/poch(z;q;inf)/poch(b/(a*z);q;inf)"), pt, 0, 0, policy)
    assert close(lhs, rhs)
    assert close(reflect_sum(t, pt, policy), rhs)


def test_divergent_series_signals(policy):
    with pytest.raises(NonConvergence):
        sum_series(parse_term("pow(q,k)"), assignment={"q": Fr(3, 2)},
                   policy=TruncationPolicy(max_terms=200))


def test_partial_sum(policy):
    v = partial_sum(parse_term("pow(q,k)"), {"q": Fr(1, 2)}, 0, 0, 3, policy)
    assert close(v, Fr(7, 4))
