from fractions import Fraction as Fr

import mpmath
import pytest

from qwz import catalog
from qwz.engine import (EngineError, FunctionalRecurrence, ProofObject, Status, SubstitutionRecipe,
                        WZPair, ZeroDifference, build_F, cert_from_json, check_conditions, companion,
                        compare_reference, determine_constant, difference_ratio, iterate_AnBn, n_limit,
                        telescope_certify, wz_discover)
from qwz.exactnum import RatFunc
from qwz.grammar import parse_ratfunc as P, parse_term, print_term
from qwz.numeric import eval_term, mp, term_value
from qwz.terms import QHyperTerm, quotient


def test_recipe_must_be_nonempty_and_present():
    with pytest.raises(EngineError):
        SubstitutionRecipe(())
    with pytest.raises(EngineError):
        build_F(catalog.get("q-binomial"), SubstitutionRecipe(("c",)))


def test_build_F_q_binomial():
    e = catalog.get("q-binomial")
    assert quotient(build_F(e), e.reference_F) == RatFunc(1)


@pytest.mark.parametrize("ident", ["q-gauss", "6phi5", "ramanujan-1psi1", "bailey-6psi6"])
def test_build_F_matches_printed_F(ident):
    e = catalog.get(ident)
    assert quotient(build_F(e), e.reference_F) == RatFunc(1)


def test_difference_ratio_numeric_oracle(policy):
    e = catalog.get("q-binomial")
    F = build_F(e)
    r = difference_ratio(F)
    pt = e.sample_point()
    with policy.workdps():
        for n, k in [(0, 0), (1, 2), (3, 1), (2, 5)]:
            d = lambda kk: eval_term(F, pt, kk, n + 1, policy) - eval_term(F, pt, kk, n, policy)
            num = d(k + 1) / d(k)
            xy = {**pt, "x": pt["q"] ** k, "y": pt["q"] ** n}
            assert abs(num - mp(Fr(r.evaluate(xy)))) < 1e-28 * abs(num)


def test_difference_ratio_zero_signal():
    with pytest.raises(ZeroDifference):
        difference_ratio(parse_term("poch(a;q;k)*pow(z,k)/poch(q;q;k)"))


def test_q_gauss_certificate(pairs):
    assert pairs["q-gauss"].cert == P("-a*y*(1-x)/(1-a*y)")


@pytest.mark.parametrize("ident", ["q-binomial", "q-gauss", "6phi5", "ramanujan-1psi1", "bailey-6psi6"])
def test_discovered_pairs_exact_and_match_printed_G(ident, pairs):
    pair = pairs[ident]
    assert pair.check()
    assert compare_reference(pair, catalog.get(ident).reference_G) == {"match": True}


def test_compare_reference_reports_mismatch(pairs):
    bad = pairs["q-gauss"].G.with_prefactor(P("q"))
    out = compare_reference(pairs["q-gauss"], bad)
    assert out["match"] is False and "q" in out["reason"]


def test_conditions_q_binomial(pairs, policy):
    e = catalog.get("q-binomial")
    rep, limits = check_conditions(pairs["q-binomial"], e.sample_point(), policy)
    assert set(rep.statuses().values()) == {Status.PASS}
    assert rep.to_json()["C1"]["evidence"]


def test_conditions_1psi1(pairs, policy):
    e = catalog.get("ramanujan-1psi1")
    rep, _ = check_conditions(pairs["ramanujan-1psi1"], e.sample_point(), policy, bilateral=True)
    assert rep.c1.status is Status.PASS
    comp = companion(pairs["ramanujan-1psi1"], rep, e.sample_point(), policy, bilateral=True)
    assert comp.status is Status.NOT_APPLICABLE


def test_collapse_constants(pairs, policy):
    for ident in ("q-binomial", "q-gauss", "6phi5"):
        res = determine_constant(pairs[ident], catalog.get(ident), policy)
        assert res.value == 1 and res.method == "collapse"


def test_reduction_constant_and_n_independence(pairs, policy):
    e = catalog.get("ramanujan-1psi1")
    res = determine_constant(pairs["ramanujan-1psi1"], e, policy, e.sample_point())
    assert res.value == 1 and res.details["target"] == "q-binomial"
    assert res.details["n_independent"]


def test_n_limit_q_binomial(pairs):
    f = n_limit(pairs["q-binomial"].F)
    # f_k = (z;q)_inf z^k / (q;q)_k
    assert quotient(f, parse_term("poch(z;q;inf)*pow(z,k)/poch(q;q;k)")) == RatFunc(1)


@pytest.mark.parametrize("ident, ks", [("q-binomial", (0, 1, 3)), ("q-binomial", (0,)), ("6phi5", (0, 1, 3))])
def test_companion_residuals(ident, ks, pairs, policy):
    e = catalog.get(ident)
    rep, _ = check_conditions(pairs[ident], e.sample_point(), policy)
    c = companion(pairs[ident], rep, e.sample_point(), policy, ks)
    assert c.status is Status.PASS
    assert all(r < 10 * policy.eps for _, r in c.residuals)


def test_proof_object_json_round_trip(pairs):
    pair = pairs["q-gauss"]
    po = ProofObject("q-gauss", SubstitutionRecipe(("a", "c")), pair, True, None, None, None, 7)
    d = po.to_dict()
    assert list(d)[:9] == ["identity_id", "recipe", "F", "cert", "exact_check", "conditions",
                           "constant", "companion", "seed"]
    assert parse_term(d["F"]) == pair.F
    assert cert_from_json(d["cert"]) == pair.cert


def test_telescope_trivial_homogeneous():
    rec = FunctionalRecurrence((RatFunc(1), P("-1")))
    out = telescope_certify(rec, None)
    assert out.status is Status.PASS and out.z is None


def test_telescope_aw1(policy):
    e = catalog.get("andrews-warnaar-1")
    out = telescope_certify(e.recurrence, e.D, policy, e.sample_point(), e.reference_z)
    assert out.exact_check and out.z0_zero and out.reference_match["match"]
    assert out.limit_symbolic.is_zero() and out.status is Status.PASS


def test_anbn_degenerate_a_zero():
    e = catalog.get("andrews-warnaar-1")
    rep = iterate_AnBn(e.recurrence, 10, {"q": Fr(1, 2), "a": Fr(0)})
    assert all(a == 1 for a in rep.A) and all(b == 0 for b in rep.B)


def test_anbn_needs_order_two():
    with pytest.raises(EngineError):
        iterate_AnBn(FunctionalRecurrence((RatFunc(1), RatFunc(1))), 5, {"q": Fr(1, 2), "a": Fr(1, 3)})


def test_finite_telescoping_unilateral_windows(pairs, policy):
    e = catalog.get("q-gauss")
    pair, pt = pairs["q-gauss"], e.sample_point()
    with policy.workdps():
        for n, k1, k2 in [(0, 0, 4), (2, 3, 9), (4, 0, 12)]:
            lhs = sum(term_value(pair.F, pt, k, n + 1, policy).result()
                      - term_value(pair.F, pt, k, n, policy).result() for k in range(k1, k2 + 1))
            rhs = (term_value(pair.G, pt, k2 + 1, n, policy).result()
                   - term_value(pair.G, pt, k1, n, policy).result())
            assert abs(lhs - rhs) < 10 * policy.eps * max(1, abs(rhs))
