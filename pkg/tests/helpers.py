"""Checks shared by the property suite and the acceptance tests."""

import random
from fractions import Fraction as Fr

from qwz import catalog
from qwz.numeric import PoleError, mp, term_value
from qwz.terms import QHyperTerm, shift_ratio_k, shift_ratio_n

QS = [Fr(1, 2), Fr(1, 3), Fr(2, 5), Fr(-1, 2), Fr(3, 7)]


def catalog_terms(pairs):
    """Distinct terms appearing in the catalog (sides, D, printed z) plus the discovered F and G."""
    seen, out = set(), []

    def add(label, t, params):
        if t is not None and t != QHyperTerm() and t not in seen:
            seen.add(t)
            out.append((label, t, tuple(params)))

    for i in catalog.list_ids():
        e = catalog.get(i)
        for name in ("summand", "closed_form", "D", "reference_z", "summand_negative"):
            add(f"{i}:{name}", getattr(e, name), e.params)
        for side in e.sides():
            for prod in side:
                add(f"{i}:coef", prod.coef, e.params)
                for s in prod.series:
                    add(f"{i}:series", s.term, e.params)
        if i in pairs:
            add(f"{i}:F", pairs[i].F, e.params)
            add(f"{i}:G", pairs[i].G, e.params)
    return out


def shift_ratio_check(terms, policy, seed=2024, n_points=5, n_pairs=50):
    """(checked, failures) for numeric quotients against shift_ratio_k / shift_ratio_n."""
    rng = random.Random(seed)
    tol = 10 * policy.eps
    checked, failures = 0, []
    for label, t, params in terms:
        rk, rn = shift_ratio_k(t), shift_ratio_n(t)
        for _ in range(n_points):
            pt = {l: Fr(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9)) for l in params}
            pt["q"] = rng.choice(QS)
            for _ in range(n_pairs):
                k, n = rng.randint(0, 12), rng.randint(0, 12)
                xy = dict(pt, x=pt["q"] ** k, y=pt["q"] ** n)
                for ratio, (k2, n2) in ((rk, (k + 1, n)), (rn, (k, n + 1))):
                    try:
                        sym = Fr(ratio.evaluate(xy))
                        with policy.workdps():
                            v0 = term_value(t, pt, k, n, policy).result()
                            if v0 == 0:
                                continue
                            v1 = term_value(t, pt, k2, n2, policy).result()
                            ok = abs(v1 / v0 - mp(sym)) <= tol * max(1, abs(mp(sym)))
                    except (PoleError, ZeroDivisionError):
                        continue
                    checked += 1
                    if not ok:
                        failures.append((label, pt, k, n))
    return checked, failures


def telescoping_window_residual(pair, pt, n, k1, k2, policy):
    """|sum_{k=K1}^{K2} (F(n+1,k) - F(n,k)) - (G(n,K2+1) - G(n,K1))| and its scale, or None at a pole."""
    with policy.workdps():
        try:
            terms = [term_value(pair.F, pt, k, n + 1, policy).result()
                     - term_value(pair.F, pt, k, n, policy).result() for k in range(k1, k2 + 1)]
            g2 = term_value(pair.G, pt, k2 + 1, n, policy).result()
            g1 = term_value(pair.G, pt, k1, n, policy).result()
        except PoleError:
            return None
        scale = max([1, abs(g1), abs(g2)] + [abs(v) for v in terms])
        return abs(sum(terms) - (g2 - g1)), scale
