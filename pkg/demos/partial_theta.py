"""Identities for partial theta functions, proved by telescoping in n.

A functional recurrence in a is turned into a telescoping sum, whose
antidifference z_n vanishes at n = 0 and has a known limit.  Iterating the
recurrence then pins the function down numerically.
"""

from fractions import Fraction

from qwz import catalog
from qwz.engine import iterate_AnBn, telescope_certify
from qwz.grammar import pretty_term, ratfunc_text
from qwz.numeric import TruncationPolicy

policy = TruncationPolicy()

for ident in ("andrews-warnaar-1", "andrews-warnaar-2"):
    e = catalog.get(ident)
    pt = e.sample_point()
    rec = telescope_certify(e.recurrence, e.D, policy, pt, e.reference_z)
    print(f"\n{e.title}")
    print("  z_n =", pretty_term(rec.z))
    print(f"  exact: {rec.exact_check}, z_0 = 0: {rec.z0_zero}, printed z_n matches: "
          f"{rec.reference_match['match']}")
    print(f"  lim z_n = {ratfunc_text(rec.limit_symbolic)} (numerically {float(rec.limit_numeric):.15f})")
    lhs, rhs, ok = catalog.verify_numeric(e, pt, policy)
    print(f"  both sides at the sample point: {float(lhs):.15f} / {float(rhs):.15f}, agree: {ok}")
    rep = iterate_AnBn(e.recurrence, 60, pt)
    print(f"  A_0 = {rep.A[0]}, B_0 = {rep.B[0]}, |A_60 - A_59| = {float(rep.diffs[-1]):.1e}")

jtp = catalog.specialize(catalog.get("andrews-warnaar-2"), {"b": "q/a"})
lhs, rhs, ok = catalog.verify_numeric(jtp, {"q": Fraction(1, 2), "a": Fraction(1, 3)}, policy)
print(f"\nb = q/a gives the triple product: {float(lhs):.15f} vs {float(rhs):.15f}, agree: {ok}")
