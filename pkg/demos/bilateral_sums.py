"""Two-sided sums: Ramanujan's 1psi1 and Bailey's 6psi6.

For these the WZ pair still certifies the identity, but the companion identity
is unavailable, and the numbers show why.
"""

from fractions import Fraction

from qwz import catalog
from qwz.engine import build_F, check_conditions, determine_constant, wz_discover
from qwz.grammar import ratfunc_text
from qwz.numeric import TruncationPolicy

policy = TruncationPolicy()

for ident in ("ramanujan-1psi1", "bailey-6psi6"):
    e = catalog.get(ident)
    pt = e.sample_point()
    lhs, rhs, ok = catalog.verify_numeric(e, pt, policy)
    print(f"\n{e.title} at {({k: str(v) for k, v in pt.items()})}")
    print(f"  two-sided sum {float(lhs):.15f}, product side {float(rhs):.15f}, agree: {ok}")
    pair = wz_discover(build_F(e))
    print("  certificate:", ratfunc_text(pair.cert))
    const = determine_constant(pair, e, policy)
    print(f"  constant {const.value}, by reducing to {const.details['target']} "
          f"with {const.details['pins']}")
    report, _ = check_conditions(pair, pt, policy, bilateral=True)
    for name, res in (("C1", report.c1), ("C3", report.c3)):
        print(f"  {name}: {res.status.value}  {res.evidence}")

# The 6psi6 point used in the acceptance criteria is special: (q/a;q)_inf vanishes there.
e = catalog.get("bailey-6psi6")
special = {"q": Fraction(1, 2), "a": Fraction(1, 4), "b": 2, "c": 2, "d": 2, "e": 2}
lhs, rhs, ok = catalog.verify_numeric(e, {k: Fraction(v) for k, v in special.items()}, policy)
print(f"\n6psi6 at a = 1/4, b = c = d = e = 2: lhs = {float(lhs):.3e}, rhs = {float(rhs)}, agree: {ok}")
