"""From a summation formula to a certified q-WZ pair, one stage at a time.

Run with ``python3 demos/q_binomial_walkthrough.py``.
"""

from qwz import catalog
from qwz.engine import (build_F, check_conditions, companion, determine_constant, difference_ratio,
                        wz_discover)
from qwz.gosper import qgosper_solve
from qwz.grammar import pretty_term, ratfunc_text
from qwz.numeric import TruncationPolicy

policy = TruncationPolicy()
entry = catalog.get("q-binomial")
point = entry.sample_point()
print(f"{entry.title}: sum_k {pretty_term(entry.summand)} = {pretty_term(entry.closed_form)}")

# Dilate a by q^n and divide by the right side. Infinite factors stay symbolic.
F = build_F(entry)
print("F(n,k) =", pretty_term(F))

# The k-ratio of F(n+1,k) - F(n,k) no longer involves any infinite product.
r = difference_ratio(F)
print("ratio of the n-difference, in x = q^k, y = q^n:", ratfunc_text(r))

sol = qgosper_solve(r)
print("q-Gosper certificate y(x):", ratfunc_text(sol.y_rat))

pair = wz_discover(F)
print("G = cert * F with cert =", ratfunc_text(pair.cert))
print("pair identity holds exactly:", pair.check())

report, _ = check_conditions(pair, point, policy)
print("boundary conditions at", {k: str(v) for k, v in point.items()}, "->",
      {c: s.value for c, s in report.statuses().items()})

const = determine_constant(pair, entry, policy, point)
print(f"constant = {const.value} (setting {const.details['pins']}); "
      f"sum_k F(n,k) for n = 0..3 agrees: {const.details['n_independent']}")

comp = companion(pair, report, point, policy)
print("companion identity:", comp.statement)
for k, res in comp.residuals:
    print(f"  k = {k}: |lhs - rhs| = {float(res):.2e}")
