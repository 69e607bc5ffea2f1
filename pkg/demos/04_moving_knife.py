"""The private moving-knife allocator and its budget ledger.

The allocator halves the agent set recursively.  Each agent reports a cut
position through the above-threshold mechanism; the median report becomes
the cut.  Early (coarse) levels get smaller privacy budgets than later
(fine) ones, and the per-level budgets sum to less than the total epsilon
-- exactly, in rational arithmetic.
"""

from fractions import Fraction

import numpy as np

from dpfair import PrivacyParams, RandomStream, UtilityProfile, dp_moving_knife, is_prop_c
from dpfair.prop_knife import budget_schedule, exact_budget_total, proof_chain_c

rng = np.random.default_rng(11)
n, m = 4, 60
values = tuple(tuple(int(v) for v in rng.integers(0, 100, size=m)) for _ in range(n))
profile = UtilityProfile(n=n, m=m, scale=100, values=values)
params = PrivacyParams(epsilon=5.0, beta=0.1)

print(f"instance: n={n} agents, m={m} items, epsilon={params.epsilon}")
print()
print("budget schedule (level b covers all calls with ceil(log2 |I|) = b):")
for b, (eps_b, g_b) in sorted(budget_schedule(m, n, params).items()):
    exact = Fraction(params.epsilon) * Fraction(2 ** (b - 1), 3**b)
    print(f"  level {b}: epsilon_b = {eps_b:.6f} (= {exact}), g_b = {g_b}")

allocation, trace = dp_moving_knife(profile, params, RandomStream(seed=3))
print()
print("one run (seed 3):")
for record in trace.records:
    hs = ", ".join(f"{a}->{h}" for a, h in record.h_values)
    print(f"  depth {record.depth}: agents {record.agents} on [{record.lo},{record.hi}]"
          f"  cuts {{{hs}}}  split after item {record.split}")
print(f"  final intervals: {allocation.spans}")

used = trace.levels_used()
spent = exact_budget_total(params.epsilon, used)
print()
print(f"levels used: {used}; exact budget spent: {spent} <= {params.epsilon}:",
      spent <= Fraction(params.epsilon))

c = proof_chain_c(m, n, params)
print()
print(f"the accuracy analysis promises PROP{c} with probability >= {1 - params.beta}")
print("(the bound is loose at desk scale; the failure rate below is typically 0)")
failures = sum(
    not is_prop_c(profile, dp_moving_knife(profile, params, RandomStream(s))[0], c)
    for s in range(200)
)
print(f"failures at c={c} over 200 seeded runs: {failures}")

best = min(c for c in range(m + 1) if is_prop_c(profile, allocation, c))
print(f"the seed-3 run above is in fact PROP{best}")
