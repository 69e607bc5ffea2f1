"""Exact fairness checking on a small allocation problem.

Utilities are scaled integers, so every comparison below is exact -- there
is no floating point anywhere in the fairness layer.
"""

from dpfair import (
    ConnectedAllocation,
    UtilityProfile,
    bundle_utility,
    is_ef_c,
    is_prop_c,
    top_k_utility,
    truncated_utility,
)

# Three agents, six items on a line.  Rows are per-agent item values.
profile = UtilityProfile.additive(
    [
        [5, 4, 0, 0, 1, 1],
        [1, 1, 3, 3, 1, 1],
        [0, 0, 0, 1, 4, 5],
    ]
)

# A connected allocation: agent 1 takes items 1-2, agent 2 takes 3-4, agent 3 takes 5-6.
allocation = ConnectedAllocation(spans=((1, 2), (3, 4), (5, 6)))

print("bundle values (exact rationals):")
for agent in profile.agents:
    value = bundle_utility(profile, agent, allocation.bundle(agent))
    print(f"  agent {agent}: u(A_{agent}) = {value}")

print()
print("is the allocation envy-free?            ", is_ef_c(profile, allocation, 0))
print("envy-free up to 1 item?                 ", is_ef_c(profile, allocation, 1))
print("proportional?                           ", is_prop_c(profile, allocation, 0))

# Truncated utilities: the value of a bundle after an adversary deletes the
# k most valuable items.  They power both private allocators.
print()
print("truncated utilities for agent 1 on items 1-6:")
everything = list(profile.items)
for k in range(4):
    print(f"  remove up to {k}: {truncated_utility(profile, 1, everything, k)}")

print()
print("best 2 items outside agent 2's bundle:",
      top_k_utility(profile, 2, [1, 2, 5, 6], 2))

# A deliberately unfair allocation: agent 3 gets everything.
greedy = ConnectedAllocation(spans=(None, None, (1, 6)))
print()
print("all items to agent 3:")
for c in range(0, 4):
    print(f"  EF{c}: {str(is_ef_c(profile, greedy, c)):5}   "
          f"PROP{c}: {is_prop_c(profile, greedy, c)}")
