"""Definition-level brute-force oracles shared across the test suite.

Everything here evaluates fairness notions straight from their set-quantified
definitions with exact rational arithmetic, independently of the library's
fast paths.  Tests freeze expected values computed by these oracles; the
oracles never call the code paths they are checking.
"""

import itertools
from fractions import Fraction

import numpy as np
import pytest

from dpfair.core import UtilityProfile


def brute_bundle(profile, agent, items):
    """Item-by-item summation (additive) or direct table lookup (general)."""
    items = tuple(items)
    if profile.kind == "additive":
        total = Fraction(0)
        for j in items:
            total += Fraction(profile.values[agent - 1][j - 1], profile.scale)
        return total
    mask = 0
    for j in items:
        mask |= 1 << (j - 1)
    return Fraction(profile.tables[agent - 1][mask], profile.scale)


def all_subsets_up_to(pool, k):
    pool = tuple(pool)
    for size in range(min(k, len(pool)) + 1):
        yield from itertools.combinations(pool, size)


def brute_truncated(profile, agent, items, k):
    """min over all T subseteq M with |T| <= k of u(items minus T)."""
    items = set(items)
    best = None
    for gone in all_subsets_up_to(range(1, profile.m + 1), k):
        value = brute_bundle(profile, agent, items.difference(gone))
        if best is None or value < best:
            best = value
    return best


def brute_top_k(profile, agent, items, k):
    """max over all S subseteq items with |S| <= k of u(S)."""
    best = Fraction(0)
    for kept in all_subsets_up_to(items, k):
        value = brute_bundle(profile, agent, kept)
        if value > best:
            best = value
    return best


def brute_is_ef_c(profile, allocation, c):
    bundles = allocation.bundles()
    for i in range(1, profile.n + 1):
        own = brute_bundle(profile, i, bundles[i - 1])
        for other in range(1, profile.n + 1):
            if other == i:
                continue
            fine = any(
                own >= brute_bundle(profile, i, set(bundles[other - 1]).difference(gone))
                for gone in all_subsets_up_to(bundles[other - 1], c)
            )
            if not fine:
                return False
    return True


def brute_is_prop_c(profile, allocation, c):
    bundles = allocation.bundles()
    everything = range(1, profile.m + 1)
    for i in range(1, profile.n + 1):
        own = brute_bundle(profile, i, bundles[i - 1])
        share = brute_bundle(profile, i, everything) / profile.n
        outside = [j for j in everything if j not in bundles[i - 1]]
        fine = any(
            own >= share - brute_bundle(profile, i, made_up)
            for made_up in all_subsets_up_to(outside, c)
        )
        if not fine:
            return False
    return True


def brute_is_ef_d_wrt_truncated(profile, allocation, d, k):
    """EF-d measured under k-truncated utilities, straight from the definition."""
    bundles = allocation.bundles()
    for i in range(1, profile.n + 1):
        own = brute_truncated(profile, i, bundles[i - 1], k)
        for other in range(1, profile.n + 1):
            if other == i:
                continue
            fine = any(
                own
                >= brute_truncated(
                    profile, i, set(bundles[other - 1]).difference(gone), k
                )
                for gone in all_subsets_up_to(range(1, profile.m + 1), d)
            )
            if not fine:
                return False
    return True


def brute_score(profile, allocation, g):
    """Ascending scan of the truncation-score definition via the brute EF check."""
    for t in range(1, g + 1):
        if brute_is_ef_d_wrt_truncated(profile, allocation, 2 * t, g - t):
            return -t
    return -g


def random_additive_profile(rng, n, m, max_value=6, scale=1):
    values = tuple(
        tuple(int(rng.integers(0, max_value + 1)) for _ in range(m)) for _ in range(n)
    )
    return UtilityProfile(n=n, m=m, scale=scale, values=values)


def random_monotone_table(rng, m, max_step=4):
    """A random monotone set function: value grows by a random step per added item."""
    size = 1 << m
    table = [0] * size
    for mask in range(1, size):
        low = max(table[mask & ~(1 << j)] for j in range(m) if mask >> j & 1)
        table[mask] = low + int(rng.integers(0, max_step + 1))
    return tuple(table)


def random_general_profile(rng, n, m, scale=1):
    return UtilityProfile.general(
        tables=[random_monotone_table(rng, m) for _ in range(n)], scale=scale
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
