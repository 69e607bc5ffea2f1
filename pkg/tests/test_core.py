from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpfair.core import (
    Adjacency,
    Allocation,
    ConnectedAllocation,
    UtilityProfile,
    adjacency_distance,
    bundle_utility,
    is_ef_c,
    is_ef_d_wrt_truncated,
    is_prop_c,
    top_k_utility,
    truncated_utility,
)
from dpfair.ef_em import enumerate_connected_allocations

from conftest import (
    brute_bundle,
    brute_is_ef_c,
    brute_is_ef_d_wrt_truncated,
    brute_is_prop_c,
    brute_top_k,
    brute_truncated,
    random_additive_profile,
    random_general_profile,
)


def binary_profile_from_bits(n, m, bits):
    values = tuple(
        tuple((bits >> (i * m + j)) & 1 for j in range(m)) for i in range(n)
    )
    return UtilityProfile(n=n, m=m, scale=1, values=values)


# ---------------------------------------------------------------------------
# profile construction and validation
# ---------------------------------------------------------------------------


def test_profile_shape_validation():
    with pytest.raises(ValueError):
        UtilityProfile(n=2, m=2, scale=1, values=((1, 2),))
    with pytest.raises(ValueError):
        UtilityProfile(n=1, m=2, scale=1, values=((1, -2),))
    with pytest.raises(ValueError):
        UtilityProfile(n=1, m=2, scale=0, values=((1, 2),))


def test_general_profile_validation():
    # not monotone: {1} worth more than {1,2}
    with pytest.raises(ValueError):
        UtilityProfile.general(tables=[(0, 5, 1, 4)])
    # empty set must be worth 0
    with pytest.raises(ValueError):
        UtilityProfile.general(tables=[(1, 1, 1, 1)])
    good = UtilityProfile.general(tables=[(0, 2, 3, 4)])
    assert good.kind == "general" and good.m == 2 and good.values == ((2, 3),)
    with pytest.raises(ValueError):
        UtilityProfile(n=1, m=17, scale=1, values=((0,) * 17,), kind="general",
                       tables=((0,) * (1 << 17),))


def test_binary_predicate():
    assert UtilityProfile.additive([[0, 1], [1, 1]]).is_binary()
    assert not UtilityProfile.additive([[0, 2]]).is_binary()
    assert UtilityProfile.additive([[0, 3]], scale=3).is_binary()


def test_connected_allocation_validation():
    ConnectedAllocation(spans=((1, 2), (3, 3)))
    ConnectedAllocation(spans=(None, (1, 3)))
    with pytest.raises(ValueError):
        ConnectedAllocation(spans=((1, 2), (2, 3)))  # overlap
    with pytest.raises(ValueError):
        ConnectedAllocation(spans=((1, 1), (3, 3)))  # gap
    with pytest.raises(ValueError):
        ConnectedAllocation(spans=((2, 1),))  # inverted span


def test_owner_allocation_validation():
    a = Allocation(n=2, owners=(1, 2, 2))
    assert a.bundle(2) == (2, 3)
    with pytest.raises(ValueError):
        Allocation(n=2, owners=(1, 3))


# ---------------------------------------------------------------------------
# bundle / truncated / top-k utilities
# ---------------------------------------------------------------------------


def test_bundle_utility_examples():
    p = UtilityProfile.additive([[3, 1, 2]])
    assert bundle_utility(p, 1, [1, 2, 3]) == 6
    assert bundle_utility(p, 1, []) == 0
    g = UtilityProfile.general(tables=[(0, 1, 1, 2)])
    assert bundle_utility(g, 1, []) == 0


def test_bundle_utility_matches_per_item_summation(rng):
    for _ in range(25):
        bits = int(rng.integers(0, 1 << 8))
        p = binary_profile_from_bits(2, 4, bits)
        for agent in (1, 2):
            for size in range(5):
                items = tuple(int(v) for v in rng.choice(4, size=size, replace=False) + 1)
                assert bundle_utility(p, agent, items) == brute_bundle(p, agent, items)


def test_bundle_utility_index_errors():
    p = UtilityProfile.additive([[1, 2]])
    with pytest.raises(IndexError):
        bundle_utility(p, 2, [1])
    with pytest.raises(IndexError):
        bundle_utility(p, 1, [3])


def test_truncated_utility_examples():
    p = UtilityProfile.additive([[3, 1, 2]])
    assert truncated_utility(p, 1, [1, 2, 3], 1) == 3
    assert truncated_utility(p, 1, [1, 2, 3], 3) == 0
    assert truncated_utility(p, 1, [1, 2], 5) == 0


def test_truncated_utility_general_matches_brute_force(rng):
    for _ in range(8):
        p = random_general_profile(rng, n=1, m=4)
        items = tuple(int(v) for v in rng.choice(4, size=3, replace=False) + 1)
        for k in range(5):
            assert truncated_utility(p, 1, items, k) == brute_truncated(p, 1, items, k)


def test_top_k_utility_examples():
    p = UtilityProfile.additive([[3, 1, 2]])
    assert top_k_utility(p, 1, [1, 2, 3], 2) == 5
    assert top_k_utility(p, 1, [1, 2, 3], 0) == 0


def test_top_k_utility_general_matches_brute_force(rng):
    for _ in range(8):
        p = random_general_profile(rng, n=1, m=4)
        items = tuple(int(v) for v in rng.choice(4, size=3, replace=False) + 1)
        for k in range(4):
            assert top_k_utility(p, 1, items, k) == brute_top_k(p, 1, items, k)


def test_fractional_scale_is_exact():
    p = UtilityProfile.additive([[1, 1, 1]], scale=3)
    assert bundle_utility(p, 1, [1, 2, 3]) == 1
    assert truncated_utility(p, 1, [1, 2, 3], 1) == Fraction(2, 3)


# ---------------------------------------------------------------------------
# fairness checkers
# ---------------------------------------------------------------------------


def test_is_ef_c_examples():
    same = UtilityProfile.additive([[1, 1], [1, 1]])
    split = ConnectedAllocation(spans=((1, 1), (2, 2)))
    assert is_ef_c(same, split, 0)

    skew = UtilityProfile.additive([[0, 1], [0, 1]])
    assert not is_ef_c(skew, split, 0)
    assert is_ef_c(skew, split, 1)


def test_is_ef_c_matches_brute_force_on_binary_instances(rng):
    allocations = list(enumerate_connected_allocations(4, 2))
    for _ in range(12):
        p = binary_profile_from_bits(2, 4, int(rng.integers(0, 1 << 8)))
        for allocation in allocations:
            for c in range(4):
                assert is_ef_c(p, allocation, c) == brute_is_ef_c(p, allocation, c)


def test_is_prop_c_examples():
    p = UtilityProfile.additive([[1, 1], [1, 1]])
    assert is_prop_c(p, ConnectedAllocation(spans=((1, 1), (2, 2))), 0)
    dump = ConnectedAllocation(spans=(None, (1, 2)))
    assert not is_prop_c(p, dump, 0)
    assert is_prop_c(p, dump, 1)


def test_is_prop_c_matches_brute_force(rng):
    allocations = list(enumerate_connected_allocations(5, 3))
    for _ in range(10):
        p = random_additive_profile(rng, n=3, m=5)
        for allocation in rng.choice(len(allocations), size=8, replace=False):
            allocation = allocations[int(allocation)]
            for c in range(3):
                assert is_prop_c(p, allocation, c) == brute_is_prop_c(p, allocation, c)


def test_ef_d_wrt_truncated_examples(rng):
    zero = UtilityProfile.additive([[0, 0, 0], [0, 0, 0]])
    for allocation in enumerate_connected_allocations(3, 2):
        assert is_ef_d_wrt_truncated(zero, allocation, 0, 0)
        assert is_ef_d_wrt_truncated(zero, allocation, 2, 1)

    # k = 0 reduces exactly to plain EF-d
    for _ in range(10):
        p = binary_profile_from_bits(2, 3, int(rng.integers(0, 1 << 6)))
        for allocation in enumerate_connected_allocations(3, 2):
            for d in range(3):
                assert is_ef_d_wrt_truncated(p, allocation, d, 0) == is_ef_c(
                    p, allocation, d
                )


def test_ef_d_wrt_truncated_matches_brute_force(rng):
    allocations = list(enumerate_connected_allocations(4, 2))
    for _ in range(6):
        p = binary_profile_from_bits(2, 4, int(rng.integers(0, 1 << 8)))
        for allocation in allocations:
            assert is_ef_d_wrt_truncated(p, allocation, 0, 1) == brute_is_ef_d_wrt_truncated(
                p, allocation, 0, 1
            )


def test_empty_instance_is_trivially_fair():
    p = UtilityProfile.additive([[], []])
    empty = ConnectedAllocation(spans=(None, None))
    assert is_ef_c(p, empty, 0)
    assert is_prop_c(p, empty, 0)


def test_single_agent_is_vacuously_fair():
    p = UtilityProfile.additive([[5, 1]])
    whole = ConnectedAllocation(spans=((1, 2),))
    assert is_ef_c(p, whole, 0)
    assert is_prop_c(p, whole, 0)


# ---------------------------------------------------------------------------
# adjacency distance
# ---------------------------------------------------------------------------


def test_adjacency_distance_examples():
    p1 = UtilityProfile.additive([[1, 0], [0, 1]])
    assert adjacency_distance(p1, p1, Adjacency.AGENT_ITEM_LEVEL) == 0
    assert adjacency_distance(p1, p1, Adjacency.AGENT_LEVEL) == 0
    p2 = UtilityProfile.additive([[1, 1], [0, 1]])
    assert adjacency_distance(p1, p2, Adjacency.AGENT_ITEM_LEVEL) == 1
    assert adjacency_distance(p1, p2, Adjacency.AGENT_LEVEL) == 1
    p3 = UtilityProfile.additive([[0, 1], [1, 0]])
    assert adjacency_distance(p1, p3, Adjacency.AGENT_ITEM_LEVEL) == 4
    assert adjacency_distance(p1, p3, Adjacency.AGENT_LEVEL) == 2


def test_adjacency_distance_shape_mismatch():
    p1 = UtilityProfile.additive([[1, 0]])
    p2 = UtilityProfile.additive([[1, 0, 0]])
    with pytest.raises(ValueError):
        adjacency_distance(p1, p2, Adjacency.AGENT_ITEM_LEVEL)


# ---------------------------------------------------------------------------
# invariants and properties
# ---------------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(
    bits=st.integers(min_value=0, max_value=(1 << 8) - 1),
    k=st.integers(min_value=0, max_value=5),
)
def test_truncation_monotone_in_k(bits, k):
    p = binary_profile_from_bits(2, 4, bits)
    items = (1, 2, 3, 4)
    assert truncated_utility(p, 1, items, 0) == bundle_utility(p, 1, items)
    assert truncated_utility(p, 1, items, k + 1) <= truncated_utility(p, 1, items, k)
    assert truncated_utility(p, 1, items, k) <= bundle_utility(p, 1, items)


@settings(max_examples=40, deadline=None)
@given(
    bits=st.integers(min_value=0, max_value=(1 << 6) - 1),
    d=st.integers(min_value=0, max_value=3),
    k=st.integers(min_value=0, max_value=3),
    index=st.integers(min_value=0, max_value=5),
)
def test_ef_under_truncation_implies_plain_ef(bits, d, k, index):
    p = binary_profile_from_bits(2, 3, bits)
    allocation = list(enumerate_connected_allocations(3, 2))[index]
    if is_ef_d_wrt_truncated(p, allocation, d, k):
        assert is_ef_c(p, allocation, d + k)


def test_ef_implies_prop_for_additive_exhaustive():
    # every binary profile at n=2, m=3 and every connected allocation
    allocations = list(enumerate_connected_allocations(3, 2))
    for bits in range(1 << 6):
        p = binary_profile_from_bits(2, 3, bits)
        for allocation in allocations:
            for c in range(4):
                if is_ef_c(p, allocation, c):
                    assert is_prop_c(p, allocation, c)


@settings(max_examples=40, deadline=None)
@given(
    bits=st.integers(min_value=0, max_value=(1 << 8) - 1),
    c=st.integers(min_value=0, max_value=3),
    index=st.integers(min_value=0, max_value=7),
)
def test_checkers_monotone_in_c(bits, c, index):
    p = binary_profile_from_bits(2, 4, bits)
    allocation = list(enumerate_connected_allocations(4, 2))[index]
    if is_ef_c(p, allocation, c):
        assert is_ef_c(p, allocation, c + 1)
    if is_prop_c(p, allocation, c):
        assert is_prop_c(p, allocation, c + 1)


def test_fast_paths_agree_with_brute_force_small(rng):
    # additive fast paths vs definition-level brute force for m <= 5
    for _ in range(40):
        n = int(rng.integers(1, 4))
        m = int(rng.integers(1, 6))
        p = random_additive_profile(rng, n, m)
        items = tuple(
            int(v) for v in rng.choice(m, size=int(rng.integers(0, m + 1)), replace=False) + 1
        )
        k = int(rng.integers(0, m + 2))
        assert truncated_utility(p, 1, items, k) == brute_truncated(p, 1, items, k)
        assert top_k_utility(p, 1, items, k) == brute_top_k(p, 1, items, k)
