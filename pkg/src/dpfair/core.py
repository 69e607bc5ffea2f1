"""Exact utility model, adjacency relations, and fairness checkers.

Utilities are stored as nonnegative integers with a shared per-profile
denominator (``scale``), so every fairness comparison below is exact
integer arithmetic; nothing here depends on floating point.  Items and
agents are 1-based throughout the public surface.

Two utility kinds are supported:

* ``additive`` -- the value of a bundle is the sum of its item values.
* ``general``  -- an arbitrary monotone set function, given explicitly as a
  per-agent table of ``2**m`` scaled integers indexed by item-subset
  bitmask (bit ``j-1`` set means item ``j`` is in the subset).  Tables are
  only practical for small ``m``; construction enforces ``m <= 16``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union


GENERAL_TABLE_MAX_ITEMS = 16


class EnumerationCapError(RuntimeError):
    """Raised when a computation would enumerate more candidates than allowed."""


class Adjacency(str, Enum):
    """Which edits turn one utility profile into a neighboring one."""

    AGENT_LEVEL = "agent_level"            # one agent's whole row may change
    AGENT_ITEM_LEVEL = "agent_item_level"  # one agent's value for one item may change


@dataclass(frozen=True)
class UtilityProfile:
    """Exact utilities of ``n`` agents over ``m`` items.

    ``values[i-1][j-1] / scale`` is agent ``i``'s value for item ``j``.
    For ``kind == "general"``, ``tables[i-1][mask]`` is agent ``i``'s scaled
    value for the subset encoded by ``mask`` and the ``values`` matrix must
    agree with the singleton entries of the tables.
    """

    n: int
    m: int
    scale: int
    values: tuple[tuple[int, ...], ...]
    kind: str = "additive"
    tables: Optional[tuple[tuple[int, ...], ...]] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one agent")
        if self.m < 0:
            raise ValueError("item count must be nonnegative")
        if self.scale < 1:
            raise ValueError("scale must be a positive integer")
        if self.kind not in ("additive", "general"):
            raise ValueError(f"unknown utility kind: {self.kind!r}")
        if len(self.values) != self.n or any(len(row) != self.m for row in self.values):
            raise ValueError("values matrix must be exactly n x m")
        if any(v < 0 for row in self.values for v in row):
            raise ValueError("utilities must be nonnegative")
        if self.kind == "general":
            if self.m > GENERAL_TABLE_MAX_ITEMS:
                raise ValueError(
                    f"general tables supported only for m <= {GENERAL_TABLE_MAX_ITEMS}"
                )
            if self.tables is None or len(self.tables) != self.n:
                raise ValueError("general profiles need one table per agent")
            size = 1 << self.m
            for i, table in enumerate(self.tables):
                if len(table) != size:
                    raise ValueError(f"table for agent {i + 1} must have 2^m entries")
                _check_monotone_table(table, self.m, i + 1)
                for j in range(self.m):
                    if table[1 << j] != self.values[i][j]:
                        raise ValueError(
                            f"values[{i + 1}][{j + 1}] disagrees with table singleton"
                        )
        elif self.tables is not None:
            raise ValueError("additive profiles must not carry tables")

    @property
    def items(self) -> range:
        return range(1, self.m + 1)

    @property
    def agents(self) -> range:
        return range(1, self.n + 1)

    def is_binary(self) -> bool:
        return all(v in (0, self.scale) for row in self.values for v in row)

    @staticmethod
    def additive(values: Sequence[Sequence[int]], scale: int = 1) -> "UtilityProfile":
        vals = tuple(tuple(int(v) for v in row) for row in values)
        n = len(vals)
        m = len(vals[0]) if vals else 0
        return UtilityProfile(n=n, m=m, scale=scale, values=vals)

    @staticmethod
    def general(tables: Sequence[Sequence[int]], scale: int = 1) -> "UtilityProfile":
        """Build a general-kind profile; singleton values are read off the tables."""
        tabs = tuple(tuple(int(v) for v in table) for table in tables)
        n = len(tabs)
        if n == 0:
            raise ValueError("need at least one agent")
        size = len(tabs[0])
        m = size.bit_length() - 1
        if 1 << m != size:
            raise ValueError("table length must be a power of two")
        vals = tuple(tuple(table[1 << j] for j in range(m)) for table in tabs)
        return UtilityProfile(n=n, m=m, scale=scale, values=vals, kind="general", tables=tabs)


def _check_monotone_table(table: Sequence[int], m: int, agent: int) -> None:
    # Adding any single item may never decrease the value; by induction this
    # gives full monotonicity over the subset lattice.
    if table[0] != 0:
        raise ValueError(f"table for agent {agent} must assign 0 to the empty set")
    if any(v < 0 for v in table):
        raise ValueError(f"table for agent {agent} has negative entries")
    for mask in range(len(table)):
        for j in range(m):
            bit = 1 << j
            if not mask & bit and table[mask] > table[mask | bit]:
                raise ValueError(f"table for agent {agent} is not monotone")


@dataclass(frozen=True)
class ConnectedAllocation:
    """A partition of the item line into per-agent intervals.

    ``spans[i-1]`` is either ``None`` (agent ``i`` gets nothing) or an
    inclusive 1-based pair ``(start, end)``.  The nonempty spans must be
    pairwise disjoint and tile ``[1, m]`` exactly, where ``m`` is the total
    number of covered items.
    """

    spans: tuple[Optional[tuple[int, int]], ...]

    def __post_init__(self):
        nonempty = []
        for span in self.spans:
            if span is None:
                continue
            start, end = span
            if start < 1 or start > end:
                raise ValueError(f"invalid span {span}")
            nonempty.append(span)
        nonempty.sort()
        cursor = 1
        for start, end in nonempty:
            if start != cursor:
                raise ValueError("spans must tile [1, m] without gaps or overlaps")
            cursor = end + 1

    @property
    def n(self) -> int:
        return len(self.spans)

    @property
    def m(self) -> int:
        return sum(span[1] - span[0] + 1 for span in self.spans if span is not None)

    def bundle(self, agent: int) -> tuple[int, ...]:
        span = self.spans[agent - 1]
        if span is None:
            return ()
        return tuple(range(span[0], span[1] + 1))

    def bundles(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.bundle(i) for i in range(1, self.n + 1))

    def to_owner_array(self) -> "Allocation":
        owners = [0] * self.m
        for i, span in enumerate(self.spans, start=1):
            if span is None:
                continue
            for j in range(span[0], span[1] + 1):
                owners[j - 1] = i
        return Allocation(n=self.n, owners=tuple(owners))


@dataclass(frozen=True)
class Allocation:
    """An arbitrary (not necessarily connected) item-to-agent assignment."""

    n: int
    owners: tuple[int, ...]  # owners[j-1] in [1, n]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one agent")
        if any(o < 1 or o > self.n for o in self.owners):
            raise ValueError("every item must be owned by an agent in [1, n]")

    @property
    def m(self) -> int:
        return len(self.owners)

    def bundle(self, agent: int) -> tuple[int, ...]:
        return tuple(j + 1 for j, o in enumerate(self.owners) if o == agent)

    def bundles(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for j, o in enumerate(self.owners, start=1):
            out[o - 1].append(j)
        return tuple(tuple(b) for b in out)


AnyAllocation = Union[ConnectedAllocation, Allocation]


@dataclass(frozen=True)
class PrivacyParams:
    """Privacy budget and failure probability for the private allocators."""

    epsilon: float
    beta: float = 0.1
    adjacency: Adjacency = Adjacency.AGENT_ITEM_LEVEL
    svt_constant: float = 16.0  # accuracy constant of the threshold mechanism

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")
        if self.svt_constant <= 0:
            raise ValueError("svt constant must be positive")


# ---------------------------------------------------------------------------
# scaled-integer utility evaluation (internal; exact)
# ---------------------------------------------------------------------------


def _check_agent(profile: UtilityProfile, agent: int) -> None:
    if not 1 <= agent <= profile.n:
        raise IndexError(f"agent {agent} out of range [1, {profile.n}]")


def _as_item_tuple(profile: UtilityProfile, items: Iterable[int]) -> tuple[int, ...]:
    out = tuple(items)
    for j in out:
        if not 1 <= j <= profile.m:
            raise IndexError(f"item {j} out of range [1, {profile.m}]")
    return out


def _mask_of(items: Iterable[int]) -> int:
    mask = 0
    for j in items:
        mask |= 1 << (j - 1)
    return mask


def scaled_bundle(profile: UtilityProfile, agent: int, items: Iterable[int]) -> int:
    """Scaled (integer) value of a bundle; ``bundle_utility`` divides by scale."""
    _check_agent(profile, agent)
    items = _as_item_tuple(profile, items)
    if profile.kind == "additive":
        row = profile.values[agent - 1]
        return sum(row[j - 1] for j in items)
    return profile.tables[agent - 1][_mask_of(items)]


def scaled_truncated(profile: UtilityProfile, agent: int, items: Iterable[int], k: int) -> int:
    """Scaled bundle value after an adversary removes up to ``k`` items.

    Removing items outside the bundle never lowers the value (monotonicity),
    so the minimization ranges over subsets of ``items`` only; and removing
    more items never raises it, so exactly ``min(k, |items|)`` removals are
    optimal.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    _check_agent(profile, agent)
    items = _as_item_tuple(profile, items)
    drop = min(k, len(items))
    if profile.kind == "additive":
        row = profile.values[agent - 1]
        vals = sorted((row[j - 1] for j in items), reverse=True)
        return sum(vals[drop:])
    table = profile.tables[agent - 1]
    full = _mask_of(items)
    return min(
        table[full & ~_mask_of(gone)] for gone in itertools.combinations(items, drop)
    )


def scaled_top_k(profile: UtilityProfile, agent: int, items: Iterable[int], k: int) -> int:
    """Scaled value of the best sub-bundle of ``items`` with at most ``k`` items."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    _check_agent(profile, agent)
    items = _as_item_tuple(profile, items)
    take = min(k, len(items))
    if profile.kind == "additive":
        row = profile.values[agent - 1]
        vals = sorted((row[j - 1] for j in items), reverse=True)
        return sum(vals[:take])
    table = profile.tables[agent - 1]
    # Monotone tables attain the max at full size `take`.
    return max(table[_mask_of(kept)] for kept in itertools.combinations(items, take))


# ---------------------------------------------------------------------------
# public operations (exact rationals)
# ---------------------------------------------------------------------------


def bundle_utility(profile: UtilityProfile, agent: int, items: Iterable[int]) -> Fraction:
    """Exact value agent ``agent`` assigns to the set ``items``."""
    return Fraction(scaled_bundle(profile, agent, items), profile.scale)


def truncated_utility(
    profile: UtilityProfile, agent: int, items: Iterable[int], k: int
) -> Fraction:
    """Exact worst-case bundle value after removing up to ``k`` items."""
    return Fraction(scaled_truncated(profile, agent, items, k), profile.scale)


def top_k_utility(profile: UtilityProfile, agent: int, items: Iterable[int], k: int) -> Fraction:
    """Exact best value achievable with at most ``k`` of the given items."""
    return Fraction(scaled_top_k(profile, agent, items, k), profile.scale)


def _bundles_for(profile: UtilityProfile, allocation: AnyAllocation) -> tuple[tuple[int, ...], ...]:
    if allocation.n != profile.n:
        raise ValueError("allocation and profile disagree on the number of agents")
    if allocation.m != profile.m:
        raise ValueError("allocation and profile disagree on the number of items")
    return allocation.bundles()


def is_ef_c(profile: UtilityProfile, allocation: AnyAllocation, c: int) -> bool:
    """Envy-freeness up to ``c`` items, checked exactly.

    Agent ``i`` accepts agent ``i``'s own bundle against ``i'`` when some set
    of at most ``c`` items can be removed from ``A_{i'}`` so that ``i`` no
    longer prefers the remainder.  With a single agent the condition is
    vacuous.
    """
    if c < 0:
        raise ValueError("c must be nonnegative")
    bundles = _bundles_for(profile, allocation)
    for i in profile.agents:
        own = scaled_bundle(profile, i, bundles[i - 1])
        for other in profile.agents:
            if other == i:
                continue
            if own < scaled_truncated(profile, i, bundles[other - 1], c):
                return False
    return True


def is_prop_c(profile: UtilityProfile, allocation: AnyAllocation, c: int) -> bool:
    """Proportionality up to ``c`` items, checked exactly.

    The comparison ``u_i(A_i) + top_c(M \\ A_i) >= u_i(M) / n`` is evaluated
    as ``n * (own + best_outside) >= total`` in integers, so no rational
    division takes place.
    """
    if c < 0:
        raise ValueError("c must be nonnegative")
    bundles = _bundles_for(profile, allocation)
    all_items = tuple(profile.items)
    for i in profile.agents:
        mine = set(bundles[i - 1])
        outside = tuple(j for j in all_items if j not in mine)
        own = scaled_bundle(profile, i, bundles[i - 1])
        best_outside = scaled_top_k(profile, i, outside, c)
        total = scaled_bundle(profile, i, all_items)
        if profile.n * (own + best_outside) < total:
            return False
    return True


def is_ef_d_wrt_truncated(
    profile: UtilityProfile, allocation: AnyAllocation, d: int, k: int
) -> bool:
    """Envy-freeness up to ``d`` items measured under ``k``-truncated utilities.

    Uses the collapsed form: removing up to ``d`` items from an already
    ``k``-truncated bundle is the same as truncating by ``d + k`` directly,
    so the pairwise test is ``trunc(A_i, k) >= trunc(A_{i'}, d + k)``.
    """
    if d < 0 or k < 0:
        raise ValueError("d and k must be nonnegative")
    bundles = _bundles_for(profile, allocation)
    for i in profile.agents:
        own = scaled_truncated(profile, i, bundles[i - 1], k)
        for other in profile.agents:
            if other == i:
                continue
            if own < scaled_truncated(profile, i, bundles[other - 1], d + k):
                return False
    return True


def adjacency_distance(p1: UtilityProfile, p2: UtilityProfile, notion: Adjacency) -> int:
    """Minimal number of single edits turning ``p1`` into ``p2``.

    Under agent-by-item adjacency this is the number of differing matrix
    cells; under agent-level adjacency, the number of differing rows.
    Only additive profiles are comparable cell-by-cell.
    """
    if (p1.n, p1.m, p1.scale) != (p2.n, p2.m, p2.scale):
        raise ValueError("profiles differ in shape or scale")
    if p1.kind != "additive" or p2.kind != "additive":
        raise ValueError("adjacency distance is defined for additive profiles")
    notion = Adjacency(notion)
    if notion is Adjacency.AGENT_ITEM_LEVEL:
        return sum(
            1
            for i in range(p1.n)
            for j in range(p1.m)
            if p1.values[i][j] != p2.values[i][j]
        )
    return sum(1 for i in range(p1.n) if p1.values[i] != p2.values[i])
