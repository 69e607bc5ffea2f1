"""Private proportional allocator: recursive moving knife with noisy cut selection.

The allocator splits the agent set in half at every level of a recursion
tree.  Each agent privately reports (via the above-threshold mechanism) the
leftmost knife position at which she would accept the left piece for the
smaller group; the median report becomes the cut.  Privacy budgets follow a
geometric schedule over the recursion levels -- coarse early cuts are cheap
because later levels can still correct them -- and the per-level budgets sum
to at most the total budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .core import ConnectedAllocation, PrivacyParams, UtilityProfile, scaled_truncated
from .mechanisms import RandomStream, above_threshold


@dataclass(frozen=True)
class KnifeRecord:
    """One recursion step: who was present, what was queried, where the cut fell."""

    agents: tuple[int, ...]
    lo: int
    hi: int  # hi < lo encodes an empty item range
    depth: int  # distance from the root call
    level: int  # b = ceil(log2 |agents|); budget level shared by equal-size calls
    epsilon_b: float
    g_b: int
    h_values: tuple[tuple[int, int], ...]  # (agent, h) in ascending agent order
    svt_fired: tuple[bool, ...]  # False where the fallback h = hi was used
    split: int
    left_agents: tuple[int, ...]
    right_agents: tuple[int, ...]


@dataclass(frozen=True)
class KnifeTrace:
    """Full recursion trace of one allocator run."""

    records: tuple[KnifeRecord, ...]
    leaves: tuple[tuple[int, int, int], ...]  # (agent, lo, hi), hi < lo if empty

    def levels_used(self) -> tuple[int, ...]:
        return tuple(sorted({record.level for record in self.records}))


def level_epsilon(epsilon: float, b: int) -> float:
    """Budget for level ``b``: epsilon / (2 * 1.5**b)."""
    return epsilon / (2.0 * 1.5**b)


def level_epsilon_exact(epsilon: float, b: int) -> Fraction:
    """Exact rational value of the level-``b`` budget (epsilon * 2^(b-1) / 3^b)."""
    return Fraction(epsilon) * Fraction(2 ** (b - 1), 3**b)


def exact_budget_total(epsilon: float, levels: Iterable[int]) -> Fraction:
    """Exact sum of the distinct per-level budgets actually used."""
    return sum((level_epsilon_exact(epsilon, b) for b in set(levels)), Fraction(0))


def truncation_budget(m: int, n: int, epsilon_b: float, beta: float, upsilon: float) -> int:
    """Per-level truncation budget g_b = 8 * ceil(upsilon * log(mn/beta) / epsilon_b)."""
    return 8 * math.ceil(upsilon * math.log(m * n / beta) / epsilon_b)


def budget_schedule(
    m: int, n: int, params: PrivacyParams
) -> dict[int, tuple[float, int]]:
    """Map each recursion level b = 1..ceil(log2 n) to its (epsilon_b, g_b)."""
    if n < 2 or m < 1:
        return {}
    top = math.ceil(math.log2(n))
    schedule = {}
    for b in range(1, top + 1):
        eps_b = level_epsilon(params.epsilon, b)
        schedule[b] = (eps_b, truncation_budget(m, n, eps_b, params.beta, params.svt_constant))
    return schedule


class _RangeTruncator:
    """O(1) truncated values of one agent's additive utilities over a fixed range."""

    def __init__(self, row: tuple[int, ...], lo: int, hi: int):
        vals = sorted((row[j - 1] for j in range(lo, hi + 1)), reverse=True)
        self.size = len(vals)
        prefix = [0]
        for v in vals:
            prefix.append(prefix[-1] + v)
        self.prefix = prefix
        self.total = prefix[-1]

    def truncated(self, k: int) -> int:
        return self.total - self.prefix[min(k, self.size)]


def f_value(
    profile: UtilityProfile,
    agent: int,
    lo: int,
    hi: int,
    h: int,
    g_b: int,
    n_left: int,
    n_right: int,
) -> int:
    """Largest acceptable imbalance level for a cut at ``h``, in ``[0, g_b]``.

    Returns the largest ``t in [g_b]`` for which the left piece ``[lo, h]``,
    truncated by ``g_b + t`` items and weighted by the right group size, is
    still worth at least the right piece ``[h+1, hi]`` truncated by
    ``g_b - t`` and weighted by the left group size -- or 0 when no ``t``
    works.  Truncating more on the left and less on the right as ``t`` grows
    makes the qualifying set downward closed, so the descending scan stops
    at the maximum.
    """
    if not 1 <= lo <= h <= hi <= profile.m:
        raise ValueError(f"invalid range lo={lo} h={h} hi={hi} for m={profile.m}")
    if n_left < 1 or n_right < 1:
        raise ValueError("group sizes must be positive")
    if g_b < 1:
        raise ValueError("g_b must be a positive integer")
    if profile.kind == "additive":
        row = profile.values[agent - 1]
        left = _RangeTruncator(row, lo, h)
        right = _RangeTruncator(row, h + 1, hi)
        for t in range(g_b, 0, -1):
            if n_right * left.truncated(g_b + t) >= n_left * right.truncated(g_b - t):
                return t
        return 0
    left_items = range(lo, h + 1)
    right_items = range(h + 1, hi + 1)
    for t in range(g_b, 0, -1):
        lhs = n_right * scaled_truncated(profile, agent, left_items, g_b + t)
        rhs = n_left * scaled_truncated(profile, agent, right_items, g_b - t)
        if lhs >= rhs:
            return t
    return 0


def dp_moving_knife(
    profile: UtilityProfile,
    params: PrivacyParams,
    stream: RandomStream,
) -> tuple[ConnectedAllocation, KnifeTrace]:
    """Run the private moving-knife allocator once.

    Only additive profiles are accepted.  Agents are queried in ascending
    index order within each recursion step and the left branch recurses
    before the right one, so a fixed stream replays the identical
    allocation.  Ranges that run out of items recurse with empty ranges so
    the procedure stays total when ``m < n``.
    """
    if profile.kind != "additive":
        raise ValueError("the moving-knife allocator requires additive utilities")
    spans: list = [None] * profile.n
    records: list[KnifeRecord] = []
    leaves: list[tuple[int, int, int]] = []
    schedule = budget_schedule(profile.m, profile.n, params)

    def recurse(agents: tuple[int, ...], lo: int, hi: int, depth: int) -> None:
        if len(agents) == 1:
            agent = agents[0]
            if hi >= lo:
                spans[agent - 1] = (lo, hi)
            leaves.append((agent, lo, hi))
            return
        b = math.ceil(math.log2(len(agents)))
        eps_b, g_b = schedule[b]
        n_right = len(agents) // 2
        n_left = len(agents) - n_right
        hs = []
        fired = []
        for agent in agents:
            outcome = above_threshold(
                stream,
                _cut_queries(profile, agent, lo, hi, g_b, n_left, n_right),
                tau=g_b / 2.0,
                epsilon=eps_b,
            )
            if outcome.index is None:
                # Exhaustion is a low-probability noise event; the sentinel
                # h = hi is where the query provably equals g_b >= tau.
                hs.append((agent, hi))
                fired.append(False)
            else:
                hs.append((agent, lo + outcome.index))
                fired.append(True)
        # Ties in the reported cut positions break by agent index (hs is
        # already in ascending agent order, so the sort is stable on it).
        ranked = sorted(hs, key=lambda pair: pair[1])
        split = ranked[n_left - 1][1]
        left_agents = tuple(sorted(agent for agent, _ in ranked[:n_left]))
        right_agents = tuple(sorted(agent for agent, _ in ranked[n_left:]))
        records.append(
            KnifeRecord(
                agents=agents,
                lo=lo,
                hi=hi,
                depth=depth,
                level=b,
                epsilon_b=eps_b,
                g_b=g_b,
                h_values=tuple(hs),
                svt_fired=tuple(fired),
                split=split,
                left_agents=left_agents,
                right_agents=right_agents,
            )
        )
        recurse(left_agents, lo, split, depth + 1)
        recurse(right_agents, split + 1, hi, depth + 1)

    if profile.m == 0:
        for agent in profile.agents:
            leaves.append((agent, 1, 0))
    else:
        recurse(tuple(profile.agents), 1, profile.m, 0)
    allocation = ConnectedAllocation(spans=tuple(spans))
    return allocation, KnifeTrace(records=tuple(records), leaves=tuple(leaves))


def _cut_queries(
    profile: UtilityProfile,
    agent: int,
    lo: int,
    hi: int,
    g_b: int,
    n_left: int,
    n_right: int,
) -> Iterator[float]:
    # Lazy: the threshold mechanism stops at the first accepted position, so
    # later cut values are never computed.  hi < lo yields no queries.
    for h in range(lo, hi + 1):
        yield float(f_value(profile, agent, lo, hi, h, g_b, n_left, n_right))


def proof_chain_c(m: int, n: int, params: PrivacyParams) -> int:
    """Explicit PROP-c bound from chaining the per-level accuracy guarantees.

    Follows every root-to-leaf path of the (deterministic) recursion-size
    tree and sums ceil(2 * g_b / size) over the path; the bound is the worst
    path.  This is the quantity the high-probability analysis controls, with
    no asymptotic constants hidden.
    """
    if n == 1 or m == 0:
        return 0
    schedule = budget_schedule(m, n, params)
    worst = 0

    def walk(size: int, acc: int) -> None:
        nonlocal worst
        if size == 1:
            worst = max(worst, acc)
            return
        b = math.ceil(math.log2(size))
        _, g_b = schedule[b]
        term = -(-2 * g_b // size)  # ceil(2 g_b / size) in integers
        n_right = size // 2
        n_left = size - n_right
        walk(n_left, acc + term)
        walk(n_right, acc + term)

    walk(n, 0)
    return worst
