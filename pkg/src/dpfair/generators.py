"""Instance generators: random profiles and hard-instance families.

Two kinds of instances are produced here.  Random Bernoulli profiles back
the probabilistic lower-bound experiments for agent-level privacy; the
packing families are the explicit binary constructions whose accepted
allocations are pairwise disjoint across variants, which is what forces the
lower bounds for agent-by-item privacy on connected allocations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import Adjacency, UtilityProfile, adjacency_distance
from .mechanisms import RandomStream

_MC_CHUNK = 1024  # trials per derived substream in vectorized experiments


def bernoulli_profile(n: int, m: int, stream: RandomStream) -> UtilityProfile:
    """Binary profile with independent fair-coin entries."""
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    bits = stream.generator.integers(0, 2, size=(n, m))
    values = tuple(tuple(int(v) for v in row) for row in bits)
    return UtilityProfile(n=n, m=m, scale=1, values=values)


def all_zero_profile(n: int, m: int) -> UtilityProfile:
    """The all-zero binary profile."""
    return UtilityProfile(n=n, m=m, scale=1, values=tuple((0,) * m for _ in range(n)))


@dataclass(frozen=True)
class PackingFamily:
    """A base profile plus variants that demand mutually exclusive cuts.

    Agents 1 and 2 are all-zero in the base profile and value exactly one
    width-``block_width`` block of low-index items in each variant; agents
    3..n value a fixed suffix in every member.  Each variant is within
    ``expected_distance`` single-cell edits of the base.
    """

    base: UtilityProfile
    variants: tuple[UtilityProfile, ...]
    n: int
    m: int
    c: int
    T: int
    block_width: int
    expected_distance: int
    criterion: str  # "ef" or "prop"


def _packing_profiles(
    n: int, m: int, block_width: int, T: int, suffix_start: int
) -> tuple[UtilityProfile, tuple[UtilityProfile, ...]]:
    suffix_row = tuple(1 if j >= suffix_start else 0 for j in range(1, m + 1))
    zero_row = (0,) * m
    base_rows = (zero_row, zero_row) + (suffix_row,) * (n - 2)
    base = UtilityProfile(n=n, m=m, scale=1, values=base_rows)
    variants = []
    for t in range(1, T + 1):
        block_row = tuple(
            1 if (j - 1) // block_width == t - 1 else 0 for j in range(1, m + 1)
        )
        rows = (block_row, block_row) + (suffix_row,) * (n - 2)
        variants.append(UtilityProfile(n=n, m=m, scale=1, values=rows))
    return base, tuple(variants)


def default_ef_packing_c(m: int, epsilon: float, n: int, zeta: float = 0.01) -> int:
    return math.floor(zeta * min(math.log(m) / epsilon, m / n, math.sqrt(m)))


def default_prop_packing_c(m: int, epsilon: float, n: int, zeta: float = 0.01) -> int:
    return math.floor(
        zeta * min(math.log(m / n) / (epsilon * n), m / n, math.sqrt(m / n))
    )


def ef_packing_family(
    n: int,
    m: int,
    c: Optional[int] = None,
    T: Optional[int] = None,
    epsilon: Optional[float] = None,
) -> PackingFamily:
    """Envy-freeness packing family with block width 2c+1.

    Defaults follow the asymptotic construction (which needs ``epsilon`` and
    yields c = 0 below m of roughly 10^4); explicit small ``c >= 1``
    overrides keep the family meaningful at desk scale.
    """
    if n < 3:
        raise ValueError("the packing construction needs n >= 3")
    if c is None:
        if epsilon is None:
            raise ValueError("either an explicit c or epsilon for the default formula")
        c = default_ef_packing_c(m, epsilon, n)
    if c < 1:
        raise ValueError("need c >= 1 (the construction is void at c = 0)")
    width = 2 * c + 1
    if T is None:
        T = m // (4 * c + 4)
    if T < 1:
        raise ValueError("need T >= 1")
    if width * T > m:
        raise ValueError("blocks exceed the item line: (2c+1) * T must be <= m")
    suffix_start = m - (c + 1) * (n - 2)
    if suffix_start < 1:
        raise ValueError("suffix block would underflow the item line")
    base, variants = _packing_profiles(n, m, width, T, suffix_start)
    return PackingFamily(
        base=base,
        variants=variants,
        n=n,
        m=m,
        c=c,
        T=T,
        block_width=width,
        expected_distance=4 * c + 2,
        criterion="ef",
    )


def prop_packing_family(
    n: int,
    m: int,
    c: Optional[int] = None,
    T: Optional[int] = None,
    epsilon: Optional[float] = None,
) -> PackingFamily:
    """Proportionality packing family with block width nc+1.

    Every agent in a variant values exactly nc+1 items, so each needs at
    least one valued item for PROP-c to hold.
    """
    if n < 3:
        raise ValueError("the packing construction needs n >= 3")
    if c is None:
        if epsilon is None:
            raise ValueError("either an explicit c or epsilon for the default formula")
        c = default_prop_packing_c(m, epsilon, n)
    if c < 1:
        raise ValueError("need c >= 1 (the construction is void at c = 0)")
    width = n * c + 1
    if T is None:
        T = m // (2 * n * c + 2)
    if T < 1:
        raise ValueError("need T >= 1")
    if width * T > m:
        raise ValueError("blocks exceed the item line: (nc+1) * T must be <= m")
    suffix_start = m - c * n
    if suffix_start < 1:
        raise ValueError("suffix block would underflow the item line")
    base, variants = _packing_profiles(n, m, width, T, suffix_start)
    return PackingFamily(
        base=base,
        variants=variants,
        n=n,
        m=m,
        c=c,
        T=T,
        block_width=width,
        expected_distance=2 * n * c + 2,
        criterion="prop",
    )


def verify_packing_distances(family: PackingFamily) -> bool:
    """Every variant sits at exactly the family's expected edit distance."""
    return all(
        adjacency_distance(family.base, variant, Adjacency.AGENT_ITEM_LEVEL)
        == family.expected_distance
        for variant in family.variants
    )


# ---------------------------------------------------------------------------
# probabilistic lower-bound experiments
# ---------------------------------------------------------------------------


def _block_allocation_sizes(n: int, m: int, bundle_size: int) -> list[int]:
    # Agents 1..n-1 get bundle_size contiguous items each; agent n absorbs
    # the remainder.  Agent 1 is the designated agent in both experiments.
    sizes = [bundle_size] * (n - 1)
    sizes.append(m - bundle_size * (n - 1))
    if sizes[-1] < 0:
        raise ValueError("bundles exceed the item count")
    return sizes


def small_bundle_profile_experiment(
    n: int,
    m: int,
    bundle_size: int,
    c: int,
    trials: int,
    stream: RandomStream,
    variant: str = "prop",
) -> float:
    """Violation frequency of a fixed allocation under random binary utilities.

    The allocation assigns contiguous blocks: agent 1 (the designated agent)
    gets the first ``bundle_size`` items, agents 2..n-1 get equal blocks and
    agent n the remainder.  With additive utilities the violation event for
    agent 1 depends only on agent 1's row, so only that row is sampled; each
    trial draws the row i.i.d. Ber(1/2).

    ``variant="prop"`` estimates Pr[allocation is not PROP-c for agent 1];
    ``variant="ef"`` estimates Pr[allocation is not EF-c for agent 1], which
    requires all bundles to have at least ``bundle_size`` items so that
    agent 1's bundle is among the smallest (the regime the bound addresses).
    """
    if variant not in ("prop", "ef"):
        raise ValueError("variant must be 'prop' or 'ef'")
    if trials < 1:
        raise ValueError("need at least one trial")
    if n < 2 or not 1 <= bundle_size <= m:
        raise ValueError("need n >= 2 and 1 <= bundle_size <= m")
    sizes = _block_allocation_sizes(n, m, bundle_size)
    if variant == "ef" and any(size < bundle_size for size in sizes):
        raise ValueError("the EF experiment needs every bundle >= bundle_size")
    boundaries = np.cumsum([0] + sizes)
    violations = 0
    done = 0
    chunk_index = 0
    while done < trials:
        batch = min(_MC_CHUNK, trials - done)
        # int8 rows keep the chunk small even at m = 40000; sums accumulate in int64
        rows = stream.child(chunk_index).generator.integers(
            0, 2, size=(batch, m), dtype=np.int8
        )
        own = rows[:, : boundaries[1]].sum(axis=1, dtype=np.int64)
        total = rows.sum(axis=1, dtype=np.int64)
        if variant == "prop":
            outside = total - own
            best_outside = np.minimum(c, outside)
            violations += int(np.sum(n * (own + best_outside) < total))
        else:
            bad = np.zeros(batch, dtype=bool)
            for other in range(1, n):
                counts = rows[:, boundaries[other] : boundaries[other + 1]].sum(
                    axis=1, dtype=np.int64
                )
                bad |= counts - np.minimum(c, counts) > own
            violations += int(np.sum(bad))
        done += batch
        chunk_index += 1
    return violations / trials


@dataclass(frozen=True)
class AgentLevelWitness:
    """A candidate hard input for an agent-level privacy lower bound."""

    base: UtilityProfile  # all-zero input actually fed to the mechanism
    witness: UtilityProfile  # base with one row replaced; adjacent at agent level
    agent: int
    criterion: str
    c: int
    violation_rate: float  # fraction of sampled outputs unfair for `agent` w.r.t. witness


def search_agent_level_witness(
    mechanism: Callable[[UtilityProfile, RandomStream], object],
    n: int,
    m: int,
    criterion: str,
    c: int,
    runs: int,
    candidate_rows: int,
    stream: RandomStream,
) -> AgentLevelWitness:
    """Monte-Carlo search for an agent-level hard instance against a mechanism.

    Samples the mechanism's output distribution on the all-zero profile,
    then searches random single-agent utility rows for the (agent, row)
    pair under which the sampled outputs are most frequently unfair to that
    agent.  The averaging argument behind the lower bounds guarantees a
    good witness exists; it does not exhibit one, hence the search.
    """
    from .core import is_ef_c, is_prop_c  # local import avoids a cycle at module load

    if criterion not in ("ef", "prop"):
        raise ValueError("criterion must be 'ef' or 'prop'")
    check = is_ef_c if criterion == "ef" else is_prop_c
    base = all_zero_profile(n, m)
    run_stream, search_stream = stream.child(0), stream.child(1)
    outputs = [mechanism(base, run_stream.child(run)) for run in range(runs)]
    row_stream = search_stream.generator
    best: Optional[AgentLevelWitness] = None
    for _ in range(candidate_rows):
        row = tuple(int(v) for v in row_stream.integers(0, 2, size=m))
        for agent in range(1, n + 1):
            values = tuple(
                row if i == agent else base.values[i - 1] for i in range(1, n + 1)
            )
            candidate = UtilityProfile(n=n, m=m, scale=1, values=values)
            failures = sum(
                1 for allocation in outputs if not check(candidate, allocation, c)
            )
            rate = failures / runs
            if best is None or rate > best.violation_rate:
                best = AgentLevelWitness(
                    base=base,
                    witness=candidate,
                    agent=agent,
                    criterion=criterion,
                    c=c,
                    violation_rate=rate,
                )
    assert best is not None
    return best
