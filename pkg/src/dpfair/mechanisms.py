"""Reusable differentially private primitives on a seeded random stream.

Everything here is deterministic given a :class:`RandomStream`: the same
``(seed, stream id)`` replays the same draws bit for bit, and distinct
stream ids yield statistically independent substreams (backed by numpy's
``SeedSequence`` spawn keys).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np


class RandomStream:
    """Seeded source of reproducible randomness.

    A stream is addressed by a 64-bit master seed plus a stream id; child
    streams extend the id into a path of counters, which lets callers hand
    independent substreams to parallel trials without coordinating.  A
    stream is single-owner: its draws come from one stateful generator.
    """

    def __init__(self, seed: int, stream_id: int | tuple[int, ...] = ()):
        self.seed = int(seed)
        if isinstance(stream_id, int):
            stream_id = (stream_id,)
        self.path = tuple(int(x) for x in stream_id)
        self._generator: Optional[np.random.Generator] = None

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            seq = np.random.SeedSequence(self.seed, spawn_key=self.path)
            self._generator = np.random.Generator(np.random.PCG64(seq))
        return self._generator

    def child(self, index: int) -> "RandomStream":
        """Independent substream; ``child(i)`` is stable across runs."""
        return RandomStream(self.seed, self.path + (int(index),))

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, stream_id={self.path})"


@dataclass(frozen=True)
class SvtOutcome:
    """Result of one above-threshold run.

    ``index`` is the 0-based position of the selected query, or ``None``
    when the sequence was exhausted; ``queries_consumed`` counts how many
    queries were actually evaluated.
    """

    index: Optional[int]
    queries_consumed: int


def sample_laplace(stream: RandomStream, scale: float) -> float:
    """One draw from Laplace(0, scale) via the inverse CDF.

    The draw maps a uniform ``v in [0, 1)`` through ``p = v - 1/2`` and
    ``x = -scale * sgn(p) * log(1 - 2|p|)``.  The single measure-zero input
    ``v = 0`` is nudged to ``2**-53``, which truncates the left tail around
    ``37 * scale``; the right tail is truncated symmetrically by the float
    grid itself.
    """
    if scale <= 0:
        raise ValueError("Laplace scale must be positive")
    v = stream.generator.random()
    if v == 0.0:
        v = 2.0 ** -53
    p = v - 0.5
    return -scale * math.copysign(1.0, p) * math.log1p(-2.0 * abs(p))


def exponential_mechanism(
    stream: RandomStream,
    candidates: Sequence,
    scores: Sequence[float],
    epsilon: float,
) -> int:
    """Select an index with probability proportional to exp(epsilon * score / 2).

    The caller guarantees each score has sensitivity at most 1.  Scores are
    shifted by their maximum before exponentiating -- selection
    probabilities are invariant under a common shift, and the shift keeps
    the top candidate's weight at 1 so it can never underflow.
    """
    if len(candidates) == 0:
        raise ValueError("candidate list must be nonempty")
    if len(scores) != len(candidates):
        raise ValueError("need exactly one score per candidate")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    shifted = np.asarray(scores, dtype=np.float64)
    shifted = shifted - shifted.max()
    weights = np.exp(epsilon * shifted / 2.0)
    cumulative = np.cumsum(weights)
    u = stream.generator.random() * cumulative[-1]
    index = int(np.searchsorted(cumulative, u, side="right"))
    return min(index, len(candidates) - 1)


def above_threshold(
    stream: RandomStream,
    queries: Iterable[float],
    tau: float,
    epsilon: float,
) -> SvtOutcome:
    """Standard AboveThreshold: first query that beats a noisy threshold.

    Draws one Laplace(2/epsilon) threshold perturbation, then compares each
    query plus fresh Laplace(4/epsilon) noise against it, stopping at the
    first success.  Queries are consumed lazily, each exactly once, and
    never past the selected index, so callers may pass a generator whose
    elements are expensive to evaluate.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    rho = sample_laplace(stream, 2.0 / epsilon)
    consumed = 0
    for index, value in enumerate(queries):
        consumed += 1
        nu = sample_laplace(stream, 4.0 / epsilon)
        if value + nu >= tau + rho:
            return SvtOutcome(index=index, queries_consumed=consumed)
    return SvtOutcome(index=None, queries_consumed=consumed)
