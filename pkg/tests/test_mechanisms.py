import math

import numpy as np
import pytest

from dpfair.mechanisms import (
    RandomStream,
    SvtOutcome,
    above_threshold,
    exponential_mechanism,
    sample_laplace,
)


def laplace_draws(seed, scale, count):
    stream = RandomStream(seed)
    return np.array([sample_laplace(stream, scale) for _ in range(count)])


# ---------------------------------------------------------------------------
# random stream
# ---------------------------------------------------------------------------


def test_stream_determinism():
    a = [sample_laplace(RandomStream(42), 1.0) for _ in range(1)]
    b = [sample_laplace(RandomStream(42), 1.0) for _ in range(1)]
    assert a == b
    s1, s2 = RandomStream(42), RandomStream(42)
    assert [sample_laplace(s1, 1.0) for _ in range(50)] == [
        sample_laplace(s2, 1.0) for _ in range(50)
    ]


def test_stream_ids_give_distinct_substreams():
    base = RandomStream(7)
    c0 = base.child(0)
    c1 = base.child(1)
    assert [sample_laplace(c0, 1.0) for _ in range(5)] != [
        sample_laplace(c1, 1.0) for _ in range(5)
    ]
    # children are stable regardless of when they are derived
    again = RandomStream(7).child(0)
    assert sample_laplace(again, 1.0) == sample_laplace(RandomStream(7).child(0), 1.0)


# ---------------------------------------------------------------------------
# Laplace sampler
# ---------------------------------------------------------------------------


def test_laplace_rejects_bad_scale():
    with pytest.raises(ValueError):
        sample_laplace(RandomStream(0), 0.0)
    with pytest.raises(ValueError):
        sample_laplace(RandomStream(0), -1.0)


def test_laplace_median_is_zero():
    draws = laplace_draws(seed=1, scale=1.0, count=1_000_000)
    assert abs(np.median(draws)) < 0.01


def test_laplace_mean_absolute_value():
    draws = laplace_draws(seed=2, scale=2.0, count=1_000_000)
    assert abs(np.abs(draws).mean() - 2.0) < 0.02


def test_laplace_tail_probability():
    # P(X > b ln 2) = (1/2) e^(-ln 2) = 1/4
    draws = laplace_draws(seed=3, scale=1.0, count=1_000_000)
    assert abs(np.mean(draws > math.log(2)) - 0.25) < 0.005


# ---------------------------------------------------------------------------
# exponential mechanism
# ---------------------------------------------------------------------------


def test_em_rejects_bad_input():
    with pytest.raises(ValueError):
        exponential_mechanism(RandomStream(0), [], [], 1.0)
    with pytest.raises(ValueError):
        exponential_mechanism(RandomStream(0), ["a"], [0.0, 1.0], 1.0)


def test_em_uniform_when_scores_equal():
    stream = RandomStream(11)
    counts = np.zeros(4)
    trials = 100_000
    for _ in range(trials):
        counts[exponential_mechanism(stream, list("abcd"), [2.0] * 4, 1.0)] += 1
    expected = trials / 4
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    # chi-square with 3 dof: 16.3 is the 0.001 quantile
    assert chi2 < 16.3


def test_em_uniform_when_epsilon_zero():
    stream = RandomStream(12)
    counts = np.zeros(3)
    trials = 60_000
    for _ in range(trials):
        counts[exponential_mechanism(stream, list("abc"), [0.0, -50.0, -100.0], 0.0)] += 1
    expected = trials / 3
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    assert chi2 < 13.8  # 0.001 quantile, 2 dof


def test_em_two_candidate_ratio():
    # scores (0, -1), epsilon 2: P(first)/P(second) = e
    stream = RandomStream(13)
    trials = 1_000_000
    first = 0
    for _ in range(trials):
        if exponential_mechanism(stream, ["x", "y"], [0.0, -1.0], 2.0) == 0:
            first += 1
    ratio = first / (trials - first)
    assert abs(ratio - math.e) / math.e < 0.05


def test_em_exact_probability_ratio_bound():
    # analytic privacy check on the computed probability vectors themselves
    rng = np.random.default_rng(5)
    for _ in range(100):
        k = int(rng.integers(2, 8))
        epsilon = float(rng.uniform(0.1, 4.0))
        s1 = rng.uniform(-30, 0, size=k)
        s2 = s1 + rng.uniform(-1, 1, size=k)  # entrywise within 1

        def probabilities(scores):
            w = np.exp(epsilon * (scores - scores.max()) / 2.0)
            return w / w.sum()

        p1, p2 = probabilities(s1), probabilities(s2)
        assert np.all(p1 <= np.exp(epsilon) * p2 * (1 + 1e-9))
        assert np.all(p2 <= np.exp(epsilon) * p1 * (1 + 1e-9))


def test_em_no_underflow_with_deep_scores():
    # max-shift keeps the top candidate's weight at 1 even for scores near -g
    stream = RandomStream(21)
    scores = [-1.0, -2000.0]
    picks = {exponential_mechanism(stream, ["a", "b"], scores, 50.0) for _ in range(50)}
    assert picks == {0}


# ---------------------------------------------------------------------------
# above-threshold
# ---------------------------------------------------------------------------


def test_svt_rejects_bad_epsilon():
    with pytest.raises(ValueError):
        above_threshold(RandomStream(0), [1.0], 0.0, 0.0)


def test_svt_huge_margin_selects_first():
    hits = 0
    runs = 10_000
    stream = RandomStream(31)
    for _ in range(runs):
        out = above_threshold(stream, [10.0 + 1e6] * 5, tau=10.0, epsilon=1.0)
        if out.index == 0:
            hits += 1
    assert hits / runs > 0.999


def test_svt_huge_deficit_selects_none():
    misses = 0
    runs = 10_000
    stream = RandomStream(32)
    for _ in range(runs):
        out = above_threshold(stream, [10.0 - 1e6] * 5, tau=10.0, epsilon=1.0)
        if out.index is None:
            misses += 1
    assert misses / runs > 0.999
    assert out.queries_consumed == 5


def test_svt_accuracy_at_the_standard_constant():
    # 64 queries at tau - alpha followed by one at tau + alpha, with alpha at
    # the upsilon = 16 accuracy radius: the final query should win almost always.
    epsilon, beta, h = 1.0, 0.05, 64
    alpha = 16 * math.log(h / beta) / epsilon
    queries = [100.0 - alpha] * h + [100.0 + alpha]
    stream = RandomStream(33)
    wins = 0
    runs = 10_000
    for _ in range(runs):
        out = above_threshold(stream, queries, tau=100.0, epsilon=epsilon)
        if out.index == h:
            wins += 1
    assert wins / runs >= 0.95


def test_svt_lazy_consumption():
    evaluated = []

    def queries():
        for value in [0.0, 0.0, 1e9, 1e9, 1e9]:
            evaluated.append(value)
            yield value

    out = above_threshold(RandomStream(34), queries(), tau=100.0, epsilon=1.0)
    assert out == SvtOutcome(index=2, queries_consumed=3)
    assert len(evaluated) == 3  # nothing past the selected query was evaluated
