from __future__ import annotations

import time

import numpy as np
import pytest

from polysim.sampling import AliasTable, SamplingError, counts_to_distribution
from conftest import chisquare_pvalue


def random_distribution(rng: np.random.Generator, m: int) -> np.ndarray:
    p = rng.random(m) ** 3  # skewed on purpose
    return p / p.sum()


def test_reconstruction_invariant(rng):
    for _ in range(200):
        m = int(rng.integers(1, 2000))
        probs = random_distribution(rng, m)
        table = AliasTable.from_probs(probs)
        np.testing.assert_allclose(table.reconstructed_probs(), probs, atol=1e-12)


def test_reconstruction_with_zeros_and_spikes(rng):
    probs = np.zeros(1000)
    probs[3] = 0.999
    rest = rng.random(50)
    probs[100:150] = 0.001 * rest / rest.sum()
    table = AliasTable.from_probs(probs)
    np.testing.assert_allclose(table.reconstructed_probs(), probs, atol=1e-12)


def test_uniform_four_outcomes_fills_every_bin():
    table = AliasTable.from_probs(np.full(4, 0.25))
    np.testing.assert_array_equal(table.prob, np.ones(4))


def test_two_outcome_table_by_hand():
    table = AliasTable.from_probs(np.array([0.25, 0.75]))
    assert table.prob[0] == pytest.approx(0.5)
    assert table.alias[0] == 1
    assert table.prob[1] == pytest.approx(1.0)


def test_sampled_sequence_is_deterministic():
    table = AliasTable.from_distribution({"00": 0.5, "01": 0.5})
    a = table.sample_indices(np.random.default_rng(123), 50)
    b = table.sample_indices(np.random.default_rng(123), 50)
    np.testing.assert_array_equal(a, b)
    assert table.outcomes == ["00", "01"]


class _CountingRng:
    """Duck-typed stand-in exposing only random(); counts scalar draws."""

    def __init__(self, seed: int):
        self._rng = np.random.default_rng(seed)
        self.calls = 0

    def random(self, *args):
        self.calls += 1
        return self._rng.random(*args)


def test_one_uniform_draw_per_sample(rng):
    table = AliasTable.from_probs(random_distribution(rng, 257))
    counter = _CountingRng(5)
    for _ in range(400):
        outcome = table.sample_one(counter)
        assert 0 <= outcome < 257
    assert counter.calls == 400


def test_per_sample_cost_independent_of_support(rng):
    small = AliasTable.from_probs(random_distribution(rng, 2**4))
    big = AliasTable.from_probs(random_distribution(rng, 2**20))
    k = 1_000_000

    def best_time(table: AliasTable) -> float:
        times = []
        for rep in range(5):
            g = np.random.default_rng(rep)
            t0 = time.perf_counter()
            table.sample_indices(g, k)
            times.append(time.perf_counter() - t0)
        return min(times)

    assert best_time(big) < 3 * best_time(small)


def test_sampling_matches_distribution(rng):
    m = 100
    probs = random_distribution(rng, m)
    table = AliasTable.from_probs(probs)
    idx = table.sample_indices(np.random.default_rng(77), 1_000_000)
    counts = {format(i, "07b"): int(c) for i, c in enumerate(np.bincount(idx, minlength=m))}
    expected = {format(i, "07b"): float(p) for i, p in enumerate(probs)}
    assert chisquare_pvalue(counts, expected, 1_000_000) > 0.001


def test_invalid_inputs():
    with pytest.raises(SamplingError):
        AliasTable.from_probs(np.array([0.5, 0.6]))
    with pytest.raises(SamplingError):
        AliasTable.from_probs(np.array([-0.1, 1.1]))
    with pytest.raises(SamplingError):
        AliasTable.from_probs(np.zeros(0))
    with pytest.raises(SamplingError):
        counts_to_distribution({})


def test_counts_to_distribution():
    dist = counts_to_distribution({"0": 25, "1": 75})
    assert dist == {"0": 0.25, "1": 0.75}
