import math

import numpy as np
import pytest

from ncp.rng import RngStream, mix_seed


def test_replay_identical():
    a = RngStream(1234, 7)
    b = RngStream(1234, 7)
    assert np.array_equal(a.words(100), b.words(100))
    assert a.bits(130) == b.bits(130)
    assert np.array_equal(a.indices(37, 500), b.indices(37, 500))


def test_streams_differ():
    a = RngStream(1234, 0).words(8)
    b = RngStream(1234, 1).words(8)
    c = RngStream(1235, 0).words(8)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_index_bound_one():
    s = RngStream(5)
    assert all(s.index(1) == 0 for _ in range(10))


def test_index_zero_bound_rejected():
    with pytest.raises(ValueError):
        RngStream(5).index(0)


def test_indices_in_range_and_unbiased_mean():
    m = 11
    n = 10**6
    draws = RngStream(42).indices(m, n)
    assert draws.min() >= 0 and draws.max() < m
    # uniform on 0..m-1: mean (m-1)/2, variance (m^2 - 1)/12
    sigma_mean = math.sqrt((m * m - 1) / 12 / n)
    assert abs(draws.mean() - (m - 1) / 2) < 5 * sigma_mean


def test_power_of_two_bound_uses_all_values():
    draws = RngStream(3).indices(8, 4000)
    assert set(draws.tolist()) == set(range(8))


def test_bits_length_and_masking():
    s = RngStream(9)
    for k in (1, 5, 64, 65, 129):
        v = s.bits(k)
        assert v.length == k


def test_bernoulli_edges_and_mean():
    s = RngStream(11)
    assert s.bernoulli(0.0, 1000).sum() == 0
    assert s.bernoulli(1.0, 1000).sum() == 1000
    n = 200_000
    p = 0.3
    got = s.bernoulli(p, n).sum() / n
    assert abs(got - p) < 5 * math.sqrt(p * (1 - p) / n)


def test_big_index_matches_distribution():
    s = RngStream(17)
    bound = 3
    counts = [0, 0, 0]
    n = 30_000
    for _ in range(n):
        counts[s.big_index(bound)] += 1
    for c in counts:
        assert abs(c - n / 3) < 5 * math.sqrt(n * (1 / 3) * (2 / 3))


def test_mix_seed_deterministic_and_spread():
    assert mix_seed(1, 2, 3) == mix_seed(1, 2, 3)
    seen = {mix_seed(99, tag, i) for tag in range(4) for i in range(100)}
    assert len(seen) == 400
