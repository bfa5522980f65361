import numpy as np
import pytest

from pmisample import rng


def test_stream_key_is_deterministic_and_distinct():
    assert rng.stream_key(7, "a") == rng.stream_key(7, "a")
    assert rng.stream_key(7, "a") != rng.stream_key(7, "b")
    assert rng.stream_key(7, "a") != rng.stream_key(8, "a")


def test_draws_depend_only_on_counter():
    idx = np.arange(1000, dtype=np.uint64)
    full = rng.uniform(5, "s", idx)
    perm = np.random.default_rng(0).permutation(1000)
    np.testing.assert_array_equal(rng.uniform(5, "s", idx[perm]), full[perm])
    np.testing.assert_array_equal(rng.uniform_range(5, "s", 10, start=500), full[500:510])


def test_uniformity_chi_square():
    u = rng.uniform_range(1, "chi", 100_000)
    counts, _ = np.histogram(u, bins=20, range=(0, 1))
    expected = 5000
    chi2 = ((counts - expected) ** 2 / expected).sum()
    # 19 dof: P(chi2 > 43.8) ~ 0.001
    assert chi2 < 43.8


def test_negative_seed_rejected():
    with pytest.raises(ValueError):
        rng.stream_key(-1, "x")
