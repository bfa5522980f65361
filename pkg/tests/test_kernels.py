"""The numba and numpy flavours of every kernel must agree bit for bit."""

import numpy as np
import pytest
from scipy.spatial import Delaunay

from pmisample import kernels, rng

nb = pytest.importorskip("numba")


def test_splitmix_reference_values():
    # SplitMix64 seeded with 0: published first outputs
    key = np.uint64(0)
    z = kernels._uniform_np(key, np.arange(3, dtype=np.uint64))
    raw = [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
    np.testing.assert_array_equal(z, [(r >> 11) * 2.0**-53 for r in raw])


def test_python_mix_matches_array_mix():
    vals = np.array([0, 1, 2**63, 2**64 - 1, 123456789], dtype=np.uint64)
    arr = kernels._mix64_np(vals)
    assert [int(v) for v in arr] == [rng.mix64(int(v)) for v in vals]


def test_uniform_flavours_agree(rng_idx=np.arange(0, 10**5, 7, dtype=np.uint64)):
    key = np.uint64(rng.stream_key(99, "sample"))
    a = kernels._uniform_nb(key, rng_idx)
    b = kernels._uniform_np(key, rng_idx)
    np.testing.assert_array_equal(a, b)
    assert a.min() >= 0.0 and a.max() < 1.0


def test_bernoulli_flavours_agree():
    key = np.uint64(rng.stream_key(3, "x"))
    idx = np.arange(5000, dtype=np.uint64)
    p = np.linspace(0, 1, 5000)
    np.testing.assert_array_equal(kernels._bernoulli_nb(key, idx, p), kernels._bernoulli_np(key, idx, p))


def test_bin_points_flavours_agree(rng):
    vals = rng.normal(size=(3, 4000))
    vals[:, :3] = vals.max(axis=1, keepdims=True)
    mins = vals.min(axis=1)
    nbins = np.array([7, 128, 1], dtype=np.int64)
    widths = (vals.max(axis=1) - mins) / nbins
    widths[2] = 0.0
    a = kernels._bin_points_nb(vals, mins, widths, nbins)
    b = kernels._bin_points_np(vals, mins, widths, nbins)
    np.testing.assert_array_equal(a, b)
    assert a.max() < 7 * 128


def test_dcor_flavours_agree(rng):
    x = rng.normal(size=700)
    y = x**2 + rng.normal(size=700)
    a = kernels._dcor_sums_nb(x, y)
    b = kernels._dcor_sums_np(x, y, block=64)
    np.testing.assert_allclose(a, b, rtol=1e-10)


@pytest.mark.parametrize("dim", [2, 3])
def test_locate_flavours_agree(rng, dim):
    shape = (9, 8, 7)[:dim]
    pts = np.stack(np.meshgrid(*[np.arange(n) for n in shape], indexing="ij"), -1).reshape(-1, dim)
    sample = pts[np.sort(rng.choice(len(pts), 40, replace=False))].astype(float)
    tri = Delaunay(sample)
    verts = sample[tri.simplices]
    lo = verts.min(axis=1).astype(np.int64)
    hi = verts.max(axis=1).astype(np.int64)
    strides = np.cumprod([1] + list(shape[:-1]))
    owner = np.full(int(np.prod(shape)), -1, dtype=np.int64)
    s1, b1 = kernels._locate_nb(tri.transform, lo, hi, strides, owner, 1e-10)
    s2, b2 = kernels._locate_np(tri.transform, lo, hi, strides, owner, 1e-10, chunk=50)
    np.testing.assert_array_equal(s1, s2)
    np.testing.assert_array_equal(b1, b2)
    assert (s1 >= 0).sum() > 0
