import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import dcor_reference, ssim_reference
from pmisample import (Field, GridDims, RasterImage, RegionOfInterest, distance_correlation,
                       mse, pearson, rasterize_slice, ssim)
from pmisample.errors import (DimensionMismatch, EmptyROI, IndexOutOfRange, TooSmall,
                              ValidationError, ZeroVariance)
from pmisample.evaluate import write_png


def test_ssim_identity_and_inversion():
    img = np.random.default_rng(0).random((32, 24))
    assert ssim(img, img) == pytest.approx(1.0, abs=1e-12)
    board = (np.indices((16, 16)).sum(axis=0) % 2).astype(float)
    assert ssim(board, 1.0 - board) < 0


def test_ssim_against_reference():
    rng = np.random.default_rng(4)
    a = rng.random((40, 36))
    b = np.clip(a + rng.normal(0, 0.1, a.shape), 0, 1)
    assert ssim(a, b) == pytest.approx(ssim_reference(a, b), abs=1e-12)
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-15)


def test_ssim_errors():
    with pytest.raises(DimensionMismatch):
        ssim(np.zeros((8, 8)), np.zeros((8, 9)))
    with pytest.raises(TooSmall):
        ssim(np.zeros((7, 8)), np.zeros((7, 8)))


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (16, 16), elements=st.floats(0, 1)),
       arrays(np.float64, (16, 16), elements=st.floats(0, 1)))
def test_ssim_bounded_symmetric(a, b):
    s = ssim(a, b)
    assert -1 - 1e-12 <= s <= 1 + 1e-12
    assert s == pytest.approx(ssim(b, a), abs=1e-12)


def test_mse_examples():
    assert mse(np.zeros((2, 2)), np.ones((2, 2))) == 1.0
    assert mse([1.0, 2.0], [3.0, 5.0]) == pytest.approx(6.5)
    assert mse(np.array([0.0, 0.0]), np.array([1.0, 3.0])) == 5.0


def test_pearson_examples():
    x = np.arange(10.0)
    assert pearson(x, 2 * x + 1) == pytest.approx(1.0)
    assert pearson(x, -x) == pytest.approx(-1.0)
    assert pearson([1.0, 2.0, 3.0, 4.0, 5.0], [2.0, 1.0, 4.0, 3.0, 5.0]) == pytest.approx(0.8)
    with pytest.raises(ZeroVariance):
        pearson(x, np.ones(10))


def test_dcor_against_reference():
    rng = np.random.default_rng(9)
    x = rng.normal(size=300)
    y = x ** 3 + rng.normal(size=300)
    assert distance_correlation(x, y) == pytest.approx(dcor_reference(x, y), abs=1e-10)


def test_dcor_sees_nonlinear_dependence():
    x = np.linspace(-1, 1, 401)
    y = x * x
    assert abs(pearson(x, y)) < 1e-12
    assert distance_correlation(x, y) > 0.4


def test_dcor_independent_small():
    rng = np.random.default_rng(2)
    x, y = rng.normal(size=4096), rng.normal(size=4096)
    assert distance_correlation(x, y) < 0.08


def test_dcor_invariances():
    rng = np.random.default_rng(5)
    x = rng.random(500)
    y = np.sin(4 * x) + 0.2 * rng.random(500)
    base = distance_correlation(x, y)
    assert distance_correlation(3 * x - 7, y) == pytest.approx(base, abs=1e-10)
    assert distance_correlation(x, -0.5 * y + 2) == pytest.approx(base, abs=1e-10)
    assert distance_correlation(y, x) == pytest.approx(base, abs=1e-12)
    assert distance_correlation(x, x) == pytest.approx(1.0, abs=1e-12)


def test_dcor_subsample_is_deterministic():
    rng = np.random.default_rng(6)
    x = rng.random(6000)
    y = x + rng.random(6000)
    assert distance_correlation(x, y) == distance_correlation(x, y)
    assert distance_correlation(x, y, seed=1) != distance_correlation(x, y)


def test_roi_restricts_metrics():
    dims = GridDims(4, 4, 2)
    a = Field("a", dims, np.arange(dims.n, dtype=float))
    b = Field("b", dims, np.where(np.arange(dims.n) < 16, np.arange(dims.n), 0.0))
    roi = RegionOfInterest.parse("0:3,0:3,0:0")
    assert pearson(a, b, roi) == pytest.approx(1.0)
    assert pearson(a, b) < 1.0
    assert roi.mask(dims).sum() == 16
    with pytest.raises(EmptyROI):
        RegionOfInterest.parse("0:4,0:4,3:4").mask(dims)
    with pytest.raises(ValidationError):
        RegionOfInterest.parse("0:4,0:4")


def test_rasterize():
    dims = GridDims(3, 2, 2)
    f = Field("f", dims, np.arange(dims.n, dtype=float))
    img = rasterize_slice(f, "z", 1, (6.0, 10.0))
    np.testing.assert_allclose(img.pixels, [[0, 0.25, 0.5], [0.75, 1, 1]])
    assert (img.height, img.width) == (2, 3)
    flat = Field("c", dims, np.full(dims.n, 2.0))
    assert np.all(rasterize_slice(flat, "x", 0, (1.0, 3.0)).pixels == 0.5)
    assert rasterize_slice(f, "x", 2, (0.0, 11.0)).pixels.shape == (2, 2)
    with pytest.raises(IndexOutOfRange):
        rasterize_slice(f, "z", 2, (0.0, 1.0))
    with pytest.raises(ValidationError):
        rasterize_slice(f, "z", 0, (1.0, 1.0))


def test_png_roundtrip(tmp_path):
    from PIL import Image
    img = RasterImage(np.linspace(0, 1, 64).reshape(8, 8))
    path = tmp_path / "s.png"
    write_png(img, path)
    back = np.asarray(Image.open(path))
    assert back.shape == (8, 8) and back[0, 0] == 0 and back[-1, -1] == 255
