"""Quality metrics: slice rasters, SSIM, MSE, Pearson and distance correlation."""

from dataclasses import dataclass

import numpy as np

from . import kernels, rng
from .errors import (DimensionMismatch, EmptyROI, IndexOutOfRange, TooSmall,
                     ValidationError, ZeroVariance)
from .fieldio import Field

AXES = {"x": 0, "y": 1, "z": 2}
SSIM_PATCH = 8
SSIM_K1 = 0.01
SSIM_K2 = 0.03
DCOR_MAX_POINTS = 4096
DCOR_SEED = 0


@dataclass(frozen=True, eq=False)
class RasterImage:
    pixels: np.ndarray

    def __post_init__(self):
        px = np.array(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise ValidationError("an image needs a non-empty 2-D pixel array")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]


@dataclass(frozen=True)
class RegionOfInterest:
    """Inclusive axis-aligned box ``lo..hi`` in grid-index coordinates."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != 3 or len(self.hi) != 3:
            raise ValidationError("ROI needs three lo and three hi bounds")
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise ValidationError(f"ROI lo {self.lo} exceeds hi {self.hi}")
        object.__setattr__(self, "lo", tuple(int(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(int(v) for v in self.hi))

    @classmethod
    def parse(cls, text):
        """Parse ``"x0:x1,y0:y1,z0:z1"``."""
        try:
            pairs = [tuple(int(v) for v in part.split(":")) for part in text.split(",")]
            lo, hi = zip(*pairs)
        except ValueError:
            raise ValidationError(f"ROI must look like x0:x1,y0:y1,z0:z1, got {text!r}") from None
        return cls(lo, hi)

    def mask(self, dims):
        i, j, k = dims.delinearize(np.arange(dims.n))
        m = np.ones(dims.n, dtype=bool)
        for c, lo, hi in zip((i, j, k), self.lo, self.hi):
            m &= (c >= lo) & (c <= hi)
        if not m.any():
            raise EmptyROI(f"ROI {self.lo}..{self.hi} does not intersect the grid {dims}")
        return m

    def __str__(self):
        return ",".join(f"{l}:{h}" for l, h in zip(self.lo, self.hi))


def rasterize_slice(f, axis, index, value_range):
    """Grayscale image of one axis-normal slice, linearly mapped and clamped to [0, 1].

    Rows run along the slower of the two remaining axes (y for a z-slice).
    """
    a = AXES[axis] if isinstance(axis, str) else int(axis)
    n = f.dims.as_tuple()[a]
    if not 0 <= index < n:
        raise IndexOutOfRange(f"slice {index} outside 0..{n - 1} on axis {axis}")
    lo, hi = (float(v) for v in value_range)
    if not lo < hi:
        raise ValidationError("value range needs min < max")
    sl = np.take(f.volume(), index, axis=2 - a)  # volume is (z, y, x)
    return RasterImage(np.clip((sl - lo) / (hi - lo), 0.0, 1.0))


def _as_array(img):
    if isinstance(img, RasterImage):
        return img.pixels
    if isinstance(img, Field):
        return img.values
    return np.asarray(img, dtype=np.float64)


def _patches(px, p):
    h, w = px.shape
    hp, wp = h // p, w // p
    return px[:hp * p, :wp * p].reshape(hp, p, wp, p).swapaxes(1, 2).reshape(hp * wp, p * p)


def ssim(a, b, patch=SSIM_PATCH, dynamic_range=1.0):
    """Mean SSIM over non-overlapping ``patch`` x ``patch`` windows.

    Each window scores luminance x contrast x structure with unit exponents,
    ``C1 = (0.01 L)^2``, ``C2 = (0.03 L)^2`` and ``C3 = C2 / 2``; the product
    then collapses to the familiar two-factor form. Window statistics are
    population moments. Partial windows at the right and bottom edges are
    ignored.
    """
    pa, pb = _as_array(a), _as_array(b)
    if pa.shape != pb.shape:
        raise DimensionMismatch(f"image shapes differ: {pa.shape} vs {pb.shape}")
    if pa.ndim != 2 or min(pa.shape) < patch:
        raise TooSmall(f"images must be at least {patch}x{patch}, got {pa.shape}")
    c1 = (SSIM_K1 * dynamic_range) ** 2
    c2 = (SSIM_K2 * dynamic_range) ** 2
    xa = _patches(pa, patch)
    xb = _patches(pb, patch)
    ma = xa.mean(axis=1)
    mb = xb.mean(axis=1)
    da = xa - ma[:, None]
    db = xb - mb[:, None]
    va = (da * da).mean(axis=1)
    vb = (db * db).mean(axis=1)
    cov = (da * db).mean(axis=1)
    local = ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
    return float(local.mean())


def mse(a, b):
    pa, pb = _as_array(a), _as_array(b)
    if pa.shape != pb.shape:
        raise DimensionMismatch(f"shapes differ: {pa.shape} vs {pb.shape}")
    d = pa - pb
    return float(np.mean(d * d))


def _masked_pair(x, y, roi):
    xv, yv = _as_array(x), _as_array(y)
    if xv.shape != yv.shape:
        raise DimensionMismatch(f"shapes differ: {xv.shape} vs {yv.shape}")
    if roi is not None:
        if not isinstance(x, Field):
            raise ValidationError("an ROI needs Field arguments")
        m = roi.mask(x.dims)
        xv, yv = xv[m], yv[m]
    return xv, yv


def pearson(x, y, roi=None):
    """Sample Pearson correlation of ``x`` and ``y``, optionally inside ``roi``."""
    xv, yv = _masked_pair(x, y, roi)
    if xv.size < 2:
        raise EmptyROI("need at least two points")
    dx = xv - xv.mean()
    dy = yv - yv.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("Pearson correlation is undefined for a constant input")
    r = float(np.dot(dx, dy)) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def subsample_positions(n, max_points, seed):
    """Deterministic ``max_points`` of ``range(n)``: those with the smallest draws."""
    if n <= max_points:
        return np.arange(n)
    u = rng.uniform_range(seed, "dcor-subsample", n)
    keep = np.argsort(u, kind="stable")[:max_points]
    return np.sort(keep)


def distance_correlation(x, y, roi=None, max_points=DCOR_MAX_POINTS, seed=DCOR_SEED):
    """Sample distance correlation (V-statistic form), in [0, 1].

    Above ``max_points`` points a seeded subsample is used, because the
    statistic costs O(n^2).
    """
    xv, yv = _masked_pair(x, y, roi)
    if xv.size < 2:
        raise EmptyROI("need at least two points")
    keep = subsample_positions(xv.size, max_points, seed)
    dcov2, dvx2, dvy2 = kernels.dcor_sums(xv[keep], yv[keep])
    denom = np.sqrt(dvx2 * dvy2)
    if denom <= 0.0:
        return 0.0
    return float(np.sqrt(np.clip(dcov2 / denom, 0.0, 1.0)))


def write_png(img, path):
    from PIL import Image

    px = np.round(np.clip(_as_array(img), 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(np.ascontiguousarray(px)).save(path)
