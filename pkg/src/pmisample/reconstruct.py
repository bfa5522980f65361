"""Scattered-data reconstruction of a sampled variable onto its full grid.

Geometry is in grid-index coordinates (unit spacing). Every mode returns the
stored sample value, bit for bit, at sampled grid points.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, cKDTree

from . import kernels
from .errors import DegenerateGeometry, ValidationError
from .fieldio import Field


@dataclass(frozen=True)
class DelaunayLinear:
    """Barycentric interpolation in the Delaunay simplex containing each point.

    Points outside the convex hull of the samples take the nearest sample's
    value. Axes of length 1 are dropped first, so 2-D and 1-D grids are
    triangulated in their own dimension.
    """


@dataclass(frozen=True)
class ShepardIDW:
    k: int = 8
    power: float = 2.0

    def __post_init__(self):
        if self.k < 1 or not self.power > 0:
            raise ValidationError("ShepardIDW needs k >= 1 and power > 0")


@dataclass(frozen=True)
class NearestNeighbor:
    """Closest sample; ties go to the lowest linear index."""


MODES = {"delaunay": DelaunayLinear, "idw": ShepardIDW, "nearest": NearestNeighbor}


def parse_mode(name, **kwargs):
    try:
        return MODES[name](**kwargs)
    except KeyError:
        raise ValidationError(f"unknown reconstruction mode {name!r}; choose from {sorted(MODES)}") \
            from None


def nearest_index(sample_xyz, query_xyz, tree=None):
    """Position in ``sample_xyz`` of each query point's nearest sample.

    ``sample_xyz`` must be ordered by ascending linear index so that choosing
    the lowest position among equidistant samples is the documented tie-break.
    """
    m = sample_xyz.shape[0]
    tree = cKDTree(sample_xyz) if tree is None else tree
    k = min(8, m)
    dist, pos = tree.query(query_xyz, k=k)
    dist = dist.reshape(len(query_xyz), k)
    pos = pos.reshape(len(query_xyz), k)
    tied = dist == dist[:, :1]
    best = np.where(tied, pos, m).min(axis=1)
    # every one of the k neighbours tied: there may be more just as close
    overflow = np.flatnonzero(tied[:, -1]) if k < m else np.empty(0, dtype=np.int64)
    for row in overflow:
        cands = tree.query_ball_point(query_xyz[row], dist[row, 0] * (1 + 1e-12) + 1e-12)
        cands = np.asarray(cands, dtype=np.int64)
        d = np.sqrt(((sample_xyz[cands] - query_xyz[row]) ** 2).sum(axis=1))
        best[row] = cands[d == d.min()].min()
    return best


def _affine_rank(points):
    if points.shape[0] < 2:
        return 0
    centered = points - points.mean(axis=0)
    return int(np.linalg.matrix_rank(centered))


class _Weights:
    """For every unsampled grid point: contributing sample positions and weights."""

    def __init__(self, pos, weights, clip=False):
        self.pos = pos
        self.weights = weights
        self.clip = clip

    def apply(self, values):
        v = values[self.pos]
        out = (self.weights * v).sum(axis=1)
        if self.clip:
            out = np.clip(out, v.min(axis=1), v.max(axis=1))
        return out


def _delaunay_weights(sample_xyz, query_idx, active, dims):
    """Barycentric weights from a Delaunay triangulation of the sample locations.

    Grid points are located by scanning each simplex's bounding box; points
    covered by no simplex (outside the hull) get their nearest sample.
    """
    tri = Delaunay(sample_xyz)
    verts = sample_xyz[tri.simplices]
    lo = np.ceil(verts.min(axis=1)).astype(np.int64)
    hi = np.floor(verts.max(axis=1)).astype(np.int64)
    full_strides = (1, dims.nx, dims.nx * dims.ny)
    strides = np.array([full_strides[a] for a in active], dtype=np.int64)
    owner = np.full(dims.n, -2, dtype=np.int64)
    owner[query_idx] = -1
    simplex, bary = kernels.locate_in_simplices(tri.transform, lo, hi, strides, owner)
    simplex, bary = simplex[query_idx], bary[query_idx]
    k = sample_xyz.shape[1] + 1
    pos = np.zeros((query_idx.size, k), dtype=np.int64)
    w = np.zeros((query_idx.size, k))
    inside = simplex >= 0
    pos[inside] = tri.simplices[simplex[inside]]
    w[inside] = bary[inside]
    outside = ~inside
    if outside.any():
        q = dims.coords(query_idx[outside])[:, active]
        pos[outside, 0] = nearest_index(sample_xyz, q)
        w[outside, 0] = 1.0
    return _Weights(pos, w, clip=True)


def _segment_weights(x, qx):
    """Piecewise-linear weights along one axis; constant beyond the end samples."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    right = np.clip(np.searchsorted(xs, qx, side="right"), 1, xs.size - 1) if xs.size > 1 \
        else np.zeros(qx.size, dtype=np.int64)
    left = np.maximum(right - 1, 0)
    span = xs[right] - xs[left]
    t = np.where(span > 0, (qx - xs[left]) / np.where(span > 0, span, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    pos = np.stack([order[left], order[right]], axis=1)
    return _Weights(pos, np.stack([1.0 - t, t], axis=1), clip=True)


def _idw_weights(sample_xyz, query_xyz, k, power):
    k = min(k, sample_xyz.shape[0])
    dist, pos = cKDTree(sample_xyz).query(query_xyz, k=k)
    dist = dist.reshape(len(query_xyz), k)
    pos = pos.reshape(len(query_xyz), k)
    w = np.zeros_like(dist)
    exact = dist[:, 0] == 0.0
    w[exact, 0] = 1.0
    inv = 1.0 / dist[~exact] ** power
    w[~exact] = inv / inv.sum(axis=1, keepdims=True)
    return _Weights(pos, w)


def _nearest_weights(sample_xyz, query_xyz):
    pos = nearest_index(sample_xyz, query_xyz)[:, None]
    return _Weights(pos, np.ones((pos.shape[0], 1)))


def reconstruct_many(ps, variables, dims=None, mode=None):
    """Rebuild several variables of ``ps`` on the full grid, sharing the geometry."""
    dims = ps.dims if dims is None else dims
    if dims != ps.dims:
        raise ValidationError(f"point set lives on {ps.dims}, not {dims}")
    mode = DelaunayLinear() if mode is None else mode
    columns = [ps.column(v) for v in variables]
    if len(ps) == 0:
        raise ValidationError("cannot reconstruct from an empty point set")

    sample_idx = ps.indices.astype(np.int64)
    active = [a for a, n in enumerate(dims.as_tuple()) if n > 1]
    sample_xyz = ps.coords()[:, active]
    query_idx = np.setdiff1d(np.arange(dims.n), sample_idx, assume_unique=True)
    query_xyz = dims.coords(query_idx)[:, active]

    if isinstance(mode, DelaunayLinear):
        rank = _affine_rank(sample_xyz)
        if not active:
            mode = NearestNeighbor()
        elif rank < len(active):
            warnings.warn(f"samples span {rank} of {len(active)} grid dimensions; "
                          "falling back to inverse-distance weighting",
                          DegenerateGeometry, stacklevel=2)
            mode = ShepardIDW()

    weights = None
    if query_idx.size:
        if isinstance(mode, NearestNeighbor):
            weights = _nearest_weights(sample_xyz, query_xyz)
        elif isinstance(mode, ShepardIDW):
            weights = _idw_weights(sample_xyz, query_xyz, mode.k, mode.power)
        elif len(active) == 1:
            weights = _segment_weights(sample_xyz[:, 0], query_xyz[:, 0])
        else:
            weights = _delaunay_weights(sample_xyz, query_idx, active, dims)

    out = []
    for name, values in zip(variables, columns):
        full = np.empty(dims.n)
        full[sample_idx] = values
        if weights is not None:
            full[query_idx] = weights.apply(values)
        out.append(Field(name, dims, full))
    return out


def reconstruct(ps, variable, dims=None, mode=None):
    """Rebuild ``variable`` of point set ``ps`` on the full grid ``dims``."""
    return reconstruct_many(ps, [variable], dims, mode)[0]
