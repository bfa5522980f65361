"""Pointwise information per histogram bin and its aggregates.

For a bin ``b = (b_1, ..., b_d)`` with joint probability ``p(b)`` and
marginals ``p_k(b_k)`` the pointwise value is ``log(p(b) / prod_k p_k(b_k))``.
At d=2 this is pointwise mutual information; at d>=3 it is specific
correlation. Both go through the same code path. Natural log throughout.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyHistogram, SizeMismatch, ValidationError, WrongDimensionality
from .fieldio import Field
from .histogram import marginal

NORMALIZATIONS = ("minmax", "clip")


@dataclass(frozen=True, eq=False)
class PointInfoTable:
    """Raw and normalized pointwise information of the occupied bins.

    Unoccupied bins are 0 in both ``raw`` and ``normalized``.
    """

    axes: tuple
    occupied: np.ndarray
    raw_occupied: np.ndarray
    normalized_occupied: np.ndarray
    normalization: str = "minmax"

    @property
    def shape(self):
        return tuple(a.bin_count for a in self.axes)

    def _dense(self, occ_values):
        out = np.zeros(int(np.prod(self.shape, dtype=object)))
        out[self.occupied] = occ_values
        return out.reshape(self.shape)

    @property
    def raw(self):
        return self._dense(self.raw_occupied)

    @property
    def normalized(self):
        return self._dense(self.normalized_occupied)

    def values(self, mode):
        if mode == "raw":
            return self.raw_occupied
        if mode == "normalized":
            return self.normalized_occupied
        raise ValidationError(f"mode must be 'raw' or 'normalized', got {mode!r}")


def _pointwise(h):
    if h.total_count <= 0:
        raise EmptyHistogram("histogram has no counts")
    n = float(h.total_count)
    p = h.occupied_counts / n
    denom = np.ones_like(p)
    coords = h.occupied_coords
    for k in range(h.d):
        denom = denom * (marginal(h, k)[coords[k]] / n)
    return p, np.log(p / denom)


def normalize(raw, scheme="minmax"):
    """Map raw occupied-bin values onto [0, 1], preserving their order.

    ``minmax`` rescales linearly between the smallest and largest value (all
    ones when they coincide); ``clip`` zeroes negatives and divides by the
    maximum.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.size == 0:
        return raw.copy()
    if scheme == "minmax":
        lo, hi = raw.min(), raw.max()
        if hi == lo:
            return np.ones_like(raw)
        return np.clip((raw - lo) / (hi - lo), 0.0, 1.0)
    if scheme == "clip":
        pos = np.maximum(raw, 0.0)
        hi = pos.max()
        return pos / hi if hi > 0 else np.zeros_like(raw)
    raise ValidationError(f"unknown normalization {scheme!r}; choose from {NORMALIZATIONS}")


def pmi_table(h, normalization="minmax"):
    """Pointwise mutual information (d=2) or specific correlation (d>=3) per bin."""
    _, raw = _pointwise(h)
    return PointInfoTable(h.axes, h.occupied, raw, normalize(raw, normalization), normalization)


def total_correlation(h):
    """Expected pointwise value over the joint distribution; >= 0."""
    if h.d < 2:
        raise WrongDimensionality(f"total correlation needs d >= 2, got d={h.d}")
    p, raw = _pointwise(h)
    return float(np.sum(p * raw))


def mutual_information(h):
    if h.d != 2:
        raise WrongDimensionality(f"mutual information needs d == 2, got d={h.d}")
    return total_correlation(h)


def pmi_field(table, assign, dims, mode="normalized", name="pmi"):
    """Scalar field holding each grid point's bin value from ``table``."""
    if len(assign) != dims.n:
        raise SizeMismatch(dims.n, len(assign), "points")
    vals = table.values(mode)
    if not np.array_equal(table.occupied[assign.slot], assign.per_point):
        raise ValidationError("bin assignment does not belong to this table")
    return Field(name, dims, vals[assign.slot])
