"""Joint histograms over d variables with uniform-width bins per axis."""

import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import (AxisOutOfRange, DimensionalityTooHigh, EmptyHistogram,
                     MemoryBudgetExceeded, SizeMismatch, ValidationError)

DEFAULT_BINS = 128
DEFAULT_D_MAX = 4
DEFAULT_MEMORY_BUDGET = 2 * 1024**3
# Above this many cells the counts are kept sparse (occupied bins only).
DENSE_CELL_LIMIT = 128**3


@dataclass(frozen=True)
class AxisBinning:
    variable_name: str
    min_value: float
    max_value: float
    bin_count: int

    def __post_init__(self):
        if self.bin_count < 1:
            raise ValidationError("bin_count must be >= 1")
        if not self.min_value <= self.max_value:
            raise ValidationError("min_value must not exceed max_value")

    @property
    def width(self):
        return (self.max_value - self.min_value) / self.bin_count

    def bin_of(self, v):
        """Bin index of ``v``; the maximum lands in the last bin, outliers are clamped."""
        v = np.asarray(v, dtype=np.float64)
        w = self.width
        if w == 0.0:
            return np.zeros(v.shape, dtype=np.int64)
        return np.clip(np.floor((v - self.min_value) / w), 0, self.bin_count - 1).astype(np.int64)

    def centers(self):
        return self.min_value + (np.arange(self.bin_count) + 0.5) * self.width


class JointHistogram:
    """Counts of a d-dimensional histogram, stored by occupied bin.

    ``occupied`` holds the ascending row-major flat indices of nonzero bins and
    ``occupied_counts`` their frequencies. ``counts`` gives the dense array.
    """

    def __init__(self, axes, occupied, occupied_counts):
        self.axes = tuple(axes)
        if not self.axes:
            raise ValidationError("a histogram needs at least one axis")
        self.occupied = np.asarray(occupied, dtype=np.int64)
        self.occupied_counts = np.asarray(occupied_counts, dtype=np.int64)
        if self.occupied.shape != self.occupied_counts.shape:
            raise ValidationError("occupied bins and counts differ in length")
        if np.any(self.occupied_counts <= 0):
            raise ValidationError("occupied bins must have positive counts")
        if self.occupied.size and (np.any(np.diff(self.occupied) <= 0)
                                   or self.occupied[0] < 0 or self.occupied[-1] >= self.n_bins):
            raise ValidationError("occupied bin indices must be ascending and in range")
        self.occupied.setflags(write=False)
        self.occupied_counts.setflags(write=False)
        self.total_count = int(self.occupied_counts.sum())

    @classmethod
    def from_counts(cls, counts, axes=None):
        """Wrap a dense count array; placeholder [0, 1] axes when ``axes`` is None."""
        counts = np.asarray(counts)
        if np.any(counts < 0):
            raise ValidationError("counts must be non-negative")
        if axes is None:
            axes = [AxisBinning(f"x{k}", 0.0, 1.0, n) for k, n in enumerate(counts.shape)]
        axes = tuple(axes)
        if tuple(a.bin_count for a in axes) != counts.shape:
            raise ValidationError("count array shape does not match the axes")
        flat = counts.ravel()
        occ = np.flatnonzero(flat)
        return cls(axes, occ, flat[occ].astype(np.int64))

    @property
    def d(self):
        return len(self.axes)

    @property
    def shape(self):
        return tuple(a.bin_count for a in self.axes)

    @property
    def n_bins(self):
        return int(np.prod(self.shape, dtype=object))

    @property
    def variable_names(self):
        return tuple(a.variable_name for a in self.axes)

    @property
    def is_dense(self):
        return self.n_bins <= DENSE_CELL_LIMIT

    @cached_property
    def counts(self):
        out = np.zeros(self.n_bins, dtype=np.int64)
        out[self.occupied] = self.occupied_counts
        out = out.reshape(self.shape)
        out.setflags(write=False)
        return out

    @cached_property
    def occupied_coords(self):
        """Per-axis bin coordinates of the occupied bins, shape ``(d, M)``."""
        if not self.occupied.size:
            return np.zeros((self.d, 0), dtype=np.int64)
        return np.stack(np.unravel_index(self.occupied, self.shape)).astype(np.int64)


@dataclass(frozen=True, eq=False)
class BinAssignment:
    """Flat bin of every grid point, plus its position among the occupied bins."""

    per_point: np.ndarray
    slot: np.ndarray

    def __len__(self):
        return int(self.per_point.shape[0])


def axis_for(name, values, bins):
    values = np.asarray(values)
    return AxisBinning(name, float(values.min()), float(values.max()), int(bins))


def check_budget(shape, d_max=DEFAULT_D_MAX, memory_budget=DEFAULT_MEMORY_BUDGET):
    d = len(shape)
    if d > d_max:
        raise DimensionalityTooHigh(d, d_max)
    cells = int(np.prod(shape, dtype=object))
    if cells * 8 > memory_budget:
        raise MemoryBudgetExceeded(cells, memory_budget)


def histogram_from_values(values, axes):
    """Tally the ``(d, N)`` array ``values`` over ``axes``."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != len(axes):
        raise ValidationError("values must have shape (d, N) matching the axes")
    mins = np.array([a.min_value for a in axes])
    widths = np.array([a.width for a in axes])
    nbins = np.array([a.bin_count for a in axes], dtype=np.int64)
    flat = kernels.bin_points(values, mins, widths, nbins)
    cells = int(np.prod(nbins, dtype=object))
    if cells <= DENSE_CELL_LIMIT:
        dense = np.bincount(flat, minlength=cells)
        occupied = np.flatnonzero(dense)
        rank = np.zeros(cells, dtype=np.int64)
        rank[occupied] = np.arange(occupied.size)
        slot = rank[flat]
        occ_counts = dense[occupied]
    else:
        occupied, slot, occ_counts = np.unique(flat, return_inverse=True, return_counts=True)
        slot = slot.ravel()
    h = JointHistogram(axes, occupied, occ_counts)
    flat.setflags(write=False)
    slot.setflags(write=False)
    return h, BinAssignment(flat, slot)


def build_joint(mf, selected, bins=DEFAULT_BINS, d_max=DEFAULT_D_MAX,
                memory_budget=DEFAULT_MEMORY_BUDGET):
    """Joint histogram of ``selected`` variables of ``mf`` and each point's bin.

    Axes span each variable's exact data range with ``bins`` equal-width bins.
    """
    selected = list(selected)
    if not selected:
        raise ValidationError("select at least one variable")
    if len(set(selected)) != len(selected):
        raise ValidationError(f"duplicate variables in {selected}")
    if int(bins) < 1:
        raise ValidationError("bins must be >= 1")
    fields = [mf[name] for name in selected]
    check_budget((int(bins),) * len(selected), d_max, memory_budget)
    axes = [axis_for(f.name, f.values, bins) for f in fields]
    return histogram_from_values(np.stack([f.values for f in fields]), axes)


def marginal(h, axis_index):
    """Counts of axis ``axis_index`` summed over every other axis."""
    if not 0 <= axis_index < h.d:
        raise AxisOutOfRange(f"axis {axis_index} out of range for d={h.d}")
    out = np.zeros(h.axes[axis_index].bin_count, dtype=np.int64)
    np.add.at(out, h.occupied_coords[axis_index], h.occupied_counts)
    return out


def probabilities(h):
    """Return ``(joint, marginals)``: dense joint probability array and per-axis lists."""
    if h.total_count <= 0:
        raise EmptyHistogram("histogram has no counts")
    joint = h.counts / h.total_count
    return joint, [marginal(h, k) / h.total_count for k in range(h.d)]


def check_assignment(assign, n):
    if len(assign) != n:
        raise SizeMismatch(n, len(assign), "points")


def write_histogram_csv(h, path):
    """Dump nonzero bins as ``b0,...,b{d-1},count`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"b{k}" for k in range(h.d)] + ["count"])
        coords = h.occupied_coords
        for m in range(h.occupied.size):
            w.writerow([int(c) for c in coords[:, m]] + [int(h.occupied_counts[m])])
