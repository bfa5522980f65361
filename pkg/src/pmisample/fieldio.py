"""Grid types and the on-disk formats for bricks, sidecars and point sets."""

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (InvalidSpec, MalformedHeader, NonFiniteValue, SchemaError,
                     SizeMismatch, UnknownVariable, ValidationError)

POINTSET_MAGIC = b"MVSP"
POINTSET_VERSION = 1
_HEADER = struct.Struct("<4sHHIQIII")
_MAX_U32 = 2**32 - 1


@dataclass(frozen=True)
class GridDims:
    """Point counts per axis of a regular grid. Linear order is x-fastest."""

    nx: int
    ny: int
    nz: int

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InvalidSpec(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.nx * self.ny * self.nz >= 2**64:
            raise InvalidSpec("grid too large for a 64-bit point count")

    @property
    def n(self):
        return self.nx * self.ny * self.nz

    @property
    def shape_zyx(self):
        """Shape of the C-ordered 3-D view of a flat value array."""
        return (self.nz, self.ny, self.nx)

    def as_tuple(self):
        return (self.nx, self.ny, self.nz)

    def linear(self, i, j, k):
        return i + self.nx * (j + self.ny * k)

    def delinearize(self, index):
        index = np.asarray(index, dtype=np.int64)
        i = index % self.nx
        rest = index // self.nx
        return i, rest % self.ny, rest // self.ny

    def coords(self, index=None):
        """Grid-index coordinates ``(x, y, z)`` as an ``(M, 3)`` float array."""
        if index is None:
            index = np.arange(self.n, dtype=np.int64)
        i, j, k = self.delinearize(index)
        return np.stack([i, j, k], axis=1).astype(np.float64)


def _frozen(values):
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Field:
    """One named scalar variable on a grid, stored flat in float64."""

    name: str
    dims: GridDims
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(np.ravel(self.values))
        if values.shape[0] != self.dims.n:
            raise SizeMismatch(self.dims.n, values.shape[0], "values")
        object.__setattr__(self, "values", values)

    def volume(self):
        """Read-only ``(nz, ny, nx)`` view."""
        return self.values.reshape(self.dims.shape_zyx)

    def __eq__(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        return (self.name == other.name and self.dims == other.dims
                and np.array_equal(self.values.view(np.uint64), other.values.view(np.uint64)))


@dataclass(frozen=True, eq=False)
class MultiField:
    dims: GridDims
    variables: tuple

    def __post_init__(self):
        variables = tuple(self.variables)
        if not variables:
            raise InvalidSpec("a MultiField needs at least one variable")
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise InvalidSpec(f"duplicate variable names in {names}")
        for v in variables:
            if v.dims != self.dims:
                raise InvalidSpec(f"variable {v.name!r} has dims {v.dims}, expected {self.dims}")
        object.__setattr__(self, "variables", variables)

    @property
    def names(self):
        return tuple(v.name for v in self.variables)

    def __getitem__(self, name):
        for v in self.variables:
            if v.name == name:
                return v
        raise UnknownVariable(name)

    def __contains__(self, name):
        return name in self.names

    def stack(self, names=None):
        """Values of ``names`` (default: all) as a ``(d, N)`` array."""
        names = self.names if names is None else names
        return np.stack([self[n].values for n in names])

    def __eq__(self, other):
        if not isinstance(other, MultiField):
            return NotImplemented
        return self.dims == other.dims and self.variables == other.variables


@dataclass(frozen=True, eq=False)
class SampledPointSet:
    """Unstructured subset of grid points with every variable's value.

    ``indices`` is strictly ascending (canonical form); ``values`` has shape
    ``(len(indices), len(variable_names))``.
    """

    dims: GridDims
    variable_names: tuple
    indices: np.ndarray
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        names = tuple(self.variable_names)
        idx = np.array(self.indices, dtype=np.uint64).ravel()
        vals = np.array(self.values, dtype=np.float64).reshape(idx.shape[0], len(names))
        if idx.size:
            if int(idx.max()) >= self.dims.n:
                raise ValidationError("point index outside the grid")
            if np.any(idx[1:] <= idx[:-1]):
                raise ValidationError("point indices must be strictly ascending")
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate variable names in {names}")
        idx.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "variable_names", names)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_unsorted(cls, dims, variable_names, indices, values):
        indices = np.asarray(indices, dtype=np.uint64)
        order = np.argsort(indices, kind="stable")
        return cls(dims, variable_names, indices[order], np.asarray(values)[order])

    @classmethod
    def from_multifield(cls, mf, indices):
        """Take the points at ``indices`` (any order, distinct) from ``mf``."""
        indices = np.unique(np.asarray(indices, dtype=np.uint64))
        vals = mf.stack()[:, indices.astype(np.int64)].T
        return cls(mf.dims, mf.names, indices, vals)

    def __len__(self):
        return int(self.indices.shape[0])

    def column(self, name):
        try:
            k = self.variable_names.index(name)
        except ValueError:
            raise UnknownVariable(name) from None
        return self.values[:, k]

    def coords(self):
        return self.dims.coords(self.indices.astype(np.int64))

    def __eq__(self, other):
        if not isinstance(other, SampledPointSet):
            return NotImplemented
        return (self.dims == other.dims and self.variable_names == other.variable_names
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.values.view(np.uint64), other.values.view(np.uint64)))


# --- bricks ----------------------------------------------------------------

def load_field(path, dims, name):
    """Read a headerless little-endian float32 brick into a :class:`Field`."""
    raw = Path(path).read_bytes()
    expected = 4 * dims.n
    if len(raw) != expected:
        raise SizeMismatch(expected, len(raw))
    values = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise NonFiniteValue(int(bad[0]))
    return Field(name, dims, values)


def save_field(f, path):
    """Write ``f.values`` as little-endian float32 (narrowing if needed)."""
    Path(path).write_bytes(np.asarray(f.values, dtype="<f4").tobytes())


def load_multifield(sidecar):
    """Load every variable listed in a JSON sidecar.

    Brick paths are resolved relative to the sidecar's directory.
    """
    sidecar = Path(sidecar)
    meta = json.loads(sidecar.read_text())
    dims, entries = _parse_sidecar(meta)
    fields = [load_field(sidecar.parent / e["file"], dims, e["name"]) for e in entries]
    return MultiField(dims, fields)


def _parse_sidecar(meta):
    try:
        dims = GridDims(*meta["dims"])
        entries = meta["variables"]
        for e in entries:
            if not isinstance(e["name"], str) or not isinstance(e["file"], str):
                raise TypeError
    except (KeyError, TypeError, InvalidSpec) as exc:
        raise SchemaError(f"malformed sidecar: {exc!r}") from None
    if not entries:
        raise SchemaError("sidecar lists no variables")
    return dims, entries


def sidecar_dict(dims, names, files):
    return {"dims": list(dims.as_tuple()),
            "variables": [{"name": n, "file": f} for n, f in zip(names, files)]}


def save_multifield(mf, sidecar):
    """Write one ``<name>.raw`` brick per variable next to ``sidecar``."""
    sidecar = Path(sidecar)
    files = []
    for v in mf.variables:
        fname = f"{v.name}.raw"
        save_field(v, sidecar.parent / fname)
        files.append(fname)
    sidecar.write_text(json.dumps(sidecar_dict(mf.dims, mf.names, files), indent=2) + "\n")


def sidecar_dims(sidecar):
    dims, _ = _parse_sidecar(json.loads(Path(sidecar).read_text()))
    return dims


# --- point sets ------------------------------------------------------------

def _record_dtype(nvars):
    return np.dtype([("index", "<u8"), ("values", "<f4", (nvars,))])


def save_pointset(ps, path):
    """Write ``ps`` in the MVSP v1 binary format.

    Layout (all little-endian): ``b"MVSP"``, u16 version, u16 reserved,
    u32 nVars, u64 nPoints, u32 nx, ny, nz; then per variable a u16 byte
    length and UTF-8 name; then nPoints packed records ``(u64 index,
    nVars x f32)``.
    """
    if max(ps.dims.as_tuple()) > _MAX_U32:
        raise ValidationError("grid dimension does not fit in u32")
    parts = [_HEADER.pack(POINTSET_MAGIC, POINTSET_VERSION, 0, len(ps.variable_names),
                          len(ps), ps.dims.nx, ps.dims.ny, ps.dims.nz)]
    for name in ps.variable_names:
        encoded = name.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise ValidationError(f"variable name too long: {name[:32]}...")
        parts.append(struct.pack("<H", len(encoded)) + encoded)
    rec = np.empty(len(ps), dtype=_record_dtype(len(ps.variable_names)))
    rec["index"] = ps.indices
    rec["values"] = ps.values
    parts.append(rec.tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_pointset(path):
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise MalformedHeader("file shorter than the point-set header")
    magic, version, _reserved, nvars, npoints, nx, ny, nz = _HEADER.unpack_from(raw, 0)
    if magic != POINTSET_MAGIC:
        raise MalformedHeader(f"bad magic {magic!r}")
    if version != POINTSET_VERSION:
        raise MalformedHeader(f"unsupported version {version}")
    try:
        dims = GridDims(nx, ny, nz)
    except InvalidSpec as exc:
        raise MalformedHeader(str(exc)) from None
    pos = _HEADER.size
    names = []
    for _ in range(nvars):
        if pos + 2 > len(raw):
            raise MalformedHeader("truncated variable names")
        (length,) = struct.unpack_from("<H", raw, pos)
        pos += 2
        if pos + length > len(raw):
            raise MalformedHeader("truncated variable names")
        try:
            names.append(raw[pos:pos + length].decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise MalformedHeader(f"variable name is not UTF-8: {exc}") from None
        pos += length
    dt = _record_dtype(nvars)
    if len(raw) - pos != npoints * dt.itemsize:
        raise MalformedHeader(
            f"expected {npoints * dt.itemsize} record bytes, found {len(raw) - pos}")
    rec = np.frombuffer(raw, dtype=dt, count=npoints, offset=pos)
    values = rec["values"].astype(np.float64).reshape(npoints, nvars)
    return SampledPointSet(dims, names, rec["index"].copy(), values)
