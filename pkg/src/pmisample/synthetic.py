"""Deterministic synthetic multivariate volumes with planted features.

Each variable has an independent background: a smooth value-noise field
(smoothstep-interpolated random lattice) blended with i.i.d. uniform noise.
Inside each ellipsoidal feature the listed variables are overwritten by a
shared radial profile mapped into a narrow per-variable value band, so those
variables co-occur far more often than independence predicts. Only
wrapping-integer hashing, +, *, / and sqrt are used, so outputs are
bit-identical across platforms. Values are rounded to float32 precision so
they survive the brick and point-set formats unchanged.
"""

from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import InvalidSpec
from .fieldio import Field, GridDims, MultiField


@dataclass(frozen=True)
class Background:
    low: float = 0.0
    high: float = 1.0
    noise: float = 1.0
    cell: int = 16

    def __post_init__(self):
        if not 0.0 <= self.noise <= 1.0:
            raise InvalidSpec(f"background noise fraction must be in [0, 1], got {self.noise}")
        if self.cell < 1:
            raise InvalidSpec("background cell size must be >= 1")
        if not self.high >= self.low:
            raise InvalidSpec("background high must be >= low")


@dataclass(frozen=True)
class VariableSpec:
    name: str
    background: Background = field(default_factory=Background)


@dataclass(frozen=True)
class Feature:
    center: tuple
    radii: tuple
    bands: dict
    jitter: float = 0.02

    def __post_init__(self):
        if len(self.center) != 3 or len(self.radii) != 3:
            raise InvalidSpec("feature center and radii need three components")
        if min(self.radii) <= 0:
            raise InvalidSpec("feature radii must be positive")
        if not self.bands:
            raise InvalidSpec("feature must constrain at least one variable")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        object.__setattr__(self, "bands",
                           {k: (float(lo), float(hi)) for k, (lo, hi) in self.bands.items()})

    def radius_squared(self, dims):
        """Normalised squared ellipsoidal radius of every grid point."""
        x, y, z = dims.delinearize(np.arange(dims.n))
        return (((x - self.center[0]) / self.radii[0]) ** 2
                + ((y - self.center[1]) / self.radii[1]) ** 2
                + ((z - self.center[2]) / self.radii[2]) ** 2)

    def mask(self, dims):
        return self.radius_squared(dims) < 1.0

    def bounding_box(self, dims):
        """Inclusive grid-index box enclosing the ellipsoid, clipped to the grid."""
        lo, hi = [], []
        for c, r, n in zip(self.center, self.radii, dims.as_tuple()):
            lo.append(max(0, int(np.ceil(c - r))))
            hi.append(min(n - 1, int(np.floor(c + r))))
        return tuple(lo), tuple(hi)


@dataclass(frozen=True)
class SyntheticSpec:
    dims: GridDims
    variables: tuple
    features: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "features", tuple(self.features))
        if len(self.variables) < 2:
            raise InvalidSpec("a synthetic spec needs at least two variables")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise InvalidSpec(f"duplicate variable names {names}")
        for f in self.features:
            unknown = set(f.bands) - set(names)
            if unknown:
                raise InvalidSpec(f"feature references unknown variables {sorted(unknown)}")

    @classmethod
    def from_dict(cls, d):
        try:
            dims = GridDims(*d["dims"])
            variables = [VariableSpec(v["name"], Background(**v.get("background", {})))
                         for v in d["variables"]]
            features = [Feature(tuple(f["center"]), tuple(f["radii"]),
                                {k: tuple(b) for k, b in f["bands"].items()},
                                f.get("jitter", 0.02))
                        for f in d.get("features", [])]
        except (KeyError, TypeError) as exc:
            raise InvalidSpec(f"malformed synthetic spec: {exc!r}") from None
        return cls(dims, variables, features)

    def to_dict(self):
        return {
            "dims": list(self.dims.as_tuple()),
            "variables": [{"name": v.name, "background": vars(v.background)}
                          for v in self.variables],
            "features": [{"center": list(f.center), "radii": list(f.radii),
                          "bands": {k: list(b) for k, b in f.bands.items()},
                          "jitter": f.jitter} for f in self.features],
        }

    def feature_mask(self):
        mask = np.zeros(self.dims.n, dtype=bool)
        for f in self.features:
            mask |= f.mask(self.dims)
        return mask


def _smoothstep(t):
    return t * t * (3.0 - 2.0 * t)


def value_noise(dims, cell, seed, stream):
    """Smooth [0, 1] field: random lattice every ``cell`` points, smoothstep-blended."""
    lat = [(n - 1) // cell + 2 for n in dims.as_tuple()]
    lattice = rng.uniform_range(seed, stream, lat[0] * lat[1] * lat[2])
    lattice = lattice.reshape(lat[2], lat[1], lat[0])
    x, y, z = dims.delinearize(np.arange(dims.n))
    gx, fx = np.divmod(x, cell)
    gy, fy = np.divmod(y, cell)
    gz, fz = np.divmod(z, cell)
    wx = _smoothstep(fx / cell)
    wy = _smoothstep(fy / cell)
    wz = _smoothstep(fz / cell)
    out = np.zeros(dims.n)
    for dz, az in ((0, 1.0 - wz), (1, wz)):
        for dy, ay in ((0, 1.0 - wy), (1, wy)):
            for dx, ax in ((0, 1.0 - wx), (1, wx)):
                out += az * ay * ax * lattice[gz + dz, gy + dy, gx + dx]
    return out


def make_synthetic(spec, seed):
    """Generate the :class:`MultiField` described by ``spec`` for ``seed``."""
    dims = spec.dims
    counters = np.arange(dims.n, dtype=np.uint64)
    data = {}
    for v in spec.variables:
        bg = v.background
        unit = rng.uniform(seed, f"bg-noise:{v.name}", counters)
        if bg.noise < 1.0:
            smooth = value_noise(dims, bg.cell, seed, f"bg-lattice:{v.name}")
            unit = (1.0 - bg.noise) * smooth + bg.noise * unit
        data[v.name] = bg.low + (bg.high - bg.low) * unit

    for fi, feat in enumerate(spec.features):
        r2 = feat.radius_squared(dims)
        inside = np.flatnonzero(r2 < 1.0)
        profile = 1.0 - np.sqrt(r2[inside])
        for name, (lo, hi) in feat.bands.items():
            jitter = rng.uniform(seed, f"feature{fi}:{name}", inside.astype(np.uint64)) - 0.5
            data[name][inside] = lo + (hi - lo) * (profile + feat.jitter * jitter)

    fields = [Field(v.name, dims, data[v.name].astype(np.float32).astype(np.float64))
              for v in spec.variables]
    return MultiField(dims, fields)


def noise_spec(n=64, names=("v0", "v1")):
    """Independent uniform noise, no features."""
    return SyntheticSpec(GridDims(n, n, n), [VariableSpec(nm, Background()) for nm in names])


def feature_spec(n=64, names=("v0", "v1")):
    """Smooth noisy backgrounds plus one centred ellipsoid with a joint high band.

    The band sits above the background range, so the query
    ``1.1 <= v0 <= 1.4 AND 1.1 <= v1 <= 1.4`` selects exactly the feature.
    """
    dims = GridDims(n, n, n)
    s = n / 64.0
    bg = Background(low=0.0, high=1.0, noise=0.1, cell=max(2, int(round(16 * s))))
    c = (n - 1) / 2.0
    feat = Feature(center=(c, c, c), radii=(12 * s, 12 * s, 9 * s),
                   bands={nm: (1.1, 1.4) for nm in names}, jitter=0.05)
    return SyntheticSpec(dims, [VariableSpec(nm, bg) for nm in names], [feat])
