import hashlib

import numpy as np
import pytest

from pmisample import GridDims, build_joint, make_synthetic, pmi_table, total_correlation
from pmisample.errors import InvalidSpec
from pmisample.synthetic import Background, Feature, SyntheticSpec, VariableSpec, feature_spec, noise_spec


def test_deterministic():
    spec = feature_spec(16)
    assert make_synthetic(spec, 7) == make_synthetic(spec, 7)
    assert make_synthetic(spec, 7) != make_synthetic(spec, 8)


def test_frozen_checksum():
    # pins the generator's output bit for bit; update only on purpose
    mf = make_synthetic(feature_spec(16), 7)
    digest = [hashlib.sha256(v.values.astype("<f4").tobytes()).hexdigest()[:16]
              for v in mf.variables]
    assert digest == ["5e0f2ce12c97410f", "485d3f43ac38d706"]


def test_values_are_float32_exact():
    mf = make_synthetic(feature_spec(16), 3)
    for v in mf.variables:
        np.testing.assert_array_equal(v.values, v.values.astype(np.float32).astype(np.float64))


def test_invalid_specs():
    dims = GridDims(4, 4, 4)
    with pytest.raises(InvalidSpec):
        SyntheticSpec(dims, [VariableSpec("a")])
    with pytest.raises(InvalidSpec):
        SyntheticSpec(dims, [])
    with pytest.raises(InvalidSpec):
        SyntheticSpec(dims, [VariableSpec("a"), VariableSpec("b")],
                      [Feature((1, 1, 1), (1, 1, 1), {"zz": (0, 1)})])
    with pytest.raises(InvalidSpec):
        SyntheticSpec.from_dict({"dims": [0, 4, 4], "variables": [{"name": "a"}, {"name": "b"}]})
    with pytest.raises(InvalidSpec):
        Background(noise=2.0)


def test_dict_roundtrip():
    spec = feature_spec(32)
    assert SyntheticSpec.from_dict(spec.to_dict()) == spec


def _direct_pmi(x, y, bins):
    """Pointwise values straight from numpy.histogram2d."""
    c, _, _ = np.histogram2d(x, y, bins=bins)
    p = c / c.sum()
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(c > 0, np.log(p / (px * py)), 0.0)
    return c, out


def test_noise_has_no_association(noise_64):
    _, mf = noise_64
    x, y = mf["v0"].values, mf["v1"].values
    c, direct = _direct_pmi(x, y, 8)
    assert (c >= 100).any()
    assert np.abs(direct[c >= 100]).max() < 0.1
    h, _ = build_joint(mf, ["v0", "v1"], 8)
    raw = pmi_table(h).raw
    assert np.abs(raw[h.counts >= 100]).max() < 0.1
    h128, _ = build_joint(mf, ["v0", "v1"], 128)
    assert abs(total_correlation(h128)) < 0.05


def test_band_bin_has_max_pmi(feature_64):
    spec, mf = feature_64
    h, _ = build_joint(mf, ["v0", "v1"], 128)
    raw = pmi_table(h).raw
    # exhaustive scan for the maximum
    best = max(np.ndindex(raw.shape), key=lambda ij: raw[ij])
    centers = [ax.centers()[b] for ax, b in zip(h.axes, best)]
    lo, hi = spec.features[0].bands["v0"]
    band = spec.features[0].bands
    width = max(ax.width for ax in h.axes)
    for name, c in zip(("v0", "v1"), centers):
        lo, hi = band[name]
        assert lo - 0.05 * (hi - lo) - width <= c <= hi + 0.05 * (hi - lo) + width
