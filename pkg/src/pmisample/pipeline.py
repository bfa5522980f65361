"""Benchmark runner: both samplers over a grid of sampling fractions and seeds.

A config is one JSON document::

    {
      "schema_version": 1,
      "dataset": {"synthetic": "feature", "n": 64, "seed": 7},
      "variables": ["v0", "v1"],
      "alphas": [0.01, 0.05],
      "seeds": [0, 1, 2],
      "bins": 128,
      "queries": ["1.1 <= v0 <= 1.4 AND 1.1 <= v1 <= 1.4"],
      "reconstruction": {"mode": "delaunay", "slice": "z:32", "roi": "feature",
                         "metrics": ["ssim", "mse", "pearson", "dcor"]}
    }

``dataset`` may instead be ``{"sidecar": "path.json"}`` or carry a full
synthetic spec under ``"spec"``. Every (method, alpha, seed) cell is independent,
so cells run on a thread pool; the report does not depend on the pool size.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SchemaError, ValidationError
from .evaluate import (AXES, RegionOfInterest, distance_correlation, mse, pearson,
                       rasterize_slice, ssim, write_png)
from .fieldio import load_multifield, save_field, save_multifield, save_pointset
from .histogram import DEFAULT_BINS, build_joint
from .pointinfo import pmi_table
from .query import jaccard, parse_query, query_raw, query_sampled
from .reconstruct import parse_mode, reconstruct_many
from .sampler import build_acceptance, check_alpha, pmi_sample, random_sample
from .synthetic import SyntheticSpec, feature_spec, make_synthetic, noise_spec

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
METHODS = ("random", "pmi")
METRICS = ("ssim", "mse", "pearson", "dcor")
PRESETS = {"feature": feature_spec, "noise": noise_spec}

_TOP_KEYS = {"schema_version", "dataset", "variables", "alphas", "seeds", "bins",
             "methods", "exact_quota", "normalization", "queries", "reconstruction"}
_RECON_KEYS = {"mode", "slice", "roi", "metrics", "variables"}


def _need(cond, msg):
    if not cond:
        raise SchemaError(msg)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def validate_config(cfg):
    """Check ``cfg`` against schema version 1 and return it with defaults filled in."""
    _need(isinstance(cfg, dict), "config must be a JSON object")
    _need(cfg.get("schema_version") == SCHEMA_VERSION,
          f"schema_version must be {SCHEMA_VERSION}, got {cfg.get('schema_version')!r}")
    unknown = set(cfg) - _TOP_KEYS
    _need(not unknown, f"unknown config keys: {sorted(unknown)}")

    ds = cfg.get("dataset")
    _need(isinstance(ds, dict), "dataset must be an object")
    if "sidecar" in ds:
        _need(set(ds) == {"sidecar"}, "a sidecar dataset takes no other keys")
    else:
        _need(("synthetic" in ds) != ("spec" in ds), "dataset needs one of synthetic, spec, sidecar")
        if "synthetic" in ds:
            _need(ds["synthetic"] in PRESETS, f"unknown synthetic preset {ds['synthetic']!r}")
            _need(_is_int(ds.get("n", 64)) and ds.get("n", 64) > 0, "dataset.n must be a positive int")
        _need("seed" in ds, "a synthetic dataset needs an explicit seed")
        _need(_is_int(ds["seed"]) and ds["seed"] >= 0, "dataset.seed must be a non-negative int")

    seeds = cfg.get("seeds")
    _need(isinstance(seeds, list) and seeds, "seeds must be a non-empty list")
    _need(all(_is_int(s) and s >= 0 for s in seeds), "seeds must be non-negative ints")
    _need(len(set(seeds)) == len(seeds), "seeds must be distinct")

    alphas = cfg.get("alphas")
    _need(isinstance(alphas, list) and alphas, "alphas must be a non-empty list")
    for a in alphas:
        _need(isinstance(a, (int, float)) and not isinstance(a, bool), "alphas must be numbers")
        try:
            check_alpha(a)
        except ValidationError as exc:
            raise SchemaError(str(exc)) from None

    variables = cfg.get("variables")
    _need(isinstance(variables, list) and len(variables) >= 2
          and all(isinstance(v, str) for v in variables),
          "variables must list at least two names")

    methods = cfg.get("methods", list(METHODS))
    _need(isinstance(methods, list) and methods and set(methods) <= set(METHODS),
          f"methods must be a subset of {list(METHODS)}")
    bins = cfg.get("bins", DEFAULT_BINS)
    _need(_is_int(bins) and bins >= 1, "bins must be a positive int")
    queries = cfg.get("queries", [])
    _need(isinstance(queries, list) and all(isinstance(q, str) for q in queries),
          "queries must be a list of strings")

    out = dict(cfg, seeds=list(seeds), alphas=[float(a) for a in alphas], methods=list(methods),
               bins=bins, queries=list(queries), exact_quota=bool(cfg.get("exact_quota", False)),
               normalization=cfg.get("normalization", "minmax"))

    rec = cfg.get("reconstruction")
    if rec is not None:
        _need(isinstance(rec, dict), "reconstruction must be an object")
        unknown = set(rec) - _RECON_KEYS
        _need(not unknown, f"unknown reconstruction keys: {sorted(unknown)}")
        metrics = rec.get("metrics", list(METRICS))
        _need(isinstance(metrics, list) and set(metrics) <= set(METRICS),
              f"metrics must be a subset of {list(METRICS)}")
        out["reconstruction"] = {
            "mode": rec.get("mode", "delaunay"),
            "slice": rec.get("slice"),
            "roi": rec.get("roi"),
            "metrics": list(metrics),
            "variables": list(rec.get("variables", variables)),
        }
    return out


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    return validate_config(cfg)


@dataclass
class Row:
    method: str
    alpha: float
    measure: str
    seeds: list
    values: list

    @property
    def key(self):
        return (self.measure, self.alpha, self.method)

    def as_dict(self):
        v = np.asarray(self.values, dtype=np.float64)
        return {
            "method": self.method,
            "alpha": self.alpha,
            "measure": self.measure,
            "seed_count": len(self.seeds),
            "seeds": list(self.seeds),
            "values": [float(x) for x in v],
            "mean": float(v.mean()),
            "stddev": float(v.std(ddof=1)) if v.size > 1 else 0.0,
        }


@dataclass
class BenchmarkReport:
    config: dict
    reference: dict
    rows: list = field(default_factory=list)

    def as_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "reference": self.reference,
            "rows": [r.as_dict() for r in sorted(self.rows, key=lambda r: r.key)],
        }

    def to_json(self):
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def row(self, method, alpha, measure):
        for r in self.rows:
            if (r.method, r.alpha, r.measure) == (method, float(alpha), measure):
                return r.as_dict()
        raise KeyError((method, alpha, measure))

    def to_markdown(self):
        lines = ["| measure | alpha | method | seeds | mean | stddev |",
                 "|---|---|---|---|---|---|"]
        for r in sorted(self.rows, key=lambda r: r.key):
            d = r.as_dict()
            lines.append(f"| {d['measure']} | {d['alpha']:g} | {d['method']} | {d['seed_count']} "
                         f"| {d['mean']:.6g} | {d['stddev']:.3g} |")
        return "\n".join(lines) + "\n"

    def write(self, json_path, markdown_path=None):
        Path(json_path).write_text(self.to_json())
        if markdown_path:
            Path(markdown_path).write_text(self.to_markdown())


def _dataset(cfg):
    ds = cfg["dataset"]
    if "sidecar" in ds:
        return load_multifield(ds["sidecar"]), None
    spec = (PRESETS[ds["synthetic"]](ds.get("n", 64)) if "synthetic" in ds
            else SyntheticSpec.from_dict(ds["spec"]))
    return make_synthetic(spec, ds["seed"]), spec


def _parse_slice(text, dims):
    if text is None:
        return "z", dims.nz // 2
    axis, _, idx = str(text).partition(":")
    if axis not in AXES or not idx.lstrip("-").isdigit():
        raise SchemaError(f"slice must look like z:32, got {text!r}")
    return axis, int(idx)


def _roi(spec_text, spec, dims):
    if spec_text is None:
        return None
    if spec_text == "feature":
        if spec is None or not spec.features:
            raise SchemaError("roi 'feature' needs a synthetic dataset with a feature")
        return RegionOfInterest(*spec.features[0].bounding_box(dims))
    return RegionOfInterest.parse(spec_text)


class _Plan:
    """Everything shared by all cells, computed once up front."""

    def __init__(self, cfg, mf, spec):
        self.cfg = cfg
        self.mf = mf
        self.queries = [(text, parse_query(text)) for text in cfg["queries"]]
        self.truth = [query_raw(mf, q) for _, q in self.queries]
        self.acceptance = {}
        if "pmi" in cfg["methods"]:
            h, self.assign = build_joint(mf, cfg["variables"], cfg["bins"])
            table = pmi_table(h, cfg["normalization"])
            for a in cfg["alphas"]:
                self.acceptance[a] = build_acceptance(table, h, a)
        rec = cfg.get("reconstruction")
        self.rec = rec
        if rec:
            self.mode = parse_mode(rec["mode"])
            self.slice = _parse_slice(rec["slice"], mf.dims)
            self.roi = _roi(rec["roi"], spec, mf.dims)
            self.ranges = {v: (float(mf[v].values.min()), float(mf[v].values.max()))
                           for v in rec["variables"]}
            self.raw_slices = {v: rasterize_slice(mf[v], *self.slice, self._range(v))
                               for v in rec["variables"]}

    def _range(self, v):
        lo, hi = self.ranges[v]
        return (lo, hi) if hi > lo else (lo - 0.5, lo + 0.5)

    def reference(self):
        ref = {"grid": list(self.mf.dims.as_tuple()),
               "ground_truth": {t: len(r) for (t, _), r in zip(self.queries, self.truth)}}
        if self.rec and len(self.rec["variables"]) >= 2:
            a, b = (self.mf[v] for v in self.rec["variables"][:2])
            for metric, fn in (("pearson", pearson), ("dcor", distance_correlation)):
                if metric in self.rec["metrics"]:
                    ref[f"{metric}_full"] = fn(a, b)
                    if self.roi is not None:
                        ref[f"{metric}_roi"] = fn(a, b, self.roi)
        return ref


def _run_cell(plan, ref, method, alpha, seed, artifacts):
    cfg = plan.cfg
    mf = plan.mf
    if method == "random":
        ps = random_sample(mf, alpha, seed)
    else:
        ps = pmi_sample(mf, plan.assign, plan.acceptance[alpha], seed, cfg["exact_quota"])
    out = {"sample_count": float(len(ps)), "sample_fraction": len(ps) / mf.dims.n}
    for (text, q), truth in zip(plan.queries, plan.truth):
        out[f"jaccard[{text}]"] = jaccard(query_sampled(ps, q), truth)

    tag = f"{method}_a{alpha:g}_s{seed}"
    if artifacts:
        save_pointset(ps, artifacts / f"{tag}.mvsp")
    if not plan.rec or len(ps) == 0:
        return out

    names = plan.rec["variables"]
    recon = dict(zip(names, reconstruct_many(ps, names, mode=plan.mode)))
    metrics = plan.rec["metrics"]
    axis, index = plan.slice
    for v, f in recon.items():
        img = rasterize_slice(f, axis, index, plan._range(v))
        if "ssim" in metrics:
            out[f"ssim[{v}@{axis}:{index}]"] = ssim(img, plan.raw_slices[v])
        if "mse" in metrics:
            out[f"mse_slice[{v}@{axis}:{index}]"] = mse(img, plan.raw_slices[v])
            out[f"mse_full[{v}]"] = mse(f, mf[v])
            if plan.roi is not None:
                m = plan.roi.mask(mf.dims)
                out[f"mse_roi[{v}]"] = mse(f.values[m], mf[v].values[m])
        if artifacts:
            write_png(img, artifacts / f"{tag}_{v}_{axis}{index}.png")
            save_field(f, artifacts / f"{tag}_{v}.raw")
    if len(names) >= 2:
        a, b = recon[names[0]], recon[names[1]]
        pair = f"{names[0]},{names[1]}"
        for metric, fn in (("pearson", pearson), ("dcor", distance_correlation)):
            if metric not in metrics:
                continue
            scopes = [("full", None)] + ([("roi", plan.roi)] if plan.roi is not None else [])
            for scope, roi in scopes:
                try:
                    val = fn(a, b, roi)
                except ValidationError as exc:
                    log.warning("%s %s skipped for %s: %s", metric, scope, tag, exc)
                    val = math.nan
                out[f"{metric}_{scope}[{pair}]"] = val
                out[f"{metric}_{scope}_abs_err[{pair}]"] = abs(val - ref[f"{metric}_{scope}"])
    return out


def run_pipeline(config, threads=1, artifacts=None):
    """Run the benchmark described by ``config`` (a dict or a JSON path)."""
    cfg = validate_config(config) if isinstance(config, dict) else load_config(config)
    mf, spec = _dataset(cfg)
    plan = _Plan(cfg, mf, spec)
    ref = plan.reference()

    if artifacts:
        artifacts = Path(artifacts)
        artifacts.mkdir(parents=True, exist_ok=True)
        if spec is not None:
            save_multifield(mf, artifacts / "dataset.json")

    cells = [(m, a, s) for m in cfg["methods"] for a in cfg["alphas"] for s in cfg["seeds"]]
    log.info("running %d cells on %d thread(s)", len(cells), threads)
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        results = list(pool.map(lambda c: _run_cell(plan, ref, *c, artifacts), cells))

    grouped = {}
    for (m, a, s), res in zip(cells, results):
        for measure, val in res.items():
            grouped.setdefault((m, a, measure), []).append((s, val))
    rows = []
    for (m, a, measure), pairs in grouped.items():
        pairs.sort()
        rows.append(Row(m, a, measure, [s for s, _ in pairs], [v for _, v in pairs]))
    report = BenchmarkReport(cfg, ref, rows)
    if artifacts:
        report.write(artifacts / "report.json", artifacts / "report.md")
    return report
