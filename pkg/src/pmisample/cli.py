"""Command-line interface.

Exit status: 0 on success, 1 for invalid input, 2 for I/O failures, 3 when an
internal invariant breaks.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvariantViolation, ValidationError
from .evaluate import (AXES, RegionOfInterest, distance_correlation, mse, pearson,
                       rasterize_slice, ssim, write_png)
from .fieldio import (MultiField, load_field, load_multifield, load_pointset, save_field,
                      save_multifield, save_pointset, sidecar_dict)
from .histogram import DEFAULT_BINS, build_joint, write_histogram_csv
from .pointinfo import pmi_field, pmi_table
from .pipeline import PRESETS, run_pipeline
from .query import jaccard, parse_query, query_raw, query_sampled
from .reconstruct import parse_mode, reconstruct
from .sampler import sample
from .synthetic import SyntheticSpec, make_synthetic

log = logging.getLogger("pmisample")

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3


def _names(text):
    return [v.strip() for v in text.split(",") if v.strip()] if text else None


def _write_brick(field, out):
    """Write ``field`` to ``out`` plus a one-variable sidecar next to it."""
    out = Path(out)
    save_field(field, out)
    side = out.with_suffix(".json")
    side.write_text(json.dumps(sidecar_dict(field.dims, [field.name], [out.name]), indent=2) + "\n")
    return side


def _load_points_or_field(path):
    path = Path(path)
    if path.suffix.lower() == ".json":
        return load_multifield(path)
    return load_pointset(path)


def cmd_synth(args):
    if args.spec:
        spec = SyntheticSpec.from_dict(json.loads(Path(args.spec).read_text()))
    else:
        spec = PRESETS[args.preset](args.n)
    mf = make_synthetic(spec, args.seed)
    save_multifield(mf, args.out)
    log.info("wrote %s (%d variables, grid %s)", args.out, len(mf.names), mf.dims.as_tuple())


def cmd_sample(args):
    mf = load_multifield(args.input)
    ps = sample(mf, args.method, args.alpha, args.seed, _names(args.vars), args.bins,
                args.exact_quota, args.normalization)
    save_pointset(ps, args.output)
    print(f"{len(ps)} of {mf.dims.n} points kept ({len(ps) / mf.dims.n:.4%})")


def _table(args):
    mf = load_multifield(args.input)
    names = _names(args.vars) or list(mf.names)
    h, assign = build_joint(mf, names, args.bins)
    return mf, h, assign, pmi_table(h, args.normalization)


def cmd_pmi_plot(args):
    _, h, _, table = _table(args)
    if h.d != 2:
        raise ValidationError(f"pmi-plot needs exactly two variables, got {h.d}")
    raw, norm = table.raw, table.normalized
    bx, by = np.meshgrid(np.arange(h.shape[0]), np.arange(h.shape[1]), indexing="ij")
    rows = np.column_stack([bx.ravel(), by.ravel(), raw.ravel(), norm.ravel()])
    np.savetxt(args.csv, rows, delimiter=",", header="binX,binY,raw,normalized",
               comments="", fmt=["%d", "%d", "%.17g", "%.17g"])
    if args.png:
        write_png(norm.T, args.png)
    if args.hist_csv:
        write_histogram_csv(h, args.hist_csv)


def cmd_pmi_field(args):
    mf, _, assign, table = _table(args)
    f = pmi_field(table, assign, mf.dims, args.mode, args.name)
    _write_brick(f, args.out)


def cmd_query(args):
    q = parse_query(args.query)
    print(f"query: {q}")
    src = _load_points_or_field(args.input)
    res = query_raw(src, q) if isinstance(src, MultiField) else query_sampled(src, q)
    print(f"matches: {len(res)}")
    if args.ground_truth:
        truth = query_raw(load_multifield(args.ground_truth), q)
        print(f"ground truth: {len(truth)}")
        print(f"jaccard: {jaccard(res, truth):.6f}")
    if args.out:
        if str(args.out).lower().endswith(".csv"):
            np.savetxt(args.out, res.indices, fmt="%d", header="index", comments="")
        else:
            res.indices.astype("<u8").tofile(args.out)


def cmd_reconstruct(args):
    ps = load_pointset(args.input)
    f = reconstruct(ps, args.var, mode=parse_mode(args.mode))
    _write_brick(f, args.out)


def _parse_recon(items):
    out = {}
    for item in items:
        name, sep, path = item.partition("=")
        if not sep or not name:
            raise ValidationError(f"--recon expects var=path, got {item!r}")
        out[name] = path
    return out


def cmd_eval(args):
    raw = load_multifield(args.raw)
    recon = {v: load_field(p, raw.dims, v) for v, p in _parse_recon(args.recon).items()}
    metrics = set(_names(args.metrics))
    unknown = metrics - {"ssim", "mse", "pearson", "dcor"}
    if unknown:
        raise ValidationError(f"unknown metrics: {sorted(unknown)}")
    roi = RegionOfInterest.parse(args.roi) if args.roi else None
    axis, _, idx = args.slice.partition(":")
    if axis not in AXES or not idx.isdigit():
        raise ValidationError(f"--slice must look like z:32, got {args.slice!r}")
    index = int(idx)

    report = {"slice": args.slice, "roi": str(roi) if roi else None, "variables": {}, "pairs": {}}
    for v, f in recon.items():
        lo, hi = float(raw[v].values.min()), float(raw[v].values.max())
        vr = (lo, hi) if hi > lo else (lo - 0.5, lo + 0.5)
        ri, fi = rasterize_slice(raw[v], axis, index, vr), rasterize_slice(f, axis, index, vr)
        entry = {}
        if "ssim" in metrics:
            entry["ssim"] = ssim(fi, ri)
        if "mse" in metrics:
            entry["mse_slice"] = mse(fi, ri)
            entry["mse_full"] = mse(f, raw[v])
            if roi is not None:
                m = roi.mask(raw.dims)
                entry["mse_roi"] = mse(f.values[m], raw[v].values[m])
        report["variables"][v] = entry
        if args.png_dir:
            d = Path(args.png_dir)
            d.mkdir(parents=True, exist_ok=True)
            write_png(ri, d / f"raw_{v}_{axis}{index}.png")
            write_png(fi, d / f"recon_{v}_{axis}{index}.png")

    names = list(recon)
    if len(names) >= 2 and metrics & {"pearson", "dcor"}:
        a, b = names[:2]
        pair = {}
        for metric, fn in (("pearson", pearson), ("dcor", distance_correlation)):
            if metric in metrics:
                pair[metric] = fn(recon[a], recon[b], roi)
                pair[f"{metric}_raw"] = fn(raw[a], raw[b], roi)
        report["pairs"][f"{a},{b}"] = pair

    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_bench(args):
    report = run_pipeline(args.config, threads=args.threads, artifacts=args.artifacts)
    report.write(args.out, args.markdown)
    if not args.quiet:
        sys.stdout.write(report.to_markdown())


def build_parser():
    p = argparse.ArgumentParser(prog="pmisample", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    p.add_argument("--log-level", default="WARNING",
                   choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic multivariate dataset")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--preset", choices=sorted(PRESETS), default="feature")
    g.add_argument("--spec", help="JSON synthetic spec")
    s.add_argument("--n", type=int, default=64, help="grid edge for presets")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True, help="sidecar path to write")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("sample", help="sub-sample a dataset")
    s.add_argument("input", help="input sidecar")
    s.add_argument("output", help="output point-set file")
    s.add_argument("--method", choices=["random", "pmi"], default="pmi")
    s.add_argument("--vars", help="comma-separated variables (default: all)")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--bins", type=int, default=DEFAULT_BINS)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--exact-quota", action="store_true")
    s.add_argument("--normalization", choices=["minmax", "clip"], default="minmax")
    s.set_defaults(func=cmd_sample)

    for name, func, help_ in (("pmi-plot", cmd_pmi_plot, "dump a 2-D PMI table"),
                              ("pmi-field", cmd_pmi_field, "write per-point PMI as a brick")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("input", help="input sidecar")
        s.add_argument("--vars")
        s.add_argument("--bins", type=int, default=DEFAULT_BINS)
        s.add_argument("--normalization", choices=["minmax", "clip"], default="minmax")
        s.set_defaults(func=func)
        if name == "pmi-plot":
            s.add_argument("--csv", required=True)
            s.add_argument("--png")
            s.add_argument("--hist-csv")
        else:
            s.add_argument("--mode", choices=["normalized", "raw"], default="normalized")
            s.add_argument("--name", default="pmi")
            s.add_argument("--out", required=True)

    s = sub.add_parser("query", help="run a range query")
    s.add_argument("--query", required=True)
    s.add_argument("--input", required=True, help="sidecar (.json) or point-set file")
    s.add_argument("--ground-truth", help="sidecar of the full data; reports Jaccard")
    s.add_argument("--out", help="indices as .csv, otherwise little-endian u64")
    s.set_defaults(func=cmd_query)

    s = sub.add_parser("reconstruct", help="rebuild a variable on the full grid")
    s.add_argument("--input", required=True, help="point-set file")
    s.add_argument("--var", required=True)
    s.add_argument("--mode", default="delaunay", choices=["delaunay", "idw", "nearest"])
    s.add_argument("--out", required=True, help="brick path; a sidecar is written next to it")
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("eval", help="compare reconstructions with the raw data")
    s.add_argument("--raw", required=True, help="raw sidecar")
    s.add_argument("--recon", action="append", required=True, metavar="VAR=BRICK")
    s.add_argument("--metrics", default="ssim,mse,pearson,dcor")
    s.add_argument("--slice", default="z:0", help="axis:index, e.g. z:32")
    s.add_argument("--roi", help="x0:x1,y0:y1,z0:z1 (inclusive)")
    s.add_argument("--png-dir")
    s.add_argument("--report", help="JSON output (default stdout)")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("bench", help="run a benchmark config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True, help="JSON report path")
    s.add_argument("--markdown")
    s.add_argument("--artifacts", help="directory for intermediate files")
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (ValidationError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit 3
        log.exception("unexpected failure")
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
