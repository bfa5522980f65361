"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--n 64] [--repeat 5] [--json out.json]

Both paths run in one process by flipping ``kernels.USE_NUMBA``; numba is
warmed up first so compilation is not counted. The last column shows how far
the two paths disagree (0 means bit-identical).
"""

import argparse
import json
import platform
import timeit

import numpy as np

from pmisample import kernels
from pmisample.histogram import build_joint
from pmisample.pointinfo import pmi_table
from pmisample.reconstruct import reconstruct_many
from pmisample.rng import stream_key
from pmisample.sampler import build_acceptance, pmi_sample
from pmisample.synthetic import feature_spec, make_synthetic


def workloads(n):
    mf = make_synthetic(feature_spec(n), 7)
    N = mf.dims.n
    key = stream_key(1, "sample")
    idx = np.arange(N, dtype=np.uint64)
    vals = mf.stack(["v0", "v1"])
    mins = vals.min(axis=1)
    widths = (vals.max(axis=1) - mins) / 128
    nbins = np.array([128, 128], dtype=np.int64)
    g = np.random.default_rng(0)
    x, y = g.random(4096), g.random(4096)
    h, assign = build_joint(mf, ["v0", "v1"], 128)
    acc = build_acceptance(pmi_table(h), h, 0.05)
    ps = pmi_sample(mf, assign, acc, 3)

    return {
        f"uniform_at ({N} draws)": lambda: kernels.uniform_at(key, idx),
        f"bin_points (2 x {N})": lambda: kernels.bin_points(vals, mins, widths, nbins),
        "dcor_sums (4096 points)": lambda: kernels.dcor_sums(x, y),
        f"pmi_sample (a=0.05, {N})": lambda: pmi_sample(mf, assign, acc, 3),
        f"reconstruct 2 vars ({len(ps)} samples)": lambda: reconstruct_many(ps, ["v0", "v1"]),
    }


def _max_rel_diff(a, b):
    """0.0 when both paths agree bit for bit."""
    if hasattr(a, "indices"):  # point set
        return 0.0 if a == b else float("inf")
    if isinstance(a, list):  # reconstructed fields
        return max(_max_rel_diff(p.values, q.values) for p, q in zip(a, b))
    if isinstance(a, tuple):
        return max(_max_rel_diff(p, q) for p, q in zip(a, b))
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if np.array_equal(a, b):
        return 0.0
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(a), np.finfo(float).tiny)))


def run(n, repeat):
    rows = []
    saved = kernels.USE_NUMBA
    try:
        for name, fn in workloads(n).items():
            out = {}
            times = {}
            for use in (True, False):
                kernels.USE_NUMBA = use
                out[use] = fn()  # warm-up, and compile on the numba side
                times[use] = min(timeit.repeat(fn, number=1, repeat=repeat))
            rows.append({"workload": name, "numba_s": times[True], "numpy_s": times[False],
                         "speedup": times[False] / times[True],
                         "max_rel_diff": _max_rel_diff(out[True], out[False])})
    finally:
        kernels.USE_NUMBA = saved
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=64, help="grid edge length")
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--json", help="also write results here")
    args = p.parse_args(argv)

    rows = run(args.n, args.repeat)
    print(f"grid {args.n}^3, best of {args.repeat}, {platform.processor() or platform.machine()}")
    print(f"{'workload':<36} {'numba':>10} {'numpy':>10} {'speedup':>8}  max rel diff")
    for r in rows:
        print(f"{r['workload']:<36} {r['numba_s'] * 1e3:>8.2f}ms {r['numpy_s'] * 1e3:>8.2f}ms "
              f"{r['speedup']:>7.1f}x  {r['max_rel_diff']:.1e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"n": args.n, "repeat": args.repeat, "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
