"""Hot inner loops, each in a numba flavour and a numpy flavour.

The public names at the bottom dispatch on :data:`pmisample._accel.USE_NUMBA`.
Both flavours are bit-identical: neither uses fastmath, and the integer hash
relies only on wrapping uint64 arithmetic.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

# SplitMix64 constants (Steele, Lea & Flood 2014).
GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
MIX_MUL2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
INV_2_53 = 1.0 / 9007199254740992.0


# --- numba flavour ---------------------------------------------------------

@njit
def _mix64_nb(z):
    z = (z ^ (z >> _S30)) * MIX_MUL1
    z = (z ^ (z >> _S27)) * MIX_MUL2
    return z ^ (z >> _S31)


@njit
def _uniform_nb(key, index):
    out = np.empty(index.shape[0], dtype=np.float64)
    for p in range(index.shape[0]):
        z = _mix64_nb(key + (index[p] + _ONE) * GOLDEN_GAMMA)
        out[p] = np.float64(z >> _S11) * INV_2_53
    return out


@njit
def _bernoulli_nb(key, index, prob):
    out = np.empty(index.shape[0], dtype=np.bool_)
    for p in range(index.shape[0]):
        z = _mix64_nb(key + (index[p] + _ONE) * GOLDEN_GAMMA)
        out[p] = np.float64(z >> _S11) * INV_2_53 < prob[p]
    return out


@njit
def _bin_points_nb(values, mins, widths, nbins):
    d, n = values.shape
    out = np.empty(n, dtype=np.int64)
    for p in range(n):
        flat = 0
        for k in range(d):
            b = 0
            if widths[k] > 0.0:
                t = np.floor((values[k, p] - mins[k]) / widths[k])
                if t >= nbins[k]:
                    b = nbins[k] - 1
                elif t > 0.0:
                    b = np.int64(t)
            flat = flat * nbins[k] + b
        out[p] = flat
    return out


@njit
def _dcor_sums_nb(x, y):
    n = x.shape[0]
    ra = np.zeros(n)
    rb = np.zeros(n)
    for i in range(n):
        sa = 0.0
        sb = 0.0
        for j in range(n):
            sa += abs(x[i] - x[j])
            sb += abs(y[i] - y[j])
        ra[i] = sa / n
        rb[i] = sb / n
    ga = ra.sum() / n
    gb = rb.sum() / n
    sab = 0.0
    saa = 0.0
    sbb = 0.0
    for i in range(n):
        acc_ab = 0.0
        acc_aa = 0.0
        acc_bb = 0.0
        for j in range(n):
            a = abs(x[i] - x[j]) - ra[i] - ra[j] + ga
            b = abs(y[i] - y[j]) - rb[i] - rb[j] + gb
            acc_ab += a * b
            acc_aa += a * a
            acc_bb += b * b
        sab += acc_ab
        saa += acc_aa
        sbb += acc_bb
    nn = float(n) * n
    return sab / nn, saa / nn, sbb / nn


@njit
def _locate_nb(trans, lo, hi, strides, owner, eps):
    m, dp1, d = trans.shape
    n = owner.shape[0]
    simplex = owner.copy()
    bary = np.zeros((n, dp1))
    c = np.empty(d, dtype=np.int64)
    b = np.empty(d)
    for s in range(m):
        if not np.isfinite(trans[s, 0, 0]):
            continue
        for a in range(d):
            c[a] = lo[s, a]
        while True:
            lin = 0
            for a in range(d):
                lin += c[a] * strides[a]
            if simplex[lin] == -1:
                ok = True
                tot = 0.0
                for j in range(d):
                    bj = 0.0
                    for k in range(d):
                        bj = bj + trans[s, j, k] * (c[k] - trans[s, d, k])
                    b[j] = bj
                    tot = tot + bj
                    if bj < -eps:
                        ok = False
                last = 1.0 - tot
                if ok and last >= -eps:
                    simplex[lin] = s
                    for j in range(d):
                        bary[lin, j] = b[j]
                    bary[lin, d] = last
            a = 0
            while a < d:
                c[a] += 1
                if c[a] <= hi[s, a]:
                    break
                c[a] = lo[s, a]
                a += 1
            if a == d:
                break
    return simplex, bary


# --- numpy flavour ---------------------------------------------------------

def _mix64_np(z):
    z = (z ^ (z >> _S30)) * MIX_MUL1
    z = (z ^ (z >> _S27)) * MIX_MUL2
    return z ^ (z >> _S31)


def _uniform_np(key, index):
    z = _mix64_np(key + (index + _ONE) * GOLDEN_GAMMA)
    return (z >> _S11).astype(np.float64) * INV_2_53


def _bernoulli_np(key, index, prob):
    return _uniform_np(key, index) < prob


def _bin_points_np(values, mins, widths, nbins):
    d, n = values.shape
    flat = np.zeros(n, dtype=np.int64)
    for k in range(d):
        if widths[k] > 0.0:
            t = np.floor((values[k] - mins[k]) / widths[k])
            b = np.clip(t, 0, nbins[k] - 1).astype(np.int64)
        else:
            b = np.zeros(n, dtype=np.int64)
        flat = flat * nbins[k] + b
    return flat


def _centered_rows(v, block):
    n = v.shape[0]
    rows = np.empty(n)
    for s in range(0, n, block):
        rows[s:s + block] = np.abs(v[s:s + block, None] - v[None, :]).mean(axis=1)
    return rows


def _dcor_sums_np(x, y, block=512):
    n = x.shape[0]
    ra = _centered_rows(x, block)
    rb = _centered_rows(y, block)
    ga = ra.mean()
    gb = rb.mean()
    sab = saa = sbb = 0.0
    for s in range(0, n, block):
        a = np.abs(x[s:s + block, None] - x[None, :]) - ra[s:s + block, None] - ra[None, :] + ga
        b = np.abs(y[s:s + block, None] - y[None, :]) - rb[s:s + block, None] - rb[None, :] + gb
        sab += float((a * b).sum())
        saa += float((a * a).sum())
        sbb += float((b * b).sum())
    nn = float(n) * n
    return sab / nn, saa / nn, sbb / nn


def _locate_np(trans, lo, hi, strides, owner, eps, chunk=1 << 19):
    m, dp1, d = trans.shape
    simplex = owner.copy()
    bary = np.zeros((owner.shape[0], dp1))
    valid = np.flatnonzero(np.isfinite(trans[:, 0, 0]))
    extent = hi[valid] - lo[valid] + 1
    sizes = np.prod(extent, axis=1)
    ends = np.cumsum(sizes)
    start = 0
    while start < valid.size:
        base = ends[start - 1] if start else 0
        stop = max(start + 1, int(np.searchsorted(ends, base + chunk, side="right")))
        sel = valid[start:stop]
        ext = extent[start:stop]
        cnt = sizes[start:stop]
        sid = np.repeat(sel, cnt)
        local = np.repeat(np.arange(sel.size), cnt)
        offset = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        coords = np.empty((sid.size, d), dtype=np.int64)
        for a in range(d):
            coords[:, a] = lo[sel, a][local] + offset % ext[local, a]
            offset = offset // ext[local, a]
        lin = np.zeros(sid.size, dtype=np.int64)
        for a in range(d):
            lin += coords[:, a] * strides[a]
        t = trans[sid]
        b = np.empty((sid.size, dp1))
        tot = np.zeros(sid.size)
        ok = np.ones(sid.size, dtype=bool)
        for j in range(d):
            bj = np.zeros(sid.size)
            for k in range(d):
                bj = bj + t[:, j, k] * (coords[:, k] - t[:, d, k])
            b[:, j] = bj
            tot = tot + bj
            ok &= bj >= -eps
        b[:, d] = 1.0 - tot
        ok &= b[:, d] >= -eps
        ok &= simplex[lin] == -1
        # candidates are ordered by simplex id, so the first hit is the lowest id
        hit_lin, first = np.unique(lin[ok], return_index=True)
        rows = np.flatnonzero(ok)[first]
        simplex[hit_lin] = sid[rows]
        bary[hit_lin] = b[rows]
        start = stop
    return simplex, bary


# --- dispatch --------------------------------------------------------------

def _as_u64(index):
    return np.ascontiguousarray(index, dtype=np.uint64)


def uniform_at(key, index):
    """Uniform [0, 1) draws for the counters ``index`` under stream ``key``."""
    index = _as_u64(index)
    key = np.uint64(key)
    if USE_NUMBA:
        return _uniform_nb(key, index)
    return _uniform_np(key, index)


def bernoulli_at(key, index, prob):
    """``uniform_at(key, index) < prob`` without materialising the draws."""
    index = _as_u64(index)
    prob = np.ascontiguousarray(prob, dtype=np.float64)
    key = np.uint64(key)
    if USE_NUMBA:
        return _bernoulli_nb(key, index, prob)
    return _bernoulli_np(key, index, prob)


def bin_points(values, mins, widths, nbins):
    """Row-major flat bin index of every column of ``values`` (shape ``(d, N)``)."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    mins = np.ascontiguousarray(mins, dtype=np.float64)
    widths = np.ascontiguousarray(widths, dtype=np.float64)
    nbins = np.ascontiguousarray(nbins, dtype=np.int64)
    if USE_NUMBA:
        return _bin_points_nb(values, mins, widths, nbins)
    return _bin_points_np(values, mins, widths, nbins)


def dcor_sums(x, y):
    """Return ``(dCov^2, dVar_x^2, dVar_y^2)`` (V-statistics) for 1-D samples."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if USE_NUMBA:
        return _dcor_sums_nb(x, y)
    return _dcor_sums_np(x, y)


def locate_in_simplices(trans, lo, hi, strides, owner, eps=1e-10):
    """Assign grid points to the lowest-numbered simplex containing them.

    ``trans`` is the ``(M, D+1, D)`` affine map to barycentric coordinates
    (non-finite rows mark degenerate simplices), ``lo``/``hi`` the inclusive
    integer bounding boxes, ``strides`` the linear-index stride of each active
    axis. ``owner`` seeds the result: -1 marks points still to be located,
    anything else is left alone. Returns ``(simplex, bary)``; points found in no
    simplex keep -1.
    """
    args = (np.ascontiguousarray(trans, dtype=np.float64),
            np.ascontiguousarray(lo, dtype=np.int64),
            np.ascontiguousarray(hi, dtype=np.int64),
            np.ascontiguousarray(strides, dtype=np.int64),
            np.ascontiguousarray(owner, dtype=np.int64), float(eps))
    if USE_NUMBA:
        return _locate_nb(*args)
    return _locate_np(*args)


NUMBA_KERNELS = {
    "uniform_at": _uniform_nb,
    "bernoulli_at": _bernoulli_nb,
    "bin_points": _bin_points_nb,
    "dcor_sums": _dcor_sums_nb,
    "locate_in_simplices": _locate_nb,
}
NUMPY_KERNELS = {
    "uniform_at": _uniform_np,
    "bernoulli_at": _bernoulli_np,
    "bin_points": _bin_points_np,
    "dcor_sums": _dcor_sums_np,
    "locate_in_simplices": _locate_np,
}
