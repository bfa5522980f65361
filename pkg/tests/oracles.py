"""Independent reference implementations used only by the tests."""

import itertools
import math

import numpy as np


def brute_pmi(counts):
    """Pointwise value per bin straight from the definition, with nested loops.

    Returns a dict ``bin tuple -> value`` for nonzero bins.
    """
    counts = np.asarray(counts)
    total = float(counts.sum())
    d = counts.ndim
    margins = []
    for k in range(d):
        m = []
        for b in range(counts.shape[k]):
            s = 0
            for idx in itertools.product(*[range(n) for n in counts.shape]):
                if idx[k] == b:
                    s += int(counts[idx])
            m.append(s / total)
        margins.append(m)
    out = {}
    for idx in itertools.product(*[range(n) for n in counts.shape]):
        c = int(counts[idx])
        if c:
            prod = 1.0
            for k in range(d):
                prod *= margins[k][idx[k]]
            out[idx] = math.log((c / total) / prod)
    return out


def brute_total_correlation(counts):
    counts = np.asarray(counts)
    total = float(counts.sum())
    return sum((counts[idx] / total) * v for idx, v in brute_pmi(counts).items())


def yield_root(q, f, n):
    """gamma solving sum(min(1, gamma*q) f) = n by bisection (independent of the sampler)."""
    q = np.asarray(q, float)
    f = np.asarray(f, float)

    def g(gamma):
        return float(np.sum(np.minimum(1.0, gamma * q) * f)) - n

    lo, hi = 0.0, 1.0
    while g(hi) < 0:
        hi *= 2.0
        if hi > 1e300:
            raise ValueError("unreachable target")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return hi


def ssim_reference(a, b, patch=8, c1=1e-4, c2=9e-4):
    """Three-factor SSIM (luminance, contrast, structure) with C3 = C2/2, explicit loops."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    c3 = c2 / 2
    vals = []
    for r in range(0, a.shape[0] - patch + 1, patch):
        for c in range(0, a.shape[1] - patch + 1, patch):
            x = a[r:r + patch, c:c + patch].ravel()
            y = b[r:r + patch, c:c + patch].ravel()
            mx, my = x.mean(), y.mean()
            sx = math.sqrt(((x - mx) ** 2).mean())
            sy = math.sqrt(((y - my) ** 2).mean())
            sxy = ((x - mx) * (y - my)).mean()
            lum = (2 * mx * my + c1) / (mx**2 + my**2 + c1)
            con = (2 * sx * sy + c2) / (sx**2 + sy**2 + c2)
            st = (sxy + c3) / (sx * sy + c3)
            vals.append(lum * con * st)
    return float(np.mean(vals))


def dcor_reference(x, y):
    """Distance correlation from full double-centered distance matrices."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    a = np.abs(x[:, None] - x[None, :])
    b = np.abs(y[:, None] - y[None, :])
    A = a - a.mean(axis=0) - a.mean(axis=1)[:, None] + a.mean()
    B = b - b.mean(axis=0) - b.mean(axis=1)[:, None] + b.mean()
    dcov = (A * B).mean()
    dvx = (A * A).mean()
    dvy = (B * B).mean()
    if dvx * dvy == 0:
        return 0.0
    return math.sqrt(max(dcov, 0.0) / math.sqrt(dvx * dvy))
