"""Uniform random sampling and pointwise-information guided sampling.

Both samplers draw one uniform number per grid point from the counter-based
generator keyed by ``(seed, linear index)`` on the same stream, so a point's
fate never depends on traversal order, and with identical per-point
probabilities the two samplers return identical sets.
"""

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import DegenerateTable, SizeMismatch, Unachievable, ValidationError
from .fieldio import SampledPointSet
from .histogram import DEFAULT_BINS, build_joint
from .pointinfo import pmi_table

log = logging.getLogger(__name__)

SAMPLE_STREAM = "sample"
MAX_CALIBRATION_STEPS = 64
YIELD_TOLERANCE = 0.005


def check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"sampling fraction must satisfy 0 < alpha < 1, got {alpha}")
    return alpha


def target_count(alpha, n):
    """``round(alpha * n)`` with halves rounded up."""
    return int(math.floor(alpha * n + 0.5))


@dataclass(frozen=True, eq=False)
class AcceptanceTable:
    """Per-bin acceptance probability ``min(1, gamma * normalized)``, occupied bins only."""

    occupied: np.ndarray
    per_bin: np.ndarray
    gamma: float
    target_count: int
    expected_yield: float
    iterations: int = 0

    def dense(self, shape):
        out = np.zeros(int(np.prod(shape, dtype=object)))
        out[self.occupied] = self.per_bin
        return out.reshape(shape)


def expected_yield(per_bin, counts):
    return float(np.dot(per_bin, counts))


def _scaled(gamma, q):
    return np.minimum(1.0, gamma * q)


def _solve_gamma_exact(q, f, n):
    """Smallest gamma with sum(min(1, gamma*q) * f) == n, by sweeping breakpoints."""
    pos = q > 0
    q, f = q[pos], f[pos].astype(np.float64)
    order = np.argsort(-q, kind="stable")
    q, f = q[order], f[order]
    # Saturating bins one by one in decreasing q; with the top m saturated the
    # yield is F_m + gamma * Q_m for gamma in [1/q[m-1], 1/q[m]].
    sat_mass = np.concatenate([[0.0], np.cumsum(f)])
    unsat_mass = np.concatenate([np.cumsum((q * f)[::-1])[::-1], [0.0]])
    for m in range(q.size):
        gamma = (n - sat_mass[m]) / unsat_mass[m]
        if gamma * q[m] <= 1.0:
            return gamma
    return 1.0 / q[-1]


def build_acceptance(table, h, alpha):
    """Scale normalized values so the expected sample size is ``alpha*N``.

    Starts from ``gamma = n / n'`` with ``n' = sum(normalized * f)``; while some
    bins saturate at probability 1, gamma is re-solved over the unsaturated
    mass, which reaches the exact root of the piecewise-linear yield after
    finitely many steps.
    """
    alpha = check_alpha(alpha)
    if not np.array_equal(table.occupied, h.occupied):
        raise ValidationError("pointwise table and histogram disagree on occupied bins")
    f = h.occupied_counts.astype(np.float64)
    q = np.asarray(table.normalized_occupied, dtype=np.float64)
    target = target_count(alpha, h.total_count)
    if target < 1:
        raise ValidationError(f"alpha={alpha} selects no points out of {h.total_count}")
    # Aim at the unrounded alpha*N, so a constant table gives exactly alpha,
    # unless rounding alone would eat half the yield tolerance (tiny grids).
    n = alpha * h.total_count
    if abs(n - target) > 0.5 * YIELD_TOLERANCE * target:
        n = float(target)

    n_prime = float(np.dot(q, f))
    if n_prime <= 0.0:
        warnings.warn("all normalized values are zero; falling back to uniform acceptance",
                      DegenerateTable, stacklevel=2)
        per_bin = np.full(q.shape, alpha)
        return AcceptanceTable(table.occupied, per_bin, alpha, target, expected_yield(per_bin, f))

    reachable = int(h.occupied_counts[q > 0].sum())
    if reachable < n:
        raise Unachievable(target, reachable)

    gamma = n / n_prime
    steps = 0
    for steps in range(1, MAX_CALIBRATION_STEPS + 1):
        per_bin = _scaled(gamma, q)
        y = expected_yield(per_bin, f)
        if abs(y - n) <= 1e-9 * n:
            break
        sat = gamma * q >= 1.0
        free = float(np.dot(q[~sat], f[~sat]))
        if free <= 0.0:
            break
        gamma = (n - float(f[sat].sum())) / free
    per_bin = _scaled(gamma, q)
    y = expected_yield(per_bin, f)
    if abs(y - n) > YIELD_TOLERANCE * n:
        log.debug("calibration loop stalled at %.6g of %d; solving exactly", y, n)
        gamma = _solve_gamma_exact(q, f, n)
        per_bin = _scaled(gamma, q)
        y = expected_yield(per_bin, f)
    log.debug("gamma=%.6g after %d steps, expected yield %.3f (target %d)", gamma, steps, y, target)
    return AcceptanceTable(table.occupied, per_bin, float(gamma), target, y, steps)


def random_sample(mf, alpha, seed):
    """Keep each grid point independently with probability ``alpha``."""
    alpha = check_alpha(alpha)
    idx = np.arange(mf.dims.n, dtype=np.uint64)
    keep = rng.bernoulli(seed, SAMPLE_STREAM, idx, np.full(mf.dims.n, alpha))
    return SampledPointSet.from_multifield(mf, idx[keep])


def _quota(expected):
    """Integer per-bin quotas by largest remainder, summing to round(total)."""
    base = np.floor(expected)
    rem = expected - base
    k = base.astype(np.int64)
    extra = int(math.floor(expected.sum() + 0.5)) - int(k.sum())
    if extra > 0:
        order = np.lexsort((np.arange(rem.size), -rem))
        k[order[:extra]] += 1
    return k


def pmi_sample(mf, assign, acc, seed, exact_quota=False):
    """Keep point ``p`` with probability ``acc.per_bin`` of its bin.

    With ``exact_quota`` every bin instead keeps exactly its largest-remainder
    share of the expected yield: the points with the smallest draws.
    """
    n = mf.dims.n
    if len(assign) != n:
        raise SizeMismatch(n, len(assign), "points")
    if not np.array_equal(acc.occupied[assign.slot], assign.per_point):
        raise ValidationError("bin assignment does not belong to this acceptance table")
    idx = np.arange(n, dtype=np.uint64)
    prob = acc.per_bin[assign.slot]
    if not exact_quota:
        keep = rng.bernoulli(seed, SAMPLE_STREAM, idx, prob)
        return SampledPointSet.from_multifield(mf, idx[keep])

    counts = np.bincount(assign.slot, minlength=acc.per_bin.size)
    k = _quota(acc.per_bin * counts)
    u = rng.uniform(seed, SAMPLE_STREAM, idx)
    order = np.lexsort((idx, u, assign.slot))
    start = np.concatenate([[0], np.cumsum(counts)[:-1]])
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n) - start[assign.slot[order]]
    return SampledPointSet.from_multifield(mf, idx[rank < k[assign.slot]])


def sample(mf, method, alpha, seed, variables=None, bins=DEFAULT_BINS,
           exact_quota=False, normalization="minmax"):
    """Run one sampler end to end. Returns the point set."""
    if method == "random":
        return random_sample(mf, alpha, seed)
    if method != "pmi":
        raise ValidationError(f"unknown sampling method {method!r}")
    variables = list(variables) if variables else list(mf.names)
    h, assign = build_joint(mf, variables, bins)
    acc = build_acceptance(pmi_table(h, normalization), h, alpha)
    return pmi_sample(mf, assign, acc, seed, exact_quota)
