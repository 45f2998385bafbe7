"""Canonical and grand partition function estimators, plus the exact 1-D oracle.

The canonical value Zhat_S(k) is the volume of the set of unordered
k-tuples of centers in S that form a valid packing; hit-or-miss MC
estimates it as (vol(S)^k / k!) times the fraction of uniform k-tuples
that pack.  In one dimension with unit-length rods the value is exact:
(L - k + 1)^k / k! on [0, L], via the ordered-gap substitution.  The grand
value Z_S(lambda) = sum_k lambda^k Zhat_S(k) is summed to a cutoff with an
ideal-gas tail bound, valid because Zhat_S(k) <= vol(S)^k / k!.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc

from .geometry import sample_uniform_ball, unit_ball_radius
from .model import IntervalRegion


class SeriesTruncationError(RuntimeError):
    """Raised when a grand-series tail bound exceeds the caller's tolerance."""


@dataclass(frozen=True)
class PartitionEstimate:
    value: float
    stderr: float
    method: str  # "mc_hit" | "series" | "exact_1d"
    truncation_error: float = 0.0

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("partition values are nonnegative")
        if self.method == "exact_1d" and self.stderr != 0:
            raise ValueError("exact values carry zero stderr")


def tonks_zhat_exact(L, k):
    """Exact canonical value for unit rods (2*r_1 = 1) on [0, L].

    (L - (k-1))^k / k! when L > k - 1, else 0; k = 0 gives 1.
    """
    if L <= 0:
        raise ValueError(f"interval length must be positive, got {L}")
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    if k == 0:
        return PartitionEstimate(1.0, 0.0, "exact_1d")
    if L <= k - 1:
        return PartitionEstimate(0.0, 0.0, "exact_1d")
    return PartitionEstimate((L - (k - 1)) ** k / math.factorial(k), 0.0, "exact_1d")


def _packing_mask(pts, min_dist):
    """Boolean mask over samples: do the k points of each tuple pack?"""
    m, k, _ = pts.shape
    if k < 2:
        return np.ones(m, dtype=bool)
    diff = pts[:, :, None, :] - pts[:, None, :, :]
    d2 = (diff * diff).sum(axis=-1)
    iu = np.triu_indices(k, 1)
    return (d2[:, iu[0], iu[1]] > min_dist * min_dist).all(axis=1)


def canonical_zhat_mc(region, k, d, samples, rng, chunk=1 << 15):
    """Hit-or-miss estimate of Zhat_S(k) with a binomial standard error.

    Draws k-tuples uniform in the bounding ball; a hit requires every point
    to pass the membership oracle and the tuple to pack.  For regions equal
    to their bounding ball (balls, intervals) this reduces to uniform
    tuples in S itself.
    """
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    if region.d != d:
        raise ValueError("region dimension mismatch")
    if k == 0:
        return PartitionEstimate(1.0, 0.0, "mc_hit")
    samples = int(samples)
    if samples <= 0:
        raise ValueError("need a positive number of samples")
    min_dist = 2.0 * unit_ball_radius(d)
    bb = region.bounding_ball
    log_scale = k * math.log(bb.volume) - math.lgamma(k + 1)
    scale = math.exp(log_scale)
    hits = 0
    done = 0
    while done < samples:
        m = min(samples - done, max(1, chunk // max(1, k)))
        pts = sample_uniform_ball(bb, d, rng, size=m * k).reshape(m, k, d)
        ok = region.contains_many(pts.reshape(m * k, d)).reshape(m, k).all(axis=1)
        ok &= _packing_mask(pts, min_dist)
        hits += int(ok.sum())
        done += m
    p = hits / samples
    stderr = scale * math.sqrt(p * (1.0 - p) / samples)
    return PartitionEstimate(scale * p, stderr, "mc_hit")


def ideal_gas_tail(x, k_max):
    """sum_{k > k_max} x^k / k!  (the tail of e^x)."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0:
        return 0.0
    return float(math.exp(x) * gammainc(k_max + 1, x))


def zhat_table(region, k_max, per_k_samples, rng):
    """Zhat_S(k) for k = 0..k_max, exact for intervals, MC otherwise."""
    if isinstance(region, IntervalRegion):
        return [tonks_zhat_exact(region.L, k) for k in range(k_max + 1)]
    return [
        canonical_zhat_mc(region, k, region.d, per_k_samples, rng) if k else PartitionEstimate(1.0, 0.0, "mc_hit")
        for k in range(k_max + 1)
    ]


def grand_z_series(region, lam, k_max, per_k_samples, rng, truncation_tol=None):
    """Z_S(lambda) summed to k_max, with the ideal-gas tail as truncation error.

    Interval regions route to the exact 1-D oracle (no MC noise); all other
    regions need a bounding ball and an exact or implied scale through it.
    Raises SeriesTruncationError when the tail bound exceeds truncation_tol.
    """
    if lam < 0:
        raise ValueError(f"fugacity must be nonnegative, got {lam}")
    if k_max < 0:
        raise ValueError(f"k_max must be nonnegative, got {k_max}")
    table = zhat_table(region, k_max, per_k_samples, rng)
    value = 0.0
    var = 0.0
    for k, zh in enumerate(table):
        w = lam**k
        value += w * zh.value
        var += (w * zh.stderr) ** 2
    vol_ref = region.volume if region.volume is not None else region.bounding_ball.volume
    trunc = ideal_gas_tail(lam * vol_ref, k_max)
    if truncation_tol is not None and trunc > truncation_tol:
        raise SeriesTruncationError(
            f"series tail bound {trunc:.3e} exceeds tolerance {truncation_tol:.3e} at k_max={k_max}"
        )
    return PartitionEstimate(value, math.sqrt(var), "series", truncation_error=trunc)


@dataclass(frozen=True)
class EntropyResult:
    """Finite-n entropy-density value (1/k) log of the packing probability."""

    value: float
    stderr: float
    k: int
    n: float
    exact: bool
    lower_bound_only: bool = False


def entropy_density_estimate(n, alpha, d, samples, rng):
    """Finite-n proxy of the packing entropy density at density alpha.

    Computes (1/k) log [ Zhat_{B_n}(k) / (n^k / k!) ] with k = floor(alpha*n):
    the normalized log-probability that k uniform points in the volume-n ball
    form a packing.  Exact in d = 1; hit-or-miss MC otherwise.  With zero MC
    hits only a conservative lower bound log(1/samples)/k can be reported.
    """
    if n <= 0 or alpha <= 0:
        raise ValueError("need positive n and alpha")
    k = int(math.floor(alpha * n))
    if k < 1:
        raise ValueError(f"floor(alpha*n) = {k}; need at least one center")
    if d == 1:
        zh = tonks_zhat_exact(float(n), k)
        if zh.value == 0.0:
            return EntropyResult(-math.inf, 0.0, k, float(n), exact=True)
        log_p = math.log(zh.value) - (k * math.log(n) - math.lgamma(k + 1))
        return EntropyResult(log_p / k, 0.0, k, float(n), exact=True)
    from .model import BallVolumeRegion

    region = BallVolumeRegion(float(n), d)
    zh = canonical_zhat_mc(region, k, d, samples, rng)
    scale = math.exp(k * math.log(n) - math.lgamma(k + 1))
    p = zh.value / scale
    if p == 0.0:
        return EntropyResult(
            math.log(1.0 / samples) / k, 0.0, k, float(n), exact=False, lower_bound_only=True
        )
    se_log = zh.stderr / zh.value
    return EntropyResult(math.log(p) / k, se_log / k, k, float(n), exact=False)
