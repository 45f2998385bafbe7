"""Mergeable Monte Carlo estimates with batch-means standard errors."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Estimate:
    """Sufficient statistics for a Monte Carlo observable."""

    mean: float
    stderr: float
    n_samples: int
    n_batches: int

    def merge(self, other):
        """Pool two estimates, weighting by sample counts."""
        n = self.n_samples + other.n_samples
        w1 = self.n_samples / n
        w2 = other.n_samples / n
        mean = w1 * self.mean + w2 * other.mean
        stderr = math.sqrt((w1 * self.stderr) ** 2 + (w2 * other.stderr) ** 2)
        return Estimate(mean, stderr, n, self.n_batches + other.n_batches)


def merge_estimates(estimates):
    """Pool a sequence of estimates in order."""
    estimates = list(estimates)
    if not estimates:
        raise ValueError("no estimates to merge")
    out = estimates[0]
    for e in estimates[1:]:
        out = out.merge(e)
    return out


def batch_means(values, n_batches=20):
    """Batch-means estimate of the mean of a (possibly correlated) series.

    Splits the series into `n_batches` contiguous batches and uses the
    spread of the batch means for the standard error; any remainder at the
    tail beyond an even split is still included in the overall mean.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    if n < n_batches:
        n_batches = max(1, n)
    b = n // n_batches
    means = x[: b * n_batches].reshape(n_batches, b).mean(axis=1)
    mean = float(x.mean())
    if n_batches > 1:
        stderr = float(np.std(means, ddof=1) / math.sqrt(n_batches))
    else:
        stderr = float("inf")
    return Estimate(mean, stderr, int(n), int(n_batches))


def binomial_estimate(hits, samples, scale=1.0, n_batches=1):
    """Estimate of scale * p from `hits` successes in `samples` trials."""
    if samples <= 0:
        raise ValueError("need at least one sample")
    p = hits / samples
    se = scale * math.sqrt(p * (1.0 - p) / samples)
    return Estimate(scale * p, se, int(samples), int(n_batches))
