"""Dimension-generic Euclidean ball primitives.

All lengths are in units where the unit-volume sphere sets the scale:
``unit_ball_radius(d)`` is the radius r_d of the d-dimensional ball of
volume 1, and every other module measures distances against 2*r_d.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class BallSpec:
    """A ball given by its center and radius."""

    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.radius < 0:
            raise ValueError(f"ball radius must be nonnegative, got {self.radius}")
        if not all(math.isfinite(c) for c in self.center):
            raise ValueError("ball center must have finite coordinates")

    @property
    def d(self):
        return len(self.center)

    @property
    def volume(self):
        return ball_volume(self.radius, self.d)


def unit_ball_radius(d):
    """Radius r_d of the d-dimensional ball of volume 1.

    r_d = Gamma(d/2 + 1)^(1/d) / sqrt(pi).
    """
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d}")
    return math.exp(math.lgamma(d / 2 + 1) / d) / math.sqrt(math.pi)


def log_ball_volume(radius, d):
    """log of the volume of a d-ball; radius must be positive."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    return 0.5 * d * math.log(math.pi) + d * math.log(radius) - math.lgamma(d / 2 + 1)


def ball_volume(radius, d):
    """Volume of the d-dimensional ball: pi^(d/2) radius^d / Gamma(d/2 + 1)."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d}")
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    if radius == 0:
        return 0.0
    return math.exp(log_ball_volume(radius, d))


def sample_uniform_ball(spec, d, rng, size=None):
    """Uniform point(s) in the closed ball described by `spec`.

    Gaussian direction scaled by U^(1/d) * radius; robust in high d where
    rejection from a bounding cube would be hopeless.  Returns a (d,) array
    when size is None, else a (size, d) array.
    """
    if spec.d != d:
        raise ValueError(f"ball dimension {spec.d} does not match d={d}")
    m = 1 if size is None else int(size)
    g = rng.standard_normal((m, d))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0.0] = 1.0
    radii = spec.radius * rng.random(m) ** (1.0 / d)
    pts = np.asarray(spec.center) + g * (radii / norms)[:, None]
    return pts[0] if size is None else pts


def _cap_volume(r, a, d):
    """Volume of the cap of a d-ball of radius r cut at signed distance a.

    a is the distance from the ball center to the cutting hyperplane; a >= 0
    gives the minor cap, a < 0 the complement.  Closed form through the
    regularized incomplete beta function.
    """
    if a >= r:
        return 0.0
    if a <= -r:
        return ball_volume(r, d)
    if a < 0:
        return ball_volume(r, d) - _cap_volume(r, -a, d)
    x = 1.0 - (a / r) ** 2
    return 0.5 * ball_volume(r, d) * float(betainc((d + 1) / 2.0, 0.5, x))


def two_ball_intersection_volume(dist, r1, r2, d):
    """Exact volume of the lens B_{r1}(x) ∩ B_{r2}(y) with |x - y| = dist.

    Symmetric in (r1, r2); 0 for disjoint balls; the smaller ball's volume
    when one ball contains the other.
    """
    if dist < 0:
        raise ValueError(f"distance must be nonnegative, got {dist}")
    if r1 <= 0 or r2 <= 0:
        raise ValueError("radii must be positive")
    if dist >= r1 + r2:
        return 0.0
    if dist <= abs(r1 - r2):
        return ball_volume(min(r1, r2), d)
    a1 = (dist * dist + r1 * r1 - r2 * r2) / (2.0 * dist)
    a2 = (dist * dist + r2 * r2 - r1 * r1) / (2.0 * dist)
    return _cap_volume(r1, a1, d) + _cap_volume(r2, a2, d)


def containing_ball_bound(t, d):
    """The bound (2 sqrt(1 - t^-2))^d on the two-ball overlap at distance t*r_d.

    Valid for t in [sqrt(2), 2]; smaller t is handled elsewhere by the
    2^(d/2) volume bound on the inner ball.
    """
    if t < SQRT2 - 1e-12 or t > 2.0 + 1e-12:
        raise ValueError(f"t must lie in [sqrt(2), 2], got {t}")
    t = min(max(t, SQRT2), 2.0)
    return (2.0 * math.sqrt(1.0 - t ** -2)) ** d
