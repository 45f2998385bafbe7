"""Regions, center configurations, and the hard-core packing predicate.

A Region is a bounded measurable set given by a membership oracle, a
bounding ball, and (where known) an exact volume.  A Configuration is a
finite set of centers backed by a uniform cell grid so that "is any center
within 2*r_d of this point?" costs O(1) at desk densities.  Validity is the
strict condition d(x_i, x_j) > 2*r_d for all pairs: a pair at distance
exactly 2*r_d is a violation (the boundary set has measure zero, so the
choice does not move any estimate).
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import BallSpec, ball_volume, sample_uniform_ball, unit_ball_radius
from .stats import Estimate, batch_means

# 3^d neighbor-cell scans stop paying off quickly; beyond this the
# configuration falls back to brute-force pairwise checks.
_MAX_GRID_NEIGHBORS = 4096


class Region:
    """Base class: a bounded measurable subset of R^d.

    Subclasses provide `contains` / `contains_many`, a `bounding_ball`,
    and either an exact `volume` or None (volume known only by estimate).
    """

    d: int
    volume = None
    bounding_ball: BallSpec

    @property
    def has_exact_volume(self):
        return self.volume is not None

    def contains(self, p):
        raise NotImplementedError

    def contains_many(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.array([self.contains(tuple(p)) for p in pts], dtype=bool)

    def sample_uniform(self, rng, size=None):
        """Uniform sample(s) from the region.

        Default implementation rejects from the bounding ball; exact-shape
        regions override with direct samplers.
        """
        m = 1 if size is None else int(size)
        out = np.empty((m, self.d))
        have = 0
        while have < m:
            block = sample_uniform_ball(self.bounding_ball, self.d, rng, size=2 * (m - have) + 16)
            ok = block[self.contains_many(block)]
            take = min(m - have, len(ok))
            out[have : have + take] = ok[:take]
            have += take
        return out[0] if size is None else out


class BallVolumeRegion(Region):
    """The ball B_n of volume n centered at the origin."""

    def __init__(self, n, d):
        if n <= 0:
            raise ValueError(f"volume must be positive, got {n}")
        self.d = int(d)
        self.n = float(n)
        self.volume = float(n)
        self.radius = n ** (1.0 / d) * unit_ball_radius(d)
        self.bounding_ball = BallSpec((0.0,) * self.d, self.radius)
        self._r2 = self.radius**2

    def contains(self, p):
        return sum(x * x for x in p) <= self._r2

    def contains_many(self, pts):
        pts = np.asarray(pts, dtype=float)
        return (pts * pts).sum(axis=-1) <= self._r2

    def sample_uniform(self, rng, size=None):
        return sample_uniform_ball(self.bounding_ball, self.d, rng, size=size)


class BallRegion(Region):
    """A ball with explicit center and radius (test sets, sub-balls)."""

    def __init__(self, center, radius, d):
        self.d = int(d)
        self.bounding_ball = BallSpec(tuple(center), float(radius))
        self.volume = ball_volume(radius, d)
        self._c = np.asarray(self.bounding_ball.center)
        self._r2 = float(radius) ** 2

    def contains(self, p):
        return sum((x - c) ** 2 for x, c in zip(p, self.bounding_ball.center)) <= self._r2

    def contains_many(self, pts):
        pts = np.asarray(pts, dtype=float)
        dd = pts - self._c
        return (dd * dd).sum(axis=-1) <= self._r2

    def sample_uniform(self, rng, size=None):
        return sample_uniform_ball(self.bounding_ball, self.d, rng, size=size)


class ShellRegion(Region):
    """Origin-centered shell r_inner < |x| <= r_outer (test sets)."""

    def __init__(self, r_outer, r_inner, d):
        if not 0 <= r_inner < r_outer:
            raise ValueError("need 0 <= r_inner < r_outer")
        self.d = int(d)
        self.r_outer = float(r_outer)
        self.r_inner = float(r_inner)
        self.volume = ball_volume(r_outer, d) - (ball_volume(r_inner, d) if r_inner > 0 else 0.0)
        self.bounding_ball = BallSpec((0.0,) * self.d, self.r_outer)

    def contains(self, p):
        r2 = sum(x * x for x in p)
        return self.r_inner**2 < r2 <= self.r_outer**2

    def contains_many(self, pts):
        pts = np.asarray(pts, dtype=float)
        r2 = (pts * pts).sum(axis=-1)
        return (r2 > self.r_inner**2) & (r2 <= self.r_outer**2)

    def sample_uniform(self, rng, size=None):
        # Radial inverse CDF: r^d uniform on [r_in^d, r_out^d].
        m = 1 if size is None else int(size)
        g = rng.standard_normal((m, self.d))
        norms = np.linalg.norm(g, axis=1)
        norms[norms == 0.0] = 1.0
        u = rng.random(m)
        rad = (self.r_inner**self.d + u * (self.r_outer**self.d - self.r_inner**self.d)) ** (1.0 / self.d)
        pts = g * (rad / norms)[:, None]
        return pts[0] if size is None else pts


class IntervalRegion(Region):
    """The interval [0, L] in dimension 1."""

    d = 1

    def __init__(self, L):
        if L <= 0:
            raise ValueError(f"interval length must be positive, got {L}")
        self.L = float(L)
        self.volume = float(L)
        self.bounding_ball = BallSpec((L / 2.0,), L / 2.0)

    def contains(self, p):
        return 0.0 <= p[0] <= self.L

    def contains_many(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 1)
        return (pts[:, 0] >= 0.0) & (pts[:, 0] <= self.L)

    def sample_uniform(self, rng, size=None):
        m = 1 if size is None else int(size)
        pts = rng.random((m, 1)) * self.L
        return pts[0] if size is None else pts


class OracleRegion(Region):
    """A region defined only through a membership predicate (tests)."""

    def __init__(self, contains_fn, bounding_ball, d, volume=None, contains_many_fn=None):
        self.d = int(d)
        self.bounding_ball = bounding_ball
        self.volume = volume
        self._fn = contains_fn
        self._fn_many = contains_many_fn

    def contains(self, p):
        return bool(self._fn(p))

    def contains_many(self, pts):
        if self._fn_many is not None:
            return np.asarray(self._fn_many(np.asarray(pts, dtype=float)), dtype=bool)
        return super().contains_many(pts)


@dataclass(frozen=True)
class PackingEvent:
    """Outcome of the pairwise hard-core check, with a violating pair if any."""

    result: bool
    witness: tuple = None

    def __post_init__(self):
        if self.result == (self.witness is not None):
            raise ValueError("witness must be present exactly when the check fails")


class Configuration:
    """A finite set of centers with a cell-grid index for overlap queries.

    Cell side is max(2*r_d, bounding-ball-diameter/64), so at most 64 cells
    per axis and any point within 2*r_d of a query lies in one of the 3^d
    adjacent cells.  In high dimension (3^d beyond a memory/scan budget) the
    index degrades to a brute-force scan over all centers.
    """

    def __init__(self, region, points=()):
        self.region = region
        self.d = region.d
        self.min_dist = 2.0 * unit_ball_radius(self.d)
        bb = region.bounding_ball
        self.cell_side = max(self.min_dist, 2.0 * bb.radius / 64.0)
        self._origin = tuple(c - bb.radius for c in bb.center)
        self._use_grid = 3**self.d <= _MAX_GRID_NEIGHBORS
        self._offsets = (
            list(itertools.product((-1, 0, 1), repeat=self.d)) if self._use_grid else None
        )
        self._grid = {}
        self._points = {}
        self._ids = []
        self._pos = {}
        self._next_id = 0
        for p in points:
            self.insert(tuple(float(x) for x in p))

    def __len__(self):
        return len(self._ids)

    @property
    def k(self):
        return len(self._ids)

    def _cell(self, p):
        s = self.cell_side
        o = self._origin
        return tuple(math.floor((p[i] - o[i]) / s) for i in range(self.d))

    def insert(self, p):
        """Add a center (no validity check) and return its id."""
        i = self._next_id
        self._next_id += 1
        self._points[i] = p
        self._pos[i] = len(self._ids)
        self._ids.append(i)
        if self._use_grid:
            self._grid.setdefault(self._cell(p), []).append(i)
        return i

    def remove(self, i):
        p = self._points.pop(i)
        pos = self._pos.pop(i)
        last = self._ids.pop()
        if last != i:
            self._ids[pos] = last
            self._pos[last] = pos
        if self._use_grid:
            cell = self._cell(p)
            self._grid[cell].remove(i)
            if not self._grid[cell]:
                del self._grid[cell]
        return p

    def id_at(self, pos):
        return self._ids[pos]

    def point(self, i):
        return self._points[i]

    def move(self, i, q):
        p = self._points[i]
        self._points[i] = q
        if self._use_grid:
            c_old, c_new = self._cell(p), self._cell(q)
            if c_old != c_new:
                self._grid[c_old].remove(i)
                if not self._grid[c_old]:
                    del self._grid[c_old]
                self._grid.setdefault(c_new, []).append(i)

    def any_within(self, p, dist, exclude=None):
        """True iff some center (other than `exclude`) is at distance <= dist."""
        pts = self._points
        if self._use_grid and dist <= self.cell_side:
            c = self._cell(p)
            get = self._grid.get
            for off in self._offsets:
                lst = get(tuple(c[i] + off[i] for i in range(self.d)))
                if lst:
                    for j in lst:
                        if j != exclude and math.dist(p, pts[j]) <= dist:
                            return True
            return False
        for j in self._ids:
            if j != exclude and math.dist(p, pts[j]) <= dist:
                return True
        return False

    def points_list(self):
        return [self._points[i] for i in self._ids]

    def as_array(self):
        if not self._ids:
            return np.empty((0, self.d))
        return np.array(self.points_list())

    def index_consistent(self):
        """Check that the grid agrees with the stored centers (tests)."""
        if not self._use_grid:
            return True
        seen = {}
        for cell, lst in self._grid.items():
            for i in lst:
                if i in seen or self._cell(self._points[i]) != cell:
                    return False
                seen[i] = cell
        return set(seen) == set(self._ids)


def is_packing(config):
    """Strict pairwise validity check, with a witness pair on failure."""
    ids = config._ids
    pts = config._points
    for i in ids:
        p = pts[i]
        if config._use_grid:
            c = config._cell(p)
            get = config._grid.get
            for off in config._offsets:
                lst = get(tuple(c[t] + off[t] for t in range(config.d)))
                if lst:
                    for j in lst:
                        if j != i and math.dist(p, pts[j]) <= config.min_dist:
                            return PackingEvent(False, (min(i, j), max(i, j)))
        else:
            for j in ids:
                if j != i and math.dist(p, pts[j]) <= config.min_dist:
                    return PackingEvent(False, (min(i, j), max(i, j)))
    return PackingEvent(True)


def insertion_allowed(config, p):
    """True iff adding center p keeps the configuration a valid packing."""
    return not config.any_within(tuple(p), config.min_dist)


def region_volume_mc(region, samples, rng, n_batches=20):
    """Hit-or-miss volume estimate from uniform draws in the bounding ball."""
    samples = int(samples)
    if samples <= 0:
        raise ValueError("need a positive number of samples")
    vol_bb = region.bounding_ball.volume
    hits = np.empty(samples, dtype=float)
    done = 0
    while done < samples:
        m = min(samples - done, 1 << 16)
        pts = sample_uniform_ball(region.bounding_ball, region.d, rng, size=m)
        hits[done : done + m] = region.contains_many(pts)
        done += m
    est = batch_means(hits, n_batches=n_batches)
    return Estimate(vol_bb * est.mean, vol_bb * est.stderr, est.n_samples, est.n_batches)
