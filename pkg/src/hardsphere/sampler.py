"""Grand-canonical Monte Carlo for the hard sphere model on a region.

The chain mixes three reversible move types, chosen uniformly per step:

* insert: propose a uniform point in the region, accept with
  min(1, lambda*vol / (k+1)) if no existing center blocks it;
* delete: pick a uniform center, accept with min(1, k / (lambda*vol));
* translate: pick a uniform center and a uniform displacement in a ball,
  accept iff the displaced configuration is still a valid packing.

Each move satisfies detailed balance with respect to pi(X) ~ lambda^|X| on
valid packings, so the stationary law is the grand canonical hard sphere
model.  Acceptance ratios need the exact region volume; regions whose
volume is only known by estimate are refused.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import unit_ball_radius
from .model import Configuration, insertion_allowed, is_packing
from .stats import Estimate, batch_means

_BLOCK = 4096

# Probe count per retained configuration for free-volume estimation;
# balances probe noise against configuration autocorrelation.
DEFAULT_PROBES_PER_SAMPLE = 64


@dataclass(frozen=True)
class FugacityParams:
    """Fugacity (as a ratio to the unit sphere volume) and dimension."""

    lam: float
    d: int

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"fugacity must be positive, got {self.lam}")


@dataclass(frozen=True)
class Schedule:
    """Proposed-move counts: burn-in, retained samples, proposals between samples."""

    burn_in: int
    n_samples: int
    thinning: int

    def __post_init__(self):
        if self.burn_in < 0 or self.n_samples < 1 or self.thinning < 1:
            raise ValueError("invalid schedule")

    @property
    def total_steps(self):
        return self.burn_in + self.n_samples * self.thinning


def default_schedule(region, n_samples=2000):
    """Schedule scaled to the region volume (autocorrelation grows with it)."""
    vol = region.volume if region.volume is not None else region.bounding_ball.volume
    burn_in = int(1e5 * max(1.0, vol))
    thinning = max(1, int(math.ceil(10.0 * vol)))
    return Schedule(burn_in, int(n_samples), thinning)


def chain_rng(seed, chain_id=0):
    """Counter-based generator keyed by (seed, chain id): reproducible,
    and independent across chain ids without shared state."""
    return np.random.Generator(np.random.Philox(key=[int(seed) & (2**64 - 1), int(chain_id)]))


@dataclass
class ChainState:
    """One GCMC chain: configuration, parameters, RNG, and move counters."""

    config: Configuration
    region: object
    params: FugacityParams
    rng: np.random.Generator
    steps_taken: int = 0
    accepted_inserts: int = 0
    accepted_deletes: int = 0
    accepted_moves: int = 0
    translate_radius: float = None

    def __post_init__(self):
        if not self.region.has_exact_volume:
            raise ValueError("GCMC needs a region with exact volume")
        if self.params.d != self.region.d:
            raise ValueError("parameter dimension does not match region")
        if self.translate_radius is None:
            self.translate_radius = 2.0 * unit_ball_radius(self.region.d)


def make_chain(region, params, rng, translate_radius=None):
    return ChainState(
        config=Configuration(region),
        region=region,
        params=params,
        rng=rng,
        translate_radius=translate_radius,
    )


def _ball_displacements(rng, m, d, radius):
    g = rng.standard_normal((m, d))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0.0] = 1.0
    rad = radius * rng.random(m) ** (1.0 / d)
    return g * (rad / norms)[:, None]


def gcmc_step(state):
    """Advance the chain by one proposed move; returns the mutated state."""
    rng = state.rng
    config = state.config
    region = state.region
    lam_vol = state.params.lam * region.volume
    min_dist = config.min_dist
    move = int(rng.integers(0, 3))
    u = float(rng.random())
    sel = float(rng.random())
    k = config.k
    if move == 0:
        p = tuple(region.sample_uniform(rng))
        if u * (k + 1) < lam_vol and not config.any_within(p, min_dist):
            config.insert(p)
            state.accepted_inserts += 1
    elif move == 1:
        if k > 0 and u * lam_vol < k:
            config.remove(config.id_at(int(sel * k)))
            state.accepted_deletes += 1
    else:
        if k > 0:
            i = config.id_at(int(sel * k))
            p = config.point(i)
            disp = _ball_displacements(rng, 1, config.d, state.translate_radius)[0]
            q = tuple(a + b for a, b in zip(p, disp))
            if region.contains(q) and not config.any_within(q, min_dist, exclude=i):
                config.move(i, q)
                state.accepted_moves += 1
    state.steps_taken += 1
    return state


@dataclass
class ChainTrace:
    """Thinned observables from one chain run."""

    counts: np.ndarray
    free_fractions: np.ndarray = None
    configs: list = None
    state: ChainState = None


def run_chain(
    region,
    params,
    schedule,
    rng,
    probes_per_sample=0,
    translate_radius=None,
    collect_configs=False,
    debug_check=False,
):
    """Run a chain over a full schedule, recording |X| (and optionally
    free-volume probe fractions and configuration snapshots) at each
    retained sample.

    The proposal stream is drawn in fixed-size blocks, so results are a
    deterministic function of (region, params, schedule, rng state).
    """
    state = make_chain(region, params, rng, translate_radius=translate_radius)
    config = state.config
    lam_vol = params.lam * region.volume
    min_dist = config.min_dist
    min_dist2 = min_dist * min_dist
    d = region.d
    contains = region.contains

    total = schedule.total_steps
    counts = np.empty(schedule.n_samples, dtype=np.int64)
    fracs = np.empty(schedule.n_samples, dtype=float) if probes_per_sample else None
    configs = [] if collect_configs else None

    n_rec = 0
    step = 0
    acc_ins = acc_del = acc_mov = 0
    while step < total:
        m = min(_BLOCK, total - step)
        moves = rng.integers(0, 3, m).tolist()
        u_acc = rng.random(m).tolist()
        u_sel = rng.random(m).tolist()
        ins_pts = region.sample_uniform(rng, size=m).tolist()
        disps = _ball_displacements(rng, m, d, state.translate_radius).tolist()
        for i in range(m):
            mv = moves[i]
            k = len(config._ids)
            if mv == 0:
                if u_acc[i] * (k + 1) < lam_vol:
                    p = tuple(ins_pts[i])
                    if not config.any_within(p, min_dist):
                        config.insert(p)
                        acc_ins += 1
            elif mv == 1:
                if k and u_acc[i] * lam_vol < k:
                    config.remove(config._ids[int(u_sel[i] * k)])
                    acc_del += 1
            else:
                if k:
                    cid = config._ids[int(u_sel[i] * k)]
                    p = config._points[cid]
                    dsp = disps[i]
                    q = tuple(p[t] + dsp[t] for t in range(d))
                    if contains(q) and not config.any_within(q, min_dist, exclude=cid):
                        config.move(cid, q)
                        acc_mov += 1
            step += 1
            if debug_check:
                assert is_packing(config).result
            past = step - schedule.burn_in
            if past > 0 and past % schedule.thinning == 0:
                counts[n_rec] = len(config._ids)
                if probes_per_sample:
                    fracs[n_rec] = _free_fraction(region, config, probes_per_sample, rng, min_dist2)
                if collect_configs:
                    configs.append(config.points_list())
                n_rec += 1

    state.steps_taken = total
    state.accepted_inserts = acc_ins
    state.accepted_deletes = acc_del
    state.accepted_moves = acc_mov
    return ChainTrace(counts=counts, free_fractions=fracs, configs=configs, state=state)


def _free_fraction(region, config, probes, rng, min_dist2):
    """Fraction of uniform probe points farther than 2*r_d from all centers."""
    pts = region.sample_uniform(rng, size=probes)
    if not len(config._ids):
        return 1.0
    centers = config.as_array()
    diff = pts[:, None, :] - centers[None, :, :]
    d2 = (diff * diff).sum(axis=-1)
    return float((d2.min(axis=1) > min_dist2).mean())


def estimate_alpha(region, params, schedule, rng):
    """Time-average of |X| / vol(S): the expected packing density."""
    trace = run_chain(region, params, schedule, rng)
    return batch_means(trace.counts / region.volume)


def estimate_free_volume(region, params, schedule, rng, probes_per_sample=DEFAULT_PROBES_PER_SAMPLE):
    """Expected fraction of the region where a new center could legally go."""
    trace = run_chain(region, params, schedule, rng, probes_per_sample=probes_per_sample)
    return batch_means(trace.free_fractions)


def estimate_count_variance(region, params, schedule, rng):
    """Batch-means estimate of var |X| under the stationary law."""
    trace = run_chain(region, params, schedule, rng)
    return count_variance_from_counts(trace.counts)


def count_variance_from_counts(counts, n_batches=20):
    x = np.asarray(counts, dtype=float)
    centered_sq = (x - x.mean()) ** 2
    return batch_means(centered_sq, n_batches=n_batches)


def acceptance_rates(state):
    """Per-move-type acceptance counts as fractions of all proposals."""
    n = max(1, state.steps_taken)
    return {
        "insert": state.accepted_inserts / n,
        "delete": state.accepted_deletes / n,
        "translate": state.accepted_moves / n,
    }
