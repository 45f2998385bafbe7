import math

import numpy as np
import pytest

from hardsphere.model import BallVolumeRegion, IntervalRegion, OracleRegion, is_packing
from hardsphere.geometry import BallSpec
from hardsphere.partition import tonks_zhat_exact
from hardsphere.sampler import (
    ChainState,
    FugacityParams,
    Schedule,
    acceptance_rates,
    chain_rng,
    count_variance_from_counts,
    default_schedule,
    estimate_alpha,
    estimate_free_volume,
    gcmc_step,
    make_chain,
    run_chain,
)


class TestParamsAndSchedule:
    def test_fugacity_must_be_positive(self):
        with pytest.raises(ValueError):
            FugacityParams(0.0, 2)

    def test_schedule_total_steps(self):
        s = Schedule(burn_in=100, n_samples=7, thinning=3)
        assert s.total_steps == 121

    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            Schedule(-1, 10, 1)
        with pytest.raises(ValueError):
            Schedule(0, 0, 1)
        with pytest.raises(ValueError):
            Schedule(0, 10, 0)

    def test_default_schedule_scales_with_volume(self):
        small = default_schedule(IntervalRegion(1.0))
        big = default_schedule(IntervalRegion(20.0))
        assert big.burn_in > small.burn_in
        assert big.thinning > small.thinning


class TestChainRng:
    def test_same_key_same_stream(self):
        a = chain_rng(42, 0).random(5)
        b = chain_rng(42, 0).random(5)
        assert (a == b).all()

    def test_distinct_chain_ids_differ(self):
        a = chain_rng(42, 0).random(5)
        b = chain_rng(42, 1).random(5)
        assert not (a == b).all()


class TestChainConstruction:
    def test_requires_exact_volume(self):
        reg = OracleRegion(lambda p: True, BallSpec((0.0,), 1.0), d=1)
        with pytest.raises(ValueError):
            make_chain(reg, FugacityParams(1.0, 1), chain_rng(0))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            make_chain(IntervalRegion(3.0), FugacityParams(1.0, 2), chain_rng(0))

    def test_single_steps_preserve_validity(self):
        state = make_chain(IntervalRegion(5.0), FugacityParams(2.0, 1), chain_rng(1))
        for _ in range(5000):
            gcmc_step(state)
            assert is_packing(state.config).result
        assert state.steps_taken == 5000
        rates = acceptance_rates(state)
        assert all(0.0 <= v <= 1.0 for v in rates.values())
        assert rates["insert"] > 0 and rates["delete"] > 0 and rates["translate"] > 0


class TestRunChain:
    def test_reproducible_bit_for_bit(self):
        reg = IntervalRegion(4.0)
        params = FugacityParams(1.5, 1)
        sched = Schedule(2000, 200, 5)
        t1 = run_chain(reg, params, sched, chain_rng(7))
        t2 = run_chain(reg, params, sched, chain_rng(7))
        assert (t1.counts == t2.counts).all()

    def test_debug_check_holds(self):
        reg = BallVolumeRegion(6.0, 2)
        sched = Schedule(500, 50, 4)
        run_chain(reg, FugacityParams(1.0, 2), sched, chain_rng(8), debug_check=True)

    def test_collected_configs_are_valid_packings(self):
        reg = BallVolumeRegion(5.0, 2)
        sched = Schedule(2000, 40, 10)
        trace = run_chain(reg, FugacityParams(1.0, 2), sched, chain_rng(9), collect_configs=True)
        assert len(trace.configs) == 40
        from hardsphere.model import Configuration

        for pts in trace.configs:
            assert is_packing(Configuration(reg, pts)).result

    def test_translate_radius_override(self):
        reg = IntervalRegion(6.0)
        sched = Schedule(2000, 100, 5)
        t = run_chain(reg, FugacityParams(1.0, 1), sched, chain_rng(10), translate_radius=0.25)
        assert t.state.translate_radius == 0.25
        # shrinking the proposal radius cannot break stationarity; the mean
        # count still matches the default-radius chain within noise
        t2 = run_chain(reg, FugacityParams(1.0, 1), sched, chain_rng(11))
        assert abs(t.counts.mean() - t2.counts.mean()) < 1.0


class TestStationaryLaw:
    def test_tiny_region_occupancy_ratio(self):
        # On a region shorter than one diameter, k is 0 or 1 and
        # P[k=1]/P[k=0] = lambda * vol exactly.
        reg = IntervalRegion(0.8)
        lam = 0.7
        sched = Schedule(5000, 20000, 5)
        trace = run_chain(reg, FugacityParams(lam, 1), sched, chain_rng(12))
        assert set(np.unique(trace.counts)) <= {0, 1}
        p1 = trace.counts.mean()
        ratio = p1 / (1 - p1)
        assert abs(ratio - lam * reg.volume) < 0.05

    def test_low_fugacity_alpha_near_lambda(self):
        # As lambda -> 0 interactions vanish and E|X|/vol -> lambda.
        reg = IntervalRegion(10.0)
        lam = 0.001
        sched = Schedule(20000, 4000, 25)
        est = estimate_alpha(reg, FugacityParams(lam, 1), sched, chain_rng(13))
        assert abs(est.mean - lam) < 5 * max(est.stderr, 1e-5)

    def test_count_distribution_matches_exact_law(self):
        # Interval L=3, lambda=1: stationary P[k] ~ Zhat(k); chi-square GOF.
        from scipy.stats import chisquare

        L, lam = 3.0, 1.0
        zh = [tonks_zhat_exact(L, k).value for k in range(4)]
        z = sum(zh)
        probs = np.array(zh) / z
        sched = Schedule(30000, 20000, 30)
        trace = run_chain(IntervalRegion(L), FugacityParams(lam, 1), sched, chain_rng(14))
        obs = np.bincount(trace.counts, minlength=4)[:4]
        assert obs.sum() == len(trace.counts)
        stat, p = chisquare(obs, probs * len(trace.counts))
        assert p > 0.001


class TestEstimators:
    def test_free_volume_identity(self):
        # E[free fraction] relates insert acceptance to alpha: at low lambda
        # the free fraction is near 1 - 2^d * alpha in d=1 (rods shadow 2r each
        # side inside the bulk).
        reg = IntervalRegion(10.0)
        params = FugacityParams(0.05, 1)
        sched = Schedule(20000, 2000, 20)
        fv = estimate_free_volume(reg, params, sched, chain_rng(15))
        alpha = estimate_alpha(reg, params, sched, chain_rng(16))
        predicted = 1.0 - 2.0 * alpha.mean + 0.1 * alpha.mean  # boundary slack
        assert abs(fv.mean - predicted) < 0.02

    def test_count_variance_from_counts(self):
        rng = np.random.default_rng(0)
        x = rng.poisson(4.0, size=20000)
        est = count_variance_from_counts(x)
        assert abs(est.mean - 4.0) < 5 * est.stderr

    def test_estimate_count_variance_runs(self):
        from hardsphere.sampler import estimate_count_variance

        reg = IntervalRegion(5.0)
        sched = Schedule(5000, 2000, 10)
        est = estimate_count_variance(reg, FugacityParams(1.0, 1), sched, chain_rng(17))
        assert est.mean > 0
        assert est.n_batches >= 20
