import math
from dataclasses import replace

import numpy as np
import pytest

from sfp.experiments import (EstimateWithCI, ExperimentConfig, KTooLarge,
                             NonPositivePoint, PathTooLong, TooFewPoints,
                             hill_estimator, loglog_slope, run_adjacent_mc,
                             run_bridge_experiment, run_coupling_check,
                             run_degree_experiment, run_distance_experiment,
                             run_fkg_check)
from sfp.graph import BoxSpec
from sfp.moments import BetaOutOfRange, adjacent_expectation_exact
from sfp.params import ModelKind, validate_params
from sfp.randomness import experiment_uniforms, pareto_from_uniform

P = validate_params(1, 1.5, 1.0, 2.5)


class TestHill:
    def test_recovers_synthetic_pareto(self):
        theta = 2.0
        u = experiment_uniforms(77, np.arange(1_000_000, dtype=np.uint64))
        x = u ** (-1.0 / theta)
        est = hill_estimator(x, 10_000)
        assert abs(est.mean - theta) <= 3.0 * est.stderr

    def test_stderr_is_estimate_over_sqrt_k(self):
        x = pareto_from_uniform(experiment_uniforms(3, np.arange(10_000, dtype=np.uint64)), 2.5)
        est = hill_estimator(x, 400)
        assert est.stderr == est.mean / math.sqrt(400)

    def test_constant_samples_error(self):
        with pytest.raises(ValueError):
            hill_estimator(np.full(1000, 7.0), 100)

    def test_scale_invariance(self):
        x = pareto_from_uniform(experiment_uniforms(9, np.arange(50_000, dtype=np.uint64)), 3.0)
        assert hill_estimator(x, 1000).mean == hill_estimator(2.0 * x, 1000).mean

    def test_k_too_large(self):
        with pytest.raises(KTooLarge):
            hill_estimator(np.arange(1.0, 100.0), 99)
        with pytest.raises(KTooLarge):
            hill_estimator(np.arange(1.0, 100.0), 0)


class TestLogLogSlope:
    def test_exact_power_law(self):
        pts = [(x, x ** -2.0) for x in (1.0, 2.0, 4.0, 8.0, 16.0)]
        est = loglog_slope(pts)
        assert abs(est.mean + 2.0) < 1e-12
        assert est.stderr < 1e-12

    def test_too_few_points(self):
        with pytest.raises(TooFewPoints):
            loglog_slope([(1.0, 1.0)])

    def test_nonpositive_point(self):
        with pytest.raises(NonPositivePoint):
            loglog_slope([(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)])

    def test_noisy_recovery_within_3_se(self):
        rng = np.random.default_rng(2)
        x = np.logspace(0, 3, 40)
        y = x ** -1.7 * np.exp(rng.normal(0, 0.05, size=40))
        est = loglog_slope(np.stack([x, y], axis=1))
        assert abs(est.mean + 1.7) <= 3.0 * est.stderr


class TestAdjacentMC:
    def test_replicates_zero_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(params=P, replicates=0)

    def test_point_estimate_in_sandwich(self):
        cfg = ExperimentConfig(params=P, seed=0, replicates=200_000)
        rep = run_adjacent_mc(cfg, 100.0 ** (2 / 3), 10.0 ** (2 / 3), sweep_ryz=())
        assert rep.verdict("sandwich-3se").passed
        kind, rxy, ryz, est, se, n = rep.rows[0]
        exact = adjacent_expectation_exact(P, 100.0 ** (2 / 3), 10.0 ** (2 / 3))
        assert exact.lower - 3 * se <= est <= exact.upper + 3 * se

    def test_thread_count_does_not_change_report(self):
        cfg1 = ExperimentConfig(params=P, seed=5, replicates=200_000, threads=1)
        cfg3 = ExperimentConfig(params=P, seed=5, replicates=200_000, threads=3)
        r1 = run_adjacent_mc(cfg1, 20.0, 5.0, sweep_ryz=(8.0, 16.0, 32.0))
        r3 = run_adjacent_mc(cfg3, 20.0, 5.0, sweep_ryz=(8.0, 16.0, 32.0))
        assert r1.rows == r3.rows
        assert [(v.rule, v.passed) for v in r1.verdicts] == \
            [(v.rule, v.passed) for v in r3.verdicts]

    def test_tau_out_of_range(self):
        from sfp.moments import TauOutOfRange
        with pytest.raises(TauOutOfRange):
            run_adjacent_mc(ExperimentConfig(params=validate_params(1, 1.5, 1.0, 3.5),
                                             replicates=10), 10.0, 5.0)


class TestFkg:
    def test_lrp_factorizes_exactly(self):
        p = replace(P, kind=ModelKind.LRP)
        cfg = ExperimentConfig(params=p, seed=0, replicates=1000)
        rep = run_fkg_check(cfg, [(0,), (7,), (15,), (40,)])
        assert rep.all_pass
        for cut, p_path, se_path, p_head, p_tail, prod, se in rep.rows:
            # Constant per-replicate values: the only residue is float
            # cancellation in the sum-of-squares accumulator, of order
            # sqrt(machine epsilon) relative.
            assert se <= 1e-7 * p_path
            assert abs(p_path - prod) <= 1e-12 * (p_path + prod)

    def test_sfp_product_bound_holds(self):
        cfg = ExperimentConfig(params=P, seed=1, replicates=300_000)
        rep = run_fkg_check(cfg, [(0,), (9,), (14,), (30,)])
        assert rep.all_pass
        assert len(rep.rows) == 2  # cuts at the two interior vertices

    def test_length_two_path_matches_adjacent_sandwich(self):
        cfg = ExperimentConfig(params=P, seed=2, replicates=400_000)
        rep = run_fkg_check(cfg, [(0,), (22,), (27,)])
        cut, p_path, se_path, *_ = rep.rows[0]
        exact = adjacent_expectation_exact(P, 22.0, 5.0)
        assert exact.lower - 3 * se_path <= p_path <= exact.upper + 3 * se_path

    def test_path_too_long(self):
        cfg = ExperimentConfig(params=P, replicates=10)
        with pytest.raises(PathTooLong):
            run_fkg_check(cfg, [(i,) for i in range(0, 80, 10)])  # 7 edges
        with pytest.raises(PathTooLong):
            run_fkg_check(cfg, [(0,), (5,)])  # single edge has no cut


class TestBridge:
    def test_geometry_degenerate_flagged(self):
        cfg = ExperimentConfig(params=P, seed=0, replicates=100)
        rep = run_bridge_experiment(cfg, beta=0.5, n_list=(4,))
        assert any("GeometryDegenerate" in f for f in rep.flags)
        assert rep.rows == []

    def test_beta_out_of_range(self):
        cfg = ExperimentConfig(params=P, replicates=10)
        with pytest.raises(BetaOutOfRange):
            run_bridge_experiment(cfg, beta=1.0)

    def test_slope_magnitude_shrinks_as_beta_grows(self):
        # Targets 1.75 (beta 0.5) vs 1.55 (beta 0.7); the cube must stay
        # clear of the endpoints, which bounds beta for these N.
        cfg = ExperimentConfig(params=P, seed=0, replicates=100_000)
        lo = run_bridge_experiment(cfg, beta=0.5, n_list=(256, 512, 1024))
        hi = run_bridge_experiment(cfg, beta=0.7, n_list=(256, 512, 1024))
        def slope(rep):
            pts = [(row[0], row[2]) for row in rep.rows]
            from sfp.experiments import loglog_slope
            return loglog_slope(pts).mean
        assert abs(slope(hi)) < abs(slope(lo))

    def test_positive_mass(self):
        cfg = ExperimentConfig(params=P, seed=0, replicates=50_000)
        rep = run_bridge_experiment(cfg, beta=0.5, n_list=(64, 128, 256))
        assert rep.verdict("positive-mass").passed


class TestCoupling:
    def test_no_violations_same_intensity(self):
        cfg = ExperimentConfig(params=P, spec=BoxSpec(d=1, side=100), seed=0,
                               replicates=10)
        rep = run_coupling_check(cfg)
        assert rep.verdict("coupling-domination").passed
        assert all(row[1] == 0 for row in rep.rows)

    def test_mismatched_intensity_counts_only(self):
        cfg = ExperimentConfig(params=replace(P, lambda_=0.2),
                               spec=BoxSpec(d=1, side=200), seed=0, replicates=10)
        rep = run_coupling_check(cfg, lambda_lrp=3.0)
        assert rep.verdicts == []
        assert sum(row[1] for row in rep.rows) > 0

    def test_thread_invariance(self):
        cfg1 = ExperimentConfig(params=P, spec=BoxSpec(d=1, side=128), seed=7,
                                replicates=24, threads=1)
        cfg4 = replace(cfg1, threads=4)
        assert run_coupling_check(cfg1).rows == run_coupling_check(cfg4).rows


class TestDegrees:
    def test_insufficient_tail_flag(self):
        cfg = ExperimentConfig(params=P, spec=BoxSpec(d=1, side=4), seed=0)
        rep = run_degree_experiment(cfg)
        assert any("InsufficientTail" in f for f in rep.flags)
        assert rep.verdicts == []

    def test_requires_alpha_above_d(self):
        cfg = ExperimentConfig(params=validate_params(1, 0.8, 1.0, 4.0),
                               spec=BoxSpec(d=1, side=100), seed=0)
        with pytest.raises(ValueError):
            run_degree_experiment(cfg)

    def test_small_box_estimate_in_broad_band(self):
        # Desk-size sanity run; the tight tolerance lives in the
        # acceptance suite at L = 1e5.
        p = validate_params(1, 1.5, 1.0, 3.5)
        cfg = ExperimentConfig(params=p, spec=BoxSpec(d=1, side=20_000), seed=0)
        rep = run_degree_experiment(cfg, margin=500, hill_k=1_200, cutoff=10_000.0,
                                    tol=0.6)
        assert rep.verdict("hill-vs-gamma").passed


class TestDistances:
    def test_tiny_cluster_flag(self):
        p = validate_params(1, 1.5, 1e-6, 2.5)
        cfg = ExperimentConfig(params=p, spec=BoxSpec(d=1, side=256), seed=0)
        rep = run_distance_experiment(cfg, n_list=[16, 32])
        assert any("LargestClusterTiny" in f for f in rep.flags)
        assert rep.rows == []

    def test_coupled_domination_small(self):
        p = validate_params(1, 1.5, 5.0, 3.5)
        cfg = ExperimentConfig(params=p, spec=BoxSpec(d=1, side=1024), seed=0)
        rep = run_distance_experiment(cfg, n_list=[16, 32, 64, 128], n_sources=12,
                                      compare_lrp=True)
        assert rep.verdict("coupled-median-domination").passed

    def test_separation_must_fit(self):
        cfg = ExperimentConfig(params=P, spec=BoxSpec(d=1, side=64), seed=0)
        with pytest.raises(ValueError):
            run_distance_experiment(cfg, n_list=[64])


def test_report_csv_shape():
    cfg = ExperimentConfig(params=P, seed=0, replicates=1000)
    rep = run_adjacent_mc(cfg, 20.0, 5.0, sweep_ryz=())
    text = rep.to_csv()
    lines = text.splitlines()
    assert lines[0] == "#experiment=adjacent"
    assert any(l.startswith("#config seed=0") for l in lines)
    assert any(l.startswith("#verdict sandwich-3se") for l in lines)
    assert lines[-1].startswith("#wallclock=")
    header = [l for l in lines if not l.startswith("#")][0]
    assert header == "kind,r_xy,r_yz,estimate,stderr,n"
