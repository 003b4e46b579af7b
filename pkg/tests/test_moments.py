import math

import numpy as np
import pytest

from sfp.moments import (AdjacentEdgeResult, BetaOutOfRange, DegeneratePath,
                         NonPositiveDistance, RadiusTooSmall, TauOutOfRange,
                         ThresholdBelowFloor, adjacent_expectation_exact,
                         adjacent_expectation_quadrature, bridging_exponent,
                         convolution_ratio, default_delta, edge_probability,
                         fit_c_delta, path_probability_bound,
                         single_edge_second_moment)
from sfp.params import ModelKind, derived_exponents, validate_params
from sfp.randomness import experiment_uniforms, pareto_from_uniform

P = validate_params(1, 1.5, 1.0, 2.5)


def _second_moment_closed(r, lam=1.0, alpha=1.5):
    """Exact antiderivative for tau = 2.5 (test-side oracle).

    m(r) = zs^-1.5 (6 log zs - 8) + 9 zs^-2 with zs = r^alpha / lambda.
    """
    zs = r ** alpha / lam
    return zs ** -1.5 * (6.0 * math.log(zs) - 8.0) + 9.0 * zs ** -2


class TestEdgeProbability:
    def test_unit_case(self):
        assert math.isclose(edge_probability(P, 1.0, 1.0, 1.0),
                            1.0 - math.exp(-1.0), rel_tol=1e-15)

    def test_hand_value(self):
        p = validate_params(1, 1.5, 0.5, 2.5)
        want = -math.expm1(-0.5 * 6.0 / 2.0 ** 1.5)
        assert math.isclose(edge_probability(p, 2.0, 3.0, 2.0), want, rel_tol=1e-15)

    def test_decreasing_to_zero_in_distance(self):
        vals = [edge_probability(P, 2.0, 3.0, r) for r in (1, 10, 100, 1e4, 1e8)]
        assert all(a > b for a, b in zip(vals[:-1], vals[1:]))
        assert vals[-1] < 1e-10

    def test_lrp_ignores_weights(self):
        from dataclasses import replace
        p = replace(P, kind=ModelKind.LRP)
        assert edge_probability(p, 50.0, 70.0, 3.0) == edge_probability(p, 1.0, 1.0, 3.0)

    def test_rejects_nonpositive_distance(self):
        with pytest.raises(NonPositiveDistance):
            edge_probability(P, 1.0, 1.0, 0.0)


class TestSecondMoment:
    def test_saturated_region_is_one(self):
        p = validate_params(1, 1.5, 4.0, 2.5)
        assert single_edge_second_moment(p, 1.0) == 1.0  # lambda r^-alpha >= 1

    def test_bounded_by_one(self):
        for r in (1.0, 2.0, 7.3, 64.0, 1e4):
            assert 0.0 < single_edge_second_moment(P, r) <= 1.0

    def test_matches_closed_form(self):
        for k in range(1, 17):
            r = 2.0 ** k
            got = single_edge_second_moment(P, r)
            want = _second_moment_closed(r)
            assert math.isclose(got, want, rel_tol=1e-12), (r, got, want)

    def test_matches_monte_carlo(self):
        # Third, simulation-side route: 10^6 keyed weight pairs.
        r = 16.0
        n = 1_000_000
        reps = np.arange(n, dtype=np.uint64)
        w1 = pareto_from_uniform(experiment_uniforms(901, reps, np.uint64(0)), P.tau)
        w2 = pareto_from_uniform(experiment_uniforms(901, reps, np.uint64(1)), P.tau)
        x = np.minimum(w1 * w2 * r ** -P.alpha, 1.0) ** 2
        se = x.std() / math.sqrt(n)
        assert abs(x.mean() - single_edge_second_moment(P, r)) <= 4.0 * se

    def test_slope_tracks_closed_form_not_pure_power(self):
        # The moment carries a slowly varying log factor, so the dyadic
        # log-log slope over 2^4..2^14 sits near -2.04, above the pure
        # -2 alpha1 = -2.25; quadrature and antiderivative must agree.
        rs = [2.0 ** k for k in range(4, 15)]
        got = np.polyfit(np.log(rs), np.log([single_edge_second_moment(P, r) for r in rs]), 1)[0]
        want = np.polyfit(np.log(rs), np.log([_second_moment_closed(r) for r in rs]), 1)[0]
        assert abs(got - want) < 1e-9
        assert -2.25 < got < -1.95

    def test_shape_ratio_bounded(self):
        # m(r) r^(2 alpha1) / (1 + log r) stays within the closed-form
        # envelope [2.1, 9] on r in [2, 2^16].
        two_a1 = 2.0 * derived_exponents(P).alpha1
        g = [single_edge_second_moment(P, 2.0 ** k) * (2.0 ** k) ** two_a1
             / (1.0 + k * math.log(2.0)) for k in range(1, 17)]
        assert 2.1 < min(g) and max(g) < 9.0

    def test_rejects_r_below_one(self):
        with pytest.raises(NonPositiveDistance):
            single_edge_second_moment(P, 0.5)


class TestPathBound:
    def test_single_edge_vacuous(self):
        b = path_probability_bound(P, [(0,), (1,)], delta=0.05, c_delta=2.0)
        assert b.value == 2.0 and b.vacuous

    def test_hand_value(self):
        with pytest.warns(UserWarning):
            b = path_probability_bound(P, [(0,), (8,), (24,)], delta=0.125, c_delta=2.0)
        assert b.value == 0.03125
        assert not b.vacuous

    def test_multiplicative_over_concatenation(self):
        delta = default_delta(P)
        full = path_probability_bound(P, [(0,), (5,), (9,), (20,)], delta=delta)
        head = path_probability_bound(P, [(0,), (5,)], delta=delta)
        tail = path_probability_bound(P, [(5,), (9,), (20,)], delta=delta)
        assert math.isclose(full.value, head.value * tail.value, rel_tol=1e-12)

    def test_rejects_repeated_vertex(self):
        with pytest.raises(DegeneratePath):
            path_probability_bound(P, [(0,), (0,), (5,)], delta=0.05)

    def test_default_delta_and_fitted_constant(self):
        delta = default_delta(P)
        ex = derived_exponents(P)
        assert ex.alpha1 - delta > P.d and P.alpha - delta > P.d
        c = fit_c_delta(P, delta)
        assert c > 1.0


class TestAdjacentExpectation:
    def test_reference_point(self):
        res = adjacent_expectation_exact(P, 100.0 ** (2 / 3), 10.0 ** (2 / 3))
        assert math.isclose(res.middle_expectation, 0.013973665961010275, rel_tol=1e-12)
        assert math.isclose(res.lower, res.middle_expectation / 4.0, rel_tol=1e-15)
        assert math.isclose(res.upper, 9.0 * res.middle_expectation, rel_tol=1e-12)

    def test_exact_equals_quadrature_on_random_grid(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            tau = rng.uniform(2.05, 2.95)
            lam = rng.uniform(0.3, 2.5)
            p = validate_params(1, 1.5, lam, tau)
            b = rng.uniform(2.0 * lam, 50.0)
            a = b * rng.uniform(1.0, 100.0)
            r_yz = b ** (1 / p.alpha)
            r_xy = a ** (1 / p.alpha)
            exact = adjacent_expectation_exact(p, r_xy, r_yz).middle_expectation
            oracle = adjacent_expectation_quadrature(p, r_xy, r_yz)
            assert abs(exact - oracle) <= 1e-9 * abs(oracle)

    def test_first_term_dominates_at_large_separation(self):
        # With the far/near ratio rho fixed, the middle term loses the
        # lam^2/(AB) correction as the near distance grows and converges
        # to leading * (1 - (3-tau)/(tau-1) rho^(2-tau)): the first term
        # dominates, the others stay a bounded fraction below it.
        tau, lam, rho = 2.5, 1.0, 100.0
        p = validate_params(1, 1.5, lam, tau)
        lead = lambda a, b: (tau - 1) / ((3 - tau) * (tau - 2)) * lam ** (tau - 1) \
            * b ** (2 - tau) / a
        limit = 1.0 - (3 - tau) / (tau - 1) * rho ** (2 - tau)
        ratios = []
        for b in (1e2, 1e4, 1e6):
            a = rho * b
            mid = adjacent_expectation_exact(p, a ** (2 / 3), b ** (2 / 3)).middle_expectation
            ratios.append(mid / lead(a, b))
        assert abs(ratios[-1] - limit) < 1e-3
        assert all(abs(r2 - limit) < abs(r1 - limit)
                   for r1, r2 in zip(ratios[:-1], ratios[1:]))
        assert 0.5 < min(ratios) <= max(ratios) < 1.0

    def test_comparable_distances_scale(self):
        # A = B: middle * A^(tau-1) pinched between positive constants.
        vals = []
        for a in (1e2, 1e3, 1e4, 1e5):
            mid = adjacent_expectation_exact(P, a ** (2 / 3), a ** (2 / 3)).middle_expectation
            vals.append(mid * a ** 1.5)
        assert all(1.0 < v < 4.1 for v in vals)

    def test_quadrature_saturated_case(self):
        # lambda above both thresholds: both factors clip at 1 on the
        # whole support, expectation of the product is 1.
        p = validate_params(1, 1.5, 10.0, 2.5)
        assert adjacent_expectation_quadrature(p, 1.2, 1.1) == 1.0

    def test_quadrature_monotone_in_distances(self):
        q = adjacent_expectation_quadrature
        assert q(P, 30.0, 5.0) < q(P, 20.0, 5.0)
        assert q(P, 20.0, 6.0) < q(P, 20.0, 5.0)

    def test_exact_requires_tau_in_2_3(self):
        with pytest.raises(TauOutOfRange):
            adjacent_expectation_exact(validate_params(1, 1.5, 1.0, 3.5), 10.0, 5.0)
        with pytest.raises(TauOutOfRange):
            adjacent_expectation_quadrature(validate_params(1, 1.5, 1.0, 1.8), 10.0, 5.0)

    def test_exact_requires_threshold_above_floor(self):
        p = validate_params(1, 1.5, 8.0, 2.5)
        with pytest.raises(ThresholdBelowFloor):
            adjacent_expectation_exact(p, 10.0, 1.1)  # 1.1^1.5 < 8

    def test_exact_requires_ordered_distances(self):
        with pytest.raises(ValueError):
            adjacent_expectation_exact(P, 5.0, 10.0)


class TestConvolution:
    def test_brute_force_oracle(self):
        res = convolution_ratio(P, (0,), (2,), 50.0)
        brute = 0.0
        for w in range(-50, 53):
            if w in (0, 2):
                continue
            du, dv = abs(w), abs(w - 2)
            if du <= 50 or dv <= 50:
                brute += du ** -1.5 * dv ** -1.5
        assert math.isclose(res.s, brute, rel_tol=1e-12)
        assert math.isclose(res.ratio, brute * 2.0 ** 1.5, rel_tol=1e-12)

    def test_symmetric_in_endpoints(self):
        a = convolution_ratio(P, (0,), (7,), 100.0)
        b = convolution_ratio(P, (7,), (0,), 100.0)
        assert a.s == b.s

    def test_ratio_bounded_over_separations(self):
        ratios = [convolution_ratio(P, (0,), (s,), 1e4).ratio
                  for s in (2, 4, 8, 16, 32, 64, 128, 256)]
        assert max(ratios) <= 2.0 * float(np.median(ratios))

    def test_two_dimensional_case(self):
        p2 = validate_params(2, 2.5, 1.0, 2.5)
        res = convolution_ratio(p2, (0, 0), (3, 4), 200.0)
        assert res.s > 0 and res.tail_bound < 1e-4

    def test_radius_too_small(self):
        with pytest.raises(RadiusTooSmall):
            convolution_ratio(P, (0,), (10,), 39.0)

    def test_requires_alpha_above_d(self):
        with pytest.raises(ValueError):
            convolution_ratio(validate_params(1, 0.8, 1.0, 3.0), (0,), (2,), 100.0)


class TestBridgingExponent:
    def test_reference_value(self):
        assert bridging_exponent(P, 0.5) == 2.0 * 1.125 - 0.5

    def test_beta_to_one_limit(self):
        ex = derived_exponents(P)
        assert math.isclose(bridging_exponent(P, 1.0 - 1e-12),
                            2.0 * ex.alpha1 - 1.0, rel_tol=1e-9)

    def test_beta_range_enforced(self):
        with pytest.raises(BetaOutOfRange):
            bridging_exponent(P, 0.0)
        with pytest.raises(BetaOutOfRange):
            bridging_exponent(P, 1.0)

    def test_region_a_limit_equals_alpha2(self):
        # Where alpha (tau - 2) < d, the beta -> 1 exponent collapses to
        # alpha2 = alpha (tau - 1) - d and in particular undercuts alpha.
        rng = np.random.default_rng(23)
        for _ in range(300):
            d = int(rng.integers(1, 4))
            alpha = d * rng.uniform(1.0 + 1e-6, 2.0 - 1e-6)
            lo = 1.0 + 2.0 * d / alpha          # gamma > 2
            hi = min(3.0, 2.0 + d / alpha)      # alpha (tau - 2) < d
            if lo >= hi:
                continue
            tau = rng.uniform(lo * (1 + 1e-9), hi)
            p = validate_params(d, alpha, 1.0, tau)
            ex = derived_exponents(p)
            e = bridging_exponent(p, 1.0 - 1e-13)
            assert e < alpha
            assert math.isclose(e, ex.alpha2, rel_tol=1e-9)


def test_elementary_exponential_sandwich():
    # (1/2)(t ^ 1) <= 1 - e^-t <= t ^ 1 for all t > 0: guards every
    # substitution of the linearized bound for the true probability.
    rng = np.random.default_rng(5)
    t = np.concatenate([rng.uniform(0, 1, 5000) ** 3,
                        rng.uniform(0, 50, 5000)])
    t = t[t > 0]
    p = -np.expm1(-t)
    cap = np.minimum(t, 1.0)
    assert np.all(0.5 * cap <= p) and np.all(p <= cap)
