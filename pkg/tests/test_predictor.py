import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robustplan.config import parse_config
from robustplan.core import ContinuousAmbiguitySet
from robustplan.highway.env import make_ambiguity
from robustplan.highway.scenario import build_scenario
from robustplan.interval import Interval, IntervalDomainError
from robustplan.predictor import (HullTrace, IntervalPredictor, ParamIntervals, PredictionDomainError, TrafficRules,
                                  VehicleIntervalState, control_intervals, feature_intervals, predict_hulls,
                                  propagate_step, rollout_states, sample_hull_estimate, sample_parameters)

from oracles import cascade_heading_rate, idm_like_accel
from scenarios import degenerate_ambiguity, random_ambiguity, random_plan

RULES = TrafficRules()


def point_features(x, y, v, psi, front, y_lane, psi_lane, rules=RULES):
    ones = (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)
    phi_a = [idm_like_accel(t, rules.v0, rules.d0, rules.time_gap, v, x, front) for t in ones]
    phi_b = [psi_lane - psi, (y_lane - y) / max(v, rules.v_min_ctrl)]
    return phi_a, phi_b


def box(rng, centre, half):
    lo = centre - half * rng.random()
    hi = centre + half * rng.random()
    return Interval(lo, hi)


class TestFeatures:
    @given(st.floats(-50, 50), st.floats(-2, 10), st.floats(1, 30), st.floats(-0.5, 0.5),
           st.floats(0, 80), st.floats(1, 30))
    def test_degenerate_matches_point_formulas(self, x, y, v, psi, gap, vf):
        joint = [VehicleIntervalState.point(x, y, v, psi), VehicleIntervalState.point(x + gap, 4.0, vf, 0.0)]
        phi_a, phi_b = feature_intervals(joint, 0, (4.0, 0.0), RULES, front=1)
        ref_a, ref_b = point_features(x, y, v, psi, (x + gap, vf), 4.0, 0.0)
        for got, ref in zip(phi_a + phi_b, ref_a + ref_b):
            assert got.width == 0.0
            assert got.lo == pytest.approx(ref, abs=1e-12)

    def test_free_road(self):
        s = VehicleIntervalState(Interval(0, 0), Interval(0, 0), Interval(18, 22), Interval(0, 0))
        phi_a, _ = feature_intervals([s], 0, (0.0, 0.0), RULES)
        assert phi_a[0] == Interval(3, 7)
        assert phi_a[1] == Interval(0, 0) and phi_a[2] == Interval(0, 0)

    def test_nonpositive_speed(self):
        s = VehicleIntervalState(Interval(0, 0), Interval(0, 0), Interval(0, 2), Interval(0, 0))
        with pytest.raises(IntervalDomainError):
            feature_intervals([s], 0, (0.0, 0.0), RULES)

    @pytest.mark.parametrize("seed", range(10))
    def test_mixed_sign_spacing_contains_samples(self, seed):
        rng = np.random.default_rng(seed)
        me = VehicleIntervalState(box(rng, 0.0, 5.0), box(rng, 0.0, 1.0), box(rng, 20.0, 4.0), box(rng, 0.0, 0.1))
        # spacing straddles the desired gap, so the braking term changes sign inside the box
        fr = VehicleIntervalState(box(rng, 40.0, 15.0), Interval(0, 0), box(rng, 18.0, 4.0), Interval(0, 0))
        phi_a, phi_b = feature_intervals([me, fr], 0, (0.0, 0.0), RULES, front=1)
        for _ in range(1000):
            pt = [rng.uniform(i.lo, i.hi) for i in me]
            f = (rng.uniform(fr.x.lo, fr.x.hi), rng.uniform(fr.v.lo, fr.v.hi))
            ref_a, ref_b = point_features(*pt, f, 0.0, 0.0)
            for got, ref in zip(phi_a + phi_b, ref_a + ref_b):
                assert got.contains(ref, 1e-12)


class TestControls:
    def test_degenerate(self):
        params = ParamIntervals.from_bounds([0.5, 1, 0.5, 2.0, 0.2], [0.5, 1, 0.5, 2.0, 0.2])
        phi_a = [Interval.point(3.0), Interval.point(-1.0), Interval.point(-2.0)]
        phi_b = [Interval.point(0.01), Interval.point(0.02)]
        a, rate = control_intervals(phi_a, phi_b, params, lateral="linear")
        assert a == Interval.point(0.5 * 3 - 1 - 1)
        assert rate.lo == pytest.approx(2.0 * 0.01 + 0.4 * 0.02) and rate.width == 0

    def test_single_positive_term(self):
        params = ParamIntervals.from_bounds([0.4, 1, 1, 1, 1], [0.6, 1, 1, 1, 1])
        a, _ = control_intervals([Interval(3, 7), Interval(0, 0), Interval(0, 0)],
                                 [Interval(0, 0), Interval(0, 0)], params)
        assert a.lo == pytest.approx(1.2) and a.hi == pytest.approx(4.2)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_boxes_contain_samples(self, seed):
        rng = np.random.default_rng(seed)
        lo = rng.uniform(0.1, 1.0, 5)
        hi = lo * rng.uniform(1.0, 1.5, 5)
        params = ParamIntervals.from_bounds(lo, hi)
        phi_a = [box(rng, c, 3.0) for c in rng.uniform(-5, 5, 3)]
        phi_b = [box(rng, 0.0, 0.2), box(rng, 0.0, 0.1)]
        a, lin = control_intervals(phi_a, phi_b, params, lateral="linear")
        _, exact = control_intervals(phi_a, phi_b, params)
        n = 10_000
        th = rng.uniform(lo, hi, size=(n, 5))
        fa = np.stack([rng.uniform(p.lo, p.hi, n) for p in phi_a], axis=1)
        fb = np.stack([rng.uniform(p.lo, p.hi, n) for p in phi_b], axis=1)
        acc = np.sum(th[:, :3] * fa, axis=1)
        lin_rate = th[:, 3] * fb[:, 0] + th[:, 3] * th[:, 4] * fb[:, 1]
        cascade = th[:, 3] * (fb[:, 0] + np.arcsin(np.clip(th[:, 4] * fb[:, 1], -1, 1)))
        assert np.all((a.lo - 1e-12 <= acc) & (acc <= a.hi + 1e-12))
        assert np.all((lin.lo - 1e-12 <= lin_rate) & (lin_rate <= lin.hi + 1e-12))
        assert np.all((exact.lo - 1e-12 <= cascade) & (cascade <= exact.hi + 1e-12))

    def test_exact_lateral_matches_cascade_at_points(self):
        y, psi, v = 3.1, 0.02, 18.0
        kp_psi, kp_y, l = 2.0, 0.2, 2.5
        params = ParamIntervals.from_bounds([1, 1, 1, kp_psi, kp_y], [1, 1, 1, kp_psi, kp_y])
        s = VehicleIntervalState.point(0.0, y, v, psi)
        _, phi_b = feature_intervals([s], 0, (4.0, 0.0), RULES)
        _, rate = control_intervals([Interval.point(0.0)] * 3, phi_b, params)
        assert rate.lo == pytest.approx(cascade_heading_rate(y, psi, v, 4.0, 0.0, kp_psi, kp_y, l), rel=1e-12)


class TestPropagateStep:
    def test_straight_coasting(self):
        s = VehicleIntervalState.point(0.0, 0.0, 20.0, 0.0)
        out = propagate_step(s, Interval(0, 0), Interval(0, 0), 0.1)
        assert out.x == Interval.point(2.0)
        assert all(c.width == 0 for c in out)

    def test_speed_width_growth(self):
        s = VehicleIntervalState.point(0.0, 0.0, 20.0, 0.0)
        out = propagate_step(s, Interval(-1, 1), Interval(0, 0), 0.1)
        assert out.v.width == pytest.approx(0.2)

    def test_domain_error(self):
        s = VehicleIntervalState.point(0.0, 0.0, 0.3, 0.0)
        with pytest.raises(IntervalDomainError):
            propagate_step(s, Interval(-5, -4), Interval(0, 0), 0.1)

    @pytest.mark.parametrize("seed", range(10))
    def test_contains_point_successors(self, seed):
        rng = np.random.default_rng(seed)
        s = VehicleIntervalState(box(rng, 0, 2), box(rng, 4, 1), box(rng, 20, 3), box(rng, 0, 2.0))
        a, rate = box(rng, 0, 2), box(rng, 0, 0.3)
        out = propagate_step(s, a, rate, 0.1)
        for _ in range(1000):
            x, y, v, psi = (rng.uniform(c.lo, c.hi) for c in s)
            aa, rr = rng.uniform(a.lo, a.hi), rng.uniform(rate.lo, rate.hi)
            nxt = (x + 0.1 * v * math.cos(psi), y + 0.1 * v * math.sin(psi), v + 0.1 * aa, psi + 0.1 * rr)
            assert all(c.contains(p, 1e-12) for c, p in zip(out, nxt))


class TestPredictHulls:
    @pytest.mark.parametrize("seed", range(5))
    def test_zero_width_box_is_nominal_rollout(self, seed):
        _, amb = degenerate_ambiguity(seed)
        plan = random_plan(seed, 6)
        hull = predict_hulls(amb, plan)
        states = np.array([w.state for w in rollout_states(amb, amb.lower, plan)])
        assert np.allclose(hull.lo, states, atol=1e-9, rtol=0)
        assert np.allclose(hull.hi, states, atol=1e-9, rtol=0)
        est = sample_hull_estimate(amb, plan, n_samples=4, seed=seed)
        assert np.allclose(est.lo, states, atol=1e-9, rtol=0)

    @pytest.mark.parametrize("seed", range(5))
    def test_x_widths_non_decreasing_under_constant_controls(self, seed):
        _, amb = random_ambiguity(seed)
        hull = predict_hulls(amb, [0] * 5)
        widths = hull.hi[:, 1:, 0] - hull.lo[:, 1:, 0]
        assert np.all(np.diff(widths, axis=0) >= -1e-9)

    @pytest.mark.parametrize("seed", range(12))
    def test_inclusion_of_sampled_trajectories(self, seed):
        _, amb = random_ambiguity(seed)
        plan = random_plan(seed, 5)
        hull = predict_hulls(amb, plan)
        est = sample_hull_estimate(amb, plan, n_samples=60, seed=seed)
        assert hull.contains(est, 1e-9)
        assert np.all(hull.crash_possible | ~est.crash_possible)

    @pytest.mark.parametrize("seed", range(6))
    def test_monotone_propagation_refines_natural(self, seed):
        _, amb = random_ambiguity(seed)
        plan = random_plan(seed, 2)
        tight = predict_hulls(amb, plan)
        loose = predict_hulls(amb, plan, propagation="natural")
        assert loose.contains(tight, 1e-9)

    def test_fidelity_products_are_looser(self):
        _, amb = random_ambiguity(2)
        plan = random_plan(2, 3)
        assert predict_hulls(amb, plan, mode="fidelity").contains(predict_hulls(amb, plan), 1e-9)

    def test_deterministic(self):
        _, amb = random_ambiguity(4)
        a = predict_hulls(amb, [1, 2, 3])
        b = predict_hulls(amb, [1, 2, 3])
        assert np.array_equal(a.lo, b.lo) and np.array_equal(a.hi, b.hi)

    def test_initial_boxes_are_zero_width(self):
        _, amb = random_ambiguity(1)
        hull = predict_hulls(amb, [0, 0])
        assert np.array_equal(hull.lo[0], amb.context.world.state)
        assert np.array_equal(hull.hi[0], hull.lo[0])
        # the ego follows its plan exactly
        assert np.array_equal(hull.lo[:, 0], hull.hi[:, 0])

    def test_plan_too_short(self):
        _, amb = random_ambiguity(1)
        with pytest.raises(ValueError):
            predict_hulls(amb, [0, 0], H=3)

    def test_domain_error_reports_vehicle_and_time(self):
        # a slow vehicle stuck right behind a slower one, with a very uncertain braking gain
        data = {"ego": {"x": -100.0, "lane": 0},
                "vehicles": [{"x": 0.0, "lane": 1, "speed": 12.0, "route_options": [1]},
                             {"x": 16.0, "lane": 1, "speed": 5.0, "route_options": [1]}],
                "ambiguity": {"mode": "continuous", "theta_a_scale": [0.2, 1.8]}}
        scenario = build_scenario(parse_config(data), 0, "continuous")
        amb = make_ambiguity(scenario, "continuous")
        with pytest.raises(PredictionDomainError) as info:
            predict_hulls(amb, [0] * 10)
        assert info.value.vehicle in (1, 2)
        assert 0 < info.value.t <= 10

    def test_rejects_foreign_ambiguity(self):
        with pytest.raises(TypeError):
            IntervalPredictor(ContinuousAmbiguitySet([0.0], [1.0], lambda th: None))

    def test_csv_round_trip(self):
        _, amb = random_ambiguity(3)
        hull = predict_hulls(amb, [0, 3, 4])
        text = hull.to_csv()
        assert text.splitlines()[0] == "t,vehicle,x_lo,x_hi,y_lo,y_hi,v_lo,v_hi,psi_lo,psi_hi"
        back = HullTrace.from_csv(text)
        assert np.array_equal(back.lo, hull.lo) and np.array_equal(back.hi, hull.hi)


class TestSampling:
    def one_dimensional(self):
        data = {"ego": {"x": 0.0, "lane": 0, "speed": 25.0},
                "vehicles": [{"x": 30.0, "lane": 2, "speed": 18.0, "route_options": [2]}],
                "ambiguity": {"mode": "continuous"}}
        scenario = build_scenario(parse_config(data), 0, "continuous")
        amb = make_ambiguity(scenario, "continuous")
        lo = np.array(scenario.behaviors[1].theta())
        hi = lo.copy()
        lo[0], hi[0] = 0.3, 0.7
        return ContinuousAmbiguitySet(lo, hi, amb.model_family, amb.context)

    def test_corners_over_free_coordinates(self):
        amb = self.one_dimensional()
        thetas = sample_parameters(amb, 2, 0)
        assert sorted(thetas[:, 0]) == [0.3, 0.7]
        assert np.all(thetas[:, 1:] == amb.lower[1:])

    def test_two_corners_give_exact_hull_on_monotone_dynamics(self):
        amb = self.one_dimensional()
        plan = [0] * 6
        corners = sample_hull_estimate(amb, plan, n_samples=2)
        dense = sample_hull_estimate(amb, plan, n_samples=400, seed=1)
        # the speed and position of a free vehicle are monotone in its free-road gain
        assert corners.contains(dense, 1e-9)
        assert dense.contains(corners, 1e-9)
        assert predict_hulls(amb, plan).contains(corners, 1e-9)

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            sample_parameters(self.one_dimensional(), 1, 0)

    def test_seeded(self):
        _, amb = random_ambiguity(0)
        a = sample_hull_estimate(amb, [0, 1], n_samples=20, seed=3)
        b = sample_hull_estimate(amb, [0, 1], n_samples=20, seed=3)
        assert np.array_equal(a.lo, b.lo) and np.array_equal(a.hi, b.hi)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_hull_contains_estimate_property(seed):
    _, amb = random_ambiguity(seed)
    plan = random_plan(seed, 3)
    try:
        hull = predict_hulls(amb, plan)
    except PredictionDomainError:
        return
    assert hull.contains(sample_hull_estimate(amb, plan, n_samples=30, seed=seed), 1e-9)
