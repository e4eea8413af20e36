import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robustplan.core import (BudgetError, ContinuousAmbiguitySet, DiscreteAmbiguitySet, ParameterError,
                             PlanSpec, SimulationDivergence, discounted_return, make_rng,
                             nominal_value_bruteforce, robust_value_bruteforce, rollout)

from oracles import ScalarInstance, enumerate_robust

unit = st.floats(0.0, 1.0, allow_nan=False)
gammas = st.floats(0.0, 0.99, allow_nan=False)


def one(s, a):
    return 1.0


def identity(s, a):
    return s


class TestDiscountedReturn:
    def test_examples(self):
        assert discounted_return([1, 1, 1], 0.5) == pytest.approx(1.75)
        assert discounted_return([], 0.3) == 0.0
        assert discounted_return([0.2, 0.4], 0.9) == pytest.approx(0.56)

    @pytest.mark.parametrize("gamma", [-0.1, 1.0, 1.5])
    def test_rejects_bad_discount(self, gamma):
        with pytest.raises(ParameterError):
            discounted_return([1.0], gamma)

    @given(st.lists(unit, max_size=60), gammas)
    def test_bounded_by_geometric_tail(self, rewards, gamma):
        assert 0.0 <= discounted_return(rewards, gamma) <= 1.0 / (1.0 - gamma) + 1e-12


class TestRollout:
    def test_identity_dynamics(self):
        traj, ret = rollout(identity, PlanSpec.open_loop([0, 0, 0], gamma=0.5), 0.0, one)
        assert ret == pytest.approx(1.75)
        assert traj == [0.0] * 4

    def test_zero_horizon_rejected(self):
        with pytest.raises(ParameterError):
            PlanSpec(actions=(), gamma=0.5)

    def test_hand_unrolled(self):
        plan = PlanSpec.open_loop([0, 0], gamma=0.5)
        traj, ret = rollout(lambda s, a: s + 1, plan, 0, lambda s, a: min(s, 1))
        assert traj == [0, 1, 2]
        assert ret == pytest.approx(0.5)

    def test_divergence_carries_step(self):
        plan = PlanSpec.open_loop([0, 0, 0], gamma=0.5)
        model = lambda s, a: np.inf if s >= 1 else s + 1  # noqa: E731
        with pytest.raises(SimulationDivergence) as info:
            rollout(model, plan, 0.0, one)
        assert info.value.step == 2

    def test_feedback_policy(self):
        plan = PlanSpec(policy=lambda s: int(s > 1), horizon=3, gamma=0.9)
        traj, _ = rollout(lambda s, a: s + 1 + a, plan, 0, one)
        assert traj == [0, 1, 2, 4]


class TestBruteforce:
    def test_single_identity_model(self):
        value, seq = robust_value_bruteforce(DiscreteAmbiguitySet((identity,)), 0.0, one, 0.5, 2, 3)
        assert value == pytest.approx(1.5)
        assert seq == [0, 0]

    def test_guard(self):
        with pytest.raises(BudgetError):
            robust_value_bruteforce(DiscreteAmbiguitySet((identity,)), 0.0, one, 0.5, 21, 2)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_second_enumerator(self, seed):
        inst = ScalarInstance(seed)
        amb = DiscreteAmbiguitySet(inst.models())
        value, seq = robust_value_bruteforce(amb, inst.s0, inst.reward, 0.8, 2, 2)
        ref_value, ref_seq = enumerate_robust(inst.models(), inst.s0, inst.reward, 0.8, 2, 2)
        assert value == pytest.approx(ref_value, abs=1e-12)
        assert tuple(seq) == ref_seq

    @pytest.mark.parametrize("seed", range(10))
    def test_single_model_is_plain_search(self, seed):
        inst = ScalarInstance(seed, K=3, M=1)
        T = inst.model(0)
        v1, s1 = robust_value_bruteforce(DiscreteAmbiguitySet((T,)), inst.s0, inst.reward, 0.9, 4, 3)
        v2, s2 = nominal_value_bruteforce(T, inst.s0, inst.reward, 0.9, 4, 3)
        assert (v1, s1) == (v2, s2)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 3))
    def test_monotone_in_models(self, seed, extra):
        inst = ScalarInstance(seed, K=2, M=1 + extra)
        models = inst.models()
        small, _ = robust_value_bruteforce(DiscreteAmbiguitySet(models[:1]), inst.s0, inst.reward, 0.8, 3, 2)
        big, _ = robust_value_bruteforce(DiscreteAmbiguitySet(models), inst.s0, inst.reward, 0.8, 3, 2)
        assert big <= small + 1e-12


class TestAmbiguitySets:
    def test_empty_discrete_rejected(self):
        with pytest.raises(ParameterError):
            DiscreteAmbiguitySet(())

    def test_box_checks(self):
        fam = lambda th: identity  # noqa: E731
        with pytest.raises(ParameterError):
            ContinuousAmbiguitySet([1.0], [0.0], fam)
        with pytest.raises(ParameterError):
            ContinuousAmbiguitySet([0.0], [math.inf], fam)

    def test_corners_and_samples(self):
        amb = ContinuousAmbiguitySet([0.0, 1.0], [1.0, 3.0], lambda th: identity)
        corners = amb.corners()
        assert corners.shape == (4, 2)
        assert {tuple(c) for c in corners} == {(0, 1), (0, 3), (1, 1), (1, 3)}
        x = amb.sample(make_rng(0), 500)
        assert np.all((x >= amb.lower) & (x <= amb.upper))


def test_rng_streams_are_reproducible_and_distinct():
    a = make_rng(7, 1).random(5)
    assert np.array_equal(a, make_rng(7, 1).random(5))
    assert not np.array_equal(a, make_rng(7, 2).random(5))
    assert not np.array_equal(a, make_rng(8, 1).random(5))
