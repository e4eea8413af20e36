"""Interval-based robust control.

A candidate plan is scored by a pessimistic surrogate: the discounted sum,
over the predicted epochs, of the smallest reward compatible with the
interval hulls.  Because every hull encloses all the states reachable for
some parameter in the box, the score is a lower bound of the plan's return
under any of these parameters.

Plans are open-loop action sequences.  They are searched either
exhaustively, sharing the propagation of common prefixes, or by a
cross-entropy method over per-step categorical distributions.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Sequence

import numpy as np

from .core import BudgetError, ContinuousAmbiguitySet, ParameterError, PlanSpec, check_gamma, make_rng
from .highway.env import N_ACTIONS
from .predictor import (HullTrace, IntervalPredictor, PredictionDomainError, predict_hulls,
                        rollout_states, truncated_return)

EXHAUSTIVE_GUARD = 10**4

LowerReward = Callable[[HullTrace, int, Optional[int]], float]


@dataclass(frozen=True)
class SurrogateConfig:
    horizon: int = 5
    gamma: float = 0.8
    search: Literal["exhaustive", "cross_entropy"] = "exhaustive"
    population: int = 64
    elite: int = 8
    iterations: int = 10
    n_actions: int = N_ACTIONS
    seed: int = 0
    smoothing: float = 0.7

    def __post_init__(self):
        check_gamma(self.gamma)
        if self.horizon < 1:
            raise ParameterError("horizon must be at least one epoch")
        if self.n_actions < 1:
            raise ParameterError("need at least one action")
        if self.search == "exhaustive":
            if self.n_actions**self.horizon > EXHAUSTIVE_GUARD:
                raise BudgetError(f"{self.n_actions}^{self.horizon} plans exceed {EXHAUSTIVE_GUARD}")
        elif self.search == "cross_entropy":
            if not 1 <= self.elite <= self.population:
                raise ParameterError("elite size must lie in [1, population]")
            if self.iterations < 1:
                raise ParameterError("need at least one iteration")
        else:
            raise ParameterError(f"unknown policy search {self.search!r}")


def default_lower_reward(trace: HullTrace, t: int, action: Optional[int] = None) -> float:
    """Speed reward of the (exactly known) ego, floored at 0 once a collision is possible."""
    return float(trace.rewards[t])


def _plan_actions(plan) -> tuple[int, ...]:
    if isinstance(plan, PlanSpec):
        if plan.actions is None:
            raise ParameterError("interval control evaluates open-loop plans only")
        return tuple(plan.actions)
    return tuple(int(a) for a in plan)


def surrogate_value(plan, amb: ContinuousAmbiguitySet, cfg: SurrogateConfig = SurrogateConfig(),
                    reward_lower: Optional[LowerReward] = None) -> float:
    """``sum_{t=0}^{H} gamma^t * min_{s in hull(t)} r(s)`` for one plan.

    ``reward_lower(trace, t, action)`` must return the minimum of the reward
    over the boxes of epoch ``t``; the action is ``None`` at the last epoch.
    """
    actions = _plan_actions(plan)
    if len(actions) != cfg.horizon:
        raise ParameterError(f"plan has {len(actions)} actions, horizon is {cfg.horizon}")
    trace = predict_hulls(amb, actions, cfg.horizon)
    lower = reward_lower or default_lower_reward
    total = 0.0
    for t in range(cfg.horizon + 1):
        a = actions[t] if t < cfg.horizon else None
        total += cfg.gamma**t * lower(trace, t, a)
    return total


def evaluate_plans(amb: ContinuousAmbiguitySet, plans, gamma: float,
                   predictor: Optional[IntervalPredictor] = None) -> np.ndarray:
    """Surrogate values of many plans at once; ``-inf`` where prediction fails."""
    plans = np.asarray(plans, dtype=np.int64)
    if plans.ndim != 2:
        raise ValueError("plans must be a (P, H) array")
    pred = predictor or IntervalPredictor(amb)
    batch = pred.initial(plans.shape[0])
    acc = pred.epoch_reward(batch)
    for t in range(plans.shape[1]):
        batch = pred.advance(batch, plans[:, t])
        acc = acc + gamma ** (t + 1) * pred.epoch_reward(batch)
    return np.where(batch.failed, -np.inf, acc)


def _exhaustive(pred: IntervalPredictor, K: int, H: int, gamma: float) -> np.ndarray:
    """Values of all ``K**H`` plans in lexicographic order, sharing common prefixes."""
    batch = pred.initial(1)
    acc = pred.epoch_reward(batch)
    for t in range(H):
        parents = np.repeat(np.arange(batch.size), K)
        actions = np.tile(np.arange(K), batch.size)
        batch = pred.advance(batch.take(parents), actions)
        acc = acc[parents] + gamma ** (t + 1) * pred.epoch_reward(batch)
    return np.where(batch.failed, -np.inf, acc)


def all_plans(K: int, H: int) -> np.ndarray:
    return np.array(np.unravel_index(np.arange(K**H), (K,) * H)).T


@dataclass
class IrcResult:
    plan: tuple[int, ...]
    value: float
    log: list[tuple[tuple[int, ...], float]] = field(default_factory=list)

    def log_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["plan", "value"])
        for plan, value in self.log:
            w.writerow(["-".join(map(str, plan)), repr(float(value))])
        return buf.getvalue()


def _best(plans: np.ndarray, values: np.ndarray) -> int:
    """Index of the highest value; ties go to the lexicographically smallest plan."""
    top = values.max()
    cands = np.flatnonzero(values == top)
    order = np.lexsort(plans[cands].T[::-1])
    return int(cands[order[0]])


def irc_plan(amb: ContinuousAmbiguitySet, cfg: SurrogateConfig = SurrogateConfig(),
             keep_log: bool = False) -> IrcResult:
    """Plan maximising the surrogate; its value lower-bounds the plan's return for every parameter."""
    pred = IntervalPredictor(amb)
    K, H = cfg.n_actions, cfg.horizon
    if cfg.search == "exhaustive":
        plans = all_plans(K, H)
        values = _exhaustive(pred, K, H, cfg.gamma)
    else:
        plans, values = _cross_entropy(amb, pred, cfg)
    if not np.isfinite(values).any():
        raise PredictionDomainError(-1, 0.0, "interval prediction failed for every candidate plan")
    i = _best(plans, values)
    log = [(tuple(int(a) for a in p), float(v)) for p, v in zip(plans, values)] if keep_log else []
    return IrcResult(tuple(int(a) for a in plans[i]), float(values[i]), log)


def _cross_entropy(amb, pred, cfg: SurrogateConfig):
    rng = make_rng(cfg.seed, 3)
    K, H = cfg.n_actions, cfg.horizon
    probs = np.full((H, K), 1.0 / K)
    seen_plans, seen_values = [], []
    for _ in range(cfg.iterations):
        u = rng.random((cfg.population, H, 1))
        plans = (u > np.cumsum(probs, axis=1)[None, :, :]).sum(axis=2)
        plans = np.minimum(plans, K - 1)
        values = evaluate_plans(amb, plans, cfg.gamma, pred)
        seen_plans.append(plans)
        seen_values.append(values)
        order = np.lexsort(tuple(plans.T[::-1]) + (-values,))
        elite = plans[order[:cfg.elite]]
        counts = np.stack([np.bincount(elite[:, t], minlength=K) for t in range(H)]) / len(elite)
        probs = cfg.smoothing * counts + (1 - cfg.smoothing) * probs
    return np.vstack(seen_plans), np.concatenate(seen_values)


def truncated_plan_return(amb: ContinuousAmbiguitySet, theta, plan, gamma: float) -> float:
    """``sum_{t=0}^{H} gamma^t r(s_t)`` of an open-loop plan under ``T_theta``."""
    return truncated_return(rollout_states(amb, theta, _plan_actions(plan)), gamma)
