"""Shared MDP plumbing: discounted returns, rollouts, ambiguity sets and
brute-force robust-value oracles.

Dynamics are deterministic callables ``T(state, action) -> state`` and
rewards are callables ``r(state, action) -> float`` with values in [0, 1].
States are opaque to this module except for the finiteness check done by
:func:`rollout` on array-like states.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

State = Any
Transition = Callable[[State, int], State]
Reward = Callable[[State, int], float]

BRUTEFORCE_GUARD = 10**6


class ParameterError(ValueError):
    """Invalid argument to a planning routine (discount, horizon, budget...)."""


class BudgetError(RuntimeError):
    """Requested enumeration exceeds the computational guard."""


class SimulationDivergence(RuntimeError):
    """A rollout produced a non-finite state."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"non-finite state produced at step {step}")


def check_gamma(gamma: float) -> float:
    if not (0.0 <= gamma < 1.0):
        raise ParameterError(f"discount must lie in [0, 1), got {gamma}")
    return float(gamma)


def discounted_return(rewards: Sequence[float], gamma: float) -> float:
    """Sum of ``gamma**t * rewards[t]`` over a finite reward list."""
    check_gamma(gamma)
    total, weight = 0.0, 1.0
    for r in rewards:
        total += weight * r
        weight *= gamma
    return total


@dataclass(frozen=True)
class DiscreteAmbiguitySet:
    """A finite list of deterministic dynamics models."""

    models: tuple[Transition, ...]
    labels: tuple[Any, ...] = ()

    def __post_init__(self):
        if len(self.models) < 1:
            raise ParameterError("an ambiguity set needs at least one model")
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self) -> int:
        return len(self.models)


@dataclass(frozen=True)
class ContinuousAmbiguitySet:
    """A box ``[lower, upper]`` of parameters and a family ``theta -> T_theta``."""

    lower: np.ndarray
    upper: np.ndarray
    model_family: Callable[[np.ndarray], Transition]
    context: Any = field(default=None, compare=False)

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape:
            raise ParameterError("parameter bounds have different shapes")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ParameterError("parameter box must be compact")
        if np.any(lo > hi):
            raise ParameterError("lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return int(self.lower.size)

    def model(self, theta) -> Transition:
        return self.model_family(np.asarray(theta, dtype=float))

    def sample(self, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
        shape = self.lower.shape if n is None else (n,) + self.lower.shape
        return self.lower + (self.upper - self.lower) * rng.random(shape)

    def corners(self) -> np.ndarray:
        """All ``2**p`` vertices of the box, in binary order."""
        p = self.dim
        bits = np.array(list(itertools.product((0, 1), repeat=p)), dtype=bool).reshape(-1, p)
        return np.where(bits, self.upper.ravel(), self.lower.ravel())


@dataclass(frozen=True)
class PlanSpec:
    """An open-loop action sequence, or a feedback map evaluated for ``horizon`` steps."""

    actions: tuple[int, ...] | None = None
    policy: Callable[[State], int] | None = None
    horizon: int = 0
    gamma: float = 0.9

    def __post_init__(self):
        check_gamma(self.gamma)
        if self.actions is not None:
            object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))
            if self.horizon == 0:
                object.__setattr__(self, "horizon", len(self.actions))
            if len(self.actions) != self.horizon:
                raise ParameterError("open-loop plan length must equal its horizon")
        elif self.policy is None:
            raise ParameterError("a plan needs either actions or a policy")
        if self.horizon < 1:
            raise ParameterError("plan horizon must be at least 1")

    @classmethod
    def open_loop(cls, actions: Sequence[int], gamma: float = 0.9) -> "PlanSpec":
        return cls(actions=tuple(actions), gamma=gamma)

    def action(self, t: int, state: State) -> int:
        if self.actions is not None:
            return self.actions[t]
        return int(self.policy(state))


def _is_finite(state) -> bool:
    try:
        arr = np.asarray(state, dtype=float)
    except (TypeError, ValueError):
        # structured states are checked by their own ``finite`` hook if present
        check = getattr(state, "is_finite", None)
        return bool(check()) if check is not None else True
    return bool(np.all(np.isfinite(arr)))


def rollout(model: Transition, plan: PlanSpec, s0: State, reward: Reward):
    """Simulate ``plan`` from ``s0``.

    Returns the ``horizon + 1`` visited states and the discounted sum of the
    ``horizon`` rewards ``r(s_t, a_t)``.
    """
    if plan.horizon < 1:
        raise ParameterError("plan horizon must be at least 1")
    trajectory = [s0]
    rewards = []
    s = s0
    for t in range(plan.horizon):
        a = plan.action(t, s)
        rewards.append(reward(s, a))
        s = model(s, a)
        if not _is_finite(s):
            raise SimulationDivergence(t + 1)
        trajectory.append(s)
    return trajectory, discounted_return(rewards, plan.gamma)


def sequence_returns(amb: DiscreteAmbiguitySet, s0, reward: Reward, gamma: float,
                     sequence: Sequence[int]) -> list[float]:
    """Truncated discounted return of ``sequence`` under every model."""
    out = []
    for model in amb.models:
        s, total, w = s0, 0.0, 1.0
        for a in sequence:
            total += w * reward(s, a)
            s = model(s, a)
            w *= gamma
        out.append(total)
    return out


def robust_value_bruteforce(amb: DiscreteAmbiguitySet, s0, reward: Reward, gamma: float,
                            horizon: int, K: int, prefix: Sequence[int] = ()):
    """Max over all open-loop continuations of ``prefix`` of the worst-case
    truncated return.

    Sequences have total length ``max(horizon, len(prefix))``. Ties go to the
    lexicographically smallest sequence. Returns ``(value, best_sequence)``.
    """
    check_gamma(gamma)
    if K < 1 or horizon < 0:
        raise ParameterError("need K >= 1 and horizon >= 0")
    free = max(horizon - len(prefix), 0)
    if K**free > BRUTEFORCE_GUARD:
        raise BudgetError(f"{K}**{free} sequences exceed the enumeration guard")

    best_value, best_seq = -math.inf, None
    for tail in itertools.product(range(K), repeat=free):
        seq = tuple(prefix) + tail
        value = min(sequence_returns(amb, s0, reward, gamma, seq))
        if value > best_value:
            best_value, best_seq = value, seq
    return best_value, list(best_seq)


def nominal_value_bruteforce(model: Transition, s0, reward: Reward, gamma: float,
                             horizon: int, K: int):
    """Plain optimal open-loop search on a single model."""
    return robust_value_bruteforce(DiscreteAmbiguitySet((model,)), s0, reward, gamma, horizon, K)


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator for ``seed`` and an optional stream path.

    Distinct stream paths give independent generators, so no component ever
    shares RNG state with another.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, stream)])))
