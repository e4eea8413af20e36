"""Seeded episodes of oracle, nominal and robust agents on the highway.

Agent labels are ``oracle``, ``nominal``, ``drop`` and ``irc``.  The first
two plan on a single model and accept a ``:discrete`` or ``:continuous``
suffix selecting which kind of ambiguity the episode is drawn from; ``drop``
always faces discrete (route) ambiguity and ``irc`` continuous (gain)
ambiguity.

Every episode draws its true scenario from the seed, replans at each
decision epoch and stops at the first collision or after ``max_epochs``.
"""
from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import drop
from .config import Config
from .core import BudgetError, ParameterError, make_rng
from .highway.env import N_ACTIONS, HighwayAmbiguity, HighwayModel, Scenario, World, make_ambiguity, reward
from .highway.scenario import AGENT_STREAM, build_scenario
from .irc import SurrogateConfig, irc_plan
from .predictor import predict_hulls

KINDS = ("oracle", "nominal", "drop", "irc")
MODES = ("discrete", "continuous")
CSV_HEADER = ["agent", "seed", "return", "collision", "steps"]
WORKERS_ENV = "ROBUSTPLAN_WORKERS"


class AgentError(ValueError):
    pass


@dataclass(frozen=True)
class AgentSpec:
    kind: str
    mode: str
    drop: drop.DropConfig = drop.DropConfig()
    irc: SurrogateConfig = SurrogateConfig()
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise AgentError(f"unknown agent kind {self.kind!r}")
        if self.mode not in MODES:
            raise AgentError(f"unknown ambiguity mode {self.mode!r}")
        if self.kind == "drop" and self.mode != "discrete":
            raise AgentError("drop plans over discrete ambiguity only")
        if self.kind == "irc" and self.mode != "continuous":
            raise AgentError("irc plans over continuous ambiguity only")
        if not self.label:
            object.__setattr__(self, "label", self.kind)

    @classmethod
    def parse(cls, label: str, cfg: Config) -> "AgentSpec":
        kind, _, mode = label.strip().partition(":")
        if not mode:
            mode = {"drop": "discrete", "irc": "continuous"}.get(kind, cfg.ambiguity.mode)
        try:
            dcfg = drop.DropConfig(gamma=cfg.drop.gamma, budget=cfg.drop.budget)
            icfg = SurrogateConfig(horizon=cfg.irc.horizon, gamma=cfg.irc.gamma, search=cfg.irc.search,
                                   population=cfg.irc.population, elite=cfg.irc.elite,
                                   iterations=cfg.irc.iterations)
        except (ParameterError, BudgetError) as err:
            raise AgentError(str(err)) from None
        return cls(kind, mode, dcfg, icfg, label.strip())


@dataclass(frozen=True)
class EpisodeResult:
    agent: str
    seed: int
    ret: float
    discounted: float
    collision: bool
    steps: int
    failed: bool = False
    error: str = ""

    def row(self) -> list[str]:
        return [self.agent, str(self.seed), repr(float(self.ret)), str(int(self.collision)), str(self.steps)]


def _state_reward(world: World, action: int) -> float:
    return reward(world)


_state_reward.state_only = True


def _single_model_policy(model: HighwayModel, cfg: drop.DropConfig) -> Callable[[World], int]:
    amb = HighwayAmbiguity((model,))

    def act(world: World) -> int:
        return drop.plan(world, amb, _state_reward, cfg, N_ACTIONS)[0]

    return act


def nominal_model(scenario: Scenario, seed: int) -> HighwayModel:
    """One model drawn uniformly from the scenario's ambiguity set (agent stream of ``seed``)."""
    rng = make_rng(seed, AGENT_STREAM)
    if scenario.mode == "discrete":
        routes = [opts[int(rng.integers(len(opts)))] for opts in scenario.route_options]
        routes[0] = scenario.behaviors[0].route
        return scenario.model_with(scenario.behaviors_for_routes(routes))
    lo, hi = scenario.theta_lower, scenario.theta_upper
    theta = lo + (hi - lo) * rng.random(lo.shape)
    return scenario.model_with(scenario.behaviors_for_theta(theta))


def make_policy(spec: AgentSpec, scenario: Scenario, seed: int) -> Callable[[World], int]:
    if spec.kind == "oracle":
        return _single_model_policy(scenario.true_model(), spec.drop)
    if spec.kind == "nominal":
        return _single_model_policy(nominal_model(scenario, seed), spec.drop)
    if spec.kind == "drop":
        amb = make_ambiguity(scenario, "discrete")

        def act(world: World) -> int:
            return drop.plan(world, amb, _state_reward, spec.drop, N_ACTIONS)[0]

        return act

    def act_irc(world: World) -> int:
        return irc_plan(make_ambiguity(scenario, "continuous", world), spec.irc).plan[0]

    return act_irc


def run_episode(spec: AgentSpec, cfg: Config, seed: int, record: Optional[list] = None) -> EpisodeResult:
    """Play one episode; planner exceptions end it as a failed episode."""
    scenario = build_scenario(cfg, seed, spec.mode)
    env = scenario.true_model()
    policy = make_policy(spec, scenario, seed)
    world = scenario.world
    gamma = spec.drop.gamma
    total = discounted = 0.0
    steps = 0
    if record is not None:
        record.append((world, None))
    try:
        for t in range(cfg.bench.max_epochs):
            action = int(policy(world))
            world, r, done = env.step(world, action)
            total += r
            discounted += gamma**t * r
            steps += 1
            if record is not None:
                record.append((world, action))
            if done:
                break
    except Exception as err:  # noqa: BLE001 - reported in the result row
        return EpisodeResult(spec.label, seed, total, discounted, world.crashed, steps, True,
                             f"{type(err).__name__}: {err}")
    return EpisodeResult(spec.label, seed, total, discounted, world.crashed, steps)


@dataclass
class Decision:
    """What an agent would do from the initial world of an episode."""

    agent: str
    seed: int
    action: int
    value: float
    plan: tuple[int, ...] = ()
    depth: int = 0


def first_decision(spec: AgentSpec, cfg: Config, seed: int) -> Decision:
    """Plan once from the initial world of ``seed``.

    ``value`` is the root u-value for tree-search agents and the certified
    surrogate value for ``irc``, whose whole open-loop plan is returned too.
    """
    scenario = build_scenario(cfg, seed, spec.mode)
    world = scenario.world
    if spec.kind == "irc":
        res = irc_plan(make_ambiguity(scenario, "continuous", world), spec.irc)
        return Decision(spec.label, seed, res.plan[0], res.value, res.plan, len(res.plan))
    if spec.kind == "drop":
        amb = make_ambiguity(scenario, "discrete")
    else:
        model = scenario.true_model() if spec.kind == "oracle" else nominal_model(scenario, seed)
        amb = HighwayAmbiguity((model,))
    action, diag = drop.plan(world, amb, _state_reward, spec.drop, N_ACTIONS)
    return Decision(spec.label, seed, action, diag.action_values[action], (action,), diag.depth)


def episode_hulls(cfg: Config, seed: int, actions: Sequence[int], horizon: int):
    """Interval hulls of the continuous scenario of ``seed`` under the given ego actions."""
    scenario = build_scenario(cfg, seed, "continuous")
    amb = make_ambiguity(scenario, "continuous")
    return predict_hulls(amb, list(actions)[:horizon], record_inner=True)


@dataclass
class AgentSummary:
    agent: str
    worst: float
    mean: float
    std: float
    collisions: int
    episodes: int


def summarize(results: Sequence[EpisodeResult]) -> list[AgentSummary]:
    """Worst, mean and population std of the return per agent, in first-seen order."""
    order: list[str] = []
    groups: dict[str, list[EpisodeResult]] = {}
    for r in results:
        if r.agent not in groups:
            order.append(r.agent)
            groups[r.agent] = []
        groups[r.agent].append(r)
    out = []
    for agent in order:
        rs = groups[agent]
        returns = np.array([r.ret for r in rs])
        out.append(AgentSummary(agent, float(returns.min()), float(returns.mean()), float(returns.std()),
                                sum(r.collision for r in rs), len(rs)))
    return out


def results_csv(results: Sequence[EpisodeResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow(r.row())
    return buf.getvalue()


def read_results_csv(text: str) -> list[EpisodeResult]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CSV_HEADER:
        raise ValueError("unexpected results header")
    # the discounted return is not part of the schema
    return [EpisodeResult(a, int(s), float(r), discounted=float("nan"), collision=bool(int(c)), steps=int(n))
            for a, s, r, c, n in rows[1:]]


def summary_csv(summaries: Sequence[AgentSummary]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["agent", "worst", "mean", "std", "collisions", "episodes"])
    for s in summaries:
        w.writerow([s.agent, repr(s.worst), repr(s.mean), repr(s.std), s.collisions, s.episodes])
    return buf.getvalue()


def _job(args):
    spec, cfg, seed = args
    return run_episode(spec, cfg, seed)


def worker_count(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return default
    try:
        n = int(raw)
    except ValueError:
        raise AgentError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def benchmark(cfg: Config, agents: Optional[Sequence[str]] = None, episodes: Optional[int] = None,
              workers: Optional[int] = None) -> list[EpisodeResult]:
    """All (agent, seed) episodes, ordered by agent then seed whatever the worker count."""
    labels = list(agents) if agents is not None else list(cfg.bench.agents)
    if not labels:
        raise AgentError("at least one agent is required")
    n = cfg.bench.episodes if episodes is None else episodes
    if n < 1:
        raise AgentError("at least one episode is required")
    specs = [AgentSpec.parse(a, cfg) for a in labels]
    seeds = range(cfg.bench.first_seed, cfg.bench.first_seed + n)
    jobs = [(s, cfg, seed) for s in specs for seed in seeds]
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_job, jobs, chunksize=4))
    else:
        results = [_job(j) for j in jobs]
    rank = {s.label: i for i, s in enumerate(specs)}
    return sorted(results, key=lambda r: (rank[r.agent], r.seed))
