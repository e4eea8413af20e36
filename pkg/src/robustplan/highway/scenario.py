"""Seeded construction of highway scenarios from a :class:`Config`.

Three independent random streams are derived from the episode seed:

* stream 0 perturbs initial positions and speeds,
* stream 1 draws the true routes and behaviour gains,
* stream 2 is left to agents that sample a model of their own.
"""
from __future__ import annotations

from dataclasses import replace
from typing import Optional

import numpy as np

from ..config import BehaviorConfig, BehaviorOverride, Config, road_branch_x
from ..core import make_rng
from .env import BehaviorParams, Road, Scenario, World

INIT_STREAM, TRUTH_STREAM, AGENT_STREAM = 0, 1, 2


def make_road(cfg: Config) -> Road:
    r = cfg.road
    return Road(
        n_lanes=r.n_lanes, lane_width=r.lane_width, v0=r.v0, d0=r.d0, time_gap=r.time_gap,
        v_min=r.v_min, v_max=r.v_max, speed_step=r.speed_step, vehicle_length=r.vehicle_length,
        vehicle_width=r.vehicle_width, dt=r.dt, n_inner=r.n_inner, ego_speed_gain=r.ego_speed_gain,
        v_min_ctrl=r.v_min_ctrl, settle_tolerance=r.settle_tolerance, ego_route=tuple(r.ego_route),
        branch_x=road_branch_x(r),
    )


def _behavior(base: BehaviorConfig, override: BehaviorOverride) -> BehaviorParams:
    merged = base.model_dump()
    merged.update({k: v for k, v in override.model_dump().items() if v is not None})
    return BehaviorParams(**merged)


def theta_box(cfg: Config, behaviors) -> tuple[np.ndarray, np.ndarray]:
    """Per-vehicle bounds of ``[ta0, ta1, ta2, kp_psi, kp_y]`` around the nominal gains."""
    sa = cfg.ambiguity.theta_a_scale
    sp = cfg.ambiguity.kp_psi_scale
    sy = cfg.ambiguity.kp_y_scale
    nominal = np.array([b.theta() for b in behaviors[1:]]).reshape(-1, 5)
    lo = nominal * np.array([sa[0]] * 3 + [sp[0], sy[0]])
    hi = nominal * np.array([sa[1]] * 3 + [sp[1], sy[1]])
    return lo, hi


def build_scenario(cfg: Config, seed: int, mode: Optional[str] = None) -> Scenario:
    """True scenario of one episode.

    In ``"discrete"`` mode vehicles start in their configured lanes and head
    for their drawn route past the branch point.  In ``"continuous"`` mode
    routes are known and already targeted at t = 0, and the true gains are
    drawn uniformly from the parameter box.
    """
    mode = mode or cfg.ambiguity.mode
    if mode not in ("discrete", "continuous"):
        raise ValueError(f"unknown ambiguity mode {mode!r}")
    road = make_road(cfg)
    init = make_rng(seed, INIT_STREAM)
    truth = make_rng(seed, TRUTH_STREAM)

    n = 1 + len(cfg.vehicles)
    state = np.zeros((n, 4))
    lanes = np.zeros(n, dtype=np.int64)
    state[0] = (cfg.ego.x, road.lane_y(cfg.ego.lane), cfg.ego.speed, 0.0)
    lanes[0] = cfg.ego.lane
    ego = _behavior(cfg.behavior, cfg.ego.behavior)
    behaviors = [ego]
    options: list[tuple] = [(None,)]
    for i, v in enumerate(cfg.vehicles, start=1):
        dx = init.uniform(-1.0, 1.0) * cfg.init.x_jitter
        dv = init.uniform(-1.0, 1.0) * cfg.init.speed_jitter
        state[i] = (v.x + dx, road.lane_y(v.lane), max(v.speed + dv, 0.0), 0.0)
        lanes[i] = v.lane
        route = v.route_options[int(truth.integers(len(v.route_options)))]
        behaviors.append(replace(_behavior(cfg.behavior, v.behavior), route=route))
        options.append(tuple(v.route_options))

    lo, hi = theta_box(cfg, behaviors)
    if mode == "continuous":
        theta = lo + (hi - lo) * truth.random(lo.shape)
        behaviors = [behaviors[0]] + [b.with_theta(th) for b, th in zip(behaviors[1:], theta)]
        for i in range(1, n):
            if behaviors[i].route is not None:
                lanes[i] = behaviors[i].route
        # routes are known: no lane-choice ambiguity remains
        options = [(b.route,) for b in behaviors]

    target = cfg.ego.target_speed if cfg.ego.target_speed is not None else cfg.ego.speed
    world = World(road, state, lanes, float(target))
    return Scenario(world, tuple(behaviors), tuple(options), lo, hi, mode=mode,
                    mobil=cfg.ambiguity.mobil)
