"""Multi-lane highway with parametrised traffic behaviours.

Lanes are straight and parallel to the x axis; lane ``k`` is centred on
``y = k * lane_width`` with heading 0, and ``LEFT_LANE`` moves the ego to
lane ``k + 1``.  A vehicle's *route* is the lane it must reach (its exit);
routes are the discrete source of ambiguity, behaviour gains the continuous
one.

The reward of a state is its ego speed mapped linearly from
``[v_min, v_max]`` to ``[0, 1]``, halved off the ego's planned route, and 0
once the ego has collided.  It depends on the state only, which is what
both planners need: ``r(s_t, a_t)`` ignores ``a_t``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import NamedTuple, Optional, Sequence

import numpy as np

from ..core import ContinuousAmbiguitySet, DiscreteAmbiguitySet
from . import kernels as kn


class EgoAction(IntEnum):
    NO_OP = 0
    RIGHT_LANE = 1
    LEFT_LANE = 2
    FASTER = 3
    SLOWER = 4


N_ACTIONS = len(EgoAction)
MAX_MODELS = 32


class AmbiguityExplosion(ValueError):
    """Too many route combinations to enumerate as separate models."""


class VehicleState(NamedTuple):
    x: float
    y: float
    v: float
    psi: float


@dataclass(frozen=True)
class Road:
    n_lanes: int = 3
    lane_width: float = 4.0
    v0: float = 25.0
    d0: float = 10.0
    time_gap: float = 1.5
    v_min: float = 10.0
    v_max: float = 30.0
    speed_step: float = 5.0
    vehicle_length: float = 5.0
    vehicle_width: float = 2.0
    dt: float = 0.1
    n_inner: int = 10
    ego_speed_gain: float = 1.0 / 0.6
    v_min_ctrl: float = 1.0
    settle_tolerance: float = 0.5
    ego_route: tuple[int, ...] = ()
    branch_x: float = -math.inf

    def lane_y(self, lane: int) -> float:
        return lane * self.lane_width

    def lane_of(self, y: float) -> int:
        return int(kn.lane_of(float(y), self.lane_width, self.n_lanes))

    def on_route(self, y: float) -> bool:
        return not self.ego_route or self.lane_of(y) in self.ego_route

    def speed_reward(self, v: float) -> float:
        r = (v - self.v_min) / (self.v_max - self.v_min)
        return min(max(r, 0.0), 1.0)

    def cfg(self, mobil: bool = True, lane_changes: bool = True) -> np.ndarray:
        c = np.zeros(kn.N_CFG)
        c[kn.C_V0] = self.v0
        c[kn.C_D0] = self.d0
        c[kn.C_TGAP] = self.time_gap
        c[kn.C_LANE_W] = self.lane_width
        c[kn.C_N_LANES] = self.n_lanes
        c[kn.C_DT] = self.dt
        c[kn.C_N_INNER] = self.n_inner
        c[kn.C_V_MIN] = self.v_min
        c[kn.C_V_MAX] = self.v_max
        c[kn.C_LEN] = self.vehicle_length
        c[kn.C_WID] = self.vehicle_width
        c[kn.C_EGO_KV] = self.ego_speed_gain
        c[kn.C_V_MIN_CTRL] = self.v_min_ctrl
        c[kn.C_MOBIL] = float(mobil)
        c[kn.C_LANE_CHANGES] = float(lane_changes)
        c[kn.C_SETTLE] = self.settle_tolerance
        c[kn.C_BRANCH_X] = self.branch_x
        c[kn.C_SPEED_STEP] = self.speed_step
        return c


@dataclass(frozen=True)
class BehaviorParams:
    theta_a: tuple[float, float, float] = (0.5, 1.0, 0.5)
    kp_psi: float = 2.0
    kp_y: float = 0.2
    politeness: float = 0.5
    b_safe: float = 4.0
    a_min: float = 0.2
    half_length: float = 2.5
    route: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "theta_a", tuple(float(t) for t in self.theta_a))
        if len(self.theta_a) != 3:
            raise ValueError("theta_a has three gains")
        if min(self.theta_a) <= 0 or self.kp_psi <= 0 or self.kp_y <= 0:
            raise ValueError("behaviour gains must be positive")
        if self.b_safe <= 0:
            raise ValueError("b_safe must be positive")

    @property
    def theta_b(self) -> tuple[float, float]:
        """Gains of the linearised lateral law, paired with ``[psi_L - psi, (y_L - y) / v]``."""
        return (self.kp_psi, self.kp_y * self.kp_psi)

    def row(self) -> np.ndarray:
        return np.array([*self.theta_a, self.kp_psi, self.kp_y, self.politeness,
                         self.b_safe, self.a_min, self.half_length])

    def with_theta(self, theta: Sequence[float]) -> "BehaviorParams":
        """Replace the uncertain gains ``[ta0, ta1, ta2, kp_psi, kp_y]``."""
        return replace(self, theta_a=tuple(theta[:3]), kp_psi=float(theta[3]), kp_y=float(theta[4]))

    def theta(self) -> np.ndarray:
        return np.array([*self.theta_a, self.kp_psi, self.kp_y])


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class World:
    """Kinematic state of every vehicle plus the controller targets."""

    road: Road
    state: np.ndarray            # (N, 4): x, y, v, psi
    lanes: np.ndarray            # (N,) target lanes
    target_speed: float
    crashed: bool = False
    t: int = 0

    def __post_init__(self):
        object.__setattr__(self, "state", _frozen(np.asarray(self.state, dtype=float).reshape(-1, 4)))
        object.__setattr__(self, "lanes", _frozen(np.asarray(self.lanes, dtype=np.int64)))

    @classmethod
    def _trusted(cls, road, state, lanes, target_speed, crashed, t) -> "World":
        # skips validation; callers pass read-only arrays of the right shape
        w = object.__new__(cls)
        d = w.__dict__
        d["road"] = road
        d["state"] = state
        d["lanes"] = lanes
        d["target_speed"] = target_speed
        d["crashed"] = crashed
        d["t"] = t
        return w

    @property
    def n_vehicles(self) -> int:
        return self.state.shape[0]

    def vehicle(self, i: int) -> VehicleState:
        return VehicleState(*map(float, self.state[i]))

    @property
    def ego(self) -> VehicleState:
        return self.vehicle(0)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.state)))

    def key(self) -> bytes:
        return (self.state.tobytes() + self.lanes.tobytes()
                + np.array([self.target_speed, self.crashed, self.t]).tobytes())


def apply_ego_action(world: World, action: int) -> tuple[np.ndarray, float]:
    road = world.road
    lanes = np.array(world.lanes)
    speed = world.target_speed
    action = EgoAction(int(action))
    if action is EgoAction.FASTER:
        speed = min(speed + road.speed_step, road.v_max)
    elif action is EgoAction.SLOWER:
        speed = max(speed - road.speed_step, road.v_min)
    elif action is EgoAction.LEFT_LANE:
        lanes[0] = min(lanes[0] + 1, road.n_lanes - 1)
    elif action is EgoAction.RIGHT_LANE:
        lanes[0] = max(lanes[0] - 1, 0)
    return lanes, speed


class HighwayModel:
    """Deterministic transition ``T(world, action) -> world`` for fixed behaviours.

    With ``fronts`` given, every vehicle keeps following the same front
    vehicle and lane changes are disabled; this is the frozen-interaction
    model the interval predictor encloses.
    """

    def __init__(self, road: Road, behaviors: Sequence[BehaviorParams], mobil: bool = True,
                 lane_changes: bool = True, fronts: Optional[np.ndarray] = None):
        self.road = road
        self.behaviors = tuple(behaviors)
        self.params = np.ascontiguousarray(np.stack([b.row() for b in self.behaviors]))
        self.routes = np.array([-1 if b.route is None else b.route for b in self.behaviors], dtype=np.int64)
        self.use_fixed = fronts is not None
        self.fronts = (np.asarray(fronts, dtype=np.int64) if fronts is not None
                       else np.full(len(self.behaviors), -1, dtype=np.int64))
        self.cfg = road.cfg(mobil=mobil, lane_changes=lane_changes and not self.use_fixed)

    def __call__(self, world: World, action: int) -> World:
        action = int(action)
        if not 0 <= action < N_ACTIONS:
            raise ValueError(f"unknown ego action {action}")
        lanes = np.array(world.lanes)
        lanes[0], speed = kn.ego_targets(int(lanes[0]), float(world.target_speed), action, self.cfg)
        state, new_lanes, crashed = kn.run_epoch(
            np.ascontiguousarray(world.state), lanes, speed, self.params, self.routes,
            self.fronts, self.use_fixed, self.cfg)
        state.setflags(write=False)
        new_lanes.setflags(write=False)
        return World._trusted(world.road, state, new_lanes, speed, bool(world.crashed or crashed), world.t + 1)

    def step(self, world: World, action: int):
        """Environment step: ``(world', reward, done)``."""
        nxt = self(world, action)
        return nxt, reward(nxt), nxt.crashed


class HighwayAmbiguity(DiscreteAmbiguitySet):
    """Finite set of highway models sharing a road, expanded in one compiled call."""

    def __post_init__(self):
        super().__post_init__()
        first = self.models[0]
        if any(m.road != first.road or m.use_fixed != first.use_fixed
               or not np.array_equal(m.cfg, first.cfg) or not np.array_equal(m.fronts, first.fronts)
               for m in self.models):
            raise ValueError("models must share road, configuration and front assignment")
        object.__setattr__(self, "_params", np.ascontiguousarray(np.stack([m.params for m in self.models])))
        object.__setattr__(self, "_routes", np.ascontiguousarray(np.stack([m.routes for m in self.models])))

    def successors(self, worlds: Sequence[World], n_actions: int) -> list[list[World]]:
        """``out[k][m]``: world ``m`` advanced by model ``m`` under action ``k`` (built lazily)."""
        M = len(self.models)
        first = self.models[0]
        worlds = list(worlds)
        states = np.ascontiguousarray(np.stack([w.state for w in worlds]))
        lanes = np.ascontiguousarray(np.stack([w.lanes for w in worlds]))
        speeds = np.array([w.target_speed for w in worlds], dtype=float)
        crashed = np.array([w.crashed for w in worlds], dtype=np.bool_)
        shape = (n_actions, M)
        out_states = np.empty(shape + states.shape[1:])
        out_lanes = np.empty(shape + lanes.shape[1:], dtype=np.int64)
        out_speeds = np.empty(shape)
        out_crashed = np.empty(shape, dtype=np.bool_)
        kn.successors(states, lanes, speeds, crashed, self._params, self._routes, first.fronts,
                      first.use_fixed, first.cfg, n_actions, out_states, out_lanes, out_speeds, out_crashed)
        out_states.setflags(write=False)
        out_lanes.setflags(write=False)
        batch = (worlds[0].road, out_states, out_lanes, out_speeds.tolist(), out_crashed.tolist(),
                 [w.t + 1 for w in worlds])
        return [_LazyWorlds(batch, k) for k in range(n_actions)]


class _LazyWorlds(Sequence):
    """Row ``k`` of a successor batch; worlds are only built when read."""

    __slots__ = ("_batch", "_k", "_cache")

    def __init__(self, batch, k):
        self._batch = batch
        self._k = k
        self._cache = {}

    def __len__(self):
        return len(self._batch[5])

    def __iter__(self):
        return (self[m] for m in range(len(self)))

    def __getitem__(self, m):
        if isinstance(m, slice):
            return [self[j] for j in range(*m.indices(len(self)))]
        if m < 0:
            m += len(self)
        if not 0 <= m < len(self):
            raise IndexError(m)
        w = self._cache.get(m)
        if w is None:
            road, st, ln, sp, cr, ts = self._batch
            k = self._k
            w = self._cache[m] = World._trusted(road, st[k, m], ln[k, m], sp[k][m], cr[k][m], ts[m])
        return w


def reward(world: World, action: Optional[int] = None) -> float:
    if world.crashed:
        return 0.0
    ego = world.state[0]
    r = world.road.speed_reward(float(ego[2]))
    if not world.road.on_route(float(ego[1])):
        r *= 0.5
    return r


def env_step(world: World, action: int, model: HighwayModel):
    return model.step(world, action)


def bicycle_step(s: VehicleState, a: float, beta: float, dt: float, half_length: float = 2.5) -> VehicleState:
    if dt <= 0:
        raise ValueError("dt must be positive")
    return VehicleState(*kn.bicycle_step(s.x, s.y, s.v, s.psi, a, beta, dt, half_length))


def front_of(world: World, i: int) -> int:
    return int(kn.front_vehicle(world.state, world.lanes, i, world.road.lane_width, world.road.n_lanes))


def longitudinal_accel(world: World, i: int, params: BehaviorParams, front: Optional[int] = None) -> float:
    """Acceleration of vehicle ``i`` under the linear longitudinal model."""
    road = world.road
    f = front_of(world, i) if front is None else front
    s = world.state
    has_front = f >= 0
    return float(kn.linear_accel(*params.theta_a, road.v0, road.d0, road.time_gap,
                                 s[i, 2], s[i, 0], has_front,
                                 s[f, 2] if has_front else 0.0, s[f, 0] if has_front else 0.0))


def lateral_steering(s: VehicleState, lane: tuple[float, float], params: BehaviorParams,
                     v_min_ctrl: float = 1.0) -> float:
    """Slip-angle command of the cascaded lane-keeping controller."""
    y_lane, psi_lane = lane
    return float(kn.steering_angle(s.y, s.psi, s.v, y_lane, psi_lane, params.kp_psi, params.kp_y,
                                   params.half_length, v_min_ctrl))


def heading_rate(s: VehicleState, beta: float, half_length: float = 2.5) -> float:
    return s.v / half_length * math.tan(beta)


def linearized_heading_rate(s: VehicleState, lane: tuple[float, float], params: BehaviorParams,
                            v_min_ctrl: float = 1.0) -> float:
    y_lane, psi_lane = lane
    v = max(s.v, v_min_ctrl)
    tb = params.theta_b
    return tb[0] * (psi_lane - s.psi) + tb[1] * (y_lane - s.y) / v


def mobil_decision(world: World, i: int, behaviors: Sequence[BehaviorParams]) -> str:
    """Discretionary lane-change decision of vehicle ``i``: stay, change_left or change_right."""
    params = np.stack([b.row() for b in behaviors])
    delta = kn.mobil_choice(np.ascontiguousarray(world.state), np.array(world.lanes), params,
                            world.road.cfg(), i)
    return {0: "stay", 1: "change_left", -1: "change_right"}[int(delta)]


def collides(a: VehicleState, b: VehicleState, road: Road) -> bool:
    return abs(a.x - b.x) < road.vehicle_length and abs(a.y - b.y) < road.vehicle_width


def reward_lower_bound(ego: VehicleState, lo: np.ndarray, hi: np.ndarray, road: Road,
                       ego_action: Optional[int] = None, crashed: bool = False) -> float:
    """Minimum of the reward over states whose other vehicles lie in the boxes.

    ``lo``/``hi`` hold the (x, y) bounds of the other vehicles, shape (N-1, >=2).
    The ego is known exactly; the minimum is 0 when some vehicle box, grown by
    the footprint, touches the ego position, and the ego's speed reward otherwise.
    """
    if crashed or overlap_possible(ego.x, ego.y, lo, hi, road):
        return 0.0
    r = road.speed_reward(ego.v)
    return r if road.on_route(ego.y) else 0.5 * r


def overlap_possible(x, y, lo, hi, road: Road) -> bool:
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.atleast_2d(np.asarray(hi, dtype=float))
    if lo.size == 0:
        return False
    L, W = road.vehicle_length, road.vehicle_width
    hit = ((lo[:, 0] - L <= x) & (x <= hi[:, 0] + L) & (lo[:, 1] - W <= y) & (y <= hi[:, 1] + W))
    return bool(np.any(hit))


# -- scenarios and ambiguity -------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    """True world, behaviours and what the agents know about them.

    ``route_options[i]`` lists the routes vehicle ``i`` may follow (``None``
    for free driving); ``theta_lower``/``theta_upper`` bound the uncertain
    gains of each vehicle.  Vehicle 0 is the ego and is never uncertain.
    """

    world: World
    behaviors: tuple[BehaviorParams, ...]
    route_options: tuple[tuple[Optional[int], ...], ...]
    theta_lower: np.ndarray
    theta_upper: np.ndarray
    mode: str = "discrete"
    mobil: bool = True

    @property
    def lane_changes(self) -> bool:
        return self.mode == "discrete"

    def true_model(self) -> HighwayModel:
        return HighwayModel(self.world.road, self.behaviors, mobil=self.mobil, lane_changes=self.lane_changes)

    def model_with(self, behaviors: Sequence[BehaviorParams], fronts=None) -> HighwayModel:
        return HighwayModel(self.world.road, behaviors, mobil=self.mobil,
                            lane_changes=self.lane_changes, fronts=fronts)

    def uncertain_vehicles(self) -> list[int]:
        return [i for i in range(1, len(self.behaviors)) if len(self.route_options[i]) > 1]

    def route_assignments(self) -> list[tuple[Optional[int], ...]]:
        choices = [self.route_options[i] if len(self.route_options[i]) > 1 else (self.behaviors[i].route,)
                   for i in range(len(self.behaviors))]
        choices[0] = (self.behaviors[0].route,)
        return list(itertools.product(*choices))

    def behaviors_for_routes(self, routes) -> tuple[BehaviorParams, ...]:
        return tuple(replace(b, route=r) for b, r in zip(self.behaviors, routes))

    def behaviors_for_theta(self, theta: np.ndarray) -> tuple[BehaviorParams, ...]:
        theta = np.asarray(theta, dtype=float).reshape(len(self.behaviors) - 1, 5)
        return (self.behaviors[0],) + tuple(b.with_theta(th) for b, th in zip(self.behaviors[1:], theta))

    def at(self, world: World) -> "Scenario":
        return replace(self, world=world)


def make_ambiguity(scenario: Scenario, mode: str, world: Optional[World] = None):
    """Ambiguity set around ``world`` (defaults to the scenario's initial world).

    ``"discrete"`` yields one model per combination of route choices, with
    behaviour gains at their true values.  ``"continuous"`` yields the gain
    box with routes known, whose model family freezes lanes and front
    vehicles as observed in ``world``.
    """
    world = scenario.world if world is None else world
    if mode == "discrete":
        assignments = scenario.route_assignments()
        if len(assignments) > MAX_MODELS:
            raise AmbiguityExplosion(f"{len(assignments)} route combinations exceed {MAX_MODELS}")
        models = tuple(scenario.model_with(scenario.behaviors_for_routes(r)) for r in assignments)
        return HighwayAmbiguity(models, tuple(assignments))
    if mode == "continuous":
        fronts = np.empty(world.n_vehicles, dtype=np.int64)
        kn.resolve_fronts(np.ascontiguousarray(world.state), np.array(world.lanes), world.road.cfg(), fronts)

        def family(theta, _fronts=fronts):
            return scenario.model_with(scenario.behaviors_for_theta(theta), fronts=_fronts)

        return ContinuousAmbiguitySet(scenario.theta_lower.ravel(), scenario.theta_upper.ravel(), family,
                                      context=FrozenContext(scenario, world, fronts))
    raise ValueError(f"unknown ambiguity mode {mode!r}")


@dataclass(frozen=True, eq=False)
class FrozenContext:
    scenario: Scenario
    world: World
    fronts: np.ndarray = field(repr=False)
