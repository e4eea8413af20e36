"""Interval hulls of the states reachable by the traffic under a fixed ego plan.

Two estimators are provided:

* :func:`predict_hulls` propagates boxes with interval arithmetic and
  over-approximates the hull at every decision epoch;
* :func:`sample_hull_estimate` takes element-wise min/max over rollouts of
  sampled parameters and under-approximates it.

Both use the frozen-interaction model: every vehicle keeps the lane and the
front vehicle observed at prediction start.  The ego follows its plan and is
known exactly, so its row is always a zero-width box.
"""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import interval as iv
from .core import ContinuousAmbiguitySet, make_rng
from .highway import kernels as kn
from .highway.env import EgoAction, FrozenContext, Road, reward
from .interval import Interval

X, Y, V, PSI = range(4)
PROPAGATIONS = ("monotone", "natural")


class PredictionDomainError(iv.IntervalDomainError):
    def __init__(self, vehicle: int, t: float, message: str = ""):
        self.vehicle = vehicle
        self.t = t
        super().__init__(message or f"speed interval of vehicle {vehicle} reaches 0 at t={t:g}s")


class VehicleIntervalState(NamedTuple):
    x: Interval
    y: Interval
    v: Interval
    psi: Interval

    @classmethod
    def point(cls, x, y, v, psi) -> "VehicleIntervalState":
        return cls(Interval.point(x), Interval.point(y), Interval.point(v), Interval.point(psi))


@dataclass(frozen=True)
class ParamIntervals:
    theta_a: tuple[Interval, Interval, Interval]
    kp_psi: Interval
    kp_y: Interval

    @property
    def theta_b(self) -> tuple[Interval, Interval]:
        return (self.kp_psi, self.kp_psi * self.kp_y)

    @classmethod
    def from_bounds(cls, lo: Sequence[float], hi: Sequence[float]) -> "ParamIntervals":
        ints = [Interval(a, b) for a, b in zip(lo, hi)]
        return cls(tuple(ints[:3]), ints[3], ints[4])


@dataclass(frozen=True)
class TrafficRules:
    v0: float = 25.0
    d0: float = 10.0
    time_gap: float = 1.5
    v_min_ctrl: float = 1.0

    @classmethod
    def of(cls, road: Road) -> "TrafficRules":
        return cls(road.v0, road.d0, road.time_gap, road.v_min_ctrl)


# -- array kernels shared by the scalar and batched paths ----------------------


def _features(x, y, v, psi, front, y_lane, psi_lane, rules: TrafficRules):
    """Feature boxes; each argument is a ``(lo, hi)`` pair of arrays.

    ``front`` is ``(has_front, xf, vf)`` with boolean mask and box pairs.
    """
    (xlo, xhi), (ylo, yhi), (vlo, vhi), (plo, phi) = x, y, v, psi
    has_front, (xflo, xfhi), (vflo, vfhi) = front
    if np.any(vlo <= 0.0):
        raise iv.IntervalDomainError("speed interval is not positive")
    f1 = (rules.v0 - vhi, rules.v0 - vlo)
    f2 = iv.neg_part_arr(*iv.sub_arr(vflo, vfhi, vlo, vhi))
    gap_lo = xflo - xhi - (rules.d0 + rules.time_gap * vhi)
    gap_hi = xfhi - xlo - (rules.d0 + rules.time_gap * vlo)
    f3 = iv.neg_part_arr(gap_lo, gap_hi)
    zero = np.zeros_like(vlo)
    f2 = (np.where(has_front, f2[0], zero), np.where(has_front, f2[1], zero))
    f3 = (np.where(has_front, f3[0], zero), np.where(has_front, f3[1], zero))

    g1 = (psi_lane - phi, psi_lane - plo)
    vc = iv.inv_arr(np.maximum(vlo, rules.v_min_ctrl), np.maximum(vhi, rules.v_min_ctrl))
    g2 = iv.mul_arr(y_lane - yhi, y_lane - ylo, *vc)
    return (f1, f2, f3), (g1, g2)


def _controls(phi_a, phi_b, theta_a, kp_psi, kp_y, lateral: str = "exact", mode: str = "exact"):
    alo = ahi = 0.0
    for (tlo, thi), (flo, fhi) in zip(theta_a, phi_a):
        plo, phi = iv.mul_arr(tlo, thi, flo, fhi, mode)
        alo, ahi = alo + plo, ahi + phi
    (g1lo, g1hi), (g2lo, g2hi) = phi_b
    if lateral == "linear":
        tb1 = iv.mul_arr(*kp_psi, *kp_y, mode)
        r1 = iv.mul_arr(*kp_psi, g1lo, g1hi, mode)
        r2 = iv.mul_arr(*tb1, g2lo, g2hi, mode)
        return (alo, ahi), (r1[0] + r2[0], r1[1] + r2[1])
    if lateral != "exact":
        raise ValueError(f"unknown lateral law {lateral!r}")
    zlo, zhi = iv.mul_arr(*kp_y, g2lo, g2hi, mode)
    slo = np.arcsin(np.clip(zlo, -1.0, 1.0))
    shi = np.arcsin(np.clip(zhi, -1.0, 1.0))
    rate = iv.mul_arr(*kp_psi, g1lo + slo, g1hi + shi, mode)
    return (alo, ahi), rate


def _speed_ratio(vlo, vhi, v_min_ctrl):
    """Box of ``v / max(v, v_min_ctrl)`` (heading-rate attenuation at low speed)."""
    return np.minimum(vlo / v_min_ctrl, 1.0), np.minimum(vhi / v_min_ctrl, 1.0)


def _propagate(x, y, v, psi, a, rate, dt):
    (xlo, xhi), (ylo, yhi), (vlo, vhi), (plo, phi) = x, y, v, psi
    clo, chi = iv.cos_arr(plo, phi)
    slo, shi = iv.sin_arr(plo, phi)
    dx = iv.mul_arr(vlo, vhi, clo, chi)
    dy = iv.mul_arr(vlo, vhi, slo, shi)
    return ((xlo + dt * dx[0], xhi + dt * dx[1]),
            (ylo + dt * dy[0], yhi + dt * dy[1]),
            (vlo + dt * a[0], vhi + dt * a[1]),
            (plo + dt * rate[0], phi + dt * rate[1]))


def _pair(z: Interval):
    return np.float64(z.lo), np.float64(z.hi)


def _interval(p) -> Interval:
    return Interval(float(p[0]), float(p[1]))


# -- scalar operations -------------------------------------------------------


def feature_intervals(joint: Sequence[VehicleIntervalState], i: int, lane: tuple[float, float],
                      rules: TrafficRules, front: Optional[int] = None):
    """Boxes of the longitudinal and lateral features of vehicle ``i``.

    Returns ``(phi_a, phi_b)`` with ``phi_b = [psi_L - psi, (y_L - y) / v]``.
    """
    s = joint[i]
    if s.v.lo <= 0.0:
        raise iv.IntervalDomainError(f"speed interval {s.v} of vehicle {i} is not positive")
    if front is None or front < 0:
        fr = (False, (0.0, 0.0), (0.0, 0.0))
    else:
        fr = (True, _pair(joint[front].x), _pair(joint[front].v))
    phi_a, phi_b = _features(_pair(s.x), _pair(s.y), _pair(s.v), _pair(s.psi), fr,
                             lane[0], lane[1], rules)
    return [_interval(p) for p in phi_a], [_interval(p) for p in phi_b]


def control_intervals(phi_a, phi_b, params: ParamIntervals, lateral: str = "exact", mode: str = "exact"):
    """Acceleration and heading-rate boxes.

    ``lateral="linear"`` evaluates the linearised law ``theta_b . phi_b``;
    the default keeps the arcsine of the lane-keeping cascade so the box
    encloses the controller actually driven by the vehicles.
    """
    a, rate = _controls([_pair(p) for p in phi_a], [_pair(p) for p in phi_b],
                        [_pair(t) for t in params.theta_a], _pair(params.kp_psi), _pair(params.kp_y),
                        lateral, mode)
    return _interval(a), _interval(rate)


def propagate_step(state: VehicleIntervalState, a: Interval, heading_rate: Interval,
                   dt: float) -> VehicleIntervalState:
    if dt <= 0:
        raise ValueError("dt must be positive")
    out = _propagate(_pair(state.x), _pair(state.y), _pair(state.v), _pair(state.psi),
                     _pair(a), _pair(heading_rate), dt)
    nxt = VehicleIntervalState(*(_interval(p) for p in out))
    if nxt.v.lo <= 0.0:
        raise iv.IntervalDomainError(f"speed interval {nxt.v} is not positive")
    return nxt


# -- batched propagation -----------------------------------------------------


@dataclass
class PredictionBatch:
    """Boxes of every vehicle for ``P`` ego plans advanced in lockstep."""

    lo: np.ndarray           # (P, N, 4)
    hi: np.ndarray           # (P, N, 4)
    ego_lane: np.ndarray     # (P,)
    ego_speed: np.ndarray    # (P,)
    crash: np.ndarray        # (P,) possible ego collision so far
    failed: np.ndarray       # (P,) speed box reached 0
    fail_info: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.lo.shape[0]

    def take(self, idx) -> "PredictionBatch":
        return PredictionBatch(self.lo[idx], self.hi[idx], self.ego_lane[idx], self.ego_speed[idx],
                               self.crash[idx], self.failed[idx])


class IntervalPredictor:
    """Region-based predictor for one observed world and one parameter box."""

    def __init__(self, amb: ContinuousAmbiguitySet, mode: str = "exact", propagation: str = "monotone"):
        if propagation not in PROPAGATIONS:
            raise ValueError(f"unknown propagation {propagation!r}")
        ctx = amb.context
        if not isinstance(ctx, FrozenContext):
            raise TypeError("ambiguity set must come from highway.make_ambiguity(..., 'continuous')")
        self.world = ctx.world
        self.road = ctx.world.road
        self.rules = TrafficRules.of(self.road)
        self.fronts = np.asarray(ctx.fronts)
        self.mode = mode
        n = self.world.n_vehicles
        tl = amb.lower.reshape(n - 1, 5)
        th = amb.upper.reshape(n - 1, 5)
        self.theta_a = [(tl[:, k], th[:, k]) for k in range(3)]
        self.kp_psi = (tl[:, 3], th[:, 3])
        self.kp_y = (tl[:, 4], th[:, 4])
        self.lane_y = self.world.lanes[1:] * self.road.lane_width
        self.ego_params = amb.context.scenario.behaviors[0].row()[None, :]
        self.cfg = self.road.cfg(mobil=False, lane_changes=False)
        dt = self.road.dt
        # per-vehicle conditions under which one Euler step is monotone in v and psi
        self.mono_v = dt * (th[:, 0] + th[:, 1] + th[:, 2] * self.rules.time_gap) <= 1.0
        self.mono_psi = dt * th[:, 3] <= 1.0
        self.propagation = propagation

    def initial(self, batch: int = 1) -> PredictionBatch:
        s = np.broadcast_to(self.world.state, (batch,) + self.world.state.shape).copy()
        return PredictionBatch(s, s.copy(),
                               np.full(batch, int(self.world.lanes[0]), dtype=np.int64),
                               np.full(batch, float(self.world.target_speed)),
                               np.full(batch, bool(self.world.crashed)),
                               np.zeros(batch, dtype=bool))

    def _ego_targets(self, batch: PredictionBatch, actions: np.ndarray):
        road = self.road
        lane = batch.ego_lane.copy()
        speed = batch.ego_speed.copy()
        speed = np.where(actions == EgoAction.FASTER, np.minimum(speed + road.speed_step, road.v_max), speed)
        speed = np.where(actions == EgoAction.SLOWER, np.maximum(speed - road.speed_step, road.v_min), speed)
        lane = np.where(actions == EgoAction.LEFT_LANE, np.minimum(lane + 1, road.n_lanes - 1), lane)
        lane = np.where(actions == EgoAction.RIGHT_LANE, np.maximum(lane - 1, 0), lane)
        return lane.astype(np.int64), speed.astype(float)

    def _inner_step(self, lo, hi, fail):
        """One Euler step of the non-ego boxes (rows 1..N-1) for the whole batch."""
        o = slice(1, None)
        x = (lo[:, o, X], hi[:, o, X])
        y = (lo[:, o, Y], hi[:, o, Y])
        v = (lo[:, o, V], hi[:, o, V])
        psi = (lo[:, o, PSI], hi[:, o, PSI])
        f = self.fronts[1:]
        has_front = np.broadcast_to(f >= 0, x[0].shape)
        fi = np.where(f >= 0, f, 0)
        front = (has_front, (lo[:, fi, X], hi[:, fi, X]), (lo[:, fi, V], hi[:, fi, V]))
        # rows whose speed box already failed are frozen at a valid placeholder
        safe_v = (np.where(fail[:, None], 1.0, v[0]), np.where(fail[:, None], 1.0, v[1]))
        phi_a, phi_b = _features(x, y, safe_v, psi, front, self.lane_y, 0.0, self.rules)
        a, cmd = _controls(phi_a, phi_b, self.theta_a, self.kp_psi, self.kp_y, "exact", self.mode)
        ratio = _speed_ratio(*safe_v, self.rules.v_min_ctrl)
        rate = iv.mul_arr(*cmd, *ratio)
        nx, ny, nv, npsi = _propagate(x, y, safe_v, psi, a, rate, self.road.dt)
        new_lo, new_hi = lo.copy(), hi.copy()
        for k, (plo, phi) in enumerate((nx, ny, nv, npsi)):
            new_lo[:, o, k] = plo
            new_hi[:, o, k] = phi
        if self.propagation == "monotone":
            nv = self._monotone_speed(x, safe_v, front, nv)
            npsi = self._monotone_heading(psi, phi_b[1], ratio, npsi)
            for k, (plo, phi) in ((V, nv), (PSI, npsi)):
                new_lo[:, o, k] = plo
                new_hi[:, o, k] = phi
        bad = np.any(nv[0] <= 0.0, axis=1)
        return new_lo, new_hi, bad

    def _monotone_speed(self, x, v, front, natural):
        """Speed bounds from the extreme corners of the box.

        While ``dt * (ta0 + ta1 + ta2 * T) <= 1`` the updated speed is
        non-decreasing in v, vf, xf and non-increasing in x, so its minimum
        sits at (v.lo, vf.lo, xf.lo, x.hi) for some corner of the gain box,
        and symmetrically for the maximum.
        """
        r = self.rules
        has_front, (xflo, xfhi), (vflo, vfhi) = front
        (xlo, xhi), (vlo, vhi) = x, v

        def bound(vv, vf, xf, xx, pick):
            feats = (r.v0 - vv,
                     np.where(has_front, np.minimum(vf - vv, 0.0), 0.0),
                     np.where(has_front, np.minimum(xf - xx - (r.d0 + r.time_gap * vv), 0.0), 0.0))
            acc = 0.0
            for (tlo, thi), ff in zip(self.theta_a, feats):
                acc = acc + pick(tlo * ff, thi * ff)
            return vv + self.road.dt * acc

        lo = bound(vlo, vflo, xflo, xhi, np.minimum)
        hi = bound(vhi, vfhi, xfhi, xlo, np.maximum)
        ok = self.mono_v
        return np.where(ok, lo, natural[0]), np.where(ok, hi, natural[1])

    def _monotone_heading(self, psi, g2, ratio, natural):
        """Heading bounds that keep the ``psi`` dependency of the lane-keeping loop.

        ``psi' = psi + dt q (psi_L - psi + S)`` with ``q = kp_psi * v / max(v, v_min)``
        is non-decreasing in psi when ``dt q <= 1`` and in S, and affine in q.
        """
        dt = self.road.dt
        zlo, zhi = iv.mul_arr(*self.kp_y, *g2, self.mode)
        slo = np.arcsin(np.clip(zlo, -1.0, 1.0))
        shi = np.arcsin(np.clip(zhi, -1.0, 1.0))
        qlo = self.kp_psi[0] * ratio[0]
        qhi = self.kp_psi[1] * ratio[1]
        plo, phi = psi
        base_lo = -plo + slo
        base_hi = -phi + shi
        lo = plo + dt * np.minimum(qlo * base_lo, qhi * base_lo)
        hi = phi + dt * np.maximum(qlo * base_hi, qhi * base_hi)
        ok = self.mono_psi
        return np.where(ok, lo, natural[0]), np.where(ok, hi, natural[1])

    def advance(self, batch: PredictionBatch, actions, record_inner: bool = False):
        """Propagate one decision epoch under ``actions`` (one per batch row)."""
        actions = np.asarray(actions, dtype=np.int64)
        lane, speed = self._ego_targets(batch, actions)
        n_inner = self.road.n_inner
        ego_inner = np.empty((batch.size, n_inner, 4))
        kn.ego_epoch_batch(np.ascontiguousarray(batch.lo[:, 0, :]), lane, speed, self.ego_params,
                           self.cfg, ego_inner)
        lo, hi = batch.lo, batch.hi
        crash = batch.crash.copy()
        failed = batch.failed.copy()
        fail_info = list(batch.fail_info)
        inner = []
        for k in range(n_inner):
            lo, hi, bad = self._inner_step(lo, hi, failed)
            lo[:, 0, :] = ego_inner[:, k, :]
            hi[:, 0, :] = ego_inner[:, k, :]
            newly = bad & ~failed
            if np.any(newly):
                for p in np.flatnonzero(newly):
                    veh = 1 + int(np.argmax(lo[p, 1:, V] <= 0.0))
                    fail_info.append((int(p), veh, k + 1))
            failed |= bad
            crash |= self._overlap(lo, hi)
            if record_inner:
                inner.append((lo.copy(), hi.copy()))
        out = PredictionBatch(lo, hi, lane, speed, crash, failed, fail_info)
        return (out, inner) if record_inner else out

    def _overlap(self, lo, hi):
        L, W = self.road.vehicle_length, self.road.vehicle_width
        ex = lo[:, :1, X]
        ey = lo[:, :1, Y]
        hit = ((lo[:, 1:, X] - L <= ex) & (ex <= hi[:, 1:, X] + L)
               & (lo[:, 1:, Y] - W <= ey) & (ey <= hi[:, 1:, Y] + W))
        return np.any(hit, axis=1)

    def epoch_reward(self, batch: PredictionBatch) -> np.ndarray:
        """Reward lower bound of each batch row at its current epoch."""
        road = self.road
        ego = batch.lo[:, 0, :]
        r = np.clip((ego[:, V] - road.v_min) / (road.v_max - road.v_min), 0.0, 1.0)
        if road.ego_route:
            lanes = np.array([road.lane_of(y) for y in ego[:, Y]])
            r = np.where(np.isin(lanes, road.ego_route), r, 0.5 * r)
        return np.where(batch.crash, 0.0, r)


@dataclass
class HullTrace:
    """Per-epoch boxes ``lo[t, i, :] <= state of vehicle i at epoch t <= hi[t, i, :]``."""

    lo: np.ndarray
    hi: np.ndarray
    crash_possible: np.ndarray
    actions: tuple[int, ...]
    dt_epoch: float = 1.0
    rewards: Optional[np.ndarray] = None
    inner_lo: Optional[np.ndarray] = None
    inner_hi: Optional[np.ndarray] = None

    @property
    def horizon(self) -> int:
        return self.lo.shape[0] - 1

    def epoch(self, t: int, i: int) -> VehicleIntervalState:
        return VehicleIntervalState(*(Interval(self.lo[t, i, k], self.hi[t, i, k]) for k in range(4)))

    def contains(self, other: "HullTrace", tol: float = 1e-9) -> bool:
        return bool(np.all(self.lo <= other.lo + tol) and np.all(other.hi <= self.hi + tol))

    def contains_states(self, states: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Mask of epochs whose boxes hold ``states`` (shape (H+1, N, 4))."""
        ok = (self.lo - tol <= states) & (states <= self.hi + tol)
        return np.all(ok, axis=(1, 2))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "vehicle", "x_lo", "x_hi", "y_lo", "y_hi", "v_lo", "v_hi", "psi_lo", "psi_hi"])
        for t in range(self.lo.shape[0]):
            for i in range(self.lo.shape[1]):
                row = [t, i]
                for k in range(4):
                    row += [repr(float(self.lo[t, i, k])), repr(float(self.hi[t, i, k]))]
                w.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "HullTrace":
        rows = list(csv.DictReader(io.StringIO(text)))
        T = 1 + max(int(r["t"]) for r in rows)
        N = 1 + max(int(r["vehicle"]) for r in rows)
        lo = np.zeros((T, N, 4))
        hi = np.zeros((T, N, 4))
        for r in rows:
            t, i = int(r["t"]), int(r["vehicle"])
            for k, name in enumerate(("x", "y", "v", "psi")):
                lo[t, i, k] = float(r[f"{name}_lo"])
                hi[t, i, k] = float(r[f"{name}_hi"])
        return cls(lo, hi, np.zeros(T, dtype=bool), ())


def _check_plan(actions, H):
    actions = tuple(int(a) for a in actions)
    if H is None:
        H = len(actions)
    if len(actions) < H or H < 1:
        raise ValueError("the ego plan must specify an action for every epoch")
    return actions[:H], H


def predict_hulls(amb: ContinuousAmbiguitySet, actions: Sequence[int], H: Optional[int] = None,
                  mode: str = "exact", record_inner: bool = False,
                  propagation: str = "monotone") -> HullTrace:
    """Interval enclosure of the traffic over ``H`` epochs under the ego plan.

    ``propagation="natural"`` evaluates every step with plain interval
    arithmetic on the features, controls and kinematics.  The default
    ``"monotone"`` keeps the same position update but bounds the new speed
    and heading from the extreme corners of the box, which avoids counting
    the same variable twice in ``v + dt a(v)`` and ``psi + dt k (psi_L - psi)``.
    Both are sound; the second is much tighter.

    Raises :class:`PredictionDomainError` when a speed box reaches zero.
    """
    actions, H = _check_plan(actions, H)
    pred = IntervalPredictor(amb, mode, propagation)
    batch = pred.initial(1)
    lo = [batch.lo[0].copy()]
    hi = [batch.hi[0].copy()]
    crash = [bool(batch.crash[0])]
    rewards = [float(pred.epoch_reward(batch)[0])]
    inner_lo, inner_hi = [batch.lo[0].copy()], [batch.hi[0].copy()]
    for t, a in enumerate(actions):
        batch, inner = pred.advance(batch, [a], record_inner=True)
        if batch.failed[0]:
            _, veh, k = batch.fail_info[0]
            raise PredictionDomainError(veh, t + k * pred.road.dt)
        lo.append(batch.lo[0].copy())
        hi.append(batch.hi[0].copy())
        crash.append(bool(batch.crash[0]))
        rewards.append(float(pred.epoch_reward(batch)[0]))
        if record_inner:
            inner_lo += [l[0] for l, _ in inner]
            inner_hi += [h[0] for _, h in inner]
    trace = HullTrace(np.array(lo), np.array(hi), np.array(crash), actions,
                      dt_epoch=pred.road.dt * pred.road.n_inner, rewards=np.array(rewards))
    if record_inner:
        trace.inner_lo = np.array(inner_lo)
        trace.inner_hi = np.array(inner_hi)
    return trace


def rollout_states(amb: ContinuousAmbiguitySet, theta, actions: Sequence[int]):
    """Point rollout of the frozen model ``T_theta``; returns the worlds visited."""
    model = amb.model(theta)
    world = amb.context.world
    worlds = [world]
    for a in actions:
        world = model(world, a)
        worlds.append(world)
    return worlds


def truncated_return(worlds, gamma: float) -> float:
    """``sum_{t=0}^{H} gamma^t r(s_t)`` over the visited worlds."""
    return sum(gamma**t * reward(w) for t, w in enumerate(worlds))


def sample_parameters(amb: ContinuousAmbiguitySet, n_samples: int, seed: int) -> np.ndarray:
    """Box corners first, then uniform draws.

    Corners are taken over the non-degenerate coordinates only.  All of them
    are used when they fit in ``n_samples``; otherwise half the budget goes
    to randomly chosen corners.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples")
    rng = make_rng(seed, 7)
    lo, hi = amb.lower.ravel(), amb.upper.ravel()
    free = np.flatnonzero(hi > lo)
    p = free.size
    if p < 30 and 2**p <= n_samples:
        bits = np.array(list(itertools.product((0, 1), repeat=p)), dtype=bool).reshape(2**p, p)
    else:
        bits = rng.random((n_samples // 2, p)) < 0.5
    corners = np.tile(lo, (len(bits), 1))
    corners[:, free] = np.where(bits, hi[free], lo[free])
    uniform = amb.sample(rng, n_samples - len(corners)).reshape(-1, lo.size)
    return np.vstack([corners, uniform])


def sample_hull_estimate(amb: ContinuousAmbiguitySet, actions: Sequence[int], H: Optional[int] = None,
                         n_samples: int = 100, seed: int = 0) -> HullTrace:
    """Element-wise min/max of sampled rollouts: an inner estimate of the hull."""
    actions, H = _check_plan(actions, H)
    thetas = sample_parameters(amb, n_samples, seed)
    runs = [rollout_states(amb, th, actions) for th in thetas]
    trajs = np.array([[w.state for w in ws] for ws in runs])
    crashed = np.array([[w.crashed for w in ws] for ws in runs])
    road = amb.context.world.road
    return HullTrace(trajs.min(axis=0), trajs.max(axis=0), crashed.any(axis=0),
                     actions, dt_epoch=road.dt * road.n_inner)
