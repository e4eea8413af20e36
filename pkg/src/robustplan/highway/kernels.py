"""Compiled point dynamics for the traffic simulation.

Everything here works on plain arrays so a whole decision epoch (lane-change
decisions followed by ``n_inner`` Euler steps of every vehicle) is a single
compiled call.  Vehicle 0 is the ego-vehicle.

Layouts
-------
state   : (N, 4) float  -- x, y, v, psi
lanes   : (N,) int      -- target lane of each vehicle
params  : (N, 9) float  -- see ``P_*`` indices
routes  : (N,) int      -- lane each vehicle must reach, -1 when free
cfg     : (18,) float   -- see ``C_*`` indices
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

P_TA0, P_TA1, P_TA2, P_KP_PSI, P_KP_Y, P_POLITE, P_B_SAFE, P_A_MIN, P_HALF_LEN = range(9)
N_PARAMS = 9

(C_V0, C_D0, C_TGAP, C_LANE_W, C_N_LANES, C_DT, C_N_INNER, C_V_MIN, C_V_MAX,
 C_LEN, C_WID, C_EGO_KV, C_V_MIN_CTRL, C_MOBIL, C_LANE_CHANGES, C_SETTLE, C_BRANCH_X,
 C_SPEED_STEP) = range(18)
N_CFG = 18

NO_OP, RIGHT_LANE, LEFT_LANE, FASTER, SLOWER = range(5)


@njit(cache=True)
def neg_part(x):
    return x if x < 0.0 else 0.0


@njit(cache=True)
def bicycle_step(x, y, v, psi, a, beta, dt, half_length):
    """Explicit Euler step of the kinematic bicycle; speed is clamped at 0."""
    nx = x + dt * v * math.cos(psi)
    ny = y + dt * v * math.sin(psi)
    npsi = psi + dt * (v / half_length) * math.tan(beta)
    nv = v + dt * a
    if nv < 0.0:
        nv = 0.0
    return nx, ny, nv, npsi


@njit(cache=True)
def linear_accel(ta0, ta1, ta2, v0, d0, tgap, v, x, has_front, vf, xf):
    a = ta0 * (v0 - v)
    if has_front:
        a += ta1 * neg_part(vf - v)
        a += ta2 * neg_part(xf - x - (d0 + v * tgap))
    return a


@njit(cache=True)
def heading_command(y, psi, v, y_lane, psi_lane, kp_psi, kp_y, v_min_ctrl):
    vc = v if v > v_min_ctrl else v_min_ctrl
    arg = kp_y * (y_lane - y) / vc
    if arg > 1.0:
        arg = 1.0
    elif arg < -1.0:
        arg = -1.0
    return kp_psi * (psi_lane + math.asin(arg) - psi)


@njit(cache=True)
def steering_angle(y, psi, v, y_lane, psi_lane, kp_psi, kp_y, half_length, v_min_ctrl):
    vc = v if v > v_min_ctrl else v_min_ctrl
    cmd = heading_command(y, psi, v, y_lane, psi_lane, kp_psi, kp_y, v_min_ctrl)
    return math.atan(half_length / vc * cmd)


@njit(cache=True)
def lane_of(y, lane_w, n_lanes):
    k = int(math.floor(y / lane_w + 0.5))
    if k < 0:
        return 0
    if k > n_lanes - 1:
        return n_lanes - 1
    return k


@njit(cache=True)
def _occupies(state, lanes, j, lane, lane_w, n_lanes):
    return lanes[j] == lane or lane_of(state[j, 1], lane_w, n_lanes) == lane


@njit(cache=True)
def _ahead(state, i, j):
    return state[j, 0] > state[i, 0] or (state[j, 0] == state[i, 0] and j > i)


@njit(cache=True)
def neighbour_in_lane(state, lanes, i, lane, ahead, lane_w, n_lanes):
    """Closest vehicle ahead of (or behind) ``i`` occupying ``lane``; -1 if none."""
    best = -1
    best_dx = 0.0
    for j in range(state.shape[0]):
        if j == i or not _occupies(state, lanes, j, lane, lane_w, n_lanes):
            continue
        if _ahead(state, i, j) != ahead:
            continue
        dx = abs(state[j, 0] - state[i, 0])
        if best < 0 or dx < best_dx:
            best, best_dx = j, dx
    return best


@njit(cache=True)
def front_vehicle(state, lanes, i, lane_w, n_lanes):
    """Closest vehicle ahead in the target lane or the lane currently driven on."""
    f1 = neighbour_in_lane(state, lanes, i, lanes[i], True, lane_w, n_lanes)
    current = lane_of(state[i, 1], lane_w, n_lanes)
    if current == lanes[i]:
        return f1
    f2 = neighbour_in_lane(state, lanes, i, current, True, lane_w, n_lanes)
    if f1 < 0:
        return f2
    if f2 < 0:
        return f1
    return f1 if state[f1, 0] <= state[f2, 0] else f2


@njit(cache=True)
def model_accel(state, params, cfg, i, f):
    """Longitudinal model acceleration of ``i`` behind ``f`` (``f = -1``: free road)."""
    has_front = f >= 0
    vf = state[f, 2] if has_front else 0.0
    xf = state[f, 0] if has_front else 0.0
    return linear_accel(params[i, P_TA0], params[i, P_TA1], params[i, P_TA2],
                        cfg[C_V0], cfg[C_D0], cfg[C_TGAP],
                        state[i, 2], state[i, 0], has_front, vf, xf)


@njit(cache=True)
def mobil_gain(state, lanes, params, cfg, i, target, mandatory):
    """Evaluate a change of ``i`` to lane ``target``.

    Returns ``(safe, incentive)``; a mandatory change only needs ``safe``.
    """
    lane_w = cfg[C_LANE_W]
    n_lanes = int(cfg[C_N_LANES])
    new_front = neighbour_in_lane(state, lanes, i, target, True, lane_w, n_lanes)
    new_rear = neighbour_in_lane(state, lanes, i, target, False, lane_w, n_lanes)
    safe = True
    rear_new = 0.0
    if new_rear >= 0:
        rear_new = model_accel(state, params, cfg, new_rear, i)
        safe = rear_new >= -params[new_rear, P_B_SAFE]
    if not safe or mandatory:
        return safe, 0.0
    old_front = front_vehicle(state, lanes, i, lane_w, n_lanes)
    old_rear = neighbour_in_lane(state, lanes, i, lanes[i], False, lane_w, n_lanes)
    gain = model_accel(state, params, cfg, i, new_front) - model_accel(state, params, cfg, i, old_front)
    rear_gain = 0.0
    if new_rear >= 0:
        rear_gain += rear_new - model_accel(state, params, cfg, new_rear, new_front)
    if old_rear >= 0:
        rear_gain += model_accel(state, params, cfg, old_rear, old_front) - model_accel(state, params, cfg, old_rear, i)
    return True, gain + params[i, P_POLITE] * rear_gain


@njit(cache=True)
def mobil_choice(state, lanes, params, cfg, i):
    """0 stay, +1 change to the left lane (index + 1), -1 change right."""
    n_lanes = int(cfg[C_N_LANES])
    for delta in (1, -1):
        target = lanes[i] + delta
        if target < 0 or target >= n_lanes:
            continue
        safe, incentive = mobil_gain(state, lanes, params, cfg, i, target, False)
        if safe and incentive >= params[i, P_A_MIN]:
            return delta
    return 0


@njit(cache=True)
def decide_lanes(state, lanes, params, routes, cfg, out_lanes):
    """Lane decisions of non-ego vehicles at the start of an epoch.

    Vehicles with a route move one lane towards it once past the branch
    point, provided the change is safe for the new follower; free vehicles
    use the full lane-change rule.
    Decisions are taken on the epoch-start snapshot and only once a vehicle
    has settled in its current target lane.
    """
    lane_w = cfg[C_LANE_W]
    for i in range(state.shape[0]):
        out_lanes[i] = lanes[i]
    for i in range(1, state.shape[0]):
        if abs(state[i, 1] - lanes[i] * lane_w) > cfg[C_SETTLE]:
            continue
        if routes[i] >= 0:
            if routes[i] != lanes[i] and state[i, 0] >= cfg[C_BRANCH_X]:
                target = lanes[i] + (1 if routes[i] > lanes[i] else -1)
                safe, _ = mobil_gain(state, lanes, params, cfg, i, target, True)
                if safe:
                    out_lanes[i] = target
        elif cfg[C_MOBIL] > 0.0:
            out_lanes[i] = lanes[i] + mobil_choice(state, lanes, params, cfg, i)


@njit(cache=True)
def resolve_fronts(state, lanes, cfg, out):
    lane_w = cfg[C_LANE_W]
    n_lanes = int(cfg[C_N_LANES])
    out[0] = -1
    for i in range(1, state.shape[0]):
        out[i] = front_vehicle(state, lanes, i, lane_w, n_lanes)


@njit(cache=True)
def ego_controls(state, lanes, target_speed, params, cfg):
    a = cfg[C_EGO_KV] * (target_speed - state[0, 2])
    beta = steering_angle(state[0, 1], state[0, 3], state[0, 2], lanes[0] * cfg[C_LANE_W], 0.0,
                          params[0, P_KP_PSI], params[0, P_KP_Y], params[0, P_HALF_LEN], cfg[C_V_MIN_CTRL])
    return a, beta


@njit(cache=True)
def ego_collides(state, cfg):
    for j in range(1, state.shape[0]):
        if abs(state[0, 0] - state[j, 0]) < cfg[C_LEN] and abs(state[0, 1] - state[j, 1]) < cfg[C_WID]:
            return True
    return False


@njit(cache=True)
def integrate(state, lanes, target_speed, params, fronts, cfg, ego_only):
    """``n_inner`` simultaneous Euler steps in place; returns whether the ego collided."""
    n = 1 if ego_only else state.shape[0]
    dt = cfg[C_DT]
    lane_w = cfg[C_LANE_W]
    accel = np.empty(n)
    beta = np.empty(n)
    crashed = False
    for _ in range(int(cfg[C_N_INNER])):
        accel[0], beta[0] = ego_controls(state, lanes, target_speed, params, cfg)
        for i in range(1, n):
            accel[i] = model_accel(state, params, cfg, i, fronts[i])
            beta[i] = steering_angle(state[i, 1], state[i, 3], state[i, 2], lanes[i] * lane_w, 0.0,
                                     params[i, P_KP_PSI], params[i, P_KP_Y], params[i, P_HALF_LEN],
                                     cfg[C_V_MIN_CTRL])
        for i in range(n):
            x, y, v, psi = bicycle_step(state[i, 0], state[i, 1], state[i, 2], state[i, 3],
                                        accel[i], beta[i], dt, params[i, P_HALF_LEN])
            state[i, 0] = x
            state[i, 1] = y
            state[i, 2] = v
            state[i, 3] = psi
        if not ego_only and ego_collides(state, cfg):
            crashed = True
    return crashed


@njit(cache=True)
def run_epoch(state, lanes, target_speed, params, routes, fixed_fronts, use_fixed, cfg):
    """Advance one decision epoch. Returns ``(state', lanes', crashed)``."""
    new_lanes = lanes.copy()
    if cfg[C_LANE_CHANGES] > 0.0 and not use_fixed:
        decide_lanes(state, lanes, params, routes, cfg, new_lanes)
        new_lanes[0] = lanes[0]
    if use_fixed:
        fronts = fixed_fronts
    else:
        fronts = np.empty(state.shape[0], dtype=np.int64)
        resolve_fronts(state, new_lanes, cfg, fronts)
    out = state.copy()
    crashed = integrate(out, new_lanes, target_speed, params, fronts, cfg, False)
    return out, new_lanes, crashed


@njit(cache=True)
def ego_epoch_batch(ego_states, ego_lanes, target_speeds, params, cfg, out_inner):
    """Ego-only epoch for a batch of ego states.

    ``out_inner[b, k]`` receives the state after inner step ``k + 1``.
    """
    n_inner = int(cfg[C_N_INNER])
    tmp = np.empty((1, 4))
    lane = np.empty(1, dtype=np.int64)
    fronts = np.full(1, -1, dtype=np.int64)
    for b in range(ego_states.shape[0]):
        tmp[0, :] = ego_states[b, :]
        lane[0] = ego_lanes[b]
        cfg_one = cfg.copy()
        cfg_one[C_N_INNER] = 1.0
        for k in range(n_inner):
            integrate(tmp, lane, target_speeds[b], params, fronts, cfg_one, True)
            out_inner[b, k, :] = tmp[0, :]


@njit(cache=True)
def ego_targets(lane, speed, action, cfg):
    """Target lane and speed of the ego after a tactical action."""
    if action == FASTER:
        speed = min(speed + cfg[C_SPEED_STEP], cfg[C_V_MAX])
    elif action == SLOWER:
        speed = max(speed - cfg[C_SPEED_STEP], cfg[C_V_MIN])
    elif action == LEFT_LANE:
        lane = min(lane + 1, int(cfg[C_N_LANES]) - 1)
    elif action == RIGHT_LANE:
        lane = max(lane - 1, 0)
    return lane, speed


@njit(cache=True)
def successors(states, lanes, speeds, crashed, params, routes, fixed_fronts, use_fixed, cfg, n_actions,
               out_states, out_lanes, out_speeds, out_crashed):
    """Epoch successors of ``M`` worlds (one per model) under every action.

    ``states[m]`` is advanced by model ``m`` (``params[m]``, ``routes[m]``);
    outputs are indexed ``[k, m]``.
    """
    for m in range(states.shape[0]):
        for k in range(n_actions):
            lane_row = lanes[m].copy()
            lane_row[0], speed = ego_targets(lanes[m, 0], speeds[m], k, cfg)
            st, nl, hit = run_epoch(states[m], lane_row, speed, params[m], routes[m],
                                    fixed_fronts, use_fixed, cfg)
            out_states[k, m] = st
            out_lanes[k, m] = nl
            out_speeds[k, m] = speed
            out_crashed[k, m] = crashed[m] or hit
