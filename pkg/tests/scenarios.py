"""Random highway scenes for property and acceptance tests."""
from __future__ import annotations

import numpy as np

from robustplan.config import parse_config
from robustplan.highway.env import make_ambiguity
from robustplan.highway.scenario import build_scenario


def random_config(seed: int, lateral: bool = True, n_max: int = 4) -> dict:
    """Up to ``n_max`` vehicles around the ego, each at least the desired
    gap ``d0 + T v`` away from any other vehicle in its lane or its route lane."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, n_max + 1))
    ego_lane = int(rng.integers(0, 3))
    ego_speed = float(rng.uniform(18.0, 28.0))
    placed = [(0.0, ego_lane, ego_lane, ego_speed)]
    vehicles = []
    while len(vehicles) < n:
        lane = int(rng.integers(0, 3))
        route = int(np.clip(lane + rng.integers(-1, 2), 0, 2))
        x = float(rng.uniform(-60.0, 150.0))
        v = float(rng.uniform(15.0, 28.0))
        if any({lane, route} & {pl, pr} and abs(x - px) < 10.0 + 1.5 * max(v, pv)
               for px, pl, pr, pv in placed):
            continue
        placed.append((x, lane, route, v))
        vehicles.append({
            "x": x,
            "lane": lane,
            "speed": v,
            "route_options": [route],
            "behavior": {
                "theta_a": [float(rng.uniform(0.2, 0.8)), float(rng.uniform(0.5, 1.5)), float(rng.uniform(0.2, 0.8))],
                "kp_psi": float(rng.uniform(1.0, 5.0)),
                "kp_y": float(rng.uniform(0.1, 1.0)),
            },
        })
    lo, hi = float(rng.uniform(0.6, 1.0)), float(rng.uniform(1.0, 1.4))
    amb = {"mode": "continuous", "theta_a_scale": [lo, hi]}
    if lateral:
        amb["kp_psi_scale"] = [float(rng.uniform(0.7, 1.0)), float(rng.uniform(1.0, 1.3))]
        amb["kp_y_scale"] = [float(rng.uniform(0.7, 1.0)), float(rng.uniform(1.0, 1.3))]
    return {
        "ego": {"x": 0.0, "lane": ego_lane, "speed": ego_speed},
        "vehicles": vehicles,
        "ambiguity": amb,
    }


def random_ambiguity(seed: int, lateral: bool = True):
    """``(scenario, continuous ambiguity set)`` of a random scene."""
    cfg = parse_config(random_config(seed, lateral))
    scenario = build_scenario(cfg, seed, "continuous")
    return scenario, make_ambiguity(scenario, "continuous")


def degenerate_ambiguity(seed: int):
    """A random scene whose parameter box has zero width."""
    data = random_config(seed)
    data["ambiguity"] = {"mode": "continuous", "theta_a_scale": [1.0, 1.0],
                         "kp_psi_scale": [1.0, 1.0], "kp_y_scale": [1.0, 1.0]}
    scenario = build_scenario(parse_config(data), seed, "continuous")
    return scenario, make_ambiguity(scenario, "continuous")


def random_plan(seed: int, H: int, K: int = 5) -> list[int]:
    return [int(a) for a in np.random.default_rng(seed + 10_000).integers(0, K, size=H)]
