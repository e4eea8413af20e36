from .env import (
    AmbiguityExplosion,
    BehaviorParams,
    EgoAction,
    FrozenContext,
    HighwayAmbiguity,
    HighwayModel,
    N_ACTIONS,
    Road,
    Scenario,
    VehicleState,
    World,
    bicycle_step,
    collides,
    env_step,
    front_of,
    heading_rate,
    lateral_steering,
    linearized_heading_rate,
    longitudinal_accel,
    make_ambiguity,
    mobil_decision,
    reward,
    reward_lower_bound,
)
from .scenario import build_scenario, make_road, theta_box

__all__ = [
    "AmbiguityExplosion",
    "BehaviorParams",
    "EgoAction",
    "FrozenContext",
    "HighwayAmbiguity",
    "HighwayModel",
    "N_ACTIONS",
    "Road",
    "Scenario",
    "VehicleState",
    "World",
    "bicycle_step",
    "build_scenario",
    "collides",
    "env_step",
    "front_of",
    "heading_rate",
    "lateral_steering",
    "linearized_heading_rate",
    "longitudinal_accel",
    "make_ambiguity",
    "make_road",
    "mobil_decision",
    "reward",
    "reward_lower_bound",
    "theta_box",
]
