"""JSON configuration for highway scenarios, planners and the benchmark.

Every section rejects unknown keys so a typo fails loudly instead of being
silently ignored.
"""
from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator


class ConfigError(ValueError):
    """Invalid or unreadable configuration document."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class RoadConfig(_Strict):
    n_lanes: int = Field(3, ge=1)
    lane_width: float = Field(4.0, gt=0)
    v0: float = Field(25.0, gt=0)
    d0: float = Field(10.0, ge=0)
    time_gap: float = Field(1.5, ge=0)
    v_min: float = 10.0
    v_max: float = 30.0
    speed_step: float = Field(5.0, gt=0)
    vehicle_length: float = Field(5.0, gt=0)
    vehicle_width: float = Field(2.0, gt=0)
    dt: float = Field(0.1, gt=0)
    n_inner: int = Field(10, ge=1)
    ego_speed_gain: float = Field(1.0 / 0.6, gt=0)
    v_min_ctrl: float = Field(1.0, gt=0)
    settle_tolerance: float = Field(0.5, gt=0)
    ego_route: list[int] = []
    branch_x: Optional[float] = None

    @model_validator(mode="after")
    def _speeds(self):
        if not self.v_min < self.v_max:
            raise ValueError("v_min must be below v_max")
        return self


class BehaviorConfig(_Strict):
    theta_a: tuple[float, float, float] = (0.5, 1.0, 0.5)
    kp_psi: float = Field(2.0, gt=0)
    kp_y: float = Field(0.2, gt=0)
    politeness: float = 0.5
    b_safe: float = Field(4.0, gt=0)
    a_min: float = 0.2
    half_length: float = Field(2.5, gt=0)

    @field_validator("theta_a")
    @classmethod
    def _positive(cls, v):
        if min(v) <= 0:
            raise ValueError("theta_a gains must be positive")
        return v


class BehaviorOverride(_Strict):
    theta_a: Optional[tuple[float, float, float]] = None
    kp_psi: Optional[float] = None
    kp_y: Optional[float] = None
    politeness: Optional[float] = None
    b_safe: Optional[float] = None
    a_min: Optional[float] = None
    half_length: Optional[float] = None


class EgoConfig(_Strict):
    x: float = 0.0
    lane: int = 1
    speed: float = 25.0
    target_speed: Optional[float] = None
    behavior: BehaviorOverride = BehaviorOverride()


class VehicleConfig(_Strict):
    x: float
    lane: int
    speed: float = 25.0
    route_options: list[Optional[int]] = [None]
    behavior: BehaviorOverride = BehaviorOverride()

    @field_validator("route_options")
    @classmethod
    def _nonempty(cls, v):
        if not v:
            raise ValueError("route_options needs at least one entry (null for free driving)")
        return v


class InitConfig(_Strict):
    """Per-seed perturbation of the initial traffic."""

    x_jitter: float = Field(0.0, ge=0)
    speed_jitter: float = Field(0.0, ge=0)


class AmbiguityConfig(_Strict):
    mode: Literal["discrete", "continuous"] = "discrete"
    theta_a_scale: tuple[float, float] = (0.7, 1.3)
    kp_psi_scale: tuple[float, float] = (1.0, 1.0)
    kp_y_scale: tuple[float, float] = (1.0, 1.0)
    mobil: bool = True

    @field_validator("theta_a_scale", "kp_psi_scale", "kp_y_scale")
    @classmethod
    def _ordered(cls, v):
        if not (0 < v[0] <= v[1]):
            raise ValueError("scale bounds must satisfy 0 < lower <= upper")
        return v


class DropAgentConfig(_Strict):
    gamma: float = Field(0.8, ge=0, lt=1)
    budget: int = Field(1000, ge=1)


class IrcAgentConfig(_Strict):
    horizon: int = Field(5, ge=1)
    gamma: float = Field(0.8, ge=0, lt=1)
    search: Literal["exhaustive", "cross_entropy"] = "exhaustive"
    population: int = Field(64, ge=2)
    elite: int = Field(8, ge=1)
    iterations: int = Field(10, ge=1)


class BenchConfig(_Strict):
    episodes: int = Field(100, ge=1)
    first_seed: int = 0
    max_epochs: int = Field(15, ge=1)
    agents: list[str] = ["oracle", "nominal", "drop", "irc"]

    @field_validator("agents")
    @classmethod
    def _agents(cls, v):
        if not v:
            raise ValueError("at least one agent is required")
        return v


class Config(_Strict):
    road: RoadConfig = RoadConfig()
    behavior: BehaviorConfig = BehaviorConfig()
    ego: EgoConfig = EgoConfig()
    vehicles: list[VehicleConfig] = []
    init: InitConfig = InitConfig()
    ambiguity: AmbiguityConfig = AmbiguityConfig()
    drop: DropAgentConfig = DropAgentConfig()
    irc: IrcAgentConfig = IrcAgentConfig()
    bench: BenchConfig = BenchConfig()

    @model_validator(mode="after")
    def _lanes(self):
        n = self.road.n_lanes
        lanes = [self.ego.lane] + [v.lane for v in self.vehicles]
        routes = [r for v in self.vehicles for r in v.route_options if r is not None] + list(self.road.ego_route)
        if any(not 0 <= k < n for k in lanes + routes):
            raise ValueError(f"lane indices must lie in [0, {n})")
        return self


def _describe(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{loc}: {e['msg']}")
    return "; ".join(lines)


def parse_config(data: dict) -> Config:
    try:
        return Config.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_describe(err)) from None


def load_config(path: Optional[str | Path] = None) -> Config:
    """Read a JSON config; ``None`` loads the packaged default."""
    try:
        if path is None:
            text = resources.files("robustplan").joinpath("configs/default.json").read_text()
            where = "default.json"
        else:
            text = Path(path).read_text()
            where = str(path)
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{where}: line {err.lineno} column {err.colno}: {err.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: top level must be an object")
    try:
        return parse_config(data)
    except ConfigError as err:
        raise ConfigError(f"{where}: {err}") from None


def road_branch_x(cfg: RoadConfig) -> float:
    return -math.inf if cfg.branch_x is None else cfg.branch_x
