"""Experiment configuration: JSON file, per-experiment defaults and ``--set`` overrides."""

from __future__ import annotations

import copy
import itertools
import json
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from geophase.core import LinearImpact, MarketParams, SignedPowerImpact
from geophase.discrete import Direction

EXPERIMENTS = (
    "cycle", "sellbuy", "drift", "spread", "montecarlo", "frontrun",
    "cont-plain", "cont-delay", "cont-spread", "cont-delayspread",
)


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MarketConfig(_Strict):
    r: float = Field(0.1, ge=0)
    gamma: Optional[float] = Field(None, gt=0, description="signed-power exponent; linear impact when null")
    q: float = Field(0.0, ge=0)
    c: float = Field(0.0, ge=0)
    sigma: float = Field(0.0, ge=0)
    s0: float = 100.0

    def params(self) -> MarketParams:
        impact = LinearImpact(self.r) if self.gamma is None else SignedPowerImpact(self.r, self.gamma)
        return MarketParams(impact=impact, q=self.q, c=self.c, sigma=self.sigma, s0=self.s0)


class CycleConfig(_Strict):
    t_b: int = Field(20, ge=0)
    t_s: int = Field(80, ge=1)
    k: float = Field(1.0, gt=0)
    horizon: int = Field(100, ge=1)
    direction: Direction = Direction.BUY_THEN_SELL
    period: Optional[int] = Field(None, ge=1, description="repeat the cycle every `period` ticks")


class ScheduleConfig(_Strict):
    mean_interarrival: float = Field(20.0, gt=0)
    mean_hold: float = Field(2.0, gt=0)
    k: float = Field(1.0, gt=0)
    horizon: int = Field(2000, ge=1)
    allow_short: bool = False


class FrontrunConfig(_Strict):
    k_c: float = Field(1.0, gt=0)
    k_h: float = Field(1.0, ge=0)
    t_cb: int = 40
    t_cs: int = 80
    tau1: int = Field(5, ge=1)
    tau2: int = Field(5, ge=1)
    horizon: int = Field(100, ge=1)


class ContinuousConfig(_Strict):
    r: float = Field(0.1, ge=0)
    tau: float = Field(0.25, ge=0)
    q: float = Field(0.2, ge=0)
    s0: float = 1.0
    signal: Literal["sinusoid", "trapezoid"] = "sinusoid"
    amplitude: float = 1.0
    period: float = Field(1.0, gt=0)
    cycles: int = Field(3, ge=1)
    k: float = Field(1.0, gt=0)
    ramp: float = Field(0.1, ge=0)
    hold: float = Field(0.3, ge=0)
    dt: float = Field(1e-3, gt=0)


class ExperimentConfig(_Strict):
    experiment: Literal[EXPERIMENTS]  # type: ignore[valid-type]
    market: MarketConfig = MarketConfig()
    cycle: CycleConfig = CycleConfig()
    schedule: ScheduleConfig = ScheduleConfig()
    frontrun: FrontrunConfig = FrontrunConfig()
    continuous: ContinuousConfig = ContinuousConfig()
    trials: int = Field(1000, ge=1)
    base_seed: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)
    output_dir: str = "out"
    sweep: Dict[str, List[Any]] = Field(default_factory=dict)


DEFAULTS: dict[str, dict] = {
    "sellbuy": {"cycle": {"direction": "sell_then_buy"}},
    "drift": {"market": {"sigma": 0.01}, "cycle": {"t_b": 5, "t_s": 10, "period": 20, "horizon": 400}},
    "spread": {
        "cycle": {"t_b": 5, "t_s": 10, "period": 20, "horizon": 200},
        "sweep": {"market.q": [0.0, 0.05, 0.3]},
    },
    "montecarlo": {"market": {"q": 0.02, "c": 0.01, "sigma": 0.002}},
    "cont-plain": {"continuous": {"q": 0.0, "tau": 0.0}},
    "cont-delay": {"continuous": {"q": 0.0, "cycles": 1}},
    "cont-spread": {"continuous": {"tau": 0.0, "signal": "trapezoid", "cycles": 1, "dt": 1e-4}},
    "cont-delayspread": {
        "continuous": {"cycles": 1, "dt": 1e-4},
        "sweep": {"continuous.q": [0.0, 0.01, 0.02, 0.03, 0.05]},
    },
}


def parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_override(item: str) -> tuple[str, Any]:
    key, sep, value = item.partition("=")
    if not sep or not key:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    return key.strip(), parse_value(value)


def set_dotted(tree: dict, key: str, value: Any) -> None:
    if key.startswith("sweep."):
        tree.setdefault("sweep", {})[key[len("sweep."):]] = value
        return
    parts = key.split(".")
    node = tree
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"{key}: {part} is not a section")
        node = child
    node[parts[-1]] = value


def deep_merge(base: dict, update: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict) and key != "sweep":
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _format_error(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{loc}: {e['msg']}")
    return "; ".join(lines)


def validate(raw: dict) -> ExperimentConfig:
    try:
        cfg = ExperimentConfig.model_validate(raw)
    except ValidationError as err:
        raise ConfigError(_format_error(err)) from None
    probe = cfg.model_dump(mode="json")
    for key, values in cfg.sweep.items():
        if not values:
            raise ConfigError(f"sweep.{key}: empty value list")
        section, _, field = key.partition(".")
        if section not in probe or not isinstance(probe[section], dict) or field not in probe[section]:
            raise ConfigError(f"sweep.{key}: unknown field")
    return cfg


def resolve(experiment: str, file_cfg: dict | None, overrides: list[tuple[str, Any]]) -> ExperimentConfig:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown name {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    file_cfg = dict(file_cfg or {})
    if file_cfg.get("experiment", experiment) != experiment:
        raise ConfigError(f"experiment: config file names {file_cfg['experiment']!r}, command line {experiment!r}")
    raw = deep_merge(DEFAULTS.get(experiment, {}), file_cfg)
    raw["experiment"] = experiment
    for key, value in overrides:
        set_dotted(raw, key, value)
    return validate(raw)


def expand_sweep(cfg: ExperimentConfig) -> list[tuple[dict, ExperimentConfig]]:
    """Cartesian product of swept values, keys in sorted order."""
    if not cfg.sweep:
        return [({}, cfg)]
    keys = sorted(cfg.sweep)
    base = cfg.model_dump(mode="json")
    base["sweep"] = {}
    points = []
    for combo in itertools.product(*(cfg.sweep[k] for k in keys)):
        raw = copy.deepcopy(base)
        for key, value in zip(keys, combo):
            set_dotted(raw, key, value)
        points.append((dict(zip(keys, combo)), validate(raw)))
    return points
