"""Domain types shared by the discrete, stochastic and two-trader engines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union


class PreconditionError(ValueError):
    """An input violates a numerical precondition of the model."""


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise PreconditionError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class SystemState:
    """Inventory ``y``, quote ``s`` and cash ``z`` of a single trader.

    Negative quotes are allowed: the linear model has no price floor.
    """

    y: float
    s: float
    z: float

    def __post_init__(self) -> None:
        _require_finite(y=self.y, s=self.s, z=self.z)


@dataclass(frozen=True)
class LinearImpact:
    """Quote displacement ``r * u``."""

    r: float

    def __post_init__(self) -> None:
        _require_finite(r=self.r)
        if self.r < 0:
            raise PreconditionError(f"impact coefficient r must be >= 0, got {self.r}")

    def __call__(self, u: float) -> float:
        return self.r * u


@dataclass(frozen=True)
class SignedPowerImpact:
    """Quote displacement ``sign(u) * r * |u|**gamma``."""

    r: float
    gamma: float

    def __post_init__(self) -> None:
        _require_finite(r=self.r, gamma=self.gamma)
        if self.r < 0:
            raise PreconditionError(f"impact coefficient r must be >= 0, got {self.r}")
        if self.gamma <= 0:
            raise PreconditionError(f"exponent gamma must be > 0, got {self.gamma}")

    def __call__(self, u: float) -> float:
        # copysign keeps f(-u) == -f(u) bit for bit
        return math.copysign(self.r * abs(u) ** self.gamma, u)


# Any odd callable with f(u) > 0 for u > 0 is accepted by the engines.
Impact = Union[LinearImpact, SignedPowerImpact, Callable[[float], float]]


def impact_eval(f: Impact, u: float) -> float:
    return f(u)


def execution_price(s: float, u: float, q: float) -> float:
    """Ask ``s + q/2`` for a buy, bid ``s - q/2`` for a sell."""
    if u > 0:
        return s + q / 2
    if u < 0:
        return s - q / 2
    raise PreconditionError("a null trade (u = 0) has no execution price")


@dataclass(frozen=True)
class MarketParams:
    impact: Impact = field(default_factory=lambda: LinearImpact(0.1))
    q: float = 0.0
    c: float = 0.0
    sigma: float = 0.0
    s0: float = 100.0

    def __post_init__(self) -> None:
        _require_finite(q=self.q, c=self.c, sigma=self.sigma, s0=self.s0)
        for name in ("q", "c", "sigma"):
            if getattr(self, name) < 0:
                raise PreconditionError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def r(self) -> float:
        """Linear coefficient, when the impact function has one."""
        r = getattr(self.impact, "r", None)
        if r is None:
            raise AttributeError("impact function carries no coefficient r")
        return r


@dataclass(frozen=True)
class TradeOrder:
    tick: int
    u: float

    def __post_init__(self) -> None:
        if self.tick < 0:
            raise PreconditionError(f"tick must be >= 0, got {self.tick}")
        _require_finite(u=self.u)
