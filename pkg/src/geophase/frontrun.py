"""A classical trader whose cycle is front-run by a high-frequency trader.

Both traders move one shared quote. The high-frequency trader buys
``tau1`` ticks before the classical buy and sells ``tau2`` ticks after it,
so the fixed event order is: h buys, c buys, h sells, c sells.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from geophase.core import MarketParams, PreconditionError, execution_price
from geophase.discrete import _write_rows


@dataclass(frozen=True)
class TwoTraderState:
    y_c: float
    y_h: float
    s: float
    z_c: float
    z_h: float


@dataclass(frozen=True)
class FrontrunSpec:
    k_c: float
    k_h: float
    t_cb: int
    t_cs: int
    tau1: int
    tau2: int

    def __post_init__(self) -> None:
        if self.k_c <= 0 or self.k_h < 0:
            raise PreconditionError(f"need k_c > 0 and k_h >= 0, got k_c={self.k_c}, k_h={self.k_h}")
        if self.tau1 <= 0 or self.tau2 <= 0:
            raise PreconditionError(f"need tau1, tau2 > 0, got {self.tau1}, {self.tau2}")
        if self.t_hb < 0:
            raise PreconditionError(f"front-run buy tick t_cb - tau1 = {self.t_hb} is negative")
        if not self.t_hs < self.t_cs:
            raise PreconditionError(
                f"front-run sell tick t_cb + tau2 = {self.t_hs} must precede t_cs = {self.t_cs}")

    @property
    def t_hb(self) -> int:
        return self.t_cb - self.tau1

    @property
    def t_hs(self) -> int:
        return self.t_cb + self.tau2


@dataclass(frozen=True)
class TwoTraderTrajectory:
    u_c: np.ndarray
    u_h: np.ndarray
    w: np.ndarray
    y_c: np.ndarray
    y_h: np.ndarray
    s: np.ndarray
    z_c: np.ndarray
    z_h: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.u_c)

    def state(self, i: int) -> TwoTraderState:
        return TwoTraderState(float(self.y_c[i]), float(self.y_h[i]), float(self.s[i]),
                              float(self.z_c[i]), float(self.z_h[i]))

    def cash_deltas(self) -> tuple[float, float]:
        return float(self.z_c[-1] - self.z_c[0]), float(self.z_h[-1] - self.z_h[0])

    def write_csv(self, path: str | Path) -> None:
        rows = []
        for i in range(self.horizon + 1):
            uc = repr(float(self.u_c[i])) if i < self.horizon else ""
            uh = repr(float(self.u_h[i])) if i < self.horizon else ""
            rows.append([i, uc, uh] + [repr(float(a[i])) for a in
                                       (self.y_c, self.y_h, self.s, self.z_c, self.z_h)])
        _write_rows(path, ["tick", "u_c", "u_h", "y_c", "y_h", "s", "z_c", "z_h"], rows)


def frontrun_inputs(spec: FrontrunSpec, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    if horizon <= spec.t_cs:
        raise PreconditionError(f"horizon {horizon} must exceed t_cs = {spec.t_cs}")
    u_c = np.zeros(horizon)
    u_h = np.zeros(horizon)
    u_c[spec.t_cb], u_c[spec.t_cs] = spec.k_c, -spec.k_c
    if spec.k_h > 0:
        u_h[spec.t_hb], u_h[spec.t_hs] = spec.k_h, -spec.k_h
    return u_c, u_h


def simulate_two_traders(spec: FrontrunSpec, params: MarketParams, horizon: int,
                         drifts: Sequence[float] | None = None) -> TwoTraderTrajectory:
    u_c, u_h = frontrun_inputs(spec, horizon)
    w = np.zeros(horizon) if drifts is None else np.asarray(drifts, dtype=float)
    if w.shape != (horizon,):
        raise PreconditionError(f"drift length {w.shape} does not match horizon {horizon}")
    impact, q, c = params.impact, params.q, params.c
    y = {"c": 0.0, "h": 0.0}
    z = {"c": 0.0, "h": 0.0}
    s = params.s0
    out = {key: [v] for key, v in (("y_c", 0.0), ("y_h", 0.0), ("s", s), ("z_c", 0.0), ("z_h", 0.0))}
    for i in range(horizon):
        ds = w[i]
        for who, u in (("c", u_c[i]), ("h", u_h[i])):
            if u != 0:
                y[who] += u
                z[who] = z[who] - execution_price(s, u, q) * u - c
                ds += impact(u)
        s = s + ds
        out["y_c"].append(y["c"])
        out["y_h"].append(y["h"])
        out["s"].append(s)
        out["z_c"].append(z["c"])
        out["z_h"].append(z["h"])
    return TwoTraderTrajectory(u_c, u_h, w, *(np.array(out[key]) for key in ("y_c", "y_h", "s", "z_c", "z_h")))


def closed_form_frontrun(k_c: float, k_h: float, r: float) -> tuple[float, float]:
    """Cash deltas ``(classical, high-frequency)`` for linear impact, no spread, fee or drift."""
    return r * k_c * (k_c - k_h), r * k_h * (k_c + k_h)
