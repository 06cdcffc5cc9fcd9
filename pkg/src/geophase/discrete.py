"""Deterministic single-trader dynamics on a unit tick grid.

One tick advances inventory, quote and cash together::

    y' = y + u
    s' = s + w + impact(u)
    z' = z - v(s, u) * u - c * [u != 0]

where ``v`` is the ask (buy) or bid (sell) around the pre-trade quote.
Inventory accumulates the trade whether or not the quote drifts.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from geophase.core import Impact, MarketParams, PreconditionError, SystemState, execution_price

CLOSED_SHAPE_TOL = 1e-9


class Direction(str, enum.Enum):
    BUY_THEN_SELL = "buy_then_sell"
    SELL_THEN_BUY = "sell_then_buy"

    @property
    def sign(self) -> int:
        return 1 if self is Direction.BUY_THEN_SELL else -1


@dataclass(frozen=True)
class CycleSpec:
    """Enter a position of ``k`` shares at ``t_b`` and exit it at ``t_s``."""

    t_b: int
    t_s: int
    k: float
    direction: Direction = Direction.BUY_THEN_SELL

    def __post_init__(self) -> None:
        if not 0 <= self.t_b < self.t_s:
            raise PreconditionError(f"cycle needs 0 <= t_b < t_s, got t_b={self.t_b}, t_s={self.t_s}")
        if not (math.isfinite(self.k) and self.k > 0):
            raise PreconditionError(f"cycle size k must be > 0, got {self.k}")

    @property
    def hold(self) -> int:
        return self.t_s - self.t_b


@dataclass(frozen=True)
class Trajectory:
    """Sampled path: ``len(y) == len(u) + 1``; ``u[i]`` and ``w[i]`` act at tick ``i``."""

    y: np.ndarray
    s: np.ndarray
    z: np.ndarray
    u: np.ndarray
    w: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.u)
        if len(self.w) != n or not (len(self.y) == len(self.s) == len(self.z) == n + 1):
            raise PreconditionError("trajectory arrays have inconsistent lengths")

    @property
    def horizon(self) -> int:
        return len(self.u)

    @property
    def ticks(self) -> np.ndarray:
        return np.arange(self.horizon + 1)

    @property
    def states(self) -> list[SystemState]:
        return [SystemState(float(a), float(b), float(c)) for a, b, c in zip(self.y, self.s, self.z)]

    @property
    def initial(self) -> SystemState:
        return SystemState(float(self.y[0]), float(self.s[0]), float(self.z[0]))

    @property
    def final(self) -> SystemState:
        return SystemState(float(self.y[-1]), float(self.s[-1]), float(self.z[-1]))

    def write_csv(self, path: str | Path) -> None:
        """Columns ``tick,u,w,y,s,z``; the last row has no input so ``u`` and ``w`` are blank."""
        rows = []
        for i in range(self.horizon + 1):
            u = repr(float(self.u[i])) if i < self.horizon else ""
            w = repr(float(self.w[i])) if i < self.horizon else ""
            rows.append([i, u, w, repr(float(self.y[i])), repr(float(self.s[i])), repr(float(self.z[i]))])
        _write_rows(path, ["tick", "u", "w", "y", "s", "z"], rows)


def _write_rows(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _advance(y: float, s: float, z: float, u: float, w: float,
             impact: Impact, q: float, c: float) -> tuple[float, float, float]:
    if u == 0:
        return y, s + w, z
    return y + u, s + w + impact(u), z - execution_price(s, u, q) * u - c


def step(state: SystemState, u: float, w: float, params: MarketParams) -> SystemState:
    y, s, z = _advance(state.y, state.s, state.z, u, w, params.impact, params.q, params.c)
    return SystemState(y, s, z)


def make_cycle_input(cycles: Sequence[CycleSpec], horizon: int) -> np.ndarray:
    """Input sequence with ``+-k`` at each cycle's entry and exit tick, zero elsewhere."""
    u = np.zeros(horizon)
    ordered = sorted(cycles, key=lambda cy: cy.t_b)
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.t_b <= prev.t_s:
            raise PreconditionError(
                f"cycles overlap: [{prev.t_b}, {prev.t_s}] and [{cur.t_b}, {cur.t_s}]")
    for cy in ordered:
        if cy.t_s >= horizon:
            raise PreconditionError(f"cycle tick t_s={cy.t_s} outside horizon {horizon}")
        u[cy.t_b] = cy.direction.sign * cy.k
        u[cy.t_s] = -cy.direction.sign * cy.k
    return u


def simulate(initial: SystemState, inputs: Sequence[float], drifts: Sequence[float],
             params: MarketParams) -> Trajectory:
    u = np.asarray(inputs, dtype=float)
    w = np.asarray(drifts, dtype=float)
    if u.shape != w.shape or u.ndim != 1:
        raise PreconditionError(f"inputs and drifts differ in length: {u.shape} vs {w.shape}")
    n = len(u)
    ys, ss, zs = [initial.y], [initial.s], [initial.z]
    y, s, z = initial.y, initial.s, initial.z
    impact, q, c = params.impact, params.q, params.c
    for ui, wi in zip(u.tolist(), w.tolist()):
        y, s, z = _advance(y, s, z, ui, wi, impact, q, c)
        ys.append(y)
        ss.append(s)
        zs.append(z)
    traj = Trajectory(np.array(ys), np.array(ss), np.array(zs), u, w)
    if n and not (np.isfinite(traj.y).all() and np.isfinite(traj.s).all() and np.isfinite(traj.z).all()):
        raise PreconditionError("simulation produced non-finite state values")
    return traj


def closed_form_phase(k: float, params: MarketParams) -> float:
    """Cash gained by one isolated cycle of size ``k`` without drift."""
    if k == 0:
        return 0.0
    return params.impact(k) * k - params.q * k - 2 * params.c


def phase(traj: Trajectory) -> float:
    return float(traj.z[-1] - traj.z[0])


def signed_area(y: Sequence[float], s: Sequence[float]) -> float:
    """Shoelace value of the closed polyline, oriented as the line integral of ``s dy``.

    A loop traversed counterclockwise in the (y, s) plane gives a negative value.
    """
    y = np.asarray(y, dtype=float)
    s = np.asarray(s, dtype=float)
    y1, s1 = np.roll(y, -1), np.roll(s, -1)
    return float(0.5 * np.sum(s * y1 - s1 * y))


def shape_area(traj: Trajectory) -> float:
    gap = math.hypot(traj.y[-1] - traj.y[0], traj.s[-1] - traj.s[0])
    if gap > CLOSED_SHAPE_TOL:
        raise PreconditionError(f"shape path is not closed: endpoint gap {gap:.3e}")
    return signed_area(traj.y, traj.s)
