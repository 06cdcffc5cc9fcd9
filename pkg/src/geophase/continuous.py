"""Continuous-time counterpart of the trading model.

    dy/dt = u(t)
    ds/dt = r * u(t - tau)        (tau = 0 for the undelayed variants)
    dz/dt = -s(t) * u(t)          (plain)
    dz/dt = -(s(t) +- q/2) * u(t) (spread: ask when buying, bid when selling)

Smooth variants use classical RK4 on a fixed grid. The delayed input is
read from a buffer of input samples on the half-step grid, with the
system at rest (u = 0) before t = 0. Spread variants have a right-hand
side that jumps where u changes sign, so they use explicit Euler steps
with the branch picked by the sign of u at the start of each step. With
q = 0 the jump vanishes and the smooth RK4 path is used instead.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from geophase.core import PreconditionError
from geophase.discrete import _write_rows, signed_area

GRID_TOL = 1e-9
CLOSED_PATH_RTOL = 1e-6


class Variant(str, enum.Enum):
    PLAIN = "plain"
    DELAYED = "delayed"
    SPREAD = "spread"
    DELAYED_SPREAD = "delayed_spread"

    @property
    def delayed(self) -> bool:
        return self in (Variant.DELAYED, Variant.DELAYED_SPREAD)

    @property
    def spread(self) -> bool:
        return self in (Variant.SPREAD, Variant.DELAYED_SPREAD)


@dataclass(frozen=True)
class ContinuousModel:
    r: float
    variant: Variant = Variant.PLAIN
    tau: float = 0.0
    q: float = 0.0
    s0: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.r < 0 or self.q < 0:
            raise PreconditionError(f"need r >= 0 and q >= 0, got r={self.r}, q={self.q}")
        if self.variant.delayed and not self.tau > 0:
            raise PreconditionError(f"{self.variant.value} model needs tau > 0, got {self.tau}")
        if not self.variant.delayed and self.tau != 0:
            raise PreconditionError(f"{self.variant.value} model needs tau = 0, got {self.tau}")


@dataclass(frozen=True)
class Sinusoid:
    """``u(t) = amplitude * sin(2 pi t / period)`` on ``[0, duration)``, zero elsewhere."""

    amplitude: float
    period: float
    duration: float | None = None

    def __post_init__(self) -> None:
        if not self.period > 0:
            raise PreconditionError(f"period must be > 0, got {self.period}")
        if self.duration is None:
            object.__setattr__(self, "duration", self.period)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        u = self.amplitude * np.sin(2 * np.pi * t / self.period)
        return np.where((t >= 0) & (t < self.duration), u, 0.0)


@dataclass(frozen=True)
class TrapezoidCycle:
    """Buy ``k`` shares in one trapezoidal pulse, then sell them in a mirrored one.

    Each pulse ramps up over ``ramp``, holds its peak for ``hold`` and ramps
    down over ``ramp``; the peak rate is ``k / (ramp + hold)``.
    """

    k: float
    ramp: float
    hold: float
    duration: float | None = None

    def __post_init__(self) -> None:
        if self.ramp < 0 or self.hold < 0 or self.ramp + self.hold <= 0:
            raise PreconditionError(f"need ramp, hold >= 0 with a positive sum, got {self.ramp}, {self.hold}")
        if self.duration is None:
            object.__setattr__(self, "duration", self.period)

    @property
    def pulse(self) -> float:
        return 2 * self.ramp + self.hold

    @property
    def period(self) -> float:
        return 2 * self.pulse

    def _pulse(self, tau: np.ndarray) -> np.ndarray:
        peak = self.k / (self.ramp + self.hold)
        if self.ramp == 0:
            return np.where((tau >= 0) & (tau < self.hold), peak, 0.0)
        up = np.clip(tau / self.ramp, 0.0, 1.0)
        down = np.clip((self.pulse - tau) / self.ramp, 0.0, 1.0)
        return peak * np.minimum(up, down)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        phase_t = np.mod(t, self.period)
        u = np.where(phase_t < self.pulse, self._pulse(phase_t), -self._pulse(phase_t - self.pulse))
        return np.where((t >= 0) & (t < self.duration), u, 0.0)


InputSignal = Union[Sinusoid, TrapezoidCycle]


@dataclass(frozen=True)
class ContinuousTrajectory:
    dt: float
    t: np.ndarray
    u: np.ndarray
    y: np.ndarray
    s: np.ndarray
    z: np.ndarray

    def write_csv(self, path: str | Path) -> None:
        rows = ([repr(float(v)) for v in row] for row in zip(self.t, self.u, self.y, self.s, self.z))
        _write_rows(path, ["t", "u", "y", "s", "z"], rows)


def _grid_steps(length: float, dt: float, what: str) -> int:
    n = round(length / dt)
    if abs(n * dt - length) > GRID_TOL * max(1.0, abs(length)):
        raise PreconditionError(f"{what} = {length} is not a multiple of dt = {dt}")
    return n


def integrate(model: ContinuousModel, signal: InputSignal, dt: float, T: float) -> ContinuousTrajectory:
    if not dt > 0:
        raise PreconditionError(f"dt must be > 0, got {dt}")
    n = _grid_steps(T, dt, "T")
    lag = _grid_steps(model.tau, dt, "tau")
    # input samples on the half-step grid; the delayed channel is the same
    # buffer shifted by 2*lag slots, zero before the signal starts
    u_half = np.asarray(signal(np.arange(2 * n + 1) * (dt / 2)), dtype=float)
    if model.variant.delayed:
        ud_half = np.zeros_like(u_half)
        ud_half[2 * lag:] = u_half[:len(u_half) - 2 * lag]
    else:
        ud_half = u_half
    if model.variant.spread and model.q > 0:
        y, s, z = _euler_spread(model, u_half[::2], ud_half[::2], dt)
    else:
        y, s, z = _rk4(model, u_half, ud_half, dt)
    t = np.arange(n + 1) * dt
    return ContinuousTrajectory(dt, t, u_half[::2].copy(), y, s, z)


def _rk4(model: ContinuousModel, u: np.ndarray, ud: np.ndarray, dt: float):
    n = (len(u) - 1) // 2
    r = model.r
    y = np.empty(n + 1)
    s = np.empty(n + 1)
    z = np.empty(n + 1)
    yi, si, zi = 0.0, model.s0, 0.0
    y[0], s[0], z[0] = yi, si, zi
    uu = u.tolist()
    dd = ud.tolist()
    h = dt / 2
    for i in range(n):
        u0, u1, u2 = uu[2 * i], uu[2 * i + 1], uu[2 * i + 2]
        d0, d1, d2 = r * dd[2 * i], r * dd[2 * i + 1], r * dd[2 * i + 2]
        kz1 = -si * u0
        kz2 = -(si + h * d0) * u1
        kz3 = -(si + h * d1) * u1
        kz4 = -(si + dt * d1) * u2
        yi += dt / 6 * (u0 + 4 * u1 + u2)
        si += dt / 6 * (d0 + 4 * d1 + d2)
        zi += dt / 6 * (kz1 + 2 * kz2 + 2 * kz3 + kz4)
        y[i + 1], s[i + 1], z[i + 1] = yi, si, zi
    return y, s, z


def _euler_spread(model: ContinuousModel, u: np.ndarray, ud: np.ndarray, dt: float):
    n = len(u) - 1
    half = model.q / 2
    price_offset = half * np.sign(u[:n])
    y = np.concatenate(([0.0], np.cumsum(dt * u[:n])))
    s = model.s0 + np.concatenate(([0.0], np.cumsum(dt * model.r * ud[:n])))
    z = np.concatenate(([0.0], np.cumsum(-dt * (s[:n] + price_offset) * u[:n])))
    return y, s, z


@dataclass(frozen=True)
class StokesResult:
    phase: float
    line_integral: float
    area: float
    residual: float


def stokes_check(traj: ContinuousTrajectory) -> StokesResult:
    """Compare the cash displacement with the loop integral of ``s dy``.

    With ``dz/dt = -s u`` the cash moves by minus the loop integral; the
    residual measures ``|phase + loop integral|``. ``area`` is the shoelace
    value in the same orientation as the loop integral.
    """
    extent = max(np.ptp(traj.y), np.ptp(traj.s))
    gap = math.hypot(traj.y[-1] - traj.y[0], traj.s[-1] - traj.s[0])
    if gap > CLOSED_PATH_RTOL * extent:
        raise PreconditionError(f"shape path is not closed: endpoint gap {gap:.3e}, extent {extent:.3e}")
    line = float(np.sum(0.5 * (traj.s[1:] + traj.s[:-1]) * np.diff(traj.y)))
    ph = float(traj.z[-1] - traj.z[0])
    return StokesResult(ph, line, signed_area(traj.y, traj.s), abs(ph + line))


def closing_time(model: ContinuousModel, signal: InputSignal) -> float:
    """Time at which the shape path has closed: the delayed quote lags the input by tau."""
    return signal.duration + model.tau


def cycle_phase(model: ContinuousModel, signal: InputSignal, dt: float) -> float:
    traj = integrate(model, signal, dt, closing_time(model, signal))
    return float(traj.z[-1] - traj.z[0])


def spread_cycle_loss(model: ContinuousModel, signal: TrapezoidCycle, dt: float = 1e-4) -> float:
    if model.variant is not Variant.SPREAD:
        raise PreconditionError(f"spread_cycle_loss needs the spread variant, got {model.variant.value}")
    if not isinstance(signal, TrapezoidCycle):
        raise PreconditionError("spread_cycle_loss needs a trapezoid cycle input")
    return cycle_phase(model, signal, dt)


def delayed_spread_phase(model: ContinuousModel, signal: InputSignal, dt: float = 1e-4) -> float:
    if model.variant is not Variant.DELAYED_SPREAD:
        raise PreconditionError(f"delayed_spread_phase needs the delayed_spread variant, got {model.variant.value}")
    return cycle_phase(model, signal, dt)


def sweep_delayed_spread(rs: Iterable[float], taus: Iterable[float], qs: Iterable[float],
                         signal: InputSignal, dt: float) -> list[dict]:
    rows = []
    for r in rs:
        for tau in taus:
            for q in qs:
                model = ContinuousModel(r=r, tau=tau, q=q, variant=Variant.DELAYED_SPREAD)
                rows.append({"r": r, "tau": tau, "q": q, "phase": delayed_spread_phase(model, signal, dt)})
    return rows
