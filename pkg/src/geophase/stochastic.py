"""Quote drift, random cycle schedules and Monte Carlo batteries."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from geophase.core import MarketParams, PreconditionError, SystemState
from geophase.discrete import (
    CycleSpec,
    Direction,
    Trajectory,
    _write_rows,
    make_cycle_input,
    phase,
    simulate,
)

RNG_ALGORITHM = (
    "numpy.random.PCG64; normals by Generator.standard_normal (ziggurat); "
    "exponentials by Generator.standard_exponential (ziggurat); "
    "directions by Generator.random"
)
SEED_RULE = (
    "child(seed, key) = SeedSequence(seed, spawn_key=(key,)).generate_state(2, uint32) "
    "packed as lo + 2**32 * hi; trial seed = child(base_seed, trial); "
    "drift stream = child(trial seed, 0); schedule stream = child(trial seed, 1)"
)
_DRIFT_STREAM = 0
_SCHEDULE_STREAM = 1


def derive_seed(seed: int, key: int) -> int:
    lo, hi = np.random.SeedSequence(seed, spawn_key=(key,)).generate_state(2, np.uint32)
    return int(lo) + (int(hi) << 32)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class ScheduleParams:
    mean_interarrival: float
    mean_hold: float
    k: float
    horizon: int
    allow_short: bool = False

    def __post_init__(self) -> None:
        if not self.mean_interarrival > 0:
            raise PreconditionError(f"mean_interarrival must be > 0, got {self.mean_interarrival}")
        if not (self.mean_hold > 0 and math.isfinite(self.mean_hold)):
            raise PreconditionError(f"mean_hold must be finite and > 0, got {self.mean_hold}")
        if not (self.k > 0 and math.isfinite(self.k)):
            raise PreconditionError(f"k must be > 0, got {self.k}")
        if self.horizon < 1:
            raise PreconditionError(f"horizon must be >= 1, got {self.horizon}")


@dataclass(frozen=True)
class RunSummary:
    z_end: float
    s_end: float
    n_cycles: int
    mean_duration: float
    cum_drift: float
    seed: int


def gen_drift(sigma: float, horizon: int, seed: int) -> np.ndarray:
    """``horizon`` i.i.d. N(0, sigma) quote increments."""
    if sigma < 0:
        raise PreconditionError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return np.zeros(horizon)
    return sigma * _rng(seed).standard_normal(horizon)


def _ticks(rng: np.random.Generator, mean: float) -> int:
    return max(1, math.ceil(mean * rng.standard_exponential()))


def gen_cycle_schedule(sp: ScheduleParams, seed: int) -> list[CycleSpec]:
    """Poisson cycle starts with exponential holds, both rounded up to whole ticks.

    A candidate that starts before the previous kept cycle has closed, or
    that would close at or beyond the horizon, is dropped.
    """
    if math.isinf(sp.mean_interarrival):
        return []
    rng = _rng(seed)
    cycles: list[CycleSpec] = []
    last_exit = -1
    t_b = 0
    while True:
        t_b += _ticks(rng, sp.mean_interarrival)
        if t_b >= sp.horizon:
            break
        hold = _ticks(rng, sp.mean_hold)
        short = sp.allow_short and rng.random() < 0.5
        t_s = t_b + hold
        if t_b <= last_exit or t_s >= sp.horizon:
            continue
        direction = Direction.SELL_THEN_BUY if short else Direction.BUY_THEN_SELL
        cycles.append(CycleSpec(t_b, t_s, sp.k, direction))
        last_exit = t_s
    return cycles


@dataclass(frozen=True)
class Realization:
    trajectory: Trajectory
    cycles: list[CycleSpec]
    seed: int


def realize(sp: ScheduleParams, params: MarketParams, seed: int) -> Realization:
    drifts = gen_drift(params.sigma, sp.horizon, derive_seed(seed, _DRIFT_STREAM))
    cycles = gen_cycle_schedule(sp, derive_seed(seed, _SCHEDULE_STREAM))
    inputs = make_cycle_input(cycles, sp.horizon)
    traj = simulate(SystemState(0.0, params.s0, 0.0), inputs, drifts, params)
    return Realization(traj, cycles, seed)


def summarize(real: Realization) -> RunSummary:
    traj, cycles = real.trajectory, real.cycles
    if traj.y[-1] != traj.y[0]:
        raise PreconditionError(f"inventory not restored: {traj.y[0]} -> {traj.y[-1]}")
    return RunSummary(
        z_end=float(traj.z[-1]),
        s_end=float(traj.s[-1]),
        n_cycles=len(cycles),
        mean_duration=float(np.mean([cy.hold for cy in cycles])) if cycles else 0.0,
        cum_drift=float(np.sum(traj.w)),
        seed=real.seed,
    )


def run_experiment(sp: ScheduleParams, params: MarketParams, seed: int) -> RunSummary:
    return summarize(realize(sp, params, seed))


def hold_interval_identity(traj: Trajectory, cycle: CycleSpec, params: MarketParams) -> float:
    """Residual of ``phase == impact(k)*k + sign*k*sum(w[t_b:t_s])`` for a lone cycle.

    The drift window ends one tick before the exit: the drift drawn at the
    exit tick moves the quote only after the exit trade has been priced.
    """
    if params.q != 0 or params.c != 0:
        raise PreconditionError("hold_interval_identity needs q = c = 0")
    expected_u = make_cycle_input([cycle], traj.horizon)
    if not np.array_equal(expected_u, traj.u):
        raise PreconditionError("trajectory inputs do not match the single given cycle")
    k = cycle.k
    window = math.fsum(traj.w[cycle.t_b:cycle.t_s].tolist())
    predicted = params.impact(k) * k + cycle.direction.sign * k * window
    return abs(phase(traj) - predicted)


@dataclass(frozen=True)
class MonteCarloResult:
    runs: list[RunSummary]
    stats: dict

    def write_csv(self, path: str | Path) -> None:
        header = ["trial", "seed", "n_cycles", "mean_duration", "cum_drift", "s_end", "z_end"]
        rows = [
            [i, r.seed, r.n_cycles, repr(r.mean_duration), repr(r.cum_drift), repr(r.s_end), repr(r.z_end)]
            for i, r in enumerate(self.runs)
        ]
        _write_rows(path, header, rows)


def _trial(args: tuple) -> RunSummary:
    sp, params, seed = args
    return run_experiment(sp, params, seed)


def _corr(a: np.ndarray, b: np.ndarray) -> float | None:
    if len(a) < 2 or np.ptp(a) == 0 or np.ptp(b) == 0:
        return None
    return float(np.corrcoef(a, b)[0, 1])


def aggregate(runs: Sequence[RunSummary], z0: float = 0.0) -> dict:
    """Statistics over trials already ordered by trial index."""
    z = np.array([r.z_end for r in runs])
    n = np.array([r.n_cycles for r in runs], dtype=float)
    s = np.array([r.s_end for r in runs])
    d = np.array([r.cum_drift for r in runs])
    return {
        "mean_z": float(np.mean(z)),
        "std_z": float(np.std(z, ddof=1)) if len(z) > 1 else None,
        "corr_z_ncycles": _corr(z, n),
        "corr_z_send": _corr(z, s),
        "corr_z_drift": _corr(z, d),
        "frac_profitable": float(np.mean(z > z0)),
    }


def monte_carlo(sp: ScheduleParams, params: MarketParams, trials: int, base_seed: int,
                workers: int | None = None) -> MonteCarloResult:
    """Independent trials seeded by ``derive_seed(base_seed, trial)``.

    Results do not depend on ``workers``: trials are reassembled by index
    before any statistic is computed.
    """
    if trials < 1:
        raise PreconditionError(f"trials must be >= 1, got {trials}")
    jobs = [(sp, params, derive_seed(base_seed, i)) for i in range(trials)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_trial, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        runs = [_trial(job) for job in jobs]
    return MonteCarloResult(runs, aggregate(runs))

