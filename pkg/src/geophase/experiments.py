"""One function per named experiment; each writes its data files and returns statistics."""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Callable

import numpy as np

from geophase import continuous as cont
from geophase.config import ExperimentConfig
from geophase.core import MarketParams, SystemState
from geophase.discrete import (
    CycleSpec,
    Trajectory,
    _write_rows,
    closed_form_phase,
    make_cycle_input,
    phase,
    shape_area,
    simulate,
)
from geophase.frontrun import FrontrunSpec, closed_form_frontrun, simulate_two_traders
from geophase.stochastic import ScheduleParams, derive_seed, gen_drift, monte_carlo

log = logging.getLogger(__name__)

Runner = Callable[[ExperimentConfig, Path], dict]
EXPERIMENT_RUNNERS: dict[str, Runner] = {}


def experiment(*names: str):
    def register(fn: Runner) -> Runner:
        for name in names:
            EXPERIMENT_RUNNERS[name] = fn
        return fn
    return register


def _negative_quotes(s: np.ndarray) -> int:
    count = int(np.sum(s < 0))
    if count:
        log.warning("quote went negative on %d ticks (linear model has no price floor)", count)
    return count


def _cycles(cfg: ExperimentConfig) -> list[CycleSpec]:
    cc = cfg.cycle
    if cc.period is None:
        return [CycleSpec(cc.t_b, cc.t_s, cc.k, cc.direction)]
    cycles = []
    offset = 0
    while cc.t_s + offset < cc.horizon:
        cycles.append(CycleSpec(cc.t_b + offset, cc.t_s + offset, cc.k, cc.direction))
        offset += cc.period
    return cycles


def _drift_phase(traj: Trajectory, cycles: list[CycleSpec], params: MarketParams) -> float:
    """Drift-inclusive cash prediction summed over disjoint cycles."""
    return sum(closed_form_phase(cy.k, params)
               + cy.direction.sign * cy.k * math.fsum(traj.w[cy.t_b:cy.t_s].tolist())
               for cy in cycles)


def _run_cycles(cfg: ExperimentConfig, out: Path, drifts: np.ndarray | None = None) -> dict:
    params = cfg.market.params()
    cycles = _cycles(cfg)
    horizon = cfg.cycle.horizon
    u = make_cycle_input(cycles, horizon)
    w = np.zeros(horizon) if drifts is None else drifts
    traj = simulate(SystemState(0.0, params.s0, 0.0), u, w, params)
    traj.write_csv(out / "trajectory.csv")
    closed = closed_form_phase(cfg.cycle.k, params)
    stats = {
        "n_cycles": len(cycles),
        "phase": phase(traj),
        "closed_form_phase_per_cycle": closed,
        "predicted_phase": _drift_phase(traj, cycles, params),
        "y0": float(traj.y[0]), "s0": float(traj.s[0]), "z0": float(traj.z[0]),
        "y_end": float(traj.y[-1]), "s_end": float(traj.s[-1]), "z_end": float(traj.z[-1]),
        "negative_quote_ticks": _negative_quotes(traj.s),
    }
    if not np.any(w):
        stats["shape_area"] = shape_area(traj)
    return stats


@experiment("cycle", "sellbuy")
def run_cycle(cfg: ExperimentConfig, out: Path) -> dict:
    return _run_cycles(cfg, out)


@experiment("spread")
def run_spread(cfg: ExperimentConfig, out: Path) -> dict:
    drifts = gen_drift(cfg.market.sigma, cfg.cycle.horizon, derive_seed(cfg.base_seed, 0))
    return _run_cycles(cfg, out, drifts)


@experiment("drift")
def run_drift(cfg: ExperimentConfig, out: Path) -> dict:
    drifts = gen_drift(cfg.market.sigma, cfg.cycle.horizon, derive_seed(cfg.base_seed, 0))
    # quote path the other traders alone would produce
    baseline = cfg.market.s0 + np.concatenate(([0.0], np.cumsum(drifts)))
    _write_rows(out / "baseline_quote.csv", ["tick", "s"],
                [[i, repr(float(v))] for i, v in enumerate(baseline)])
    stats = _run_cycles(cfg, out, drifts)
    stats["identity_residual"] = abs(stats["phase"] - stats["predicted_phase"])
    return stats


@experiment("montecarlo")
def run_montecarlo(cfg: ExperimentConfig, out: Path) -> dict:
    sc = cfg.schedule
    sp = ScheduleParams(sc.mean_interarrival, sc.mean_hold, sc.k, sc.horizon, sc.allow_short)
    result = monte_carlo(sp, cfg.market.params(), cfg.trials, cfg.base_seed, workers=cfg.workers)
    result.write_csv(out / "montecarlo.csv")
    stats = dict(result.stats)
    stats["closed_form_phase_per_cycle"] = closed_form_phase(sc.k, cfg.market.params())
    return stats


@experiment("frontrun")
def run_frontrun(cfg: ExperimentConfig, out: Path) -> dict:
    fc = cfg.frontrun
    params = cfg.market.params()
    drifts = gen_drift(params.sigma, fc.horizon, derive_seed(cfg.base_seed, 0))
    spec = FrontrunSpec(fc.k_c, fc.k_h, fc.t_cb, fc.t_cs, fc.tau1, fc.tau2)
    traj = simulate_two_traders(spec, params, fc.horizon, drifts)
    traj.write_csv(out / "frontrun.csv")
    alone = simulate_two_traders(FrontrunSpec(fc.k_c, 0.0, fc.t_cb, fc.t_cs, fc.tau1, fc.tau2),
                                 params, fc.horizon, drifts)
    alone.write_csv(out / "no_frontrun.csv")
    dz_c, dz_h = traj.cash_deltas()
    stats = {
        "dz_c": dz_c,
        "dz_h": dz_h,
        "dz_c_without_frontrun": alone.cash_deltas()[0],
        "s_end": float(traj.s[-1]),
        "negative_quote_ticks": _negative_quotes(traj.s),
    }
    if cfg.market.gamma is None:
        stats["closed_form_dz_c"], stats["closed_form_dz_h"] = closed_form_frontrun(fc.k_c, fc.k_h, cfg.market.r)
    return stats


_VARIANTS = {
    "cont-plain": cont.Variant.PLAIN,
    "cont-delay": cont.Variant.DELAYED,
    "cont-spread": cont.Variant.SPREAD,
    "cont-delayspread": cont.Variant.DELAYED_SPREAD,
}


def continuous_setup(cfg: ExperimentConfig):
    cc = cfg.continuous
    variant = _VARIANTS[cfg.experiment]
    model = cont.ContinuousModel(r=cc.r, variant=variant, tau=cc.tau if variant.delayed else 0.0,
                                 q=cc.q if variant.spread else 0.0, s0=cc.s0)
    if cc.signal == "sinusoid":
        signal = cont.Sinusoid(cc.amplitude, cc.period, cc.cycles * cc.period)
    else:
        shape = cont.TrapezoidCycle(cc.k, cc.ramp, cc.hold)
        signal = cont.TrapezoidCycle(cc.k, cc.ramp, cc.hold, cc.cycles * shape.period)
    return model, signal


@experiment(*_VARIANTS)
def run_continuous(cfg: ExperimentConfig, out: Path) -> dict:
    model, signal = continuous_setup(cfg)
    traj = cont.integrate(model, signal, cfg.continuous.dt, cont.closing_time(model, signal))
    traj.write_csv(out / "trajectory.csv")
    res = cont.stokes_check(traj)
    stats = {
        "phase": res.phase,
        "line_integral_s_dy": res.line_integral,
        "shape_area": res.area,
        "stokes_residual": res.residual,
    }
    if model.variant.spread:
        stats["spread_cost"] = model.q / 2 * float(np.sum(np.abs(traj.u[:-1])) * traj.dt)
    if isinstance(signal, cont.TrapezoidCycle):
        stats["traded_per_cycle"] = signal.k
    return stats
