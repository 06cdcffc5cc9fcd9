import csv
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geophase.core import LinearImpact, MarketParams, PreconditionError, SignedPowerImpact, SystemState
from geophase.discrete import (
    CycleSpec,
    Direction,
    Trajectory,
    closed_form_phase,
    make_cycle_input,
    phase,
    shape_area,
    signed_area,
    simulate,
    step,
)

BTS, STB = Direction.BUY_THEN_SELL, Direction.SELL_THEN_BUY


def piecewise_cycle_state(t, x0, t_b, t_s, k, r):
    """Hand-written piecewise solution of one buy-then-sell cycle, no spread/fee/drift."""
    y0, s0, z0 = x0
    if t <= t_b:
        return (y0, s0, z0)
    if t <= t_s:
        return (y0 + k, s0 + r * k, z0 - s0 * k)
    return (y0, s0, z0 + r * k * k)


def run_cycle(cycles, horizon, params, x0=SystemState(0.0, 100.0, 0.0), drifts=None):
    u = make_cycle_input(cycles, horizon)
    w = np.zeros(horizon) if drifts is None else drifts
    return simulate(x0, u, w, params)


def test_step_examples(linear):
    s1 = step(SystemState(0, 100, 0), 1, 0, linear)
    assert (s1.y, s1.s, s1.z) == pytest.approx((1, 100.1, -100), abs=1e-12)
    s2 = step(SystemState(1, 100.1, -100), -1, 0, linear)
    assert (s2.y, s2.s, s2.z) == pytest.approx((0, 100, 0.1), abs=1e-12)
    x = SystemState(3.0, -2.0, 7.0)
    assert step(x, 0, 0, MarketParams(q=0.5, c=0.3)) == x


def test_step_charges_fee_only_on_trades():
    p = MarketParams(impact=LinearImpact(0.1), q=0.2, c=0.05)
    x = SystemState(0, 100, 0)
    assert step(x, 0, 0.3, p) == SystemState(0, 100.3, 0)
    buy = step(x, 2, 0.0, p)
    assert buy.z == pytest.approx(-(100.1 * 2) - 0.05, abs=1e-12)


def test_make_cycle_input_examples():
    u = make_cycle_input([CycleSpec(20, 80, 1, BTS)], 100)
    assert np.flatnonzero(u).tolist() == [20, 80]
    assert (u[20], u[80]) == (1, -1)
    assert not make_cycle_input([], 10).any()
    u = make_cycle_input([CycleSpec(5, 7, 2, STB)], 10)
    assert (u[5], u[7]) == (-2, 2)
    assert np.count_nonzero(u) == 2


@pytest.mark.parametrize("cycles,horizon", [
    ([CycleSpec(0, 5, 1), CycleSpec(5, 8, 1)], 10),
    ([CycleSpec(0, 5, 1), CycleSpec(3, 8, 1)], 10),
    ([CycleSpec(2, 10, 1)], 10),
])
def test_make_cycle_input_rejects(cycles, horizon):
    with pytest.raises(PreconditionError):
        make_cycle_input(cycles, horizon)


def test_cycle_spec_validation():
    with pytest.raises(PreconditionError):
        CycleSpec(5, 5, 1)
    with pytest.raises(PreconditionError):
        CycleSpec(1, 5, 0)


def test_simulate_matches_piecewise_solution(linear):
    traj = run_cycle([CycleSpec(20, 80, 1)], 100, linear)
    for t in range(101):
        want = piecewise_cycle_state(t, (0.0, 100.0, 0.0), 20, 80, 1, 0.1)
        assert (traj.y[t], traj.s[t], traj.z[t]) == pytest.approx(want, abs=1e-12)


def test_simulate_examples(linear):
    traj = run_cycle([CycleSpec(20, 80, 1)], 100, linear)
    assert traj.final.y == 0 and traj.final.s == pytest.approx(100, abs=1e-12)
    assert traj.final.z == pytest.approx(0.1, abs=1e-12)
    flat = simulate(SystemState(1, 2, 3), np.zeros(10), np.zeros(10), linear)
    assert all(st == SystemState(1, 2, 3) for st in flat.states)
    short = run_cycle([CycleSpec(20, 80, 1, STB)], 100, linear)
    assert phase(short) == pytest.approx(0.1, abs=1e-12)


def test_simulate_rejects_length_mismatch(linear, origin):
    with pytest.raises(PreconditionError):
        simulate(origin, np.zeros(5), np.zeros(4), linear)


def test_trajectory_lengths_and_replay(origin):
    p = MarketParams(impact=SignedPowerImpact(0.3, 0.7), q=0.1, c=0.02)
    rng = np.random.default_rng(3)
    traj = run_cycle([CycleSpec(3, 9, 2.5), CycleSpec(12, 20, 1.5, STB)], 30, p,
                     drifts=rng.normal(0, 0.05, 30))
    assert len(traj.states) == len(traj.u) + 1 == len(traj.w) + 1
    for i, (a, b) in enumerate(zip(traj.states, traj.states[1:])):
        assert step(a, traj.u[i], traj.w[i], p) == b


def telescoped_cash(traj, params):
    trades = [(s, u) for s, u in zip(traj.s[:-1], traj.u) if u != 0]
    v = [(s + params.q / 2 if u > 0 else s - params.q / 2) * u for s, u in trades]
    return traj.z[0] - math.fsum(v) - params.c * len(trades)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), q=st.floats(0, 0.5), c=st.floats(0, 0.1))
def test_telescoping_identity(seed, q, c):
    rng = np.random.default_rng(seed)
    p = MarketParams(impact=LinearImpact(0.2), q=q, c=c)
    u = np.where(rng.random(60) < 0.3, rng.normal(0, 2, 60), 0.0)
    traj = simulate(SystemState(0, 50, 10), u, rng.normal(0, 0.1, 60), p)
    assert traj.z[-1] == pytest.approx(telescoped_cash(traj, p), abs=1e-10)


def test_closed_form_phase_examples(linear):
    assert closed_form_phase(1, linear) == pytest.approx(0.1, abs=1e-15)
    assert closed_form_phase(0, linear) == 0
    p = MarketParams(impact=LinearImpact(0.1), q=0.05, c=0.01)
    assert closed_form_phase(2, p) == pytest.approx(0.28, abs=1e-15)


ODD_IMPACTS = [LinearImpact(0.1), LinearImpact(0.5), SignedPowerImpact(0.1, 0.5), SignedPowerImpact(0.3, 1.7),
               lambda u: 0.05 * math.tanh(u)]


@pytest.mark.parametrize("impact", ODD_IMPACTS)
@pytest.mark.parametrize("direction", [BTS, STB])
def test_cycle_neutrality_and_phase(impact, direction):
    p = MarketParams(impact=impact, q=0.03, c=0.01, s0=100)
    for k in (0.5, 1, 3):
        traj = run_cycle([CycleSpec(4, 11, k, direction), CycleSpec(15, 16, k, direction)], 20, p)
        assert traj.y[-1] == traj.y[0]
        assert traj.s[-1] == pytest.approx(traj.s[0], abs=1e-12)
        assert phase(traj) == pytest.approx(2 * closed_form_phase(k, p), abs=1e-12)


def test_time_invariance(linear):
    phases = {phase(run_cycle([CycleSpec(t_b, t_b + hold, 2)], 60, linear))
              for t_b, hold in itertools.product(range(0, 30, 3), range(1, 25, 4))}
    assert max(phases) - min(phases) <= 1e-12


def test_quadratic_scaling(linear):
    ratios = [phase(run_cycle([CycleSpec(2, 5, k)], 10, linear)) / k**2 for k in (1, 2, 4, 8)]
    assert max(ratios) - min(ratios) <= 1e-12
    assert ratios[0] == pytest.approx(0.1, abs=1e-12)


def test_phase_additivity(linear):
    one = phase(run_cycle([CycleSpec(2, 5, 1.5)], 20, linear))
    two = phase(run_cycle([CycleSpec(2, 5, 1.5), CycleSpec(8, 14, 1.5)], 20, linear))
    assert two == pytest.approx(2 * one, abs=1e-12)


def test_zero_area_with_nonzero_phase(linear):
    for r, k in [(0.1, 1), (0.5, 2), (2.0, 0.3)]:
        p = MarketParams(impact=LinearImpact(r), s0=100)
        traj = run_cycle([CycleSpec(20, 80, k)], 100, p)
        assert shape_area(traj) == 0
        assert phase(traj) == pytest.approx(r * k * k, abs=1e-12)
        assert phase(traj) > 0


def test_shape_area_of_square():
    y = [0, 1, 1, 0, 0]
    s = [0, 0, 1, 1, 0]
    z = [0] * 5
    traj = Trajectory(np.array(y, float), np.array(s, float), np.array(z, float), np.zeros(4), np.zeros(4))
    assert abs(shape_area(traj)) == 1
    assert signed_area(y[::-1], s[::-1]) == -signed_area(y, s)


def test_shape_area_constant_and_open(linear, origin):
    flat = simulate(origin, np.zeros(5), np.zeros(5), linear)
    assert shape_area(flat) == 0
    open_path = simulate(origin, np.array([1.0, 0, 0]), np.zeros(3), linear)
    with pytest.raises(PreconditionError, match="gap"):
        shape_area(open_path)


def test_trajectory_csv(tmp_path, linear):
    traj = run_cycle([CycleSpec(1, 3, 1)], 5, linear)
    path = tmp_path / "t.csv"
    traj.write_csv(path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    rows = list(csv.DictReader(raw.decode().splitlines()))
    assert list(rows[0]) == ["tick", "u", "w", "y", "s", "z"]
    assert len(rows) == 6
    assert float(rows[1]["u"]) == 1.0
    assert rows[-1]["u"] == ""
    assert float(rows[-1]["z"]) == traj.z[-1]
