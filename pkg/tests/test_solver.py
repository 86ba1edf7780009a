"""Transient solver checks against closed-form circuit solutions.

The oracles pick time constants far above the step size so the backward
Euler discretization error (~dt/2tau per step) stays well under the 0.1%
comparison tolerance.
"""

import math

import numpy as np
import pytest

from scmmi.config import LoadModel, SystemConfig
from scmmi.errors import InvalidPerturbationError, SolverError
from scmmi.solver import (
    build_network,
    initial_state,
    inject_perturbation,
    run,
    step,
)
from scmmi.switching import LevelCommand, level_to_switch_vector
from scmmi.waveform import write_csv


def _march(cfg, vectors, n_steps):
    snap = build_network(cfg, vectors)
    state = initial_state(cfg)
    for _ in range(n_steps):
        state = step(state, snap, cfg.dt)
    return state


def test_rc_discharge_matches_analytic():
    # one 3-level sub-module held at +1: its capacitor discharges through
    # ESR + two closed bridge switches + the load resistor. The source is
    # detached by a huge series resistance.
    r_load, c = 1000.0, 100e-6
    cfg = SystemConfig(
        phases=1, levels=3, v_dc=200.0, capacitance=c,
        source_r=1e9, load=LoadModel(variant="independent_r", r_phase=r_load),
        initial_cap_voltages=200.0)
    r_total = r_load + 2 * cfg.r_on + cfg.cap_esr
    tau = r_total * c
    n = int(round(tau / cfg.dt))
    vec = level_to_switch_vector(LevelCommand(+1), 3)
    state = _march(cfg, (vec,), n)
    expect = 200.0 * math.exp(-1.0)
    assert abs(state.cap_voltages[0, 0] - expect) / expect < 1e-3


def test_two_capacitor_equalization():
    # paralleled pair equalizes with tau = R_loop*C/2 while conserving charge;
    # ESR and on-resistance are raised so tau >> dt
    c = 220e-6
    cfg = SystemConfig(
        phases=1, levels=5, v_dc=400.0, capacitance=c, cap_esr=5.0, r_on=5.0,
        source_r=1e9, load=LoadModel(variant="independent_r", r_phase=1e9),
        initial_cap_voltages=[[210.0, 190.0]], balance_in_zero=True)
    r_loop = 2 * cfg.r_on + 2 * cfg.cap_esr
    tau = r_loop * c / 2.0
    n = int(round(tau / cfg.dt))
    vec = level_to_switch_vector(LevelCommand(0, +1), 5, balance_in_zero=True)
    state = _march(cfg, (vec,), n)
    v1, v2 = state.cap_voltages[0]
    diff_expect = 20.0 * math.exp(-1.0)
    assert abs((v1 - v2) - diff_expect) / diff_expect < 1e-3
    assert v1 + v2 == pytest.approx(400.0, rel=1e-6)


def test_dc_operating_point():
    # three sub-modules held at (+2, -2, 0): outputs sit at +-2*V_DC/n minus
    # conduction drops, the bypassed phase at zero
    cfg = SystemConfig(
        phases=3, levels=5, v_dc=600.0,
        load=LoadModel(variant="independent_r", r_phase=460.0))
    vectors = tuple(level_to_switch_vector(c, 5) for c in
                    (LevelCommand(+2), LevelCommand(-2), LevelCommand(0, +1)))
    state = _march(cfg, vectors, 10)   # short enough that caps barely move
    # with a resistive load the branch current reads the port voltage back out
    v_out = state.branch_currents * 460.0
    assert v_out[0] == pytest.approx(400.0, abs=0.5)
    assert v_out[1] == pytest.approx(-400.0, abs=0.5)
    assert v_out[2] == pytest.approx(0.0, abs=1e-3)


def test_step_rejects_mismatched_dt():
    cfg = SystemConfig(phases=1, levels=3,
                       load=LoadModel(variant="independent_r", r_phase=100.0))
    snap = build_network(cfg, (level_to_switch_vector(LevelCommand(0, 1), 3),))
    with pytest.raises(SolverError):
        step(initial_state(cfg), snap, cfg.dt * 2)
    with pytest.raises(SolverError):
        step(initial_state(cfg), snap, -cfg.dt)


def test_inject_perturbation_spreads_across_chain():
    cfg = SystemConfig()
    state = initial_state(cfg)
    out = inject_perturbation(state, 1, 60.0)
    assert np.allclose(out.cap_voltages[0], 260.0)
    # the other bus capacitors absorb the shift so the chain still sums
    assert out.cap_voltages[1, 0] == pytest.approx(170.0)
    assert out.cap_voltages[2, 0] == pytest.approx(170.0)
    assert out.cap_voltages[:, 0].sum() == pytest.approx(600.0)
    with pytest.raises(ValueError):
        inject_perturbation(state, 4, 10.0)
    with pytest.raises(InvalidPerturbationError):
        inject_perturbation(state, 1, -250.0)


def test_run_is_deterministic(tmp_path):
    cfg = SystemConfig(record_every=10)
    rec_a = run(cfg, 0.002)
    rec_b = run(cfg, 0.002)
    for name in rec_a.channels:
        assert np.array_equal(rec_a.channel(name), rec_b.channel(name))
    pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(rec_a, pa)
    write_csv(rec_b, pb)
    assert pa.read_bytes() == pb.read_bytes()


def test_run_metadata_and_energy_ledger():
    cfg = SystemConfig()
    rec = run(cfg, 0.02)  # one fundamental period
    meta = rec.metadata
    assert meta["steps"] == 20000
    assert meta["config_digest"] == cfg.digest()
    assert meta["energy_residual"] < 0.005
    assert meta["rebuilds"] >= meta["distinct_configurations"]
    assert set(rec.channels) >= {"V_1", "I_1", "V_C11", "V_C12", "I_C11"}


def test_record_every_thins_output():
    cfg = SystemConfig(record_every=20)
    rec = run(cfg, 0.002)
    assert rec.n_samples == 1 + 2000 // 20
    assert rec.sample_period == pytest.approx(20e-6)


def test_run_rejects_bad_duration():
    with pytest.raises(SolverError):
        run(SystemConfig(), 0.0)


def test_staircase_mode_runs():
    cfg = SystemConfig(modulation_mode="staircase", levels=3,
                       load=LoadModel(variant="independent_r", r_phase=460.0))
    rec = run(cfg, 0.02)
    v1 = rec.channel("V_1")
    assert v1.max() > 190.0 and v1.min() < -190.0
    assert rec.metadata["energy_residual"] < 0.005
