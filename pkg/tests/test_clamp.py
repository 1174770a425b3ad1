"""Clamp-loop transient closed form and the simulated discharge oracle."""
import numpy as np
import pytest

from dcmmc.clamp import (
    ClampTransientParams,
    diode_voltage,
    effective_capacitance,
    loop_resistance,
    peak_current_free,
    peak_current_truncated,
    transient_solution,
    turnoff_decay_rate,
)
from dcmmc.model import (
    ClampParams,
    ConverterConfig,
    LoadSpec,
    ModuleParams,
    NumericsSpec,
    SwitchParams,
    validate_config,
)
from dcmmc.sim import simulate

L = 10e-6
C = 15e-3
VFD = 0.1


def test_natural_frequency_frozen():
    sol = transient_solution(ClampTransientParams(L, C / 2, 0.0, 6.0))
    # 1/sqrt(10 uH * 7.5 mF)
    assert sol.omega_0 == pytest.approx(3651.4837, abs=1e-3)
    assert sol.omega_d == sol.omega_0
    assert sol.alpha == 0.0


def test_damped_solution_identities():
    r = 0.017
    sol = transient_solution(ClampTransientParams(L, C / 2, r, 6.0))
    assert sol.alpha == pytest.approx(r / (2 * L), rel=1e-12)
    assert sol.omega_d == pytest.approx(np.sqrt(sol.omega_0**2 - sol.alpha**2),
                                        rel=1e-12)
    # amplitude * sqrt(L/Ce - R^2/4) recovers the driving voltage
    assert sol.amplitude * np.sqrt(L / (C / 2) - r**2 / 4) == pytest.approx(
        6.0, rel=1e-12)
    # current starts at zero and is non-negative over the conduction window
    t = np.linspace(0.0, sol.conduction_window, 500)
    i = sol.current(t)
    assert i[0] == 0.0
    assert np.all(i >= -1e-12)
    assert sol.current(sol.conduction_window * 1.01) == 0.0


def test_effective_capacitance_series():
    assert effective_capacitance(C, C) == pytest.approx(C / 2, rel=1e-12)
    assert effective_capacitance(1e-3, 3e-3) == pytest.approx(0.75e-3, rel=1e-12)


def test_loop_resistance_sums_every_element():
    assert loop_resistance(1e-3, 2e-3, 0.01, 0.001, 0.005) == pytest.approx(
        0.019, rel=1e-12)


def test_peak_current_free_lossless_and_damped():
    lossless = peak_current_free(6.0, L, C / 2, 0.0)
    assert lossless == pytest.approx(6.0 * np.sqrt((C / 2) / L), rel=1e-12)
    # the sizing bound is the undamped envelope u/sqrt(L/Ce - R^2/4),
    # which grows slightly with loop resistance
    damped = peak_current_free(6.0, L, C / 2, 0.02)
    assert damped == pytest.approx(6.0 / np.sqrt(L / (C / 2) - 0.02**2 / 4),
                                   rel=1e-12)
    assert damped > lossless


def test_peak_current_truncated_never_exceeds_free_peak():
    r = 0.017
    t_sw = 1.0 / 5000.0
    free = peak_current_free(6.0, L, C / 2, r)
    ample = peak_current_truncated(6.0, L, C / 2, r, 0.9, t_sw)
    clipped = peak_current_truncated(6.0, L, C / 2, r, 0.05, t_sw)
    assert ample <= free
    assert clipped < ample
    with pytest.raises(ValueError):
        peak_current_truncated(6.0, L, C / 2, r, 1.2, t_sw)


def test_diode_voltage_cases():
    assert diode_voltage(100.0, 106.0, True) == pytest.approx(6.0)
    assert diode_voltage(100.0, 106.0, False) == pytest.approx(-100.0)
    assert diode_voltage(100.0, 106.0, True, clamp_current=1.5) == 0.0


def _discharge_config(dt, duration, esr=1e-3, r_d=0.010, r_l=0.005,
                      u1=100.0, u2=106.1):
    return validate_config(ConverterConfig(
        modules_per_arm=2, dc_voltage=0.0, fundamental_freq=50.0,
        switching_freq=5000.0, modulation_index=0.95,
        arm_inductance=1e-3, arm_resistance=1.0,
        upper_modules=(ModuleParams(C, esr=esr, initial_voltage=u1),
                       ModuleParams(C, esr=esr, initial_voltage=u2)),
        lower_modules=(ModuleParams(C, esr=esr, initial_voltage=u1),
                       ModuleParams(C, esr=esr, initial_voltage=u1)),
        clamps=(ClampParams(inductance=L, inductor_resistance=r_l,
                            diode_drop=VFD, diode_resistance=r_d),),
        switch=SwitchParams(on_drop=0.0, on_resistance=0.0),
        load=LoadSpec(kind="current_source", amplitude=0.0),
        numerics=NumericsSpec(time_step=dt, duration=duration,
                              record_decimation=1, record_clamp_currents=True),
    ))


_HOLD_OFF = (np.array([0.0]),
             np.array([[0, 0]], dtype=np.uint8),
             np.array([[0, 0]], dtype=np.uint8))


def _closed_form():
    return transient_solution(ClampTransientParams(
        inductance=L, effective_capacitance=C / 2,
        resistance=0.010 + 0.005 + 2e-3, u_diff=106.1 - 100.0 - VFD))


def test_isolated_discharge_matches_closed_form():
    # Both modules bypassed, no load: the only dynamics are the clamp pulse.
    sol = _closed_form()
    dt = (2 * np.pi / sol.omega_0) / 2000
    tr = simulate(_discharge_config(dt, 0.95e-3), gate_schedule=_HOLD_OFF)
    i_sim = tr.upper_clamp_currents[:, 0]
    i_ref = sol.current(tr.time)
    # backward Euler at T_osc/2000 lands near 0.2% of peak; budget 0.5%
    assert np.max(np.abs(i_sim - i_ref)) / sol.amplitude < 5e-3
    assert np.max(np.abs(tr.upper_arm_current)) == 0.0
    assert np.max(np.abs(tr.lower_clamp_currents)) == 0.0


def test_discharge_convergence_is_first_order():
    sol = _closed_form()
    t_probe = 0.4e-3
    base_dt = (2 * np.pi / sol.omega_0) / 1000
    errs = []
    for k in range(3):
        dtk = base_dt / 2**k
        tr = simulate(_discharge_config(dtk, t_probe), gate_schedule=_HOLD_OFF)
        errs.append(abs(tr.upper_clamp_currents[-1, 0] - sol.current(t_probe)))
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) > 0.9


def test_interrupted_pulse_decays_at_inductor_rate():
    # Insert module 2 mid-pulse; di/dt must be -(u_C1 + V_fd)/L within 1%.
    dt = 1e-7
    t_sw = 2e-4
    cfg = validate_config(ConverterConfig(
        modules_per_arm=2, dc_voltage=0.0, fundamental_freq=50.0,
        switching_freq=5000.0, modulation_index=0.95,
        arm_inductance=1e-3, arm_resistance=1.0,
        upper_modules=(ModuleParams(C, esr=0.0, initial_voltage=100.0),
                       ModuleParams(C, esr=0.0, initial_voltage=106.1)),
        lower_modules=(ModuleParams(C, esr=0.0, initial_voltage=100.0),
                       ModuleParams(C, esr=0.0, initial_voltage=100.0)),
        clamps=(ClampParams(inductance=L, inductor_resistance=0.0,
                            diode_drop=VFD, diode_resistance=0.0),),
        switch=SwitchParams(on_drop=0.0, on_resistance=0.0),
        load=LoadSpec(kind="current_source", amplitude=0.0),
        numerics=NumericsSpec(time_step=dt, duration=3.0e-4,
                              record_decimation=1, record_clamp_currents=True),
    ))
    sched = (np.array([0.0, t_sw]),
             np.array([[0, 0], [0, 1]], dtype=np.uint8),
             np.array([[0, 0], [0, 0]], dtype=np.uint8))
    tr = simulate(cfg, gate_schedule=sched)
    k_sw = int(round(t_sw / dt))
    i_before = tr.upper_clamp_currents[k_sw, 0]
    assert i_before > 1.0  # interrupted mid-pulse, not after it
    slope_sim = (tr.upper_clamp_currents[k_sw + 1, 0] - i_before) / dt
    slope_ref = turnoff_decay_rate(tr.upper_voltages[k_sw, 0], VFD, L)
    assert slope_sim == pytest.approx(slope_ref, rel=0.01)
    tail = tr.upper_clamp_currents[k_sw:, 0]
    assert tail.min() >= 0.0
    assert tail[-1] == 0.0
