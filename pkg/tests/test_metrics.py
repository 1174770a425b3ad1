"""Coherent THD, cycle averaging, and spread/convergence semantics."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcmmc.metrics import (
    cycle_averages,
    default_max_harmonic_freq,
    output_thd,
    spread_metrics,
    thd,
)
from dcmmc.sim import SimTrace

from conftest import small_config

F1 = 50.0
_ENERGY_KEYS = ("source", "load", "arm_resistance", "switch_conduction",
                "capacitor_esr", "leak", "clamp_conduction", "clamp_residual",
                "switching_events", "load_resistance")


def _composite(fs, cycles, h3=0.2, h7=0.05):
    # fundamental plus two odd harmonics; THD = sqrt(h3^2 + h7^2)
    t = np.arange(int(round(fs * cycles / F1))) / fs
    w = 2.0 * math.pi * F1
    return np.sin(w * t) + h3 * np.sin(3 * w * t + 0.5) + h7 * np.sin(7 * w * t)


def test_thd_pure_sine_is_zero():
    t = np.arange(2000) / 10e3
    assert thd(np.sin(2 * math.pi * F1 * t), 10e3, F1) < 1e-10


def test_thd_composite_matches_analytic():
    x = _composite(40e3, 10)
    expect = math.hypot(0.2, 0.05)
    # coherent window puts each harmonic on an exact bin
    assert abs(thd(x, 40e3, F1) - expect) < 1e-9


def test_thd_square_wave_near_ideal_ratio():
    fs, cycles = 200e3, 10
    t = (np.arange(int(fs * cycles / F1)) + 0.5) / fs
    x = np.sign(np.sin(2 * math.pi * F1 * t))
    ideal = math.sqrt(math.pi**2 / 8.0 - 1.0)  # all odd harmonics
    # Nyquist truncation removes the 1/h tail above 100 kHz: < 0.15% low
    assert abs(thd(x, fs, F1) - ideal) < 1.5e-3


def test_thd_bandwidth_cap():
    fs, cycles = 200e3, 10
    t = (np.arange(int(fs * cycles / F1)) + 0.5) / fs
    x = np.sign(np.sin(2 * math.pi * F1 * t))
    full = thd(x, fs, F1)
    banded = thd(x, fs, F1, max_harmonic_freq=2500.0)
    expect = math.sqrt(sum(1.0 / h**2 for h in range(3, 50, 2)))
    assert banded < full
    assert abs(banded - expect) < 1e-3


@settings(max_examples=30, deadline=None)
@given(scale=st.floats(1e-3, 1e3), offset=st.floats(-10.0, 10.0))
def test_thd_scale_and_dc_invariant(scale, offset):
    x = _composite(20e3, 5)
    ref = thd(x, 20e3, F1)
    assert abs(thd(scale * x + offset, 20e3, F1) - ref) <= 1e-9 * ref


def test_thd_rejects_bad_windows():
    t = np.arange(2050) / 10e3  # 10.25 cycles
    with pytest.raises(ValueError, match="integer"):
        thd(np.sin(2 * math.pi * F1 * t), 10e3, F1)
    t = np.arange(800) / 10e3  # 4 cycles
    with pytest.raises(ValueError, match=">= 5"):
        thd(np.sin(2 * math.pi * F1 * t), 10e3, F1)
    with pytest.raises(ValueError, match="fundamental"):
        thd(np.ones(2000), 10e3, F1)


def test_cycle_averages_sine_and_shapes():
    t = np.arange(60) * 1e-3  # 20 samples/cycle, 3 cycles
    starts, means = cycle_averages(t, np.sin(2 * math.pi * F1 * t), F1)
    assert starts.shape == (3,) and means.shape == (3,)
    np.testing.assert_allclose(starts, [0.0, 0.02, 0.04], atol=1e-15)
    # a uniform grid over a full cycle sums sine to zero exactly
    np.testing.assert_allclose(means, 0.0, atol=1e-12)
    cols = np.stack([np.full_like(t, 7.0), t], axis=1)
    _, m2 = cycle_averages(t, cols, F1)
    assert m2.shape == (3, 2)
    np.testing.assert_allclose(m2[:, 0], 7.0)


def test_cycle_averages_rejects_uneven_grid():
    t = np.arange(100) * 3e-4  # 66.67 samples per cycle
    with pytest.raises(ValueError, match="divide"):
        cycle_averages(t, np.zeros(100), F1)


def _trace_from_cycles(volts_by_cycle, spc=20, **trace_kw):
    """SimTrace whose 2N module voltages are constant within each cycle."""
    cfg = small_config(n=4)
    rows = np.asarray(volts_by_cycle, dtype=float)
    n_cyc = rows.shape[0]
    assert rows.shape[1] == 8
    dtr = 1.0 / (F1 * spc)
    time = np.arange(n_cyc * spc) * dtr
    full = np.repeat(rows, spc, axis=0)
    zeros = np.zeros(len(time))
    return SimTrace(
        config=cfg, time=time,
        upper_voltages=full[:, :4], lower_voltages=full[:, 4:],
        upper_arm_current=zeros, lower_arm_current=zeros,
        output_voltage=zeros, output_current=zeros,
        energies={k: zeros for k in _ENERGY_KEYS}, stored_energy=zeros,
        **trace_kw)


def _rows(spreads):
    # modules at v_m +/- spread/2 with the rest on v_m (v_m = 100 V)
    out = []
    for s in spreads:
        row = np.full(8, 100.0)
        row[0] += 0.5 * s
        row[5] -= 0.5 * s
        out.append(row)
    return np.array(out)


def test_spread_metrics_in_band_from_start():
    rep = spread_metrics(_trace_from_cycles(_rows([2.0] * 6)))
    assert rep.v_m == 100.0
    assert rep.spread_final == pytest.approx(0.02)
    assert rep.max_deviation_final == pytest.approx(0.01)
    assert rep.convergence_time == 0.0
    assert rep.cycle_times.shape == (6,)
    np.testing.assert_allclose(rep.cycle_spread, 2.0)


def test_spread_metrics_converges_at_pullback_not_zero():
    # in band, out, back in: the trailing run starts at cycle 6
    spreads = [1.0] * 3 + [8.0] * 3 + [1.5] * 6
    rep = spread_metrics(_trace_from_cycles(_rows(spreads)))
    assert rep.convergence_time == pytest.approx(6 / F1)


def test_spread_metrics_short_trailing_run_is_not_convergence():
    spreads = [8.0] * 8 + [1.0] * 4  # only 4 trailing in-band cycles
    rep = spread_metrics(_trace_from_cycles(_rows(spreads)))
    assert rep.convergence_time is None


def test_spread_metrics_never_in_band():
    rep = spread_metrics(_trace_from_cycles(_rows([9.0] * 7)))
    assert rep.convergence_time is None
    assert rep.spread_final == pytest.approx(0.09)


def test_spread_metrics_band_override():
    tr = _trace_from_cycles(_rows([4.5] * 6))
    assert spread_metrics(tr).convergence_time is None  # 4.5 V > 3% of 100
    assert spread_metrics(tr, band=0.05).convergence_time == 0.0


def test_spread_metrics_drift_rate_linear():
    spreads = [2.0 + 100.0 * c / F1 for c in range(10)]  # 100 V/s growth
    rep = spread_metrics(_trace_from_cycles(_rows(spreads)))
    assert rep.drift_rate == pytest.approx(100.0, rel=1e-9)


def test_spread_metrics_module_permutation_invariant():
    rng = np.random.default_rng(7)
    rows = 100.0 + rng.normal(0.0, 2.0, size=(6, 8))
    rep_a = spread_metrics(_trace_from_cycles(rows))
    rep_b = spread_metrics(_trace_from_cycles(rows[:, rng.permutation(8)]))
    assert rep_a.spread_final == pytest.approx(rep_b.spread_final)
    assert rep_a.max_deviation_final == pytest.approx(rep_b.max_deviation_final)
    assert rep_a.convergence_time == rep_b.convergence_time


def _thd_trace(decimated, full=None, spc=400, fs_full=None):
    cfg = small_config(n=4)
    dtr = 1.0 / (F1 * spc)
    time = np.arange(len(decimated)) * dtr
    zeros = np.zeros(len(time))
    hund = np.full((len(time), 4), 100.0)
    return SimTrace(
        config=cfg, time=time,
        upper_voltages=hund, lower_voltages=hund,
        upper_arm_current=zeros, lower_arm_current=zeros,
        output_voltage=np.asarray(decimated), output_current=zeros,
        energies={k: zeros for k in _ENERGY_KEYS}, stored_energy=zeros,
        output_voltage_full=full, full_sample_freq=fs_full)


def test_output_thd_decimated_path():
    spc, cycles = 400, 7
    fs = F1 * spc
    t = np.arange(cycles * spc + 1) / fs  # includes the t=0 record
    v = np.sin(2 * math.pi * F1 * t) + 0.1 * np.sin(6 * math.pi * F1 * t)
    got = output_thd(_thd_trace(v), max_harmonic_freq=5e3)
    assert got == pytest.approx(0.1, abs=1e-9)


def test_output_thd_prefers_full_rate_channel():
    spc, cycles = 400, 7
    fs = F1 * spc
    t = np.arange(cycles * spc + 1) / fs
    clean = np.sin(2 * math.pi * F1 * t)
    rich = clean + 0.25 * np.sin(10 * math.pi * F1 * t)
    got = output_thd(_thd_trace(clean, full=rich, fs_full=fs),
                     max_harmonic_freq=5e3)
    assert got == pytest.approx(0.25, abs=1e-9)


def test_default_bandwidth_tracks_carrier_cluster():
    cfg = small_config(n=4, switching_freq=2000.0)
    assert default_max_harmonic_freq(cfg) == pytest.approx(5.0 * 2000.0 * 2.0)
