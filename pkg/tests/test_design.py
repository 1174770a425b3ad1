"""Displacement sizing rules and the clamp inductor window."""
import numpy as np
import pytest

from dcmmc.design import (
    avg_balancing_current,
    build_design_report,
    compensation_per_cycle,
    drift_per_cycle,
    epsilon_from_tolerance,
    inductor_window,
    k_factor,
    min_displacement,
)
from dcmmc.scenario import build_config, parse_scenario


def test_k_factor_values():
    assert k_factor(0.95) == pytest.approx(2.0 / 0.95, rel=1e-12)
    assert k_factor(0.95, np.pi / 6) == pytest.approx(
        2.0 / (0.95 * np.cos(np.pi / 6)), rel=1e-12)
    with pytest.raises(ValueError):
        k_factor(0.95, np.pi / 2)


def test_epsilon_from_tolerance():
    assert epsilon_from_tolerance(40, 0.3) == pytest.approx(0.6 / 39, rel=1e-12)
    with pytest.raises(ValueError):
        epsilon_from_tolerance(1, 0.3)
    with pytest.raises(ValueError):
        epsilon_from_tolerance(40, -0.1)


def test_min_displacement_frozen_values():
    # hand-computed: (n-1)*eps^2/2
    assert min_displacement(40, 0.3 / 39) == pytest.approx(1.1538461538e-3,
                                                           abs=1e-7)
    assert min_displacement(40, epsilon_from_tolerance(40, 0.3)) == pytest.approx(
        4.6153846e-3, abs=1e-7)


@pytest.mark.parametrize("n,eps", [(4, 0.05), (8, 0.02), (40, 0.3 / 39)])
def test_min_displacement_quadratic_form(n, eps):
    assert min_displacement(n, eps) == pytest.approx((n - 1) * eps**2 / 2,
                                                     rel=1e-12)


def test_avg_balancing_current_closed_form():
    assert avg_balancing_current(10.0, 0.02, 0.95) == pytest.approx(
        0.02 * 10.0 * 0.95 / 4, rel=1e-12)
    assert avg_balancing_current(100.0, 0.005, 0.8, np.pi / 4) == pytest.approx(
        0.005 * 100.0 * 0.8 * np.cos(np.pi / 4) / 4, rel=1e-12)


@pytest.mark.parametrize("n,eps,i_p,m,phi", [
    (40, 0.3 / 39, 100.0, 0.95, 0.0),
    (8, 0.6 / 7, 10.0, 0.95, 0.0),
    (12, 0.01, 50.0, 0.8, np.pi / 6),
])
def test_minimum_displacement_balances_drift(n, eps, i_p, m, phi):
    # at delta_a = min_displacement, compensation exactly cancels drift
    f1, cap = 50.0, 0.015
    da = min_displacement(n, eps)
    drift = drift_per_cycle(n, eps, i_p, m, phi, f1, cap)
    comp = compensation_per_cycle(n, eps, da, i_p, m, phi, f1, cap)
    assert comp == pytest.approx(drift, rel=1e-12)


def test_drift_scales_inversely_with_capacitance_and_frequency():
    base = drift_per_cycle(40, 0.01, 100.0, 0.95, 0.0, 50.0, 0.015)
    assert drift_per_cycle(40, 0.01, 100.0, 0.95, 0.0, 50.0, 0.030) == (
        pytest.approx(base / 2, rel=1e-12))
    assert drift_per_cycle(40, 0.01, 100.0, 0.95, 0.0, 100.0, 0.015) == (
        pytest.approx(base / 2, rel=1e-12))
    assert drift_per_cycle(40, 0.0, 100.0, 0.95, 0.0, 50.0, 0.015) == 0.0


def test_compensation_linear_in_displacement():
    one = compensation_per_cycle(40, 0.01, 0.004, 100.0, 0.95, 0.0, 50.0, 0.015)
    two = compensation_per_cycle(40, 0.01, 0.008, 100.0, 0.95, 0.0, 50.0, 0.015)
    assert two == pytest.approx(2 * one, rel=1e-12)


def test_inductor_window_closed_forms():
    ce, r, f_sw = 0.0049 / 2, 0.0161, 10000.0
    lo, hi = inductor_window(0.15, 5.0, ce, r, f_sw, 10.0, 0.02, 0.95)
    ratio = 0.15 / 5.0
    # resonant-peak bound binds here (smaller than the ramp bound)
    assert lo == pytest.approx(ce * (ratio**2 + r**2 / 4), rel=1e-12)
    # upper bound: reach the average balancing current in half a period
    i_bal = avg_balancing_current(10.0, 0.02, 0.95)
    assert hi == pytest.approx(0.15 / (2 * f_sw * i_bal), rel=1e-12)


def test_inductor_window_ramp_bound_binds_for_large_loop_resistance():
    ce, f_sw = 0.0049 / 2, 10000.0
    ratio = 0.15 / 5.0
    lo, _ = inductor_window(0.15, 5.0, ce, 0.043, f_sw, 10.0, 0.02, 0.95)
    assert ce * (ratio**2 + 0.043**2 / 4) > ratio / f_sw
    assert lo == pytest.approx(ratio / f_sw, rel=1e-12)


def test_inductor_window_rejects_bad_inputs():
    with pytest.raises(ValueError):
        inductor_window(0.0, 5.0, 1e-3, 0.0, 1e4, 10.0, 0.02, 0.95)
    with pytest.raises(ValueError):
        inductor_window(0.15, 5.0, 1e-3, 0.0, 1e4, 10.0, 0.0, 0.95)


def test_design_report_brackets_bench_inductor():
    cfg = build_config(parse_scenario("table2-experiment"))
    rep = build_design_report(cfg, capacitor_tolerance=0.3, delta_a=0.02,
                              i_p=10.0, u_diff_max=0.15, i_d_max=5.0)
    assert rep.modules_per_arm == 8
    assert rep.nominal_module_voltage == pytest.approx(15.0)
    assert rep.clamp_inductance == pytest.approx(7.5e-6)
    assert rep.inductor_lower_bound < 7.5e-6 < rep.inductor_upper_bound
    assert rep.inductance_within_window
    assert rep.epsilon == pytest.approx(2 * 0.3 / 7, rel=1e-12)
    assert rep.min_displacement == pytest.approx(7 * rep.epsilon**2 / 2, rel=1e-12)
    assert rep.clamp_loop_resistance == pytest.approx(0.043, rel=1e-12)


def test_design_report_defaults_derive_from_config():
    cfg = build_config(parse_scenario("table2-experiment"))
    rep = build_design_report(cfg, capacitor_tolerance=0.3, delta_a=0.02)
    assert rep.i_p == pytest.approx(10.0)  # load amplitude
    assert rep.u_diff_max == pytest.approx(0.01 * rep.nominal_module_voltage)
    assert rep.i_d_max == pytest.approx(10 * rep.avg_balancing_current)
