"""Carrier layout, displacement vector, and reference identities."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcmmc import modulator as mod


@given(n=st.integers(2, 64), delta_a=st.floats(1e-6, 0.1))
@settings(max_examples=60, deadline=None)
def test_displacements_sum_to_zero_and_span(n, delta_a):
    d = mod.displacement_vector(n, delta_a)
    assert d.shape == (n,)
    assert abs(d.sum()) <= 1e-12
    assert d[0] - d[-1] == pytest.approx(delta_a, abs=1e-15)
    assert np.all(np.diff(d) < 0)


def test_zero_displacement_gives_zero_vector():
    assert np.all(mod.displacement_vector(7, 0.0) == 0.0)


def test_displacement_endpoints():
    d = mod.displacement_vector(5, 0.2)
    assert d[0] == pytest.approx(0.1, abs=1e-15)
    assert d[-1] == pytest.approx(-0.1, abs=1e-15)
    assert d[2] == 0.0


def test_carrier_phases_even_and_reversed():
    up, lo = mod.carrier_phase_vectors(8)
    assert np.allclose(np.diff(up), 2 * np.pi / 8)
    assert up[0] == 0.0
    assert np.allclose(lo, up[::-1])


def test_triangle_carrier_shape():
    ph = np.array([0.0, 0.25, 0.5, 0.75, 1.0, 1.25])
    assert np.allclose(mod.triangle_carrier(ph), [0.0, 0.5, 1.0, 0.5, 0.0, 0.5])
    dense = mod.triangle_carrier(np.linspace(0.0, 3.0, 1001))
    assert dense.min() >= 0.0 and dense.max() <= 1.0


@pytest.mark.parametrize("arm", ["upper", "lower"])
@pytest.mark.parametrize("delta_a", [0.0, 0.02])
def test_arm_modulation_unchanged_by_displacements(arm, delta_a):
    # The displacements cancel across the arm, so the mean module
    # reference must reproduce the arm reference to machine precision.
    t = np.linspace(0.0, 0.04, 4001)
    deltas = mod.displacement_vector(40, delta_a)
    refs = np.stack([mod.module_reference(arm, t, 0.95, 50.0, dj) for dj in deltas])
    assert np.max(np.abs(refs.mean(axis=0) -
                         mod.effective_arm_modulation(arm, t, 0.95, 50.0))) < 1e-14


def test_module_duty_strictly_increasing_with_index():
    # delta_j falls with j, so insertion duty (0.5 - delta_j) rises.
    n, delta_a = 5, 0.02
    period = 1.0 / 50.0
    t = np.linspace(0.0, period, 200_000, endpoint=False)
    deltas = mod.displacement_vector(n, delta_a)
    duties = []
    for dj in deltas:
        r = np.clip(mod.module_reference("upper", t, 0.95, 50.0, dj), 0.0, 1.0)
        duties.append(r.mean())
    duties = np.array(duties)
    spacing = delta_a / (n - 1)
    assert np.all(np.diff(duties) > 0.5 * spacing)
    assert np.allclose(duties, 0.5 - deltas, atol=1e-9)


def test_average_insertion_count_half_of_n_and_displacement_free():
    base = mod.average_insertion_count("upper", 5, 0.95, 50.0, delta_a=0.0,
                                       samples=20_000)
    disp = mod.average_insertion_count("upper", 5, 0.95, 50.0, delta_a=0.02,
                                       samples=20_000)
    assert base == pytest.approx(2.5, abs=1e-9)
    # without reference clipping the displacements cancel in the sum
    assert disp == pytest.approx(base, abs=1e-9)


def test_gate_signals_are_boolean_per_module():
    gf = mod.gate_signals(1.234e-3, 6, 0.95, 50.0, 2000.0, delta_a=0.02)
    assert gf.upper.shape == (6,) and gf.lower.shape == (6,)
    assert gf.upper.dtype == bool and gf.lower.dtype == bool


def test_sampled_reference_differs_from_continuous():
    # the held reference lags the continuous one between sampling instants
    f_sw = 2000.0
    t = 1.0 / (4.0 * f_sw) + 1e-5
    held = mod.reference_sample_time(t, f_sw)
    assert held == pytest.approx(0.0, abs=1e-15)
    t2 = 3.0 / (4.0 * f_sw)
    assert mod.reference_sample_time(t2, f_sw) == pytest.approx(1.0 / (2 * f_sw),
                                                                abs=1e-12)
    a = mod.gate_signals(t2 + 1e-5, 4, 0.95, 50.0, f_sw, delay_model="none")
    b = mod.gate_signals(t2 + 1e-5, 4, 0.95, 50.0, f_sw,
                         delay_model="zero_order_hold")
    assert a.time == b.time
