"""Level-adjusted phase-shifted carrier modulation.

Each arm compares N per-module references against N triangular carriers on
[0, 1] that are phase shifted by 2*pi/N.  On top of the common sinusoidal
reference every module gets a small vertical displacement delta_j; the
displacement vector is zero-sum and non-increasing in j, so low-index
modules are inserted a little less and high-index modules a little more.
That asymmetry feeds net charge to the high-index end of the arm, which the
clamp chain then carries back toward index 1.

The lower arm uses the complementary sinusoid and the reversed carrier
phase order.  An optional zero-order-hold delay samples the sinusoidal
reference at twice the carrier frequency, emulating a digital controller;
this sampling is what makes an undisplaced converter drift.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

__all__ = [
    "CarrierSet",
    "GateFrame",
    "triangle_carrier",
    "carrier_phase_vectors",
    "displacement_vector",
    "module_reference",
    "effective_arm_modulation",
    "reference_sample_time",
    "gate_signals",
    "average_insertion_count",
]

Arm = Literal["upper", "lower"]
DelayModel = Literal["none", "zero_order_hold"]


def triangle_carrier(phase: float | np.ndarray) -> float | np.ndarray:
    """Unit triangle: 0 at phase 0, peak 1 at phase 0.5, back to 0 at 1."""
    frac = np.mod(phase, 1.0)
    return 1.0 - np.abs(2.0 * frac - 1.0)


def carrier_phase_vectors(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Carrier phases (radians) for both arms.

    Upper arm: uniform grid 2*pi*(j-1)/n.  Lower arm: the same grid in
    reversed module order, so module j of the lower arm runs on the carrier
    of module n+1-j of the upper arm.
    """
    if n < 2:
        raise ValueError("need at least 2 modules")
    upper = 2.0 * np.pi * np.arange(n) / n
    lower = upper[::-1].copy()
    return upper, lower


def displacement_vector(n: int, delta_a: float) -> np.ndarray:
    """Per-module carrier displacements for a total displacement delta_a.

    delta_j = delta_a * (1/2 - (j-1)/(n-1)), j = 1..n: non-increasing in j,
    symmetric about zero, and summing to zero exactly.
    """
    if n < 2:
        raise ValueError("need at least 2 modules")
    j = np.arange(n, dtype=np.float64)
    return delta_a * (0.5 - j / (n - 1))


def reference_sample_time(t: float, switching_freq: float) -> float:
    """Zero-order-hold sample instant: the reference is sampled at twice the
    carrier frequency and held until the next sample."""
    rate = 2.0 * switching_freq
    return np.floor(t * rate) / rate


def module_reference(
    arm: Arm,
    t: float,
    modulation_index: float,
    fundamental_freq: float,
    delta_j: float,
    delay_model: DelayModel = "none",
    switching_freq: float | None = None,
) -> float:
    """Reference for one module at time t.

    Upper arm: (1 - m_a*sin(w*t))/2 - delta_j; lower arm uses +sin.  With a
    zero-order-hold delay the sinusoid is evaluated at the held sample time
    (switching_freq required).
    """
    ts = t
    if delay_model == "zero_order_hold":
        if switching_freq is None:
            raise ValueError("zero_order_hold needs switching_freq")
        ts = reference_sample_time(t, switching_freq)
    s = np.sin(2.0 * np.pi * fundamental_freq * ts)
    if arm == "upper":
        base = 0.5 * (1.0 - modulation_index * s)
    elif arm == "lower":
        base = 0.5 * (1.0 + modulation_index * s)
    else:
        raise ValueError(f"unknown arm {arm!r}")
    return base - delta_j


def effective_arm_modulation(
    arm: Arm,
    t: float,
    modulation_index: float,
    fundamental_freq: float,
) -> float:
    """Mean insertion command of the whole arm.

    Because the displacement vector sums to zero, the arm-average reference
    is independent of delta_a and equals the undisplaced sinusoidal command.
    """
    s = np.sin(2.0 * np.pi * fundamental_freq * t)
    if arm == "upper":
        return 0.5 * (1.0 - modulation_index * s)
    if arm == "lower":
        return 0.5 * (1.0 + modulation_index * s)
    raise ValueError(f"unknown arm {arm!r}")


@dataclass(frozen=True)
class CarrierSet:
    """Carriers for one arm."""

    switching_freq: float
    phases: np.ndarray

    def values(self, t: float) -> np.ndarray:
        return triangle_carrier(self.switching_freq * t + self.phases / (2.0 * np.pi))


@dataclass(frozen=True)
class GateFrame:
    """Insertion gates for both arms at one instant: True = capacitor in
    the arm path (upper switch on), False = bypassed (lower switch on)."""

    time: float
    upper: np.ndarray
    lower: np.ndarray


def gate_signals(
    t: float,
    n: int,
    modulation_index: float,
    fundamental_freq: float,
    switching_freq: float,
    delta_a: float = 0.0,
    delay_model: DelayModel = "none",
) -> GateFrame:
    """Evaluate both arms' gates at time t.  Ties insert the module."""
    phases_u, phases_l = carrier_phase_vectors(n)
    delta = displacement_vector(n, delta_a)
    ts = t
    if delay_model == "zero_order_hold":
        ts = reference_sample_time(t, switching_freq)
    s = np.sin(2.0 * np.pi * fundamental_freq * ts)
    ref_u = 0.5 * (1.0 - modulation_index * s) - delta
    ref_l = 0.5 * (1.0 + modulation_index * s) - delta
    car_u = triangle_carrier(switching_freq * t + phases_u / (2.0 * np.pi))
    car_l = triangle_carrier(switching_freq * t + phases_l / (2.0 * np.pi))
    return GateFrame(time=t, upper=ref_u >= car_u, lower=ref_l >= car_l)


def average_insertion_count(
    arm: Arm,
    n: int,
    modulation_index: float,
    fundamental_freq: float,
    delta_a: float = 0.0,
    samples: int = 200_000,
    delay_model: DelayModel = "none",
    switching_freq: float | None = None,
) -> float:
    """Cycle-averaged inserted-module count from the reference waveforms.

    A module's insertion duty over one carrier period equals its reference
    clipped to [0, 1], so integrating the clipped references over one
    fundamental cycle gives the expected inserted count without sampling
    individual gate edges.
    """
    period = 1.0 / fundamental_freq
    t = np.linspace(0.0, period, samples, endpoint=False)
    ts = t
    if delay_model == "zero_order_hold":
        if switching_freq is None:
            raise ValueError("zero_order_hold needs switching_freq")
        rate = 2.0 * switching_freq
        ts = np.floor(t * rate) / rate
    s = np.sin(2.0 * np.pi * fundamental_freq * ts)
    if arm == "upper":
        base = 0.5 * (1.0 - modulation_index * s)
    else:
        base = 0.5 * (1.0 + modulation_index * s)
    delta = displacement_vector(n, delta_a)
    duty = np.clip(base[:, None] - delta[None, :], 0.0, 1.0)
    return float(duty.sum(axis=1).mean())
