"""Closed-form behaviour of a single clamp path.

When the lower switch of module j+1 conducts, the clamp diode D_j sees the
capacitor difference u_C(j+1) - u_Cj; once that exceeds the constant drops,
the loop (both module capacitors in series, the clamp inductor, and the
loop resistances) rings as an underdamped series RLC and the diode carries
one half-sine of balancing current.  When the switch turns off mid-pulse,
the inductor current free-wheels into module j and decays at roughly
-(u_Cj + V_fd)/L_j.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ClampTransientParams",
    "TransientSolution",
    "diode_voltage",
    "effective_capacitance",
    "loop_resistance",
    "transient_solution",
    "peak_current_free",
    "peak_current_truncated",
    "turnoff_decay_rate",
]


def diode_voltage(
    u_this: float,
    u_next: float,
    next_module_bypassed: bool,
    clamp_current: float = 0.0,
) -> float:
    """Blocking voltage across clamp diode j at zero/given loop current.

    u_this is module j's capacitor voltage, u_next is module j+1's.  With
    module j+1 inserted the diode is clamped to -u_this (reverse biased);
    with it bypassed the diode sees the capacitor difference.
    """
    if clamp_current > 0.0:
        return 0.0
    if next_module_bypassed:
        return u_next - u_this
    return -u_this


def effective_capacitance(c_this: float, c_next: float) -> float:
    """Series combination of the two module capacitors in the clamp loop."""
    return c_this * c_next / (c_this + c_next)


def loop_resistance(
    esr_this: float,
    esr_next: float,
    diode_resistance: float,
    switch_resistance: float,
    inductor_resistance: float,
) -> float:
    """Total series resistance around a conducting clamp loop: both module
    ESRs, the diode, the bypass switch of module j+1, and the inductor."""
    return esr_this + esr_next + diode_resistance + switch_resistance + inductor_resistance


@dataclass(frozen=True)
class ClampTransientParams:
    """Series-RLC description of one conduction event.

    u_diff is the net driving voltage: the capacitor difference minus the
    diode and switch constant drops, evaluated at the instant conduction
    starts.
    """

    inductance: float
    effective_capacitance: float
    resistance: float
    u_diff: float

    def __post_init__(self) -> None:
        if self.inductance <= 0.0:
            raise ValueError("inductance must be positive")
        if self.effective_capacitance <= 0.0:
            raise ValueError("effective_capacitance must be positive")
        if self.resistance < 0.0:
            raise ValueError("resistance must be non-negative")


@dataclass(frozen=True)
class TransientSolution:
    """i(t) = amplitude * exp(-alpha*t) * sin(omega_d*t) on [0, pi/omega_d],
    zero afterwards (the diode blocks the reverse half-cycle)."""

    amplitude: float
    alpha: float
    omega_0: float
    omega_d: float

    @property
    def conduction_window(self) -> float:
        return np.pi / self.omega_d

    @property
    def peak_time(self) -> float:
        if self.alpha == 0.0:
            return 0.5 * np.pi / self.omega_d
        return np.arctan2(self.omega_d, self.alpha) / self.omega_d

    def current(self, t: float | np.ndarray) -> float | np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        inside = (t >= 0.0) & (t <= self.conduction_window)
        i = self.amplitude * np.exp(-self.alpha * t) * np.sin(self.omega_d * t)
        out = np.where(inside, i, 0.0)
        return float(out) if out.ndim == 0 else out


def _characteristic(params: ClampTransientParams) -> tuple[float, float, float]:
    l = params.inductance
    alpha = params.resistance / (2.0 * l)
    omega_0 = 1.0 / np.sqrt(l * params.effective_capacitance)
    if alpha >= omega_0:
        raise ValueError(
            "clamp loop is not underdamped: "
            f"R={params.resistance} >= 2*sqrt(L/Ce)={2.0 * l * omega_0}"
        )
    omega_d = np.sqrt(omega_0 * omega_0 - alpha * alpha)
    return alpha, omega_0, omega_d


def transient_solution(params: ClampTransientParams) -> TransientSolution:
    """Closed-form conduction pulse for an underdamped clamp loop."""
    alpha, omega_0, omega_d = _characteristic(params)
    radicand = params.inductance / params.effective_capacitance - params.resistance**2 / 4.0
    amplitude = params.u_diff / np.sqrt(radicand)
    return TransientSolution(amplitude=amplitude, alpha=alpha, omega_0=omega_0, omega_d=omega_d)


def peak_current_free(
    u_diff_max: float,
    inductance: float,
    c_effective: float,
    resistance: float = 0.0,
) -> float:
    """Worst-case pulse peak when conduction is never interrupted.

    The exact peak of the damped half-sine is amplitude*exp(-alpha*t_pk)*
    sin(omega_d*t_pk) <= amplitude; the amplitude itself,
    u_diff_max / sqrt(L/Ce - R^2/4), is the design bound used for diode
    sizing and inverts cleanly for the inductor lower bound.
    """
    sol = transient_solution(
        ClampTransientParams(inductance, c_effective, resistance, u_diff_max)
    )
    return sol.amplitude


def peak_current_truncated(
    u_diff_max: float,
    inductance: float,
    c_effective: float,
    resistance: float,
    duty: float,
    switching_period: float,
) -> float:
    """Pulse peak when the bypass window D*T_sw ends before the natural
    peak; never exceeds the free-running peak."""
    if not 0.0 <= duty <= 1.0:
        raise ValueError("duty must be in [0, 1]")
    sol = transient_solution(
        ClampTransientParams(inductance, c_effective, resistance, u_diff_max)
    )
    window = duty * switching_period
    if window >= sol.peak_time:
        return sol.amplitude * np.exp(-sol.alpha * sol.peak_time) * np.sin(
            sol.omega_d * sol.peak_time
        )
    return min(
        sol.amplitude * np.exp(-sol.alpha * window) * np.sin(sol.omega_d * window),
        sol.amplitude,
    )


def turnoff_decay_rate(u_cap: float, diode_drop: float, inductance: float) -> float:
    """di/dt of a clamp current interrupted by its bypass switch opening:
    the inductor discharges into module j against u_Cj plus the diode drop."""
    return -(u_cap + diode_drop) / inductance
