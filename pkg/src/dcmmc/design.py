"""Sizing rules for the displacement and the clamp inductor.

The converter balances by giving module j a displacement-induced duty
surplus that must outrun the per-cycle drift caused by capacitor mismatch.
With a relative capacitor tolerance tol, neighbouring modules differ by
eps = 2*tol/(n-1); the displacement must satisfy delta_a >= (n-1)*eps^2/2.
The clamp inductor is bounded below by the diode's peak-current rating and
bounded above by the requirement that a single bypass window can move the
average balancing current through the inductor.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .model import ConverterConfig, nominal_module_voltage
from .clamp import effective_capacitance, loop_resistance, peak_current_free

__all__ = [
    "DesignReport",
    "k_factor",
    "epsilon_from_tolerance",
    "drift_per_cycle",
    "compensation_per_cycle",
    "min_displacement",
    "avg_balancing_current",
    "inductor_window",
    "build_design_report",
]


def k_factor(modulation_index: float, load_angle: float = 0.0) -> float:
    """Ratio of output current amplitude to twice the dc arm current:
    k = 2/(m_a*cos(phi)).  Undefined at purely reactive load."""
    denom = modulation_index * np.cos(load_angle)
    if abs(denom) < 1.0e-12:
        raise ValueError("load angle +-pi/2 gives zero dc arm current; k is undefined")
    return 2.0 / denom


def epsilon_from_tolerance(n: int, tolerance: float) -> float:
    """Per-step relative capacitance difference of a linear +-tolerance
    spread across n modules: eps = 2*tolerance/(n-1)."""
    if n < 2:
        raise ValueError("need at least 2 modules")
    if tolerance < 0.0:
        raise ValueError("tolerance must be non-negative")
    return 2.0 * tolerance / (n - 1)


def _mismatch_denominator(n: int, epsilon: float) -> float:
    half_span = (n - 1) * epsilon / 2.0
    if half_span >= 1.0:
        raise ValueError(
            f"capacitance spread (n-1)*eps/2 = {half_span} >= 1; end module "
            "capacitance would be non-positive"
        )
    return (1.0 - half_span) * (1.0 + half_span)


def drift_per_cycle(
    n: int,
    epsilon: float,
    i_p: float,
    modulation_index: float,
    load_angle: float,
    fundamental_freq: float,
    base_capacitance: float,
) -> float:
    """Per-fundamental-cycle voltage divergence of the two end modules of a
    mismatched arm, with the imbalance current taken as eps times the dc
    arm current.  Grows ~ eps^2: one factor from the imbalance current and
    one from the capacitance difference itself."""
    k = k_factor(modulation_index, load_angle)
    denom = _mismatch_denominator(n, epsilon)
    return (
        (i_p * epsilon / (4.0 * k * fundamental_freq * base_capacitance))
        * (n - 1)
        * epsilon
        / denom
    )


def compensation_per_cycle(
    n: int,
    epsilon: float,
    delta_a: float,
    i_p: float,
    modulation_index: float,
    load_angle: float,
    fundamental_freq: float,
    base_capacitance: float,
) -> float:
    """Per-cycle voltage correction the displacement applies between the
    two end modules of the mismatched arm."""
    k = k_factor(modulation_index, load_angle)
    denom = _mismatch_denominator(n, epsilon)
    return (i_p * delta_a / (4.0 * k * fundamental_freq * base_capacitance)) * 2.0 / denom


def min_displacement(n: int, epsilon: float) -> float:
    """Smallest total displacement whose compensation outruns the mismatch
    drift: delta_a_min = (n-1)*eps^2/2."""
    if n < 2:
        raise ValueError("need at least 2 modules")
    return (n - 1) * epsilon * epsilon / 2.0


def avg_balancing_current(
    i_p: float,
    delta_a: float,
    modulation_index: float,
    load_angle: float = 0.0,
) -> float:
    """Average displacement-driven balancing current, I_p*delta_a/(2k)."""
    k = k_factor(modulation_index, load_angle)
    return i_p * delta_a / (2.0 * k)


def inductor_window(
    u_diff_max: float,
    i_d_max: float,
    c_effective: float,
    resistance: float,
    switching_freq: float,
    i_p: float,
    delta_a: float,
    modulation_index: float,
    load_angle: float = 0.0,
) -> tuple[float, float]:
    """Admissible clamp inductance range (lower, upper).

    Lower bound: the inductor must keep the conduction-pulse peak under the
    diode rating.  Inverting peak = u_diff_max/sqrt(L/Ce - R^2/4) gives
    L >= Ce*((U/I)^2 + R^2/4); a linear-ramp bound U*T_sw/I applies when the
    pulse is cut short, and the binding constraint is the smaller of the
    two.  Upper bound: ramping at u_diff_max for half a switching period
    must reach the average balancing current, L <= 2k*U*Tbar/(I_p*delta_a)
    with Tbar = 0.5/f_sw.
    """
    if u_diff_max <= 0.0 or i_d_max <= 0.0:
        raise ValueError("u_diff_max and i_d_max must be positive")
    if delta_a <= 0.0:
        raise ValueError("delta_a must be positive for the upper bound")
    t_sw = 1.0 / switching_freq
    ratio = u_diff_max / i_d_max
    lower = min(
        c_effective * (ratio * ratio + resistance * resistance / 4.0),
        ratio * t_sw,
    )
    k = k_factor(modulation_index, load_angle)
    t_bar = 0.5 * t_sw
    upper = 2.0 * k * u_diff_max * t_bar / (i_p * delta_a)
    return lower, upper


@dataclass(frozen=True)
class DesignReport:
    """All sizing quantities plus the assumption set they were derived
    from, so a report is reproducible on its own."""

    modules_per_arm: int
    nominal_module_voltage: float
    capacitor_tolerance: float
    epsilon: float
    min_displacement: float
    delta_a: float
    drift_per_cycle: float
    compensation_per_cycle: float
    avg_balancing_current: float
    inductor_lower_bound: float
    inductor_upper_bound: float
    clamp_inductance: float
    inductance_within_window: bool
    peak_clamp_current_free: float
    # assumption set
    u_diff_max: float
    i_d_max: float
    i_p: float
    load_angle: float
    modulation_index: float
    fundamental_freq: float
    switching_freq: float
    base_capacitance: float
    clamp_loop_resistance: float

    def to_dict(self) -> dict:
        return asdict(self)


def build_design_report(
    cfg: ConverterConfig,
    capacitor_tolerance: float,
    delta_a: float,
    i_p: float | None = None,
    load_angle: float | None = None,
    u_diff_max: float | None = None,
    i_d_max: float | None = None,
) -> DesignReport:
    """Evaluate every design rule for one converter configuration.

    Defaults, echoed into the report: i_p and load_angle from a
    current-source load; u_diff_max = 1% of the nominal module voltage;
    i_d_max = 10x the average balancing current.
    """
    n = cfg.modules_per_arm
    v_nom = nominal_module_voltage(cfg)
    if i_p is None:
        if cfg.load.kind != "current_source":
            raise ValueError("i_p must be given explicitly for a series_rl load")
        i_p = cfg.load.amplitude
    if load_angle is None:
        load_angle = cfg.load.load_angle if cfg.load.kind == "current_source" else 0.0
    if u_diff_max is None:
        u_diff_max = 0.01 * v_nom

    base_c = float(np.mean([m.capacitance for m in cfg.upper_modules]))
    eps = epsilon_from_tolerance(n, capacitor_tolerance)
    i_bal = avg_balancing_current(i_p, delta_a, cfg.modulation_index, load_angle)
    if i_d_max is None:
        i_d_max = 10.0 * i_bal
    base_esr = float(np.mean([m.esr for m in cfg.upper_modules]))
    cl = cfg.clamps[0]
    r_loop = loop_resistance(
        base_esr, base_esr, cl.diode_resistance, cfg.switch.on_resistance,
        cl.inductor_resistance,
    )
    c_eff = effective_capacitance(base_c, base_c)
    lower, upper = inductor_window(
        u_diff_max, i_d_max, c_eff, r_loop, cfg.switching_freq,
        i_p, delta_a, cfg.modulation_index, load_angle,
    )
    return DesignReport(
        modules_per_arm=n,
        nominal_module_voltage=v_nom,
        capacitor_tolerance=capacitor_tolerance,
        epsilon=eps,
        min_displacement=min_displacement(n, eps),
        delta_a=delta_a,
        drift_per_cycle=drift_per_cycle(
            n, eps, i_p, cfg.modulation_index, load_angle, cfg.fundamental_freq, base_c
        ),
        compensation_per_cycle=compensation_per_cycle(
            n, eps, delta_a, i_p, cfg.modulation_index, load_angle,
            cfg.fundamental_freq, base_c,
        ),
        avg_balancing_current=i_bal,
        inductor_lower_bound=lower,
        inductor_upper_bound=upper,
        clamp_inductance=cl.inductance,
        inductance_within_window=lower <= cl.inductance <= upper,
        peak_clamp_current_free=peak_current_free(
            u_diff_max, cl.inductance, c_eff, r_loop
        ),
        u_diff_max=u_diff_max,
        i_d_max=i_d_max,
        i_p=i_p,
        load_angle=load_angle,
        modulation_index=cfg.modulation_index,
        fundamental_freq=cfg.fundamental_freq,
        switching_freq=cfg.switching_freq,
        base_capacitance=base_c,
        clamp_loop_resistance=r_loop,
    )
