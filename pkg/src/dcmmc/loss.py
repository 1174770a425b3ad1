"""Analytic conduction, switching, and balancing loss estimates, plus
extraction of the same quantities from simulation energy tallies.

The analytic side works from the quasi-static arm current
i_arm = (I_p/2) (1/k + sin(wt - phi)), k = 2/(m_a cos phi): every module
keeps exactly one device conducting the arm current at all times, so arm
conduction loss is insertion-pattern independent.  The capacitor RMS
closed form comes from averaging the insertion duty against the squared
arm current and is validated against a brute-force switched-insertion
oracle in the test suite.

The balancing terms use the superposition picture of pairwise circulating
currents with magnitude profile |N - 2j + 1|/(N - 1); a conduction drop
dissipates for either current direction, so the per-pair magnitudes are
summed as absolute values (a signed sum cancels to zero and is unphysical
for conduction drops).  The cumulative (chain) current picture
concentrates more current mid-chain, so this estimate reads low for large
N; it is held to the simulator within a stated factor rather than a
percentage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .design import k_factor
from .model import ConverterConfig, nominal_module_voltage
from .sim.trace import SimTrace

BALANCING_NOTE = ("linear balancing term sums unsigned pair-current magnitudes; "
                  "the signed sum cancels to zero and is unphysical for "
                  "conduction drops")


@dataclass(frozen=True)
class LossReport:
    """Arm-level loss summary, watts.

    Attributes:
        rms_cap_current: Module capacitor RMS current, amperes.
        rms_arm_current: Arm RMS current, amperes.
        avg_arm_current: Arm average (dc) current, amperes.
        conduction_loss: Device-drop + resistive conduction loss per arm.
        switching_loss: Commutation loss per arm (2N f_sw events).
        total_arm_loss: conduction_loss + switching_loss.
        balancing_loss: Extra loss from the balancing circulation per arm.
        per_pair_balancing: Per adjacent-module-pair balancing loss, index
            j = 1..N-1, watts (empty for trace-derived reports).
        by_class: Per device class breakdown in watts, trace-derived
            reports only (whole converter, not per arm).
        notes: Caveats about how the numbers were produced.
    """

    rms_cap_current: float
    rms_arm_current: float
    avg_arm_current: float
    conduction_loss: float
    switching_loss: float
    total_arm_loss: float
    balancing_loss: float
    per_pair_balancing: tuple[float, ...] = ()
    by_class: dict | None = None
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        out = {
            "rms_cap_current_A": float(self.rms_cap_current),
            "rms_arm_current_A": float(self.rms_arm_current),
            "avg_arm_current_A": float(self.avg_arm_current),
            "conduction_loss_W": float(self.conduction_loss),
            "switching_loss_W": float(self.switching_loss),
            "total_arm_loss_W": float(self.total_arm_loss),
            "balancing_loss_W": float(self.balancing_loss),
            "per_pair_balancing_W": [float(v) for v in self.per_pair_balancing],
        }
        if self.by_class is not None:
            out["by_class_W"] = {k: float(v) for k, v in self.by_class.items()}
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def arm_current_stats(i_p: float, m_a: float, phi: float = 0.0) -> tuple[float, float, float]:
    """RMS/average arm current and module-capacitor RMS current.

    For the half-dc-biased arm current the closed forms are
    rms_arm = (I_p/2) sqrt(1/k^2 + 1/2) and avg_arm = I_p/(2 k).  The
    capacitor RMS follows from averaging the squared arm current against
    the insertion duty (1 - m_a sin)/2, which collapses to
    (I_p/4) sqrt(1 - m_a^2 cos^2(phi) / 2); the capacitor dc component is
    exactly zero for the same duty.

    Args:
        i_p: Output current amplitude, amperes.
        m_a: Modulation index.
        phi: Load angle, radians (cos phi must be nonzero).

    Returns:
        (rms_arm, avg_arm, rms_cap) in amperes.

    Raises:
        ValueError: If cos(phi) is (numerically) zero.
    """
    if abs(math.cos(phi)) < 1e-12:
        raise ValueError("load angle too close to +/- pi/2: dc bias 1/k is undefined")
    k = k_factor(m_a, phi)
    rms_arm = 0.5 * i_p * math.sqrt(1.0 / k**2 + 0.5)
    avg_arm = i_p / (2.0 * k)
    rms_cap = 0.25 * i_p * math.sqrt(1.0 - 0.5 * (m_a * math.cos(phi)) ** 2)
    return rms_arm, avg_arm, rms_cap


def arm_loss(cfg: ConverterConfig, stats: tuple[float, float, float],
             v0: float, r: float) -> float:
    """Per-arm semiconductor and capacitor loss, watts.

    loss = N V0 I_avg + N r I_rms,arm^2 + N r_c I_rms,cap^2
         + 2 N f_sw * (1/2) V_m I_avg (t_on + t_off)

    The switching term charges every one of the 2 N f_sw commutations per
    second with half the blocked module voltage times the average arm
    current over the overlap interval.  Arm-inductor resistance is a
    separate circuit loss and is not included here.

    Args:
        cfg: Converter description (N, f_sw, module ESR, event times).
        stats: (rms_arm, avg_arm, rms_cap) from arm_current_stats.
        v0: Constant on-state drop shared by switch and diode, volts.
        r: On-resistance shared by switch and diode, ohms.

    Returns:
        Watts for one arm.
    """
    rms_arm, avg_arm, rms_cap = stats
    n = cfg.modules_per_arm
    r_c = float(np.mean([m.esr for m in cfg.upper_modules]))
    v_m = nominal_module_voltage(cfg)
    t_event = cfg.switch.turn_on_time + cfg.switch.turn_off_time
    conduction = n * v0 * avg_arm + n * r * rms_arm**2 + n * r_c * rms_cap**2
    switching = 2.0 * n * cfg.switching_freq * 0.5 * v_m * avg_arm * t_event
    return conduction + switching


def balancing_loss(cfg: ConverterConfig, rms_arm: float, delta_a: float,
                   v0: float, r: float, r_l: float) -> tuple[float, tuple[float, ...]]:
    """Extra per-arm loss caused by the balancing circulation.

    Pair j (modules j, j+1; j = 1..N-1) carries a circulating current of
    magnitude I_j = rms_arm * delta_a * |N - 2j + 1| / (N - 1) through the
    clamp inductor resistance and two device drops:

        P_j = I_j^2 (r_L + 2 r) + I_j V_0

    Args:
        cfg: Converter description (provides N).
        rms_arm: Arm RMS current, amperes.
        delta_a: Carrier displacement magnitude.
        v0: Constant device drop, volts.
        r: Device on-resistance, ohms.
        r_l: Clamp inductor winding resistance, ohms.

    Returns:
        (total_watts, per_pair_watts) with N-1 per-pair entries.
    """
    n = cfg.modules_per_arm
    per_pair = []
    for j in range(1, n):
        mag = rms_arm * delta_a * abs(n - 2 * j + 1) / (n - 1)
        per_pair.append(mag * mag * (r_l + 2.0 * r) + mag * v0)
    return float(sum(per_pair)), tuple(per_pair)


def loss_report(cfg: ConverterConfig, i_p: float, m_a: float, phi: float,
                v0: float, r: float, r_l: float, delta_a: float) -> LossReport:
    """Full analytic LossReport for one arm."""
    stats = arm_current_stats(i_p, m_a, phi)
    rms_arm, avg_arm, rms_cap = stats
    total = arm_loss(cfg, stats, v0, r)
    n = cfg.modules_per_arm
    v_m = nominal_module_voltage(cfg)
    t_event = cfg.switch.turn_on_time + cfg.switch.turn_off_time
    switching = 2.0 * n * cfg.switching_freq * 0.5 * v_m * avg_arm * t_event
    bal_total, per_pair = balancing_loss(cfg, rms_arm, delta_a, v0, r, r_l)
    return LossReport(
        rms_cap_current=rms_cap, rms_arm_current=rms_arm, avg_arm_current=avg_arm,
        conduction_loss=total - switching, switching_loss=switching,
        total_arm_loss=total,
        balancing_loss=bal_total, per_pair_balancing=per_pair,
        notes=(BALANCING_NOTE,))


# device classes whose tallies map onto the per-arm analytic loss formula
_ARM_LOSS_CLASSES = ("switch_conduction", "capacitor_esr", "switching_events")
_ALL_LOSS_CLASSES = ("arm_resistance", "switch_conduction", "capacitor_esr",
                     "leak", "clamp_conduction", "clamp_residual",
                     "switching_events", "load_resistance")


def _window_power(tr: SimTrace, t_start: float, t_end: float) -> dict:
    i0 = int(np.searchsorted(tr.time, t_start - 1e-12))
    i1 = int(np.searchsorted(tr.time, t_end + 1e-12)) - 1
    dt_w = float(tr.time[i1] - tr.time[i0])
    if dt_w <= 0:
        raise ValueError("empty averaging window")
    return {k: float(arr[i1] - arr[i0]) / dt_w for k, arr in tr.energies.items()}


def simulated_loss(trace: SimTrace, t_start: float, t_end: float | None = None,
                   baseline: SimTrace | None = None) -> LossReport:
    """Time-averaged dissipation extracted from a trace's energy tallies.

    Per-arm figures are half the whole-converter tallies (the two arms
    carry statistically identical current).  The capacitor RMS current is
    recovered from the ESR tally when the modules have nonzero ESR and
    falls back to a finite-difference estimate from the recorded voltages
    otherwise (approximate under decimation).

    Args:
        trace: Completed run with cumulative energy tallies.
        t_start: Averaging window start (skip the start-up transient),
            seconds; the window must span >= 2 fundamental cycles.
        t_end: Window end; defaults to the end of the trace.
        baseline: Optional paired run (same configuration, zero carrier
            displacement); when given, balancing_loss is the
            total-dissipation difference between the two runs over the
            same window, halved to a per-arm figure.

    Returns:
        LossReport with per-arm figures and a whole-converter by_class
        breakdown (keys ``*_W`` plus ``throughput_W`` and ``load_W``).

    Raises:
        ValueError: If the window spans fewer than 2 fundamental cycles.
    """
    cfg = trace.config
    if t_end is None:
        t_end = float(trace.time[-1])
    if t_end - t_start < 2.0 / cfg.fundamental_freq - 1e-9:
        raise ValueError("averaging window must span >= 2 fundamental cycles")

    power = _window_power(trace, t_start, t_end)
    sl = trace.window(t_start, t_end)
    iu = trace.upper_arm_current[sl]
    rms_arm = float(np.sqrt(np.mean(iu**2)))
    avg_arm = float(np.mean(iu))

    n = cfg.modules_per_arm
    esr = float(np.mean([m.esr for m in cfg.upper_modules]))
    if esr > 0.0:
        rms_cap = math.sqrt(power["capacitor_esr"] / (2.0 * n * esr))
    else:
        t_rec = trace.time[sl]
        caps = np.array([m.capacitance for m in cfg.upper_modules])
        dudt = np.diff(trace.upper_voltages[sl], axis=0) / np.diff(t_rec)[:, None]
        rms_cap = float(np.sqrt(np.mean((caps[None, :] * dudt) ** 2)))

    conduction = 0.5 * (power["switch_conduction"] + power["capacitor_esr"])
    switching = 0.5 * power["switching_events"]
    total_all = sum(power[k] for k in _ALL_LOSS_CLASSES)

    notes = []
    bal = 0.0
    if baseline is not None:
        base_power = _window_power(baseline, t_start, t_end)
        base_total = sum(base_power[k] for k in _ALL_LOSS_CLASSES)
        bal = 0.5 * (total_all - base_total)
        notes.append("balancing_loss is the paired-run dissipation difference, per arm")

    by_class = {f"{k}_W": power[k] for k in _ALL_LOSS_CLASSES}
    by_class["total_W"] = total_all
    by_class["throughput_W"] = power["source"]
    by_class["load_W"] = power["load"]

    return LossReport(
        rms_cap_current=rms_cap, rms_arm_current=rms_arm, avg_arm_current=avg_arm,
        conduction_loss=conduction, switching_loss=switching,
        total_arm_loss=conduction + switching,
        balancing_loss=bal, per_pair_balancing=(),
        by_class=by_class, notes=tuple(notes))
