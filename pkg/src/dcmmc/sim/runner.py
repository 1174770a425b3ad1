"""Run interface: full simulations via the compiled kernel, plus a
reference single-step path built on the dense descriptor model.

``simulate`` is the production entry point.  ``step`` and
``resolve_diodes`` advance one backward-Euler step through the dense
assembly in :mod:`.statespace`; they exist as a readable cross-check and
for unit tests, and agree with the kernel to solver precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..model import ArmState, ConverterConfig, ConverterState, initial_state
from ..modulator import carrier_phase_vectors, displacement_vector
from . import engine
from .statespace import assemble, input_vector, state_to_vector, vector_to_state
from .trace import SimTrace, SimulationError

DisplacementLike = float | Sequence[tuple[float, float]]


def _normalize_schedule(displacement: DisplacementLike) -> tuple[tuple[float, float], ...]:
    if isinstance(displacement, (int, float)):
        return ((0.0, float(displacement)),)
    sched = tuple((float(t), float(v)) for t, v in displacement)
    if not sched:
        return ((0.0, 0.0),)
    if sched[0][0] > 0.0:
        sched = ((0.0, sched[0][1] * 0.0),) + sched
    times = [t for t, _ in sched]
    if sorted(times) != times:
        raise ValueError("displacement schedule times must be sorted")
    return sched


def simulate(cfg: ConverterConfig,
             displacement: DisplacementLike = 0.0,
             delay_model: str = "none",
             gate_schedule: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
             start: ConverterState | None = None,
             raise_on_failure: bool = True) -> SimTrace:
    """Simulate the leg over ``cfg.numerics.duration`` and return the trace.

    Args:
        cfg: Converter description (validated).
        displacement: Carrier displacement magnitude; either a constant or
            a piecewise-constant schedule [(t0, v0), (t1, v1), ...] whose
            boundaries snap to the step grid.
        delay_model: "none" or "zero_order_hold" (reference sampled and
            held at twice the switching frequency).
        gate_schedule: Optional explicit gating (times, upper, lower) with
            upper/lower of shape (K, N); overrides the modulator.  Used by
            oracle tests that need exact topology control.
        start: Initial state; defaults to nominal voltages and zero
            currents consistent with the load at t = 0.
        raise_on_failure: Raise SimulationError on divergence or an
            unresolved diode pattern instead of returning the truncated
            trace.

    Returns:
        SimTrace with decimated records and cumulative energy tallies.
    """
    n = cfg.modules_per_arm
    num = cfg.numerics
    dt = num.time_step
    n_steps = int(round(num.duration / dt))
    decim = num.record_decimation
    n_rec = n_steps // decim + 1

    st = start if start is not None else initial_state(cfg)
    uu = np.array(st.upper.cap_voltages, dtype=np.float64)
    ul = np.array(st.lower.cap_voltages, dtype=np.float64)
    icu = np.array(st.upper.clamp_currents, dtype=np.float64)
    icl = np.array(st.lower.clamp_currents, dtype=np.float64)

    cap_u = np.array([m.capacitance for m in cfg.upper_modules])
    esr_u = np.array([m.esr for m in cfg.upper_modules])
    gleak_u = np.array([0.0 if m.leak_resistance is None else 1.0 / m.leak_resistance
                        for m in cfg.upper_modules])
    cap_l = np.array([m.capacitance for m in cfg.lower_modules])
    esr_l = np.array([m.esr for m in cfg.lower_modules])
    gleak_l = np.array([0.0 if m.leak_resistance is None else 1.0 / m.leak_resistance
                        for m in cfg.lower_modules])
    lcl = np.array([c.inductance for c in cfg.clamps])
    rcl = np.array([c.diode_resistance + c.inductor_resistance for c in cfg.clamps])
    vfd = np.array([c.diode_drop for c in cfg.clamps])

    pfrac_u = carrier_phase_vectors(n)[0] / (2.0 * math.pi)
    pfrac_l = carrier_phase_vectors(n)[1] / (2.0 * math.pi)
    dunit = displacement_vector(n, 1.0)

    sched = _normalize_schedule(displacement)
    dsched_step = np.array([int(round(t / dt)) for t, _ in sched], dtype=np.int64)
    dsched_v = np.array([v for _, v in sched], dtype=np.float64)

    if delay_model not in ("none", "zero_order_hold"):
        raise ValueError(f"unknown delay model: {delay_model!r}")
    delay_flag = 1 if delay_model == "zero_order_hold" else 0
    steps_per_sample = 1.0 / (2.0 * cfg.switching_freq * dt)
    zoh_stride = int(round(steps_per_sample)) \
        if abs(steps_per_sample - round(steps_per_sample)) < 1e-6 else 0

    if gate_schedule is None:
        gate_mode = 0
        gsched_step = np.zeros(1, dtype=np.int64)
        gsched_u = np.zeros((1, n), dtype=np.uint8)
        gsched_l = np.zeros((1, n), dtype=np.uint8)
    else:
        gate_mode = 1
        times, gu, gl = gate_schedule
        gsched_step = np.array([int(round(t / dt)) for t in times], dtype=np.int64)
        gsched_u = np.ascontiguousarray(np.asarray(gu), dtype=np.uint8)
        gsched_l = np.ascontiguousarray(np.asarray(gl), dtype=np.uint8)
        if gsched_u.shape != (len(times), n) or gsched_l.shape != (len(times), n):
            raise ValueError("gate schedule shape must be (K, N)")

    load = cfg.load
    if load.kind == "current_source":
        load_kind, ip, phi, rload, lload = 0, load.amplitude, load.load_angle, 0.0, 0.0
    else:
        load_kind, ip, phi, rload, lload = 1, 0.0, 0.0, load.resistance, load.inductance

    rec_clamps = 1 if num.record_clamp_currents else 0
    nc_rec = n_rec if rec_clamps else 1
    rec_t = np.zeros(n_rec)
    rec_uu = np.zeros((n_rec, n))
    rec_ul = np.zeros((n_rec, n))
    rec_iu = np.zeros(n_rec)
    rec_il = np.zeros(n_rec)
    rec_vout = np.zeros(n_rec)
    rec_iout = np.zeros(n_rec)
    rec_icu = np.zeros((nc_rec, n - 1))
    rec_icl = np.zeros((nc_rec, n - 1))
    rec_e = np.zeros((n_rec, engine.N_TALLIES))
    rec_stored = np.zeros(n_rec)
    rec_full = 1 if num.record_output_full else 0
    rec_vout_full = np.zeros(n_steps + 1 if rec_full else 1)

    status, fail_time, max_iters_seen, n_done, iu_f, il_f, iout_f = engine._run(
        n, n_steps, dt, decim, rec_clamps,
        cfg.dc_voltage, cfg.fundamental_freq, cfg.switching_freq,
        cfg.modulation_index, cfg.arm_inductance, cfg.arm_resistance,
        cfg.switch.on_resistance, cfg.switch.on_drop,
        cfg.switch.turn_on_time + cfg.switch.turn_off_time,
        cap_u, esr_u, gleak_u, cap_l, esr_l, gleak_l,
        lcl, rcl, vfd,
        pfrac_u, pfrac_l, dunit,
        dsched_step, dsched_v, delay_flag, zoh_stride,
        gate_mode, gsched_step, gsched_u, gsched_l,
        load_kind, ip, phi, rload, lload,
        num.diode_resolution_max_iters,
        uu, ul, icu, icl,
        st.upper.arm_current, st.lower.arm_current, st.output_current,
        rec_t, rec_uu, rec_ul, rec_iu, rec_il, rec_vout, rec_iout,
        rec_icu, rec_icl, rec_e, rec_stored,
        rec_full, rec_vout_full,
    )

    k = n_done
    final = ConverterState(
        upper=ArmState(cap_voltages=uu, clamp_currents=icu, arm_current=iu_f),
        lower=ArmState(cap_voltages=ul, clamp_currents=icl, arm_current=il_f),
        output_current=iout_f, output_voltage=float(rec_vout[k - 1]),
        time=float(rec_t[k - 1]) if status == engine.STATUS_OK else fail_time)
    trace = SimTrace(
        config=cfg,
        time=rec_t[:k],
        upper_voltages=rec_uu[:k],
        lower_voltages=rec_ul[:k],
        upper_arm_current=rec_iu[:k],
        lower_arm_current=rec_il[:k],
        output_voltage=rec_vout[:k],
        output_current=rec_iout[:k],
        energies={label: rec_e[:k, i] for i, label in enumerate(engine.ENERGY_LABELS)},
        stored_energy=rec_stored[:k],
        upper_clamp_currents=rec_icu[:k] if rec_clamps else None,
        lower_clamp_currents=rec_icl[:k] if rec_clamps else None,
        output_voltage_full=rec_vout_full[:(k - 1) * decim + 1] if rec_full else None,
        full_sample_freq=1.0 / dt if rec_full else None,
        final_state=final,
        max_diode_iterations=int(max_iters_seen),
        status=int(status),
        fail_time=float(fail_time),
        displacement_schedule=sched,
        delay_model=delay_model,
    )
    if status != engine.STATUS_OK and raise_on_failure:
        what = "unresolved diode conduction pattern" \
            if status == engine.STATUS_DIODE_FAILURE else "non-finite state"
        raise SimulationError(
            f"simulation failed at t = {fail_time:.9f} s: {what}; "
            f"arm currents ({iu_f:.6g}, {il_f:.6g}) A, "
            f"cap voltage range ({uu.min():.6g}, {uu.max():.6g}) V upper, "
            f"({ul.min():.6g}, {ul.max():.6g}) V lower", trace)
    return trace


@dataclass(frozen=True)
class StepResult:
    """Outcome of one reference backward-Euler step.

    Attributes:
        state: Committed end-of-step state.
        diode_iterations: Pattern sweeps performed (1 = no flip needed).
        active_upper: Clamp conduction flags after resolution, length N-1.
        active_lower: Same for the lower arm.
        residual_energy: Inductor energy zeroed by diode turn-off, joules.
    """

    state: ConverterState
    diode_iterations: int
    active_upper: np.ndarray
    active_lower: np.ndarray
    residual_energy: float


def _switch_signs(arm: ArmState) -> np.ndarray:
    n = len(arm.cap_voltages)
    s = np.ones(n)
    for q in range(n):
        chain = arm.arm_current + (arm.clamp_currents[q - 1] if q > 0 else 0.0)
        s[q] = 1.0 if chain >= 0.0 else -1.0
    return s


def resolve_diodes(cfg: ConverterConfig, state: ConverterState,
                   gates_upper: Sequence[int], gates_lower: Sequence[int],
                   dt: float | None = None,
                   max_iters: int | None = None):
    """Find the diode conduction pattern consistent with one implicit step.

    Starting from the pattern implied by the stored clamp currents, solves
    the frozen-topology system, switches off any branch whose end-of-step
    current would be negative, switches on any blocked branch whose
    end-of-step loop bias exceeds the diode drop, and repeats to a fixed
    point.

    Returns:
        (active_upper, active_lower, iterations, x_end) where x_end is the
        dense state vector of the final solve.

    Raises:
        RuntimeError: If the pattern does not settle in max_iters sweeps.
    """
    n = cfg.modules_per_arm
    dt = cfg.numerics.time_step if dt is None else dt
    max_iters = cfg.numerics.diode_resolution_max_iters if max_iters is None else max_iters
    active_u = np.asarray(state.upper.clamp_currents) > 0.0
    active_l = np.asarray(state.lower.clamp_currents) > 0.0
    s_u = _switch_signs(state.upper)
    s_l = _switch_signs(state.lower)
    t_end = state.time + dt
    w_end = input_vector(cfg, t_end, dt)
    rsw = cfg.switch.on_resistance
    vsw = cfg.switch.on_drop

    for itn in range(max_iters):
        sys_ = assemble(cfg, gates_upper, gates_lower, active_u, active_l, s_u, s_l)
        x0 = state_to_vector(cfg, state, active_u, active_l)
        x1 = sys_.backward_euler_step(x0, w_end, dt)
        nxt = vector_to_state(cfg, x1, t_end, active_u, active_l)
        flips = 0
        for arm_state, gates, active, signs, mods in (
                (nxt.upper, gates_upper, active_u, s_u, cfg.upper_modules),
                (nxt.lower, gates_lower, active_l, s_l, cfg.lower_modules)):
            ia = arm_state.arm_current
            icl = arm_state.clamp_currents
            uv = arm_state.cap_voltages
            iterm = np.zeros(n)
            for q in range(n):
                lo = icl[q - 1] if q > 0 else 0.0
                hi = icl[q] if q < n - 1 else 0.0
                iterm[q] = gates[q] * (ia + lo) + hi - lo
            for m in range(n - 1):
                if active[m]:
                    if icl[m] < 0.0:
                        active[m] = False
                        flips += 1
                elif gates[m + 1] == 0:
                    bias = (uv[m + 1] + mods[m + 1].esr * iterm[m + 1]
                            - uv[m] - mods[m].esr * iterm[m]
                            - cfg.clamps[m].diode_drop - vsw * signs[m + 1] - rsw * ia)
                    if bias > 0.0:
                        active[m] = True
                        flips += 1
        if flips == 0:
            return active_u, active_l, itn + 1, x1
    raise RuntimeError(f"diode pattern did not settle in {max_iters} sweeps")


def step(cfg: ConverterConfig, state: ConverterState,
         gates_upper: Sequence[int], gates_lower: Sequence[int],
         dt: float | None = None) -> StepResult:
    """Advance one backward-Euler step through the dense reference path."""
    dt = cfg.numerics.time_step if dt is None else dt
    was_active = np.concatenate([
        np.asarray(state.upper.clamp_currents) > 0.0,
        np.asarray(state.lower.clamp_currents) > 0.0])
    started = np.concatenate([state.upper.clamp_currents, state.lower.clamp_currents])
    active_u, active_l, iters, x1 = resolve_diodes(
        cfg, state, gates_upper, gates_lower, dt)
    t_end = state.time + dt
    nxt = vector_to_state(cfg, x1, t_end, active_u, active_l)
    # zero inactive branches and collect the energy their inductors held
    residual = 0.0
    now_active = np.concatenate([active_u, active_l])
    lind = np.array([c.inductance for c in cfg.clamps])
    lind2 = np.concatenate([lind, lind])
    for m in range(len(now_active)):
        if was_active[m] and not now_active[m]:
            residual += 0.5 * lind2[m] * started[m] ** 2
    return StepResult(state=nxt, diode_iterations=iters,
                      active_upper=np.asarray(active_u, bool),
                      active_lower=np.asarray(active_l, bool),
                      residual_energy=residual)
