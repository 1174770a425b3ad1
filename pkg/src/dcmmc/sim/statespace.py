"""Dense descriptor-form model of the clamped leg.

Builds the continuous-time linear system E*dx/dt = A*x + B*w that holds
while the gate pattern and the set of conducting clamp diodes are frozen.
The state stacks both arms' capacitor voltages, the independent loop
currents of the load interface, and one current per conducting clamp
branch.  Constant EMFs (dc link, device drops) enter through the input
vector w.

This module is the readable reference used to cross-check the production
stepper: it assembles the full matrix with numpy and advances it with a
dense linear solve, no chain elimination.  It is O(N^3) per step and meant
for tests and small studies only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import math

import numpy as np

from ..model import ArmState, ConverterConfig, ConverterState


@dataclass(frozen=True)
class TopologyMatrices:
    """Descriptor-form system E*dx/dt = A*x + B*w for one frozen topology.

    Attributes:
        e: Descriptor (inertia) matrix, shape (nx, nx).
        a: State coupling matrix, shape (nx, nx).
        b: Input coupling matrix, shape (nx, nw).
        state_labels: Name of each state entry.
        input_labels: Name of each input entry.
    """

    e: np.ndarray
    a: np.ndarray
    b: np.ndarray
    state_labels: tuple[str, ...]
    input_labels: tuple[str, ...]

    @property
    def order(self) -> int:
        return self.e.shape[0]

    def backward_euler_step(self, x: np.ndarray, w_end: np.ndarray, dt: float) -> np.ndarray:
        """Advance one implicit step: (E/dt - A) x' = (E/dt) x + B w_end."""
        lhs = self.e / dt - self.a
        rhs = self.e @ x / dt + self.b @ w_end
        return np.linalg.solve(lhs, rhs)


def _index_maps(n: int, load_kind: str,
                active_upper: Sequence[bool], active_lower: Sequence[bool]):
    labels: list[str] = []
    labels += [f"u_cap_u_{q + 1}" for q in range(n)]
    labels += [f"u_cap_l_{q + 1}" for q in range(n)]
    if load_kind == "current_source":
        arm_states = ["i_arm_lower"]
    else:
        arm_states = ["i_arm_upper", "i_out"]
    labels += arm_states
    iclamp_u = {}
    iclamp_l = {}
    for m in range(n - 1):
        if active_upper[m]:
            iclamp_u[m] = len(labels)
            labels.append(f"i_clamp_u_{m + 1}")
    for m in range(n - 1):
        if active_lower[m]:
            iclamp_l[m] = len(labels)
            labels.append(f"i_clamp_l_{m + 1}")
    return labels, iclamp_u, iclamp_l


def assemble(cfg: ConverterConfig,
             gates_upper: Sequence[int],
             gates_lower: Sequence[int],
             active_upper: Sequence[bool],
             active_lower: Sequence[bool],
             switch_signs_upper: Sequence[float] | None = None,
             switch_signs_lower: Sequence[float] | None = None) -> TopologyMatrices:
    """Assemble the descriptor system for one frozen gate/diode topology.

    Args:
        cfg: Converter description.
        gates_upper: Per-module insertion flags for the upper arm (1 =
            capacitor in the arm path), length N.
        gates_lower: Same for the lower arm.
        active_upper: Conduction flag per clamp branch (length N-1); branch
            m couples modules m+1 and m+2 (1-based) of the upper arm.
        active_lower: Same for the lower arm.
        switch_signs_upper: Sign (+1/-1) of the current through each
            module's conducting switch, used to orient its constant
            voltage drop.  Defaults to +1.
        switch_signs_lower: Same for the lower arm.

    Returns:
        TopologyMatrices with labeled states and inputs.  Inputs are
        ("v_dc", "unit", "i_out", "di_out_dt") for a current-source load
        and ("v_dc", "unit") for a series R-L load.
    """
    n = cfg.modules_per_arm
    load_kind = cfg.load.kind
    labels, iclamp_u, iclamp_l = _index_maps(n, load_kind, active_upper, active_lower)
    nx = len(labels)
    if load_kind == "current_source":
        input_labels = ("v_dc", "unit", "i_out", "di_out_dt")
    else:
        input_labels = ("v_dc", "unit")
    nw = len(input_labels)
    nt = nx + nw

    s_u = np.ones(n) if switch_signs_upper is None else np.asarray(switch_signs_upper, float)
    s_l = np.ones(n) if switch_signs_lower is None else np.asarray(switch_signs_lower, float)

    e = np.zeros((nx, nx))
    a = np.zeros((nx, nx))
    b = np.zeros((nx, nw))

    iu_col = np.zeros(nt)
    il_col = np.zeros(nt)
    if load_kind == "current_source":
        arm_ix = 2 * n
        iu_col[arm_ix] = 1.0
        iu_col[nx + 2] = 1.0  # plus the prescribed output current
        il_col[arm_ix] = 1.0
    else:
        iu_ix = 2 * n
        io_ix = 2 * n + 1
        iu_col[iu_ix] = 1.0
        il_col[iu_ix] = 1.0
        il_col[io_ix] = -1.0

    def clamp_col(arm: str, m: int) -> np.ndarray:
        col = np.zeros(nt)
        table = iclamp_u if arm == "u" else iclamp_l
        if m in table:
            col[table[m]] = 1.0
        return col

    def u_col(arm: str, q: int) -> np.ndarray:
        col = np.zeros(nt)
        col[q if arm == "u" else n + q] = 1.0
        return col

    def arm_col(arm: str) -> np.ndarray:
        return iu_col if arm == "u" else il_col

    def iterm_col(arm: str, q: int, gates) -> np.ndarray:
        low = clamp_col(arm, q - 1) if q > 0 else np.zeros(nt)
        high = clamp_col(arm, q) if q < n - 1 else np.zeros(nt)
        return gates[q] * (arm_col(arm) + low) + high - low

    def iswitch_col(arm: str, q: int) -> np.ndarray:
        low = clamp_col(arm, q - 1) if q > 0 else np.zeros(nt)
        return arm_col(arm) + low

    unit = np.zeros(nt)
    unit[nx + 1] = 1.0
    vdc_col = np.zeros(nt)
    vdc_col[nx + 0] = 1.0

    def put(row: int, form: np.ndarray) -> None:
        a[row, :] += form[:nx]
        b[row, :] += form[nx:]

    # capacitor equations: C du/dt = i_term - u / R_leak
    for arm, gates, mods in (("u", gates_upper, cfg.upper_modules),
                             ("l", gates_lower, cfg.lower_modules)):
        for q in range(n):
            row = q if arm == "u" else n + q
            e[row, row] = mods[q].capacitance
            form = iterm_col(arm, q, gates)
            if mods[q].leak_resistance is not None:
                form = form - u_col(arm, q) / mods[q].leak_resistance
            put(row, form)

    # conducting clamp branches: L di/dt = loop EMF sum
    for arm, gates, mods, table, signs in (
            ("u", gates_upper, cfg.upper_modules, iclamp_u, s_u),
            ("l", gates_lower, cfg.lower_modules, iclamp_l, s_l)):
        for m, row in table.items():
            cl = cfg.clamps[m]
            r_branch = cl.diode_resistance + cl.inductor_resistance
            e[row, row] = cl.inductance
            icl = clamp_col(arm, m)
            form = -(cl.diode_drop * unit) - r_branch * icl
            form -= u_col(arm, m) + mods[m].esr * iterm_col(arm, m, gates)
            if gates[m + 1] == 0:
                # conduction mode: loop closes through module m+2's bypass switch
                form += u_col(arm, m + 1) + mods[m + 1].esr * iterm_col(arm, m + 1, gates)
                form -= cfg.switch.on_drop * signs[m + 1] * unit
                form -= cfg.switch.on_resistance * (arm_col(arm) + icl)
            else:
                # decay mode: loop closes through module m+2's series switch
                form += cfg.switch.on_drop * signs[m + 1] * unit
                form += cfg.switch.on_resistance * (arm_col(arm) + icl)
            put(row, form)

    # arm voltage sums (module stacks + switch drops), as linear forms
    def arm_drop(arm: str, gates, mods, signs) -> np.ndarray:
        form = np.zeros(nt)
        for q in range(n):
            form += cfg.switch.on_drop * signs[q] * unit
            form += cfg.switch.on_resistance * iswitch_col(arm, q)
            if gates[q]:
                form += u_col(arm, q) + mods[q].esr * iterm_col(arm, q, gates)
        return form

    drop_u = arm_drop("u", gates_upper, cfg.upper_modules, s_u)
    drop_l = arm_drop("l", gates_lower, cfg.lower_modules, s_l)

    if load_kind == "current_source":
        # dc mesh with i_upper = i_lower + i_out(t):
        # 2 L_arm di_l/dt = v_dc - L_arm di_out/dt - R_arm (i_u + i_l) - drops
        row = 2 * n
        e[row, row] = 2.0 * cfg.arm_inductance
        form = vdc_col.copy()
        form[nx + 3] -= cfg.arm_inductance  # di_out/dt input
        form -= cfg.arm_resistance * (iu_col + il_col)
        form -= drop_u + drop_l
        put(row, form)
    else:
        iu_ix = 2 * n
        io_ix = 2 * n + 1
        # dc mesh: L_arm (di_u/dt + di_l/dt) = v_dc - R_arm (i_u + i_l) - drops
        e[iu_ix, iu_ix] = 2.0 * cfg.arm_inductance
        e[iu_ix, io_ix] = -cfg.arm_inductance
        form = vdc_col - cfg.arm_resistance * (iu_col + il_col) - drop_u - drop_l
        put(iu_ix, form)
        # ac mesh: L_arm di_l/dt - L_load di_out/dt
        #        = v_dc/2 - R_arm i_l - drops_l + R_load i_out
        e[io_ix, iu_ix] = cfg.arm_inductance
        e[io_ix, io_ix] = -cfg.arm_inductance - cfg.load.inductance
        form = 0.5 * vdc_col - cfg.arm_resistance * il_col - drop_l
        form += cfg.load.resistance * np.eye(1, nt, io_ix)[0]
        put(io_ix, form)

    return TopologyMatrices(e=e, a=a, b=b,
                            state_labels=tuple(labels),
                            input_labels=input_labels)


def input_vector(cfg: ConverterConfig, t: float, dt: float | None = None) -> np.ndarray:
    """Input vector w(t) matching the labels produced by assemble().

    With ``dt`` given, the prescribed-current derivative is the backward
    difference over that step (what an implicit fixed-step solve sees);
    otherwise it is the analytic derivative.
    """
    if cfg.load.kind == "current_source":
        omega = 2.0 * math.pi * cfg.fundamental_freq
        phase = omega * t - cfg.load.load_angle
        io = cfg.load.amplitude * math.sin(phase)
        if dt is None:
            dio = cfg.load.amplitude * omega * math.cos(phase)
        else:
            io_prev = cfg.load.amplitude * math.sin(omega * (t - dt) - cfg.load.load_angle)
            dio = (io - io_prev) / dt
        return np.array([cfg.dc_voltage, 1.0, io, dio])
    return np.array([cfg.dc_voltage, 1.0])


def state_to_vector(cfg: ConverterConfig, state: ConverterState,
                    active_upper: Sequence[bool], active_lower: Sequence[bool]) -> np.ndarray:
    """Pack a ConverterState into the assemble() state ordering."""
    n = cfg.modules_per_arm
    parts = [np.asarray(state.upper.cap_voltages, float),
             np.asarray(state.lower.cap_voltages, float)]
    if cfg.load.kind == "current_source":
        parts.append(np.array([state.lower.arm_current]))
    else:
        parts.append(np.array([state.upper.arm_current, state.output_current]))
    parts.append(np.asarray(state.upper.clamp_currents, float)[np.asarray(active_upper, bool)])
    parts.append(np.asarray(state.lower.clamp_currents, float)[np.asarray(active_lower, bool)])
    return np.concatenate(parts)


def vector_to_state(cfg: ConverterConfig, x: np.ndarray, t: float,
                    active_upper: Sequence[bool], active_lower: Sequence[bool],
                    output_voltage: float = 0.0) -> ConverterState:
    """Unpack an assemble() state vector into a ConverterState."""
    n = cfg.modules_per_arm
    uu = np.array(x[:n])
    ul = np.array(x[n:2 * n])
    pos = 2 * n
    if cfg.load.kind == "current_source":
        il = float(x[pos])
        pos += 1
        omega = 2.0 * math.pi * cfg.fundamental_freq
        io = cfg.load.amplitude * math.sin(omega * t - cfg.load.load_angle)
        iu = il + io
    else:
        iu = float(x[pos])
        io = float(x[pos + 1])
        pos += 2
        il = iu - io
    icu = np.zeros(n - 1)
    icl = np.zeros(n - 1)
    for m in range(n - 1):
        if active_upper[m]:
            icu[m] = x[pos]
            pos += 1
    for m in range(n - 1):
        if active_lower[m]:
            icl[m] = x[pos]
            pos += 1
    return ConverterState(
        upper=ArmState(cap_voltages=uu, clamp_currents=icu, arm_current=iu),
        lower=ArmState(cap_voltages=ul, clamp_currents=icl, arm_current=il),
        output_current=io, output_voltage=output_voltage, time=t)
