"""Converter topology description and state containers.

A single-phase leg is modelled: two stacked arms of half-bridge modules
between the dc rails (+Vdc/2, -Vdc/2), each arm carrying N modules, an arm
inductor, and N-1 diode+inductor clamp paths joining neighbouring module
capacitors.  Module index 1 sits at the end of the arm where the (positive)
arm current enters; the clamp of index j moves charge from module j+1 into
module j, so sustained balancing flow runs from the high indices toward
index 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

__all__ = [
    "ModuleParams",
    "SwitchParams",
    "ClampParams",
    "LoadSpec",
    "NumericsSpec",
    "ConverterConfig",
    "ArmState",
    "ConverterState",
    "validate_config",
    "synthesize_mismatched_modules",
    "uniform_modules",
    "nominal_module_voltage",
    "initial_state",
]


@dataclass(frozen=True)
class ModuleParams:
    """One half-bridge module's passive parameters.

    leak_resistance models a parallel self-discharge resistor across the
    module capacitor; None disables it.  initial_voltage of None means the
    module starts at the nominal share Vdc/N.
    """

    capacitance: float
    esr: float = 0.0
    leak_resistance: float | None = None
    initial_voltage: float | None = None


@dataclass(frozen=True)
class SwitchParams:
    """Conducting-device model shared by both positions of a half bridge.

    A constant on-state drop plus a linear on-resistance; turn_on_time and
    turn_off_time only feed the per-event switching-energy bookkeeping.
    """

    on_drop: float = 0.0
    on_resistance: float = 0.0
    turn_on_time: float = 0.0
    turn_off_time: float = 0.0


@dataclass(frozen=True)
class ClampParams:
    """One clamp path: series diode and inductor between adjacent modules."""

    inductance: float
    inductor_resistance: float = 0.0
    diode_drop: float = 0.0
    diode_resistance: float = 0.0
    diode_current_rating: float | None = None
    max_diff_voltage: float | None = None


@dataclass(frozen=True)
class LoadSpec:
    """Load at the ac terminal.

    kind="current_source": i_out(t) = amplitude * sin(2*pi*f1*t - load_angle),
    drawn from the ac node toward the dc midpoint.
    kind="series_rl": resistance + inductance from the ac node to the
    dc midpoint.
    """

    kind: Literal["current_source", "series_rl"] = "current_source"
    amplitude: float = 0.0
    load_angle: float = 0.0
    resistance: float = 0.0
    inductance: float = 0.0


@dataclass(frozen=True)
class NumericsSpec:
    """Fixed-step solver settings.

    time_step must resolve the carrier: dt <= 1/(20*f_sw).  Gate edges and
    every schedule boundary snap to the step grid.  record_decimation keeps
    every k-th step in the trace; energy tallies always accumulate at full
    rate.  record_output_full additionally keeps the output voltage at
    every step so harmonic analysis sees no decimation aliasing.
    """

    time_step: float = 1.0e-6
    duration: float = 1.0
    diode_resolution_max_iters: int = 30
    record_decimation: int = 10
    record_clamp_currents: bool = False
    record_output_full: bool = False


@dataclass(frozen=True)
class ConverterConfig:
    modules_per_arm: int
    dc_voltage: float
    fundamental_freq: float
    switching_freq: float
    modulation_index: float
    arm_inductance: float
    arm_resistance: float
    upper_modules: tuple[ModuleParams, ...]
    lower_modules: tuple[ModuleParams, ...]
    clamps: tuple[ClampParams, ...]
    switch: SwitchParams = field(default_factory=SwitchParams)
    load: LoadSpec = field(default_factory=LoadSpec)
    numerics: NumericsSpec = field(default_factory=NumericsSpec)


@dataclass
class ArmState:
    """Electrical state of one arm."""

    cap_voltages: np.ndarray
    clamp_currents: np.ndarray
    arm_current: float = 0.0


@dataclass
class ConverterState:
    upper: ArmState
    lower: ArmState
    output_current: float = 0.0
    output_voltage: float = 0.0
    time: float = 0.0

    def kcl_residual(self) -> float:
        """Ac-node current mismatch; zero for a consistent state."""
        return self.upper.arm_current - self.lower.arm_current - self.output_current


def uniform_modules(
    n: int,
    capacitance: float,
    esr: float = 0.0,
    leak_resistance: float | None = None,
    initial_voltage: float | None = None,
) -> tuple[ModuleParams, ...]:
    """N identical modules."""
    return tuple(
        ModuleParams(capacitance, esr, leak_resistance, initial_voltage)
        for _ in range(n)
    )


def synthesize_mismatched_modules(
    n: int,
    base_capacitance: float,
    base_esr: float = 0.0,
    tolerance: float = 0.3,
    leak_resistance: float | None = None,
) -> tuple[ModuleParams, ...]:
    """Deterministic linear capacitance spread of +-tolerance about the base.

    Module j gets
        C_j   = (1 + tol - 2*tol*(n-j)/(n-1)) * base_capacitance
        esr_j = (1 - tol + 2*tol*(n-j)/(n-1)) * base_esr
    so capacitance rises with j while esr falls, and the arithmetic mean
    capacitance equals the base exactly.
    """
    if n < 2:
        raise ValueError("need at least 2 modules for a spread")
    if not 0.0 <= tolerance < 1.0:
        raise ValueError("tolerance must be in [0, 1)")
    out = []
    for j in range(1, n + 1):
        frac = (n - j) / (n - 1)
        out.append(
            ModuleParams(
                capacitance=(1.0 + tolerance - 2.0 * tolerance * frac) * base_capacitance,
                esr=(1.0 - tolerance + 2.0 * tolerance * frac) * base_esr,
                leak_resistance=leak_resistance,
            )
        )
    return tuple(out)


def nominal_module_voltage(cfg: ConverterConfig) -> float:
    """Nominal per-module dc voltage share Vdc/N."""
    return cfg.dc_voltage / cfg.modules_per_arm


def _check_positive(name: str, value: float) -> None:
    if not value > 0.0:
        raise ValueError(f"{name} must be positive, got {value}")


def _check_nonnegative(name: str, value: float) -> None:
    if value < 0.0:
        raise ValueError(f"{name} must be non-negative, got {value}")


def validate_config(cfg: ConverterConfig) -> ConverterConfig:
    """Validate physical and numerical constraints; returns cfg unchanged."""
    n = cfg.modules_per_arm
    if n < 2:
        raise ValueError(f"modules_per_arm must be >= 2, got {n}")
    _check_nonnegative("dc_voltage", cfg.dc_voltage)
    _check_positive("fundamental_freq", cfg.fundamental_freq)
    _check_positive("switching_freq", cfg.switching_freq)
    if not 0.0 < cfg.modulation_index <= 1.0:
        raise ValueError(f"modulation_index must be in (0, 1], got {cfg.modulation_index}")
    _check_positive("arm_inductance", cfg.arm_inductance)
    _check_nonnegative("arm_resistance", cfg.arm_resistance)

    for arm_name, modules in (("upper", cfg.upper_modules), ("lower", cfg.lower_modules)):
        if len(modules) != n:
            raise ValueError(
                f"{arm_name} arm has {len(modules)} modules, expected {n}"
            )
        for j, m in enumerate(modules, start=1):
            _check_positive(f"{arm_name} module {j} capacitance", m.capacitance)
            _check_nonnegative(f"{arm_name} module {j} esr", m.esr)
            if m.leak_resistance is not None:
                _check_positive(f"{arm_name} module {j} leak_resistance", m.leak_resistance)
            if m.initial_voltage is not None:
                _check_nonnegative(f"{arm_name} module {j} initial_voltage", m.initial_voltage)

    if len(cfg.clamps) != n - 1:
        raise ValueError(f"expected {n - 1} clamp paths, got {len(cfg.clamps)}")
    for j, c in enumerate(cfg.clamps, start=1):
        _check_positive(f"clamp {j} inductance", c.inductance)
        _check_nonnegative(f"clamp {j} inductor_resistance", c.inductor_resistance)
        _check_nonnegative(f"clamp {j} diode_drop", c.diode_drop)
        _check_nonnegative(f"clamp {j} diode_resistance", c.diode_resistance)

    sw = cfg.switch
    _check_nonnegative("switch on_drop", sw.on_drop)
    _check_nonnegative("switch on_resistance", sw.on_resistance)
    _check_nonnegative("switch turn_on_time", sw.turn_on_time)
    _check_nonnegative("switch turn_off_time", sw.turn_off_time)

    load = cfg.load
    if load.kind == "current_source":
        _check_nonnegative("load amplitude", load.amplitude)
    elif load.kind == "series_rl":
        _check_nonnegative("load resistance", load.resistance)
        _check_nonnegative("load inductance", load.inductance)
        if load.resistance == 0.0 and load.inductance == 0.0:
            raise ValueError("series_rl load needs a nonzero resistance or inductance")
    else:
        raise ValueError(f"unknown load kind {load.kind!r}")

    num = cfg.numerics
    _check_positive("time_step", num.time_step)
    _check_positive("duration", num.duration)
    if num.time_step > 1.0 / (20.0 * cfg.switching_freq):
        raise ValueError(
            "time_step must be <= 1/(20*switching_freq) to resolve the carrier: "
            f"{num.time_step} > {1.0 / (20.0 * cfg.switching_freq)}"
        )
    if num.diode_resolution_max_iters < 2:
        raise ValueError("diode_resolution_max_iters must be >= 2")
    if num.record_decimation < 1:
        raise ValueError("record_decimation must be >= 1")
    return cfg


def initial_state(cfg: ConverterConfig) -> ConverterState:
    """State at t = 0: module voltages at their initial (or nominal) value,
    clamp currents zero, arm currents splitting the load current evenly."""
    v_nom = nominal_module_voltage(cfg)

    def arm(modules: tuple[ModuleParams, ...]) -> ArmState:
        volts = np.array(
            [m.initial_voltage if m.initial_voltage is not None else v_nom for m in modules],
            dtype=np.float64,
        )
        return ArmState(
            cap_voltages=volts,
            clamp_currents=np.zeros(cfg.modules_per_arm - 1, dtype=np.float64),
        )

    state = ConverterState(upper=arm(cfg.upper_modules), lower=arm(cfg.lower_modules))
    if cfg.load.kind == "current_source":
        i0 = cfg.load.amplitude * np.sin(-cfg.load.load_angle)
        state.output_current = i0
        state.upper.arm_current = i0 / 2.0
        state.lower.arm_current = -i0 / 2.0
    return state


def with_numerics(cfg: ConverterConfig, **changes) -> ConverterConfig:
    """Copy cfg with numerics fields replaced."""
    return replace(cfg, numerics=replace(cfg.numerics, **changes))
