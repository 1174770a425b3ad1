"""Simulation and design tools for a diode-clamped modular multilevel leg.

The package models one phase leg of a modular multilevel converter whose
module capacitors are balanced without voltage sensors: adjacent modules
are linked by small inductive clamp branches, and a per-module carrier
displacement steers charge down the chain.  It provides

* a fixed-step switched-linear circuit solver (``dcmmc.sim``),
* carrier/reference generation and gating (``dcmmc.modulator``),
* closed-form clamp transient analysis (``dcmmc.clamp``),
* balancing and component sizing rules (``dcmmc.design``),
* conduction/switching loss estimates (``dcmmc.loss``),
* trace post-processing metrics (``dcmmc.metrics``),
* scenario files, presets, and a CLI (``dcmmc.scenario``, ``dcmmc.cli``).
"""

from .model import (
    ArmState,
    ClampParams,
    ConverterConfig,
    ConverterState,
    LoadSpec,
    ModuleParams,
    NumericsSpec,
    SwitchParams,
    initial_state,
    nominal_module_voltage,
    synthesize_mismatched_modules,
    uniform_modules,
    validate_config,
    with_numerics,
)
from .loss import LossReport
from .metrics import MetricsReport
from .scenario import ScenarioSpec, parse_scenario
from .sim import SimTrace, SimulationError, simulate

__version__ = "0.1.0"

__all__ = [
    "ArmState", "ClampParams", "ConverterConfig", "ConverterState",
    "LoadSpec", "ModuleParams", "NumericsSpec", "SwitchParams",
    "initial_state", "nominal_module_voltage", "synthesize_mismatched_modules",
    "uniform_modules", "validate_config", "with_numerics",
    "LossReport", "MetricsReport", "ScenarioSpec", "parse_scenario",
    "SimTrace", "SimulationError", "simulate",
    "__version__",
]
