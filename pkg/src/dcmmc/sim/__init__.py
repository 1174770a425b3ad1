"""Time-domain solver for the clamped leg: compiled kernel and dense reference."""

from .engine import ENERGY_LABELS, STATUS_DIODE_FAILURE, STATUS_NON_FINITE, STATUS_OK
from .runner import StepResult, resolve_diodes, simulate, step
from .statespace import TopologyMatrices, assemble, input_vector
from .trace import DISSIPATION_CLASSES, SimTrace, SimulationError

__all__ = [
    "ENERGY_LABELS", "STATUS_DIODE_FAILURE", "STATUS_NON_FINITE", "STATUS_OK",
    "StepResult", "resolve_diodes", "simulate", "step",
    "TopologyMatrices", "assemble", "input_vector",
    "DISSIPATION_CLASSES", "SimTrace", "SimulationError",
]
