"""Simulation trace container, energy audit, and CSV emission."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO

import numpy as np

from ..model import ConverterConfig, ConverterState

# dissipation classes summed in the audit (load_resistance only applies to
# the series R-L load; it is zero otherwise)
DISSIPATION_CLASSES = (
    "arm_resistance",
    "switch_conduction",
    "capacitor_esr",
    "leak",
    "clamp_conduction",
    "clamp_residual",
    "switching_events",
    "load_resistance",
)


@dataclass
class SimTrace:
    """Decimated time series plus cumulative energy tallies for one run.

    Attributes:
        config: The converter description the run used.
        time: Record instants, strictly increasing, seconds.
        upper_voltages: Module capacitor voltages, shape (n_rec, N).
        lower_voltages: Same for the lower arm.
        upper_arm_current: Upper arm current, shape (n_rec,).
        lower_arm_current: Lower arm current.
        output_voltage: Voltage at the ac node (midpoint-referenced).
        output_current: Load current.
        energies: Cumulative energy per device class, joules, each shape
            (n_rec,).  Keys: source, load, arm_resistance,
            switch_conduction, capacitor_esr, leak, clamp_conduction,
            clamp_residual, switching_events, load_resistance.
        stored_energy: Total field energy (caps + inductors), shape (n_rec,).
        upper_clamp_currents: Optional (n_rec, N-1) clamp branch currents.
        lower_clamp_currents: Same for the lower arm.
        output_voltage_full: Optional undecimated output voltage (one
            sample per solver step), for alias-free harmonic analysis;
            not part of the CSV emission.
        full_sample_freq: Sample rate of output_voltage_full, hertz.
        final_state: Converter state at the last completed step.
        max_diode_iterations: Worst-case sweeps needed to settle diodes.
        status: 0 = completed, 1 = unresolved diode pattern, 2 = numeric
            divergence.  Failed runs hold the truncated trace.
        fail_time: Simulation time of the failure, or -1.0.
    """

    config: ConverterConfig
    time: np.ndarray
    upper_voltages: np.ndarray
    lower_voltages: np.ndarray
    upper_arm_current: np.ndarray
    lower_arm_current: np.ndarray
    output_voltage: np.ndarray
    output_current: np.ndarray
    energies: dict[str, np.ndarray]
    stored_energy: np.ndarray
    upper_clamp_currents: np.ndarray | None = None
    lower_clamp_currents: np.ndarray | None = None
    output_voltage_full: np.ndarray | None = None
    full_sample_freq: float | None = None
    final_state: ConverterState | None = None
    max_diode_iterations: int = 0
    status: int = 0
    fail_time: float = -1.0
    displacement_schedule: tuple[tuple[float, float], ...] = ((0.0, 0.0),)
    delay_model: str = "none"

    @property
    def ok(self) -> bool:
        return self.status == 0

    def window(self, t_start: float, t_end: float | None = None) -> slice:
        """Record-index slice covering [t_start, t_end]."""
        i0 = int(np.searchsorted(self.time, t_start - 1e-12))
        i1 = len(self.time) if t_end is None else int(np.searchsorted(self.time, t_end + 1e-12))
        return slice(i0, i1)

    def energy_audit(self, start_index: int = 0, end_index: int | None = None) -> dict:
        """Balance source energy against stored + dissipated + delivered.

        The residual is the implicit integrator's numerical dissipation and
        is non-negative by construction; its relative size (against source
        throughput over the window) is the audit figure of merit.

        Returns:
            Dict with per-class energies over the window, the residual, and
            ``relative_error`` = |residual| / max(|source|, stored scale).
        """
        j = -1 if end_index is None else end_index

        def delta(arr: np.ndarray) -> float:
            return float(arr[j] - arr[start_index])

        source = delta(self.energies["source"])
        stored = delta(self.stored_energy)
        dissipated = {k: delta(self.energies[k]) for k in DISSIPATION_CLASSES}
        interface = delta(self.energies["load"])
        # For a series R-L load the load network is inside the audited
        # system (its inductor energy and resistor loss are already
        # counted); only a prescribed-current load exports energy.
        exported = interface if self.config.load.kind == "current_source" else 0.0
        residual = source - stored - sum(dissipated.values()) - exported
        scale = max(abs(source), abs(stored), 1e-30)
        return {
            "source": source,
            "stored_delta": stored,
            "delivered": exported,
            "dissipated": dissipated,
            "residual": residual,
            "relative_error": abs(residual) / scale,
        }

    def csv_header(self) -> str:
        n = self.config.modules_per_arm
        cols = ["time"]
        cols += [f"u_c_u_{q + 1}" for q in range(n)]
        cols += [f"u_c_l_{q + 1}" for q in range(n)]
        cols += ["i_arm_u", "i_arm_l", "v_out", "i_out"]
        if self.upper_clamp_currents is not None:
            cols += [f"i_clamp_u_{m + 1}" for m in range(n - 1)]
            cols += [f"i_clamp_l_{m + 1}" for m in range(n - 1)]
        return ",".join(cols)

    def write_csv(self, dest: str | IO[str]) -> None:
        """Emit the trace as UTF-8 comma-separated values with a header row."""
        close = False
        if isinstance(dest, str):
            fh = open(dest, "w", encoding="utf-8", newline="\n")
            close = True
        else:
            fh = dest
        try:
            fh.write(self.csv_header() + "\n")
            blocks = [self.time[:, None], self.upper_voltages, self.lower_voltages,
                      self.upper_arm_current[:, None], self.lower_arm_current[:, None],
                      self.output_voltage[:, None], self.output_current[:, None]]
            if self.upper_clamp_currents is not None:
                blocks += [self.upper_clamp_currents, self.lower_clamp_currents]
            data = np.hstack(blocks)
            for row in data:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
        finally:
            if close:
                fh.close()


class SimulationError(RuntimeError):
    """Raised when a run diverges or a diode pattern cannot be resolved.

    Carries the truncated trace for post-mortem inspection.
    """

    def __init__(self, message: str, trace: SimTrace):
        super().__init__(message)
        self.trace = trace
