"""Scenario files: schema-checked YAML ingestion, preset loading, batch
execution, and report emission.

A scenario file is a YAML mapping that either fully describes a converter
or names a shipped preset and overrides parts of it:

    name: my-study
    preset: table2-sim          # optional; deep-merge overrides below
    converter:
      dc_voltage: 12000.0
    displacement_schedule:
      - {time: 0.0, delta_a: 0.0}
      - {time: 5.0, delta_a: 0.02}
    delay_model: none           # or zero_order_hold

Unknown keys anywhere in the tree are errors: a typo never silently
falls back to a default.  ``emit_scenario(parse_scenario(f))`` parses
back to an equal spec, so presets are regenerable.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO

import numpy as np
import yaml

from . import loss as loss_mod
from . import metrics as metrics_mod
from .design import build_design_report
from .model import (
    ClampParams,
    ConverterConfig,
    LoadSpec,
    ModuleParams,
    NumericsSpec,
    SwitchParams,
    synthesize_mismatched_modules,
    uniform_modules,
    validate_config,
    with_numerics,
)
from .sim import SimulationError, SimTrace, simulate

SWEEP_AXES = ("delta_a", "i_p", "tolerance", "f_sw", "clamp_inductance")

# scenario-tree schema: mapping key -> nested schema (dict), None for a
# scalar/list leaf, or _FREE_TABLE for an open index->value mapping.
# Anything not listed here is an unknown key.
_FREE_TABLE = object()
_MODULES_SCHEMA = {
    "capacitance": None,
    "esr": None,
    "leak_resistance": None,
    "mismatch_tolerance": None,
    "leak_overrides": {"upper": _FREE_TABLE, "lower": _FREE_TABLE},
}
_CONVERTER_SCHEMA = {
    "modules_per_arm": None,
    "dc_voltage": None,
    "fundamental_freq": None,
    "switching_freq": None,
    "modulation_index": None,
    "arm_inductance": None,
    "arm_resistance": None,
    "switch": {"on_drop": None, "on_resistance": None,
               "turn_on_time": None, "turn_off_time": None},
    "clamp": {"inductance": None, "inductor_resistance": None,
              "diode_drop": None, "diode_resistance": None,
              "diode_current_rating": None, "max_diff_voltage": None},
    "modules": _MODULES_SCHEMA,
    "load": {"kind": None, "amplitude": None, "load_angle": None,
             "resistance": None, "inductance": None},
    "numerics": {"time_step": None, "duration": None,
                 "diode_resolution_max_iters": None, "record_decimation": None,
                 "record_clamp_currents": None, "record_output_full": None},
}
_SCENARIO_SCHEMA = {
    "name": None,
    "description": None,
    "preset": None,
    "converter": _CONVERTER_SCHEMA,
    "displacement_schedule": None,
    "delay_model": None,
    "outputs": {"trace": None, "metrics": None, "loss": None},
    "analysis": {"settle_time": None, "band": None, "consecutive_cycles": None,
                 "max_harmonic_freq": None},
}

_DEFAULT_OUTPUTS = {"trace": True, "metrics": True, "loss": True}
_DEFAULT_ANALYSIS = {"settle_time": 0.0, "band": 0.03,
                     "consecutive_cycles": 5, "max_harmonic_freq": None}


class ScenarioError(ValueError):
    """Malformed scenario file (syntax, unknown key, or bad value)."""


def _plain(obj):
    """Recursively convert numpy scalars/arrays so YAML can represent them."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    return obj


@dataclass
class ScenarioSpec:
    """A parsed, normalized scenario: everything a run needs."""

    name: str
    converter: dict
    displacement_schedule: tuple[tuple[float, float], ...] = ((0.0, 0.0),)
    delay_model: str = "none"
    description: str = ""
    outputs: dict = field(default_factory=lambda: dict(_DEFAULT_OUTPUTS))
    analysis: dict = field(default_factory=lambda: dict(_DEFAULT_ANALYSIS))

    def to_tree(self) -> dict:
        tree = {"name": self.name}
        if self.description:
            tree["description"] = self.description
        tree["converter"] = copy.deepcopy(self.converter)
        tree["displacement_schedule"] = [
            {"time": t, "delta_a": v} for t, v in self.displacement_schedule
        ]
        tree["delay_model"] = self.delay_model
        tree["outputs"] = dict(self.outputs)
        tree["analysis"] = dict(self.analysis)
        return tree


def _check_keys(tree: dict, schema: dict, path: str) -> None:
    for key, sub in tree.items():
        if key not in schema:
            where = f" in '{path}'" if path else ""
            raise ScenarioError(f"unknown key '{key}'{where}")
        if schema[key] is _FREE_TABLE:
            continue
        if isinstance(sub, dict) and isinstance(schema[key], dict):
            _check_keys(sub, schema[key], f"{path}.{key}" if path else str(key))
        elif isinstance(sub, dict) and schema[key] is None:
            where = f"{path}.{key}" if path else str(key)
            raise ScenarioError(f"'{where}' does not take a mapping")


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _normalize_schedule(raw) -> tuple[tuple[float, float], ...]:
    if raw is None:
        return ((0.0, 0.0),)
    if isinstance(raw, (int, float)):
        return ((0.0, float(raw)),)
    entries = []
    for item in raw:
        if isinstance(item, dict):
            extra = set(item) - {"time", "delta_a"}
            if extra:
                raise ScenarioError(
                    f"unknown key '{sorted(extra)[0]}' in 'displacement_schedule'")
            entries.append((float(item["time"]), float(item["delta_a"])))
        else:
            t, v = item
            entries.append((float(t), float(v)))
    entries.sort(key=lambda tv: tv[0])
    if not entries or entries[0][0] > 0.0:
        entries.insert(0, (0.0, 0.0))
    for _, v in entries:
        if v < 0.0:
            raise ScenarioError("displacement values must be non-negative")
    return tuple(entries)


def preset_names() -> tuple[str, ...]:
    """Names of the shipped presets (loadable without a path)."""
    pkg = resources.files("dcmmc.presets")
    return tuple(sorted(p.name[:-5] for p in pkg.iterdir() if p.name.endswith(".yaml")))


def _load_tree(source: str | Path | IO[str]) -> dict:
    if hasattr(source, "read"):
        text, label = source.read(), "<stream>"
    else:
        path = Path(source)
        if not path.exists() and not path.suffix and path.name in preset_names():
            text = resources.files("dcmmc.presets").joinpath(f"{path.name}.yaml").read_text()
            label = f"preset:{path.name}"
        else:
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as exc:
                hint = ""
                if not path.suffix:
                    hint = f" (shipped presets: {', '.join(preset_names())})"
                raise ScenarioError(
                    f"cannot read scenario '{source}': {exc}{hint}"
                ) from exc
            label = str(path)
    try:
        tree = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ScenarioError(f"YAML syntax error in {label}{loc}: {exc}") from exc
    if not isinstance(tree, dict):
        raise ScenarioError(f"scenario {label} must be a mapping at the top level")
    return tree


def parse_scenario(source: str | Path | IO[str]) -> ScenarioSpec:
    """Load and validate a scenario file (or shipped preset name).

    Args:
        source: Path to a YAML file, an open text stream, or the bare
            name of a shipped preset (e.g. ``table2-sim``).

    Returns:
        Normalized ScenarioSpec; the converter tree is fully merged (any
        ``preset`` reference resolved) and validated.

    Raises:
        ScenarioError: On syntax errors (with line/column), unknown keys,
            or invariant violations.
    """
    tree = _load_tree(source)
    _check_keys(tree, _SCENARIO_SCHEMA, "")

    if "preset" in tree:
        base_name = tree["preset"]
        if base_name not in preset_names():
            raise ScenarioError(
                f"unknown preset '{base_name}'; shipped presets: {', '.join(preset_names())}")
        base_text = resources.files("dcmmc.presets").joinpath(f"{base_name}.yaml").read_text()
        base = yaml.safe_load(base_text)
        base.pop("name", None)
        base.pop("description", None)
        merged = dict(tree)
        merged.pop("preset")
        tree = _deep_merge(base, merged)

    if "name" not in tree:
        raise ScenarioError("scenario needs a 'name'")
    if "converter" not in tree:
        raise ScenarioError("scenario needs a 'converter' section (or a 'preset')")

    delay = tree.get("delay_model", "none")
    if delay not in ("none", "zero_order_hold"):
        raise ScenarioError(
            f"delay_model must be 'none' or 'zero_order_hold', got '{delay}'")

    spec = ScenarioSpec(
        name=str(tree["name"]),
        description=str(tree.get("description", "")),
        converter=copy.deepcopy(tree["converter"]),
        displacement_schedule=_normalize_schedule(tree.get("displacement_schedule")),
        delay_model=delay,
        outputs=_deep_merge(_DEFAULT_OUTPUTS, tree.get("outputs", {})),
        analysis=_deep_merge(_DEFAULT_ANALYSIS, tree.get("analysis", {})),
    )
    cfg = build_config(spec)  # raises on invariant violations
    dur = cfg.numerics.duration
    for t, _ in spec.displacement_schedule:
        if t > dur:
            raise ScenarioError(
                f"displacement schedule time {t} s exceeds duration {dur} s")
    return spec


def emit_scenario(spec: ScenarioSpec, dest: str | Path | IO[str] | None = None) -> str:
    """Serialize a spec back to YAML; parse_scenario of the result equals it."""
    text = yaml.safe_dump(spec.to_tree(), sort_keys=False, default_flow_style=False)
    if dest is not None:
        if hasattr(dest, "write"):
            dest.write(text)
        else:
            Path(dest).write_text(text, encoding="utf-8")
    return text


def _build_modules(n: int, tree: dict, arm: str) -> tuple[ModuleParams, ...]:
    cap = float(tree["capacitance"])
    esr = float(tree.get("esr", 0.0))
    leak = tree.get("leak_resistance")
    leak = None if leak is None else float(leak)
    tol = tree.get("mismatch_tolerance")
    if tol:
        mods = synthesize_mismatched_modules(n, cap, esr, float(tol), leak)
        if arm == "lower":
            mods = tuple(reversed(mods))  # distinct but equally deterministic spread
    else:
        mods = uniform_modules(n, cap, esr, leak)
    overrides = (tree.get("leak_overrides") or {}).get(arm) or {}
    if overrides:
        as_list = list(mods)
        for idx, r_leak in overrides.items():
            j = int(idx)
            if not 1 <= j <= n:
                raise ScenarioError(
                    f"leak_overrides.{arm} index {j} outside 1..{n}")
            m = as_list[j - 1]
            as_list[j - 1] = ModuleParams(m.capacitance, m.esr, float(r_leak),
                                          m.initial_voltage)
        mods = tuple(as_list)
    return mods


def build_config(spec: ScenarioSpec) -> ConverterConfig:
    """Materialize the converter description from a scenario tree."""
    c = spec.converter
    try:
        n = int(c["modules_per_arm"])
        sw = c.get("switch", {})
        clamp = c["clamp"]
        load = c.get("load", {})
        num = c.get("numerics", {})
        cfg = ConverterConfig(
            modules_per_arm=n,
            dc_voltage=float(c["dc_voltage"]),
            fundamental_freq=float(c["fundamental_freq"]),
            switching_freq=float(c["switching_freq"]),
            modulation_index=float(c["modulation_index"]),
            arm_inductance=float(c["arm_inductance"]),
            arm_resistance=float(c.get("arm_resistance", 0.0)),
            switch=SwitchParams(
                on_drop=float(sw.get("on_drop", 0.0)),
                on_resistance=float(sw.get("on_resistance", 0.0)),
                turn_on_time=float(sw.get("turn_on_time", 0.0)),
                turn_off_time=float(sw.get("turn_off_time", 0.0)),
            ),
            clamps=tuple(
                ClampParams(
                    inductance=float(clamp["inductance"]),
                    inductor_resistance=float(clamp.get("inductor_resistance", 0.0)),
                    diode_drop=float(clamp.get("diode_drop", 0.0)),
                    diode_resistance=float(clamp.get("diode_resistance", 0.0)),
                    diode_current_rating=clamp.get("diode_current_rating"),
                    max_diff_voltage=clamp.get("max_diff_voltage"),
                )
                for _ in range(n - 1)
            ),
            upper_modules=_build_modules(n, c["modules"], "upper"),
            lower_modules=_build_modules(n, c["modules"], "lower"),
            load=LoadSpec(
                kind=load.get("kind", "current_source"),
                amplitude=float(load.get("amplitude", 0.0)),
                load_angle=float(load.get("load_angle", 0.0)),
                resistance=float(load.get("resistance", 0.0)),
                inductance=float(load.get("inductance", 0.0)),
            ),
            numerics=NumericsSpec(
                time_step=float(num.get("time_step", 1e-6)),
                duration=float(num.get("duration", 1.0)),
                diode_resolution_max_iters=int(num.get("diode_resolution_max_iters", 30)),
                record_decimation=int(num.get("record_decimation", 10)),
                record_clamp_currents=bool(num.get("record_clamp_currents", False)),
                record_output_full=bool(num.get("record_output_full", False)),
            ),
        )
    except KeyError as exc:
        raise ScenarioError(f"missing required converter key {exc}") from exc
    try:
        return validate_config(cfg)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def _loss_assumptions(cfg: ConverterConfig) -> dict:
    cl = cfg.clamps[0]
    return {
        "v0_V": cfg.switch.on_drop,
        "r_ohm": cfg.switch.on_resistance,
        "r_l_ohm": cl.inductor_resistance,
        "cap_esr_ohm": float(np.mean([m.esr for m in cfg.upper_modules])),
        "switch_event_time_s": cfg.switch.turn_on_time + cfg.switch.turn_off_time,
        "note": "v0/r taken from the switch parameters and assumed shared "
                "by the clamp diodes",
    }


def analytic_loss_report(spec: ScenarioSpec, delta_a: float | None = None) -> dict:
    """Closed-form LossReport tree for a scenario (no simulation)."""
    cfg = build_config(spec)
    if cfg.load.kind != "current_source":
        raise ScenarioError("analytic loss needs a prescribed-current load")
    if delta_a is None:
        delta_a = spec.displacement_schedule[-1][1]
    assumptions = _loss_assumptions(cfg)
    rep = loss_mod.loss_report(
        cfg, i_p=cfg.load.amplitude, m_a=cfg.modulation_index,
        phi=cfg.load.load_angle, v0=assumptions["v0_V"],
        r=assumptions["r_ohm"], r_l=assumptions["r_l_ohm"], delta_a=delta_a)
    return _plain({
        "scenario": spec.name,
        "delta_a": delta_a,
        "assumptions": assumptions,
        "analytic": rep.to_dict(),
    })


@dataclass
class RunResult:
    """Everything run() produced for one scenario execution."""

    spec: ScenarioSpec
    trace: SimTrace
    metrics: metrics_mod.MetricsReport | None
    loss: loss_mod.LossReport | None
    out_dir: Path | None
    files: tuple[str, ...] = ()


def _metrics_tree(spec: ScenarioSpec, cfg: ConverterConfig, trace: SimTrace,
                  rep: metrics_mod.MetricsReport, thd_bw: float,
                  settle: float) -> dict:
    audit = trace.energy_audit(_settle_index(trace, settle))
    return {
        "scenario": spec.name,
        "status": "ok" if trace.ok else f"failed({trace.status})",
        "thd_voltage": rep.thd_voltage,
        "thd_bandwidth_hz": thd_bw,
        "spread_final": rep.spread_final,
        "convergence_time_s": rep.convergence_time,
        "drift_rate_v_per_s": rep.drift_rate,
        "max_deviation_final": rep.max_deviation_final,
        "band": rep.band,
        "consecutive_cycles": spec.analysis["consecutive_cycles"],
        "nominal_module_voltage_V": rep.v_m,
        "settle_time_s": settle,
        "max_diode_iterations": trace.max_diode_iterations,
        "energy_audit": {
            "source_J": audit["source"],
            "residual_J": audit["residual"],
            "relative_error": audit["relative_error"],
        },
        "module_averages_V": {
            "upper": [float(v) for v in rep.module_averages[:cfg.modules_per_arm]],
            "lower": [float(v) for v in rep.module_averages[cfg.modules_per_arm:]],
        },
    }


def _settle_index(trace: SimTrace, settle: float) -> int:
    return int(np.searchsorted(trace.time, settle - 1e-12))


def run(spec: ScenarioSpec, out_dir: str | Path | None = None,
        delta_a: float | None = None, duration: float | None = None,
        delay_model: str | None = None,
        raise_on_failure: bool = False) -> RunResult:
    """Execute a scenario: simulate, analyze, and write trace/report files.

    Args:
        spec: Parsed scenario.
        out_dir: Directory for trace.csv / metrics.yaml / loss.yaml /
            scenario.yaml; nothing is written when None.
        delta_a: Override: replace the last schedule entry's value (a
            bare constant schedule becomes that constant).
        duration: Override the simulated duration, seconds.
        delay_model: Override the reference delay model.
        raise_on_failure: Re-raise SimulationError instead of returning
            the truncated trace.

    Returns:
        RunResult; .trace.ok tells whether the run completed.
    """
    cfg = build_config(spec)
    if duration is not None:
        cfg = with_numerics(cfg, duration=float(duration))
    schedule = list(spec.displacement_schedule)
    if delta_a is not None:
        schedule[-1] = (schedule[-1][0], float(delta_a))
    delay = spec.delay_model if delay_model is None else delay_model

    try:
        trace = simulate(cfg, displacement=schedule, delay_model=delay)
    except SimulationError as exc:
        if raise_on_failure:
            raise
        trace = exc.trace

    settle = float(spec.analysis["settle_time"])
    settle = min(settle, max(0.0, float(trace.time[-1]) - 2.0 / cfg.fundamental_freq))
    bw = spec.analysis["max_harmonic_freq"]
    thd_bw = float(bw) if bw else metrics_mod.default_max_harmonic_freq(cfg)

    met_rep = None
    loss_rep = None
    if trace.ok and spec.outputs.get("metrics", True):
        thd_v = None
        try:
            thd_v = metrics_mod.output_thd(
                trace, max_harmonic_freq=thd_bw,
                skip_cycles=int(round(settle * cfg.fundamental_freq)))
        except ValueError:
            thd_v = math.nan  # window too short for a THD estimate
        met_rep = metrics_mod.spread_metrics(
            trace, band=float(spec.analysis["band"]),
            consecutive_cycles=int(spec.analysis["consecutive_cycles"]),
            thd_voltage=thd_v)
    if trace.ok and spec.outputs.get("loss", True):
        try:
            loss_rep = loss_mod.simulated_loss(trace, t_start=settle)
        except ValueError:
            loss_rep = None

    files = []
    out_path = None
    if out_dir is not None:
        out_path = Path(out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
        emit_scenario(spec, out_path / "scenario.yaml")
        files.append("scenario.yaml")
        if spec.outputs.get("trace", True):
            trace.write_csv(str(out_path / "trace.csv"))
            files.append("trace.csv")
        if met_rep is not None:
            tree = _metrics_tree(spec, cfg, trace, met_rep, thd_bw, settle)
            (out_path / "metrics.yaml").write_text(
                yaml.safe_dump(_plain(tree), sort_keys=False), encoding="utf-8")
            files.append("metrics.yaml")
        if loss_rep is not None or cfg.load.kind == "current_source":
            tree = {
                "scenario": spec.name,
                "settle_time_s": settle,
                "assumptions": _loss_assumptions(cfg),
            }
            if cfg.load.kind == "current_source":
                tree["analytic"] = analytic_loss_report(
                    spec, delta_a=schedule[-1][1])["analytic"]
            if loss_rep is not None:
                tree["simulated"] = loss_rep.to_dict()
            (out_path / "loss.yaml").write_text(
                yaml.safe_dump(_plain(tree), sort_keys=False), encoding="utf-8")
            files.append("loss.yaml")

    return RunResult(spec=spec, trace=trace, metrics=met_rep, loss=loss_rep,
                     out_dir=out_path, files=tuple(files))


def apply_axis(spec: ScenarioSpec, axis: str, value: float) -> ScenarioSpec:
    """New spec with one sweep-axis value applied."""
    if axis not in SWEEP_AXES:
        raise ScenarioError(f"unknown sweep axis '{axis}'; one of {SWEEP_AXES}")
    out = copy.deepcopy(spec)
    out.name = f"{spec.name}-{axis}-{value:g}"
    if axis == "delta_a":
        sched = list(out.displacement_schedule)
        sched[-1] = (sched[-1][0], float(value))
        out.displacement_schedule = tuple(sched)
    elif axis == "i_p":
        out.converter.setdefault("load", {})["amplitude"] = float(value)
    elif axis == "tolerance":
        out.converter["modules"]["mismatch_tolerance"] = float(value)
    elif axis == "f_sw":
        out.converter["switching_freq"] = float(value)
    elif axis == "clamp_inductance":
        out.converter["clamp"]["inductance"] = float(value)
    return out


def _sweep_one(args) -> dict:
    spec, axis, value = args
    varied = apply_axis(spec, axis, value)
    cfg = build_config(varied)
    row = {"value": float(value), "status": "ok"}
    try:
        res = run(varied, out_dir=None, raise_on_failure=True)
    except (SimulationError, ScenarioError, ValueError) as exc:
        row["status"] = f"failed: {exc}"
        row.update(spread_final=math.nan, convergence_time_s=math.nan,
                   total_loss_W=math.nan, balancing_loss_W=math.nan)
        return row
    met, lrep = res.metrics, res.loss
    row["spread_final"] = float(met.spread_final) if met else math.nan
    row["convergence_time_s"] = (
        math.nan if met is None or met.convergence_time is None
        else float(met.convergence_time))
    row["total_loss_W"] = (
        float(lrep.by_class["total_W"]) if lrep is not None else math.nan)
    if cfg.load.kind == "current_source":
        delta = varied.displacement_schedule[-1][1]
        stats = loss_mod.arm_current_stats(
            cfg.load.amplitude, cfg.modulation_index, cfg.load.load_angle)
        bal, _ = loss_mod.balancing_loss(
            cfg, stats[0], delta, v0=cfg.switch.on_drop,
            r=cfg.switch.on_resistance, r_l=cfg.clamps[0].inductor_resistance)
        row["balancing_loss_W"] = bal
    else:
        row["balancing_loss_W"] = math.nan
    return row


def sweep(spec: ScenarioSpec, axis: str, values, out_dir: str | Path | None = None,
          workers: int = 1) -> list[dict]:
    """Run the scenario once per axis value and tabulate the results.

    Per-run failures are recorded in the row's status and the sweep
    continues.  Rows come back sorted by axis value regardless of worker
    scheduling.

    Args:
        spec: Base scenario.
        axis: One of delta_a, i_p, tolerance, f_sw, clamp_inductance.
        values: Axis values (may be empty).
        out_dir: When given, writes sweep.csv and sweep.yaml there.
        workers: Parallel process count (1 = in-process sequential).

    Returns:
        List of row dicts sorted by value.
    """
    if axis not in SWEEP_AXES:
        raise ScenarioError(f"unknown sweep axis '{axis}'; one of {SWEEP_AXES}")
    jobs = [(spec, axis, float(v)) for v in values]
    if workers > 1 and len(jobs) > 1:
        import concurrent.futures as cf
        with cf.ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(j) for j in jobs]
    rows.sort(key=lambda r: r["value"])

    if out_dir is not None:
        out_path = Path(out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
        cols = ["value", "status", "spread_final", "convergence_time_s",
                "total_loss_W", "balancing_loss_W"]
        lines = [",".join([axis] + cols[1:])]
        for r in rows:
            lines.append(",".join(
                repr(r[c]) if isinstance(r[c], float) else str(r[c]).replace(",", ";")
                for c in cols))
        (out_path / "sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        (out_path / "sweep.yaml").write_text(
            yaml.safe_dump(_plain({"scenario": spec.name, "axis": axis, "rows": rows}),
                           sort_keys=False), encoding="utf-8")
    return rows


def design_report_tree(spec: ScenarioSpec, capacitor_tolerance: float | None = None,
                       delta_a: float | None = None,
                       u_diff_max: float | None = None,
                       i_d_max: float | None = None) -> dict:
    """Design-rule report for a scenario's converter, as a YAML-ready tree."""
    cfg = build_config(spec)
    if capacitor_tolerance is None:
        capacitor_tolerance = float(
            spec.converter.get("modules", {}).get("mismatch_tolerance") or 0.0)
    if delta_a is None:
        delta_a = spec.displacement_schedule[-1][1]
    rep = build_design_report(cfg, capacitor_tolerance, delta_a,
                              u_diff_max=u_diff_max, i_d_max=i_d_max)
    return _plain({"scenario": spec.name, "design": rep.to_dict()})
