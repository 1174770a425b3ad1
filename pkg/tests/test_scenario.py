"""Scenario schema, shipped presets, run artifacts, sweeps, and the CLI."""
import math

import pytest
import yaml

from dcmmc.cli import main
from dcmmc.scenario import (
    ScenarioError,
    apply_axis,
    build_config,
    emit_scenario,
    parse_scenario,
    preset_names,
    run,
    sweep,
)

TINY = """\
name: tiny
preset: table2-sim
converter:
  modules_per_arm: 4
  dc_voltage: 400.0
  switching_freq: 2000.0
  arm_inductance: 2.0e-3
  modules: {capacitance: 4.7e-3, esr: 1.0e-3}
  load: {kind: current_source, amplitude: 20.0, load_angle: 0.2}
  numerics: {time_step: 2.0e-6, duration: 0.14, record_decimation: 20}
displacement_schedule:
- {time: 0.0, delta_a: 0.002}
analysis: {settle_time: 0.02}
"""


def _tiny(tmp_path):
    f = tmp_path / "tiny.yaml"
    f.write_text(TINY, encoding="utf-8")
    return f


def test_shipped_preset_names():
    names = preset_names()
    for expect in ("table2-sim", "table2-experiment", "table3-leaky",
                   "mismatch-step", "loss-study"):
        assert expect in names


@pytest.mark.parametrize("name", ["table2-sim", "table2-experiment",
                                  "table3-leaky", "mismatch-step",
                                  "loss-study"])
def test_presets_parse_and_validate(name):
    spec = parse_scenario(name)
    cfg = build_config(spec)  # runs the full config validator
    assert cfg.modules_per_arm >= 2
    assert spec.name == name


def test_simulation_column_values():
    cfg = build_config(parse_scenario("table2-sim"))
    assert cfg.modules_per_arm == 40
    assert cfg.dc_voltage == 24e3
    assert cfg.fundamental_freq == 50.0
    assert cfg.switching_freq == 5e3
    assert cfg.modulation_index == 0.95
    assert cfg.arm_inductance == pytest.approx(10e-3)
    assert cfg.upper_modules[0].capacitance == pytest.approx(15e-3)
    assert cfg.clamps[0].inductance == pytest.approx(10e-6)
    assert len(cfg.clamps) == 39


def test_experiment_column_values():
    cfg = build_config(parse_scenario("table2-experiment"))
    assert cfg.modules_per_arm == 8
    assert cfg.dc_voltage == pytest.approx(120.0)
    assert cfg.switching_freq == 10e3
    assert cfg.arm_inductance == pytest.approx(2e-3)
    assert cfg.upper_modules[0].capacitance == pytest.approx(4.9e-3)
    assert cfg.clamps[0].inductance == pytest.approx(7.5e-6)


def test_leaky_preset_places_parallel_resistors():
    cfg = build_config(parse_scenario("table3-leaky"))
    leaky = [i for i, m in enumerate(cfg.upper_modules)
             if m.leak_resistance is not None]
    assert leaky == [3, 8, 13, 18]  # modules 4, 9, 14, 19, 1-based
    lower = [i for i, m in enumerate(cfg.lower_modules)
             if m.leak_resistance is not None]
    assert lower == leaky
    for i in leaky:
        assert cfg.upper_modules[i].leak_resistance > 0


def test_unknown_preset_lists_choices():
    with pytest.raises(ScenarioError, match="table2-sim"):
        parse_scenario("tabel2-sim")


def test_typo_key_is_rejected_by_name(tmp_path):
    f = tmp_path / "typo.yaml"
    f.write_text(TINY.replace("arm_inductance", "arm_inductence"),
                 encoding="utf-8")
    with pytest.raises(ScenarioError, match="arm_inductence"):
        parse_scenario(f)


@pytest.mark.parametrize("name", ["table2-sim", "table2-experiment",
                                  "table3-leaky", "mismatch-step",
                                  "loss-study"])
def test_emit_parse_round_trip(name, tmp_path):
    spec = parse_scenario(name)
    out = tmp_path / "emitted.yaml"
    emit_scenario(spec, out)
    again = parse_scenario(out)
    assert again.to_tree() == spec.to_tree()


def test_apply_axis_variants(tmp_path):
    spec = parse_scenario(_tiny(tmp_path))
    assert apply_axis(spec, "delta_a", 0.01).displacement_schedule[-1][1] == 0.01
    assert apply_axis(spec, "f_sw", 4e3).converter["switching_freq"] == 4e3
    varied = apply_axis(spec, "clamp_inductance", 3e-6)
    assert build_config(varied).clamps[0].inductance == pytest.approx(3e-6)
    with pytest.raises(ScenarioError, match="axis"):
        apply_axis(spec, "carrier_count", 1.0)
    # the original spec is untouched
    assert spec.displacement_schedule[-1][1] == 0.002


def test_run_writes_artifacts_and_is_deterministic(tmp_path):
    spec = parse_scenario(_tiny(tmp_path))
    out_a = tmp_path / "a"
    res = run(spec, out_dir=out_a)
    assert res.trace.ok
    assert set(res.files) == {"scenario.yaml", "trace.csv", "metrics.yaml",
                              "loss.yaml"}
    for f in res.files:
        assert (out_a / f).exists()
    met = yaml.safe_load((out_a / "metrics.yaml").read_text())
    assert met["scenario"] == "tiny"
    assert math.isfinite(met["spread_final"])
    loss = yaml.safe_load((out_a / "loss.yaml").read_text())
    assert "analytic" in loss and "simulated" in loss
    out_b = tmp_path / "b"
    run(spec, out_dir=out_b)
    assert (out_a / "trace.csv").read_bytes() == (out_b / "trace.csv").read_bytes()
    assert (out_a / "metrics.yaml").read_bytes() == (out_b / "metrics.yaml").read_bytes()


def test_run_overrides(tmp_path):
    spec = parse_scenario(_tiny(tmp_path))
    res = run(spec, out_dir=None, delta_a=0.0, duration=0.06)
    assert res.trace.time[-1] == pytest.approx(0.06)
    assert res.trace.displacement_schedule[-1][1] == 0.0


def test_sweep_rows_and_csv(tmp_path):
    spec = parse_scenario(_tiny(tmp_path))
    out = tmp_path / "sw"
    rows = sweep(spec, "delta_a", [0.0, 0.002], out_dir=out)
    assert [r["value"] for r in rows] == [0.0, 0.002]
    assert all(r["status"] == "ok" for r in rows)
    assert all(math.isfinite(r["spread_final"]) for r in rows)
    assert rows[1]["balancing_loss_W"] > rows[0]["balancing_loss_W"]
    text = (out / "sweep.csv").read_text()
    assert text.count("\n") == 3  # header + 2 rows
    assert (out / "sweep.yaml").exists()


def test_cli_simulate_and_reports(tmp_path, capsys):
    f = _tiny(tmp_path)
    out = tmp_path / "cli-run"
    assert main(["simulate", str(f), "--out", str(out)]) == 0
    assert (out / "trace.csv").exists()
    said = capsys.readouterr().out
    assert "spread_final" in said

    report = tmp_path / "design.yaml"
    assert main(["design", "table2-experiment", "--tolerance", "0.3",
                 "--delta-a", "0.02", "--u-diff-max", "0.15",
                 "--i-d-max", "5.0", "--out", str(report)]) == 0
    tree = yaml.safe_load(report.read_text())
    lo = tree["design"]["inductor_lower_bound"]
    hi = tree["design"]["inductor_upper_bound"]
    assert lo <= 7.5e-6 <= hi
    assert tree["design"]["inductance_within_window"] is True

    lossrep = tmp_path / "loss.yaml"
    assert main(["loss", "loss-study", "--out", str(lossrep)]) == 0
    assert "balancing_loss_W" in lossrep.read_text()


def test_cli_error_paths(tmp_path, capsys):
    assert main(["simulate", "no-such-preset", "--out", str(tmp_path)]) == 2
    assert "scenario error" in capsys.readouterr().err
    f = _tiny(tmp_path)
    assert main(["sweep", str(f), "--axis", "delta_a",
                 "--values", "0.0,zap"]) == 2
    assert "comma-separated" in capsys.readouterr().err
