"""Measure criterion-8 quantities on the redefined loss benchmark."""
import json
import time

from dcmmc.loss import arm_current_stats, simulated_loss
from dcmmc.scenario import analytic_loss_report, apply_axis, build_config, parse_scenario
from dcmmc.sim import simulate

spec = parse_scenario("loss-study")
t0 = time.time()
cfg = build_config(spec)
tr = simulate(cfg, spec.displacement_schedule, delay_model=spec.delay_model)
base_spec = apply_axis(spec, "delta_a", 0.0)
trb = simulate(build_config(base_spec), base_spec.displacement_schedule,
               delay_model=base_spec.delay_model)
print("runtime", round(time.time() - t0, 1), "s; ok:", tr.ok, trb.ok)

settle = spec.analysis["settle_time"]
rep = simulated_loss(tr, t_start=settle, baseline=trb)
repb = simulated_loss(trb, t_start=settle)
ana = analytic_loss_report(spec)["analytic"]

rms_a, avg_a, rms_c = arm_current_stats(cfg.load.amplitude, cfg.modulation_index,
                                        cfg.load.load_angle)
out = {
    "sim_balancing_per_arm_W": rep.balancing_loss,
    "analytic_balancing_per_arm_W": ana["balancing_loss_W"],
    "factor": rep.balancing_loss / ana["balancing_loss_W"],
    "total_W": rep.by_class["total_W"],
    "base_total_W": repb.by_class["total_W"],
    "throughput_W": rep.by_class["throughput_W"],
    "increase_frac": (rep.by_class["total_W"] - repb.by_class["total_W"])
                     / rep.by_class["throughput_W"],
    "rms_arm_sim": rep.rms_arm_current,
    "rms_arm_analytic": rms_a,
    "rms_rel_err": abs(rep.rms_arm_current - rms_a) / rms_a,
    "avg_arm_sim": rep.avg_arm_current,
    "avg_arm_analytic": avg_a,
    "avg_rel_err": abs(rep.avg_arm_current - avg_a) / avg_a,
    "rms_cap_sim": rep.rms_cap_current,
    "rms_cap_analytic": rms_c,
    "audit": tr.energy_audit()["relative_error"], "audit_base": trb.energy_audit()["relative_error"],
}
print(json.dumps(out, indent=1))
json.dump(out, open("scratch_loss.json", "w"), indent=1)
