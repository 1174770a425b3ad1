"""Empirical verification of the long acceptance runs; writes scratch_verify.json."""
import copy
import json
import time

import numpy as np

from dcmmc import scenario as sc
from dcmmc.loss import arm_current_stats, loss_report, simulated_loss
from dcmmc.metrics import cycle_averages

OUT = "/root/pkg/scratch_verify.json"
out = {}


def save():
    with open(OUT, "w") as f:
        json.dump(out, f, indent=1, default=float)


def block_means(met, v_m, block_s=1.0):
    t = np.asarray(met.cycle_times)
    s = np.asarray(met.cycle_spread) / v_m
    blocks = []
    t_end = t[-1] + 0.02
    b0 = 0.0
    while b0 + block_s <= t_end + 1e-9:
        m = (t >= b0) & (t < b0 + block_s)
        if m.any():
            blocks.append(float(s[m].mean()))
        b0 += block_s
    return blocks


def summarize(name, res, want_ordering=False, want_thd=False):
    tr, met = res.trace, res.metrics
    cfg = sc.build_config(res.spec)
    d = {"status": "ok" if tr.ok else f"failed({tr.status})",
         "max_diode_iters": int(tr.max_diode_iterations)}
    if met is not None:
        d.update(spread_final=met.spread_final,
                 conv_time=met.convergence_time,
                 max_dev_final=met.max_deviation_final,
                 drift_rate=met.drift_rate,
                 blocks=block_means(met, met.v_m))
        if want_thd:
            d["thd"] = met.thd_voltage
    if want_ordering and tr.ok:
        v_m = cfg.dc_voltage / cfg.modules_per_arm
        vfd = cfg.clamps[0].diode_drop
        slack = vfd + 0.01 * v_m
        worst = np.inf
        gaps = []
        for arr in (tr.upper_voltages, tr.lower_voltages):
            _, means = cycle_averages(tr.time, arr, cfg.fundamental_freq)
            ubar = means[-1]
            margins = ubar[:-1] - ubar[1:] + slack
            worst = min(worst, float(margins.min()))
            gaps.append([float(g) for g in (ubar[1:] - ubar[:-1])])
        d["ordering_min_margin_V"] = worst
        d["gap_mean_V"] = [float(np.mean(g)) for g in gaps]
        d["gap_max_V"] = [float(np.max(g)) for g in gaps]
    aud = tr.energy_audit(int(np.searchsorted(tr.time, 2.0)))
    d["audit_rel_err"] = aud["relative_error"]
    out[name] = d
    save()
    return d


t_all = time.time()

# -- fast checks first ------------------------------------------------------
spec_exp = sc.parse_scenario("table2-experiment")
r1 = sc.run(spec_exp, duration=0.5)
r2 = sc.run(spec_exp, duration=0.5)
same = all(np.array_equal(a, b) for a, b in (
    (r1.trace.upper_voltages, r2.trace.upper_voltages),
    (r1.trace.lower_voltages, r2.trace.lower_voltages),
    (r1.trace.upper_arm_current, r2.trace.upper_arm_current),
    (r1.trace.output_voltage, r2.trace.output_voltage)))
out["rerun_identical"] = bool(same)
save()
print("rerun identical:", same, flush=True)

spec_sim = sc.parse_scenario("table2-sim")
spec_cl = copy.deepcopy(spec_sim)
spec_cl.converter["numerics"]["record_clamp_currents"] = True
spec_cl.converter["numerics"]["record_output_full"] = False
rcl = sc.run(spec_cl, duration=2.0, delta_a=0.002)
mins = [float(np.min(rcl.trace.upper_clamp_currents)),
        float(np.min(rcl.trace.lower_clamp_currents))]
out["clamp_current_min_A"] = mins
out["clamp_current_max_A"] = [float(np.max(rcl.trace.upper_clamp_currents)),
                              float(np.max(rcl.trace.lower_clamp_currents))]
save()
print("clamp current mins:", mins, flush=True)
del rcl

# -- criterion 3: ZOH dichotomy --------------------------------------------
t0 = time.time()
rA = sc.run(spec_sim, delta_a=0.0, delay_model="zero_order_hold")
dA = summarize("A_zoh_da0", rA, want_thd=False)
dA["wall_s"] = time.time() - t0
save()
print("A done", dA, flush=True)
del rA

t0 = time.time()
rB = sc.run(spec_sim, delta_a=0.002, delay_model="zero_order_hold")
dB = summarize("B_zoh_da002", rB, want_ordering=True)
dB["wall_s"] = time.time() - t0
save()
print("B done", dB, flush=True)
del rB

# -- criteria 7+8: paired no-delay runs -------------------------------------
t0 = time.time()
rC = sc.run(spec_sim, delta_a=0.0)
dC = summarize("C_none_da0", rC, want_thd=True)
dC["wall_s"] = time.time() - t0
save()
print("C done", dC, flush=True)

from dcmmc.metrics import output_thd
out["thd_vs_bandwidth"] = {
    str(bw): float(output_thd(rC.trace, max_harmonic_freq=bw, skip_cycles=100))
    for bw in (2.5e3, 5e3, 2e4, 5e4, 1e5, 1.9e5, 2.5e5, 5e5)}
save()
print("thd curve:", out["thd_vs_bandwidth"], flush=True)

t0 = time.time()
rD = sc.run(spec_sim, delta_a=0.002)
dD = summarize("D_none_da002", rD, want_ordering=True, want_thd=True)
dD["wall_s"] = time.time() - t0
save()
print("D done", dD, flush=True)

cfg_sim = sc.build_config(spec_sim)
pair = simulated_loss(rD.trace, 2.0, baseline=rC.trace)
base = simulated_loss(rC.trace, 2.0)
anal = loss_report(cfg_sim, cfg_sim.load.amplitude, cfg_sim.modulation_index,
                   cfg_sim.load.load_angle, cfg_sim.switch.on_drop,
                   cfg_sim.switch.on_resistance,
                   cfg_sim.clamps[0].inductor_resistance, 0.002)
rms_u = []
for tr in (rD.trace,):
    i0 = int(np.searchsorted(tr.time, 2.0))
    for ch in (tr.upper_arm_current, tr.lower_arm_current):
        seg = ch[i0:]
        rms_u.append(float(np.sqrt(np.mean(seg ** 2))))
stats = arm_current_stats(cfg_sim.load.amplitude, cfg_sim.modulation_index,
                          cfg_sim.load.load_angle)
out["loss_pair"] = {
    "total_W_da0": base.by_class["total_W"],
    "total_W_da002": pair.by_class["total_W"],
    "throughput_W": pair.by_class["throughput_W"],
    "increase_W": pair.by_class["total_W"] - base.by_class["total_W"],
    "increase_frac_of_throughput":
        (pair.by_class["total_W"] - base.by_class["total_W"])
        / pair.by_class["throughput_W"],
    "sim_balancing_W": pair.balancing_loss,
    "analytic_balancing_W": anal.balancing_loss,
    "factor": (anal.balancing_loss / pair.balancing_loss
               if pair.balancing_loss else None),
    "analytic_arm_W": anal.total_arm_loss,
    "sim_arm_W": base.total_arm_loss,
    "arm_rel_err": abs(anal.total_arm_loss - base.total_arm_loss)
                   / anal.total_arm_loss,
    "rms_arm_sim_A": rms_u,
    "rms_arm_analytic_A": stats[0],
    "rms_rel_errs": [abs(r - stats[0]) / stats[0] for r in rms_u],
}
save()
print("loss pair:", json.dumps(out["loss_pair"], indent=1, default=float),
      flush=True)
del rC, rD

t0 = time.time()
rE = sc.run(spec_sim, delta_a=0.02)
dE = summarize("E_none_da02", rE, want_ordering=True, want_thd=True)
dE["wall_s"] = time.time() - t0
save()
print("E done", dE, flush=True)
del rE

out["thd_pair"] = {"thd_da0": out["C_none_da0"].get("thd"),
                   "thd_da02": out["E_none_da02"].get("thd")}
if None not in out["thd_pair"].values():
    out["thd_pair"]["diff_pp"] = (out["E_none_da02"]["thd"]
                                  - out["C_none_da0"]["thd"]) * 100.0
save()

# -- criteria 4+6: mismatch step + threshold sweep ---------------------------
spec_mm = sc.parse_scenario("mismatch-step")
for name, da in (("F_mm_da02", None), ("H_mm_da002", 0.002),
                 ("I_mm_da005", 0.005), ("J_mm_da01", 0.01)):
    t0 = time.time()
    r = sc.run(spec_mm, delta_a=da)
    d = summarize(name, r)
    d["wall_s"] = time.time() - t0
    save()
    print(name, "done", d, flush=True)
    del r

# -- criterion 5: leaky modules ----------------------------------------------
spec_lk = sc.parse_scenario("table3-leaky")
t0 = time.time()
rG = sc.run(spec_lk)
dG = summarize("G_leaky", rG)
dG["wall_s"] = time.time() - t0
save()
print("G done", dG, flush=True)
del rG

out["total_wall_s"] = time.time() - t_all
save()
print("ALL DONE in", out["total_wall_s"], "s", flush=True)
