"""Scratch: sanity-check metrics.py and loss.py on a short run."""
import math
import numpy as np

from dcmmc.model import (ConverterConfig, ModuleParams, SwitchParams, ClampParams,
                         LoadSpec, NumericsSpec, uniform_modules)
from dcmmc import simulate
from dcmmc import metrics, loss

# --- THD unit checks (no sim needed) ---
fs = 100_000.0
f1 = 50.0
t = np.arange(int(fs / f1) * 10) / fs
pure = 3.0 * np.sin(2 * np.pi * f1 * t + 0.3)
print("thd(pure sine) =", metrics.thd(pure, fs, f1))
sq = np.sign(np.sin(2 * np.pi * f1 * t) + 1e-12)
v = metrics.thd(sq, fs, f1)
print("thd(square) =", v, "expect", math.sqrt(math.pi**2 / 8 - 1))
# scale + dc invariance
v2 = metrics.thd(5.0 * sq + 7.0, fs, f1)
print("scale/dc invariance:", abs(v - v2))
# harmonic-limited square: only 3rd
v3 = metrics.thd(sq, fs, f1, max_harmonic_freq=3.5 * f1)
print("thd(square, up to 3rd) =", v3, "expect", 1.0 / 3.0)

# --- arm_current_stats frozen values ---
st = loss.arm_current_stats(100.0, 0.95, 0.0)
print("stats:", st, "expect (42.592, 23.75, 18.5194)")

# --- small sim for spread/convergence/simulated_loss ---
n = 4
cfg = ConverterConfig(
    modules_per_arm=n,
    dc_voltage=4000.0,
    fundamental_freq=50.0,
    switching_freq=5000.0,
    modulation_index=0.95,
    arm_inductance=10e-3,
    arm_resistance=0.1,
    switch=SwitchParams(on_drop=0.1, on_resistance=0.02, turn_on_time=0.0, turn_off_time=0.0),
    clamps=tuple(ClampParams(inductance=10e-6, inductor_resistance=1e-3, diode_drop=0.1,
                             diode_resistance=0.02) for _ in range(n - 1)),
    upper_modules=uniform_modules(n, capacitance=15e-3, esr=1e-3),
    lower_modules=uniform_modules(n, capacitance=15e-3, esr=1e-3),
    load=LoadSpec(kind="current_source", amplitude=100.0, load_angle=0.0),
    numerics=NumericsSpec(time_step=1e-6, duration=0.2, record_decimation=20),
)
tr = simulate(cfg, displacement=0.02)
print("status:", tr.status, "max diode iters:", tr.max_diode_iterations)

rep = metrics.spread_metrics(tr)
print("spread final:", rep.spread_final, "conv time:", rep.convergence_time,
      "drift:", rep.drift_rate, "maxdev:", rep.max_deviation_final)
print("module averages head:", rep.module_averages[:3])

th = metrics.output_thd(tr)
print("output thd:", th)

tr0 = simulate(cfg, displacement=0.0)
sl = loss.simulated_loss(tr, t_start=0.1, baseline=tr0)
print("simulated LossReport:", sl.to_dict())

stats = loss.arm_current_stats(100.0, 0.95, 0.0)
al = loss.arm_loss(cfg, stats, v0=0.1, r=0.02)
print("analytic arm loss:", al)
bl, pp = loss.balancing_loss(cfg, stats[0], 0.02, v0=0.1, r=0.02, r_l=1e-3)
print("analytic balancing loss:", bl, pp)
rep2 = loss.loss_report(cfg, 100.0, 0.95, 0.0, v0=0.1, r=0.02, r_l=1e-3, delta_a=0.02)
print("report dict:", rep2.to_dict())
