"""Scratch: criterion-8 factor-3 measurement at N=8, and throughput clause at N=40."""
import time
import numpy as np

from dcmmc.model import (ConverterConfig, SwitchParams, ClampParams, LoadSpec,
                         NumericsSpec, uniform_modules)
from dcmmc import simulate
from dcmmc import loss

def exp_cfg(n=8, dur=10.0):
    return ConverterConfig(
        modules_per_arm=n,
        dc_voltage=120.0,
        fundamental_freq=50.0,
        switching_freq=10_000.0,
        modulation_index=0.95,
        arm_inductance=2e-3,
        arm_resistance=0.05,
        switch=SwitchParams(on_drop=0.1, on_resistance=0.02),
        clamps=tuple(ClampParams(inductance=7.5e-6, inductor_resistance=1e-3,
                                 diode_drop=0.1, diode_resistance=0.02)
                     for _ in range(n - 1)),
        upper_modules=uniform_modules(n, capacitance=4.9e-3, esr=1e-3),
        lower_modules=uniform_modules(n, capacitance=4.9e-3, esr=1e-3),
        load=LoadSpec(kind="current_source", amplitude=10.0, load_angle=0.0),
        numerics=NumericsSpec(time_step=1e-6, duration=dur, record_decimation=20),
    )

cfg = exp_cfg()
t0 = time.time()
tr0 = simulate(cfg, displacement=0.0)
tra = simulate(cfg, displacement=0.002)
print(f"N=8 runs: {time.time()-t0:.1f} s wall, status {tr0.status}/{tra.status}")

rep = loss.simulated_loss(tra, t_start=6.0, baseline=tr0)
stats = loss.arm_current_stats(10.0, 0.95, 0.0)
bal_an, _ = loss.balancing_loss(cfg, stats[0], 0.002, v0=0.1, r=0.02, r_l=1e-3)
print("simulated balancing (per arm):", rep.balancing_loss)
print("analytic balancing (per arm):", bal_an)
print("ratio sim/analytic:", rep.balancing_loss / bal_an)
print("by_class:", {k: round(v, 4) for k, v in rep.by_class.items()})
base_rep = loss.simulated_loss(tr0, t_start=6.0)
print("baseline by_class:", {k: round(v, 4) for k, v in base_rep.by_class.items()})

# also try delta=0.02 pair for scale feel
trb = simulate(cfg, displacement=0.02)
repb = loss.simulated_loss(trb, t_start=6.0, baseline=tr0)
bal_anb, _ = loss.balancing_loss(cfg, stats[0], 0.02, v0=0.1, r=0.02, r_l=1e-3)
print("delta=0.02: sim", repb.balancing_loss, "analytic", bal_anb,
      "ratio", repb.balancing_loss / bal_anb)
