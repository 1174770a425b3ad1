"""Scratch: full-resolution look at mid-chain clamp pulses at equilibrium."""
import numpy as np

from dcmmc.scenario import parse_scenario, build_config
from dcmmc.model import with_numerics
from dcmmc.sim import simulate
from dcmmc import modulator as mod

cfg = build_config(parse_scenario("table2-sim"))
warm = with_numerics(cfg, duration=4.0, record_output_full=False,
                     record_decimation=1000)
tr0 = simulate(warm, displacement=0.02)
print("warm done, t =", tr0.final_state.time)

fine = with_numerics(cfg, duration=0.04, record_decimation=1,
                     record_clamp_currents=True, record_output_full=False)
tr = simulate(fine, displacement=0.02, start=tr0.final_state)
t = tr.time
m = 19  # clamp between modules 20 and 21 (0-based index 19)
icl = tr.upper_clamp_currents[:, m]
u20 = tr.upper_voltages[:, 19]
u21 = tr.upper_voltages[:, 20]
diff = u21 - u20

dt = t[1] - t[0]
q_cycle = np.trapezoid(icl, t) / 2  # charge per fundamental cycle
print(f"clamp {m}: charge/cycle = {q_cycle:.6f} C  (demand 0.0475 C)")
print(f"peak current {icl.max():.3f} A, duty>0 {np.mean(icl > 1e-6):.3f}")
print(f"u_diff: mean {diff.mean():.3f} min {diff.min():.3f} max {diff.max():.3f}")

# gate windows of module 21 (upper arm): when is it bypassed?
gates = np.array([mod.gate_signals(tt + tr0.final_state.time, 40, 0.95, 50.0,
                                   5000.0, delta_a=0.02).upper[20]
                  for tt in t[::20]])
print("module 21 bypass fraction:", np.mean(gates == 0))

# conduction vs bypass: sample a window near the arm-current crest
i_arm = tr.upper_arm_current
print("arm current: mean %.2f min %.2f max %.2f" %
      (i_arm.mean(), i_arm.min(), i_arm.max()))

# per-window statistics: segment conduction runs
on = icl > 1e-9
edges = np.flatnonzero(np.diff(on.astype(np.int8)))
runs = []
start = None
for e in edges:
    if on[e + 1] and not on[e]:
        start = e + 1
    elif start is not None:
        runs.append((t[start], t[e] - t[start], icl[start:e + 1].max(),
                     np.trapezoid(icl[start:e + 1], dx=dt)))
        start = None
runs = np.array(runs)
if len(runs):
    print(f"{len(runs)} conduction runs over 2 cycles")
    print("run lengths us: mean %.1f max %.1f" %
          (1e6 * runs[:, 1].mean(), 1e6 * runs[:, 1].max()))
    print("run peaks A: mean %.2f max %.2f" % (runs[:, 2].mean(), runs[:, 2].max()))
    print("charge per run uC: mean %.1f max %.1f" %
          (1e6 * runs[:, 3].mean(), 1e6 * runs[:, 3].max()))
# where in the fundamental cycle does conduction happen?
phase = (t[on] * 50.0) % 1.0
if phase.size:
    hist, _ = np.histogram(phase, bins=10, range=(0, 1))
    print("conduction-time histogram over fundamental phase:", hist)
