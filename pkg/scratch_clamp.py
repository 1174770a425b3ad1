"""Scratch: isolated clamp conduction pulse vs closed form; decay slope."""
import numpy as np

from dcmmc.model import (ConverterConfig, ClampParams, LoadSpec, ModuleParams,
                         NumericsSpec, SwitchParams, validate_config)
from dcmmc.clamp import ClampTransientParams, transient_solution, turnoff_decay_rate
from dcmmc.sim import simulate

L = 10e-6
C = 15e-3
VFD = 0.1
R_D = 0.010
R_L = 0.005
ESR = 1e-3
U1 = 100.0
U2 = 106.1  # u_diff = 6.0 after the diode drop

params = ClampTransientParams(
    inductance=L, effective_capacitance=C / 2,
    resistance=R_D + R_L + 2 * ESR, u_diff=U2 - U1 - VFD)
sol = transient_solution(params)
t_osc = 2 * np.pi / sol.omega_0
dt = t_osc / 2000
print(f"omega_0={sol.omega_0:.4f} omega_d={sol.omega_d:.4f} amp={sol.amplitude:.4f}")
print(f"T_osc={t_osc:.6e} dt={dt:.3e} window={sol.conduction_window:.6e}")

def bench_config(dt, duration):
    return ConverterConfig(
        modules_per_arm=2, dc_voltage=0.0, fundamental_freq=50.0,
        switching_freq=5000.0, modulation_index=0.95,
        arm_inductance=1e-3, arm_resistance=1.0,
        upper_modules=(ModuleParams(C, esr=ESR, initial_voltage=U1),
                       ModuleParams(C, esr=ESR, initial_voltage=U2)),
        lower_modules=(ModuleParams(C, esr=ESR, initial_voltage=U1),
                       ModuleParams(C, esr=ESR, initial_voltage=U1)),
        clamps=(ClampParams(inductance=L, inductor_resistance=R_L,
                            diode_drop=VFD, diode_resistance=R_D),),
        switch=SwitchParams(on_drop=0.0, on_resistance=0.0),
        load=LoadSpec(kind="current_source", amplitude=0.0),
        numerics=NumericsSpec(time_step=dt, duration=duration,
                              record_decimation=1, record_clamp_currents=True),
    )

cfg = validate_config(bench_config(dt, 0.95e-3))
hold = (np.array([0.0]), np.array([[0, 0]], dtype=np.uint8), np.array([[0, 0]], dtype=np.uint8))
tr = simulate(cfg, gate_schedule=hold)
i_sim = tr.upper_clamp_currents[:, 0]
i_ref = sol.current(tr.time)
err = np.max(np.abs(i_sim - i_ref)) / sol.amplitude
print(f"max |sim - closed| / peak = {err:.5f}  (tolerance 0.005)")
print(f"sim peak {i_sim.max():.4f} closed-form peak {i_ref.max():.4f}")
print("arm currents stayed zero:", np.max(np.abs(tr.upper_arm_current)),
      np.max(np.abs(tr.lower_arm_current)))
print("lower clamp stayed off:", np.max(np.abs(tr.lower_clamp_currents)))

# order probe: halve dt repeatedly, error at a fixed probe time
print("\nconvergence probe:")
t_probe = 0.4e-3
errs = []
for k in range(4):
    dtk = dt / 2**k
    cfgk = validate_config(bench_config(dtk, t_probe))
    trk = simulate(cfgk, gate_schedule=hold)
    ik = trk.upper_clamp_currents[-1, 0]
    errs.append(abs(ik - sol.current(t_probe)))
    print(f"  dt={dtk:.3e}  err={errs[-1]:.6e}")
orders = [np.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
print("  observed orders:", [f"{o:.3f}" for o in orders])

# decay slope: run conduction for a while with zero resistances, then insert module 2
dt2 = 1e-7
t_sw = 2e-4  # mid-pulse
cfg2 = ConverterConfig(
    modules_per_arm=2, dc_voltage=0.0, fundamental_freq=50.0,
    switching_freq=5000.0, modulation_index=0.95,
    arm_inductance=1e-3, arm_resistance=1.0,
    upper_modules=(ModuleParams(C, esr=0.0, initial_voltage=U1),
                   ModuleParams(C, esr=0.0, initial_voltage=U2)),
    lower_modules=(ModuleParams(C, esr=0.0, initial_voltage=U1),
                   ModuleParams(C, esr=0.0, initial_voltage=U1)),
    clamps=(ClampParams(inductance=L, inductor_resistance=0.0,
                        diode_drop=VFD, diode_resistance=0.0),),
    switch=SwitchParams(on_drop=0.0, on_resistance=0.0),
    load=LoadSpec(kind="current_source", amplitude=0.0),
    numerics=NumericsSpec(time_step=dt2, duration=3.0e-4,
                          record_decimation=1, record_clamp_currents=True),
)
validate_config(cfg2)
sched2 = (np.array([0.0, t_sw]),
          np.array([[0, 0], [0, 1]], dtype=np.uint8),
          np.array([[0, 0], [0, 0]], dtype=np.uint8))
tr2 = simulate(cfg2, gate_schedule=sched2)
k_sw = int(round(t_sw / dt2))
i_before = tr2.upper_clamp_currents[k_sw, 0]
i_after = tr2.upper_clamp_currents[k_sw + 1, 0]
slope_sim = (i_after - i_before) / dt2
u1_now = tr2.upper_voltages[k_sw, 0]
slope_ref = turnoff_decay_rate(u1_now, VFD, L)
print(f"\ndecay: i at switch {i_before:.4f} A, sim slope {slope_sim:.6g}, "
      f"ref {slope_ref:.6g}, rel err {abs(slope_sim - slope_ref) / abs(slope_ref):.5f}")
# time to reach zero and stay there
zero_after = tr2.upper_clamp_currents[k_sw:, 0]
print("decay reaches zero and holds:", zero_after.min() >= 0.0, zero_after[-1] == 0.0)
