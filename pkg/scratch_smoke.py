"""Scratch smoke test: kernel vs dense step, short run audit."""
import numpy as np

from dcmmc.model import (ConverterConfig, ClampParams, LoadSpec, NumericsSpec,
                         SwitchParams, uniform_modules, initial_state,
                         validate_config, ArmState, ConverterState)
from dcmmc.sim import simulate, step, SimTrace

N = 4
cfg = ConverterConfig(
    modules_per_arm=N,
    dc_voltage=2400.0,
    fundamental_freq=50.0,
    switching_freq=5000.0,
    modulation_index=0.95,
    arm_inductance=10e-3,
    arm_resistance=0.1,
    upper_modules=uniform_modules(N, 15e-3, esr=1e-3, leak_resistance=20e3),
    lower_modules=uniform_modules(N, 15e-3, esr=1e-3),
    clamps=tuple(ClampParams(inductance=10e-6, inductor_resistance=1e-3,
                             diode_drop=0.1, diode_resistance=0.02) for _ in range(N - 1)),
    switch=SwitchParams(on_drop=0.1, on_resistance=0.02),
    load=LoadSpec(kind="current_source", amplitude=100.0, load_angle=0.3),
    numerics=NumericsSpec(time_step=1e-6, duration=0.05, record_decimation=10,
                          record_clamp_currents=True),
)
validate_config(cfg)

# --- one-step kernel vs dense comparison from a perturbed state ---
rng = np.random.default_rng(7)
st = initial_state(cfg)
st.upper.cap_voltages += rng.normal(0, 20, N)
st.lower.cap_voltages += rng.normal(0, 20, N)
st.upper.clamp_currents[:] = np.abs(rng.normal(0, 5, N - 1))
st.lower.clamp_currents[:] = 0.0
st.upper.arm_current = 30.0
st.lower.arm_current = 30.0 - cfg.load.amplitude * np.sin(-cfg.load.load_angle)
# consistent KCL at t=0: i_u - i_l = i_out(0)
st.lower.arm_current = st.upper.arm_current - cfg.load.amplitude * np.sin(-cfg.load.load_angle)
print("kcl residual:", st.kcl_residual())

gates_u = [1, 0, 1, 1]
gates_l = [0, 1, 0, 1]

res = step(cfg, st, gates_u, gates_l)
print("dense step iters:", res.diode_iterations)
print("dense u_u:", res.state.upper.cap_voltages)
print("dense icl_u:", res.state.upper.clamp_currents)
print("dense i_u:", res.state.upper.arm_current)

# kernel: single step via gate schedule
import copy
cfg1 = ConverterConfig(**{**cfg.__dict__,
                          "numerics": NumericsSpec(time_step=1e-6, duration=1e-6,
                                                   record_decimation=1,
                                                   record_clamp_currents=True)})
sched = (np.array([0.0]), np.array([gates_u], dtype=np.uint8), np.array([gates_l], dtype=np.uint8))
st2 = ConverterState(
    upper=ArmState(st.upper.cap_voltages.copy(), st.upper.clamp_currents.copy(), st.upper.arm_current),
    lower=ArmState(st.lower.cap_voltages.copy(), st.lower.clamp_currents.copy(), st.lower.arm_current),
    output_current=st.output_current, time=0.0)
tr = simulate(cfg1, gate_schedule=sched, start=st2)
print("kernel u_u:", tr.upper_voltages[-1])
print("kernel icl_u:", tr.upper_clamp_currents[-1])
print("kernel i_u:", tr.upper_arm_current[-1])
print("max diff u:", np.max(np.abs(tr.upper_voltages[-1] - res.state.upper.cap_voltages)),
      np.max(np.abs(tr.lower_voltages[-1] - res.state.lower.cap_voltages)))
print("max diff icl:", np.max(np.abs(tr.upper_clamp_currents[-1] - res.state.upper.clamp_currents)))
print("diff iu:", abs(tr.upper_arm_current[-1] - res.state.upper.arm_current))

# --- short full run with modulator + audit ---
tr2 = simulate(cfg, displacement=0.02, delay_model="zero_order_hold")
audit = tr2.energy_audit()
print("\nrun status:", tr2.status, "max diode iters:", tr2.max_diode_iterations)
print("cap range upper:", tr2.upper_voltages[-1].min(), tr2.upper_voltages[-1].max())
print("audit source:", audit["source"], "residual:", audit["residual"],
      "rel:", audit["relative_error"])
for k, v in audit["dissipated"].items():
    print(f"  {k}: {v:.6g}")
print("delivered:", audit["delivered"], "stored delta:", audit["stored_delta"])
