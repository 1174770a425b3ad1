"""Scratch: does the staggered equilibrium depend on the time step?"""
import json
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from dcmmc.scenario import parse_scenario, build_config
from dcmmc.model import with_numerics
from dcmmc.sim import simulate
from dcmmc.metrics import cycle_averages


def run_one(dt):
    cfg = build_config(parse_scenario("table2-sim"))
    cfg = with_numerics(cfg, duration=4.0, time_step=dt,
                        record_output_full=False,
                        record_decimation=max(1, int(round(2e-4 / dt))))
    tr = simulate(cfg, displacement=0.02)
    volts = np.hstack([tr.upper_voltages, tr.lower_voltages])
    starts, means = cycle_averages(tr.time, volts, cfg.fundamental_freq)
    spread = (means.max(axis=1) - means.min(axis=1)) / 600.0
    n = cfg.modules_per_arm
    last_u = means[-1][:n]
    gaps = last_u[1:] - last_u[:-1]
    return dt, {
        "blocks": [float(spread[i * 50:(i + 1) * 50].mean()) for i in range(4)],
        "spread_final": float(spread[-1]),
        "gap_mean_V": float(gaps.mean()),
        "gap_max_V": float(gaps.max()),
    }


if __name__ == "__main__":
    out = {}
    with ProcessPoolExecutor(max_workers=3) as ex:
        for dt, res in ex.map(run_one, [1e-6, 5e-7, 2.5e-7]):
            out[str(dt)] = res
            print(dt, json.dumps(res), flush=True)
    json.dump(out, open("scratch_dt.json", "w"), indent=1)
