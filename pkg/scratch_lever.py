"""Scratch: which parameter controls the staggered equilibrium at delta_a=0.02."""
import dataclasses
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from dcmmc.scenario import parse_scenario, build_config
from dcmmc.model import ClampParams, SwitchParams, with_numerics
from dcmmc.sim import simulate
from dcmmc.metrics import cycle_averages


def variant(name):
    cfg = build_config(parse_scenario("table2-sim"))
    cfg = with_numerics(cfg, duration=4.0, record_output_full=False)
    if name == "baseline":
        pass
    elif name == "clampL_3u":
        cl = tuple(dataclasses.replace(c, inductance=3e-6) for c in cfg.clamps)
        cfg = dataclasses.replace(cfg, clamps=cl)
    elif name == "thresh_0.05":
        cl = tuple(dataclasses.replace(c, diode_drop=0.05) for c in cfg.clamps)
        sw = dataclasses.replace(cfg.switch, on_drop=0.0)
        cfg = dataclasses.replace(cfg, clamps=cl, switch=sw)
    elif name == "armL_3m":
        cfg = dataclasses.replace(cfg, arm_inductance=3e-3)
    elif name == "fsw_10k":
        cfg = dataclasses.replace(cfg, switching_freq=10000.0)
    else:
        raise ValueError(name)
    return cfg


def run_one(name):
    cfg = variant(name)
    tr = simulate(cfg, displacement=0.02)
    volts = np.hstack([tr.upper_voltages, tr.lower_voltages])
    starts, means = cycle_averages(tr.time, volts, cfg.fundamental_freq)
    spread = (means.max(axis=1) - means.min(axis=1)) / 600.0
    n = cfg.modules_per_arm
    last_u = means[-1][:n]
    gaps = last_u[1:] - last_u[:-1]
    blocks = [float(spread[i * 50:(i + 1) * 50].mean()) for i in range(4)]
    return name, {
        "blocks": blocks,
        "spread_final": float(spread[-1]),
        "gap_mean_V": float(gaps.mean()),
        "gap_max_V": float(gaps.max()),
        "gap_min_V": float(gaps.min()),
    }


if __name__ == "__main__":
    names = ["baseline", "clampL_3u", "thresh_0.05", "armL_3m", "fsw_10k"]
    out = {}
    with ProcessPoolExecutor(max_workers=5) as ex:
        for name, res in ex.map(run_one, names):
            out[name] = res
            print(name, json.dumps(res), flush=True)
    json.dump(out, open("scratch_lever.json", "w"), indent=1)
