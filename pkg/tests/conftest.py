"""Shared config factories for the test suite."""
import numpy as np
import pytest

from dcmmc.model import (
    ClampParams,
    ConverterConfig,
    LoadSpec,
    NumericsSpec,
    SwitchParams,
    uniform_modules,
)


def small_config(n=4, load_kind="current_source", duration=0.06, dt=2e-6,
                 amplitude=20.0, switching_freq=2000.0, decimation=20,
                 **overrides):
    """A desk-scale leg that runs in well under a second."""
    load = {
        "current_source": LoadSpec(kind="current_source", amplitude=amplitude,
                                   load_angle=0.2),
        "series_rl": LoadSpec(kind="series_rl", resistance=8.0,
                              inductance=5e-3),
    }[load_kind]
    base = dict(
        modules_per_arm=n,
        dc_voltage=400.0,
        fundamental_freq=50.0,
        switching_freq=switching_freq,
        modulation_index=0.95,
        arm_inductance=2e-3,
        arm_resistance=0.05,
        upper_modules=uniform_modules(n, 4.7e-3, esr=1e-3),
        lower_modules=uniform_modules(n, 4.7e-3, esr=1e-3),
        clamps=tuple(ClampParams(1e-5, 1e-3, 0.1, 0.01) for _ in range(n - 1)),
        switch=SwitchParams(on_drop=0.1, on_resistance=1e-3),
        load=load,
        numerics=NumericsSpec(time_step=dt, duration=duration,
                              record_decimation=decimation),
    )
    base.update(overrides)
    return ConverterConfig(**base)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
