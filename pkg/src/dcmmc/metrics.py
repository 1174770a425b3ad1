"""Waveform and balancing metrics: THD, voltage spread, convergence.

THD uses coherent rectangular-window analysis: the caller must supply an
integer number of fundamental cycles so every harmonic lands on an exact
FFT bin.  Spread metrics work on cycle-averaged module voltages, which is
what the balancing behaviour is defined over (switching ripple is not
imbalance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ConverterConfig, nominal_module_voltage
from .sim.trace import SimTrace

DEFAULT_BAND = 0.03
DEFAULT_CONSECUTIVE_CYCLES = 5


@dataclass(frozen=True)
class MetricsReport:
    """Balancing and waveform quality summary.

    Attributes:
        thd_voltage: Output-voltage THD fraction, or None if not computed.
        spread_final: (max - min) of cycle-averaged module voltages over
            the last full cycle, as a fraction of v_m.
        convergence_time: Start time of the first run of
            ``consecutive_cycles`` cycles whose spread stays within the
            band, in seconds; None if the trace never converges.
        drift_rate: Least-squares slope of the absolute spread in V/s
            (meaningful when the spread diverges).
        module_averages: Last-cycle average voltage per module, upper arm
            then lower arm, volts.
        max_deviation_final: max |average - v_m| / v_m over all modules in
            the last cycle.
        band: Convergence band used, fraction of v_m.
        v_m: Reference module voltage, volts.
        cycle_times: Start time of each full fundamental cycle, seconds.
        cycle_spread: Absolute spread (volts) per cycle.
    """

    thd_voltage: float | None
    spread_final: float
    convergence_time: float | None
    drift_rate: float
    module_averages: np.ndarray
    max_deviation_final: float
    band: float
    v_m: float
    cycle_times: np.ndarray
    cycle_spread: np.ndarray


def thd(signal: np.ndarray, sample_freq: float, fundamental_freq: float,
        max_harmonic_freq: float | None = None) -> float:
    """Total harmonic distortion of a coherently sampled waveform.

    Args:
        signal: Uniformly sampled waveform spanning an integer number
            (>= 5) of fundamental cycles.
        sample_freq: Sampling rate, Hz.
        fundamental_freq: Fundamental frequency, Hz.
        max_harmonic_freq: Highest harmonic frequency included; defaults
            to (and is capped at) the Nyquist frequency.

    Returns:
        sqrt(sum of squared harmonic amplitudes, order 2 and up) divided
        by the fundamental amplitude.

    Raises:
        ValueError: If the window is not an integer cycle count, holds
            fewer than 5 cycles, or the fundamental amplitude is at the
            numerical floor.
    """
    x = np.asarray(signal, dtype=np.float64)
    n = x.size
    cycles_f = n * fundamental_freq / sample_freq
    cycles = int(round(cycles_f))
    if abs(cycles_f - cycles) > 1e-6 * max(1.0, cycles_f):
        raise ValueError(
            f"window holds {cycles_f:.6f} fundamental cycles; "
            "an integer count is required for coherent analysis")
    if cycles < 5:
        raise ValueError(f"need >= 5 fundamental cycles, got {cycles}")
    spectrum = np.fft.rfft(x)
    fund = abs(spectrum[cycles])
    total = math.sqrt(float(np.sum(np.abs(spectrum) ** 2)))
    if fund <= 1e-12 * max(total, 1e-300):
        raise ValueError("fundamental amplitude is below the numerical floor")
    nyquist = 0.5 * sample_freq
    f_max = nyquist if max_harmonic_freq is None else min(max_harmonic_freq, nyquist)
    h_max = int(math.floor(f_max / fundamental_freq))
    acc = 0.0
    for h in range(2, h_max + 1):
        k = h * cycles
        if k >= spectrum.size:
            break
        acc += float(abs(spectrum[k]) ** 2)
    return math.sqrt(acc) / fund


def default_max_harmonic_freq(cfg: ConverterConfig) -> float:
    """Default THD bandwidth: covers the first carrier-harmonic clusters.

    With phase-shifted carriers the first cluster sits near N*f_sw; the
    default extends to 2.5x that so the report captures the dominant
    switching content.  Always recorded alongside the THD value.
    """
    return 5.0 * cfg.switching_freq * cfg.modules_per_arm / 2.0


def cycle_averages(time: np.ndarray, values: np.ndarray,
                   fundamental_freq: float) -> tuple[np.ndarray, np.ndarray]:
    """Average sampled values over each full fundamental cycle.

    Args:
        time: Uniformly spaced sample instants starting a cycle boundary.
        values: Samples, shape (len(time), ...) or (len(time),).
        fundamental_freq: Cycle rate, Hz.

    Returns:
        (cycle_start_times, means) where means has one row per full cycle.
    """
    time = np.asarray(time)
    if time.size < 2:
        raise ValueError("need at least two samples")
    dtr = float(time[1] - time[0])
    spc_f = 1.0 / (fundamental_freq * dtr)
    spc = int(round(spc_f))
    if spc < 2 or abs(spc_f - spc) > 1e-6 * spc_f:
        raise ValueError(
            "record grid does not divide the fundamental cycle evenly "
            f"(samples per cycle = {spc_f:.6f})")
    vals = np.asarray(values)
    n_cyc = vals.shape[0] // spc
    if n_cyc < 1:
        raise ValueError("trace shorter than one fundamental cycle")
    trimmed = vals[: n_cyc * spc]
    shaped = trimmed.reshape((n_cyc, spc) + vals.shape[1:])
    means = shaped.mean(axis=1)
    starts = time[0] + np.arange(n_cyc) / fundamental_freq
    return starts, means


def spread_metrics(trace: SimTrace, v_m: float | None = None,
                   band: float = DEFAULT_BAND,
                   consecutive_cycles: int = DEFAULT_CONSECUTIVE_CYCLES,
                   thd_voltage: float | None = None) -> MetricsReport:
    """Spread, convergence, and drift statistics of a simulation trace.

    Convergence means the spread enters the band and stays there: the
    reported time is the start of the trailing run of in-band cycles,
    valid only when that run reaches the end of the trace and spans at
    least consecutive_cycles.  A trace that starts balanced, drifts out,
    and is later pulled back converges at the pull-back, not at zero.

    Args:
        trace: Completed simulation trace (>= 1 fundamental cycle).
        v_m: Reference module voltage; defaults to the nominal share.
        band: Convergence band as a fraction of v_m applied to the spread.
        consecutive_cycles: Minimum length of the trailing in-band run
            (capped at the trace length).
        thd_voltage: Optional THD figure to embed in the report.

    Returns:
        MetricsReport over all 2N modules (both arms).
    """
    cfg = trace.config
    if v_m is None:
        v_m = nominal_module_voltage(cfg)
    volts = np.hstack([trace.upper_voltages, trace.lower_voltages])
    starts, means = cycle_averages(trace.time, volts, cfg.fundamental_freq)
    spread_abs = means.max(axis=1) - means.min(axis=1)
    n_cyc = len(starts)
    need = min(consecutive_cycles, n_cyc)

    conv_time: float | None = None
    in_band = spread_abs <= band * v_m
    run_start = n_cyc
    for c in range(n_cyc - 1, -1, -1):
        if not in_band[c]:
            break
        run_start = c
    if n_cyc - run_start >= need:
        conv_time = float(starts[run_start])

    mid = starts + 0.5 / cfg.fundamental_freq
    if n_cyc >= 2:
        slope = float(np.polyfit(mid, spread_abs, 1)[0])
    else:
        slope = 0.0

    final = means[-1]
    return MetricsReport(
        thd_voltage=thd_voltage,
        spread_final=float(spread_abs[-1] / v_m),
        convergence_time=conv_time,
        drift_rate=slope,
        module_averages=final,
        max_deviation_final=float(np.max(np.abs(final - v_m)) / v_m),
        band=band,
        v_m=v_m,
        cycle_times=starts,
        cycle_spread=spread_abs,
    )


def output_thd(trace: SimTrace, max_harmonic_freq: float | None = None,
               skip_cycles: int = 1) -> float:
    """THD of the recorded output voltage over the trailing whole cycles.

    Uses the undecimated per-step channel when the run recorded one
    (record_output_full), so carrier clusters above the decimated Nyquist
    cannot alias onto the measured bins; otherwise falls back to the
    decimated records.

    Args:
        trace: Simulation trace; the record grid must divide the cycle.
        max_harmonic_freq: Bandwidth; defaults to default_max_harmonic_freq.
        skip_cycles: Leading cycles dropped to clear start-up transients.

    Returns:
        THD fraction of the output voltage.
    """
    cfg = trace.config
    if trace.output_voltage_full is not None:
        fs = float(trace.full_sample_freq)
        spc_f = fs / cfg.fundamental_freq
        spc = int(round(spc_f))
        if abs(spc_f - spc) > 1e-6 * spc_f:
            raise ValueError("solver grid does not divide the fundamental cycle")
        v = trace.output_voltage_full[1:]
        n_cyc = v.size // spc
        if n_cyc - skip_cycles < 5:
            raise ValueError("need >= 5 analyzable cycles after the skip")
        v = v[skip_cycles * spc: n_cyc * spc]
        if max_harmonic_freq is None:
            max_harmonic_freq = default_max_harmonic_freq(cfg)
        return thd(v, fs, cfg.fundamental_freq, max_harmonic_freq)
    dtr = float(trace.time[1] - trace.time[0])
    spc_f = 1.0 / (cfg.fundamental_freq * dtr)
    spc = int(round(spc_f))
    if abs(spc_f - spc) > 1e-6 * spc_f:
        raise ValueError("record grid does not divide the fundamental cycle")
    # drop the t=0 record so each cycle holds exactly spc samples
    v = trace.output_voltage[1:]
    n_cyc = v.size // spc
    if n_cyc - skip_cycles < 5:
        raise ValueError("need >= 5 analyzable cycles after the skip")
    v = v[skip_cycles * spc: n_cyc * spc]
    if max_harmonic_freq is None:
        max_harmonic_freq = default_max_harmonic_freq(cfg)
    return thd(v, 1.0 / dtr, cfg.fundamental_freq, max_harmonic_freq)
