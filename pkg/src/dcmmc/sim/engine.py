"""Fixed-step implicit solver for the clamped two-arm converter leg.

One backward-Euler step treats gates and diode conduction states as fixed
over the step and solves, per arm, a tridiagonal system in the active clamp
currents bordered by the arm-loop current: capacitors couple only adjacent
clamp branches along the chain, so each solve is O(N).  Diode conduction
patterns are resolved by a fixed-point sweep (flip every violated diode,
re-solve), falling back to substeps of dt/2^k when the sweep does not
settle.

Sign conventions: arm currents flow from the +dc rail down through the
upper arm into the ac node and from the ac node down through the lower arm;
clamp current m >= 0 flows from module m+1 into module m (0-based).  A
clamp branch is "in circuit" either through the bypass switch of module m+1
(conduction mode, capacitor m+1 in the loop) or, when module m+1 is
inserted while current still flows, through its series switch (decay mode,
capacitor m+1 bypassed).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# cumulative energy tally slots
E_SOURCE = 0
E_LOAD = 1
E_ARM_RES = 2
E_SWITCH_COND = 3
E_CAP_ESR = 4
E_LEAK = 5
E_CLAMP_COND = 6
E_CLAMP_RESIDUAL = 7
E_SWITCHING = 8
E_LOAD_RES = 9
N_TALLIES = 10

ENERGY_LABELS = (
    "source",
    "load",
    "arm_resistance",
    "switch_conduction",
    "capacitor_esr",
    "leak",
    "clamp_conduction",
    "clamp_residual",
    "switching_events",
    "load_resistance",
)

STATUS_OK = 0
STATUS_DIODE_FAILURE = 1
STATUS_NON_FINITE = 2


@njit(cache=True)
def _thomas2(n, sub, diag, sup, r1, r2, cp, p, q):
    """Tridiagonal solve with two right-hand sides (r1 -> p, r2 -> q)."""
    w = diag[0]
    p[0] = r1[0] / w
    q[0] = r2[0] / w
    cp[0] = sup[0] / w
    for m in range(1, n):
        w = diag[m] - sub[m] * cp[m - 1]
        cp[m] = sup[m] / w
        p[m] = (r1[m] - sub[m] * p[m - 1]) / w
        q[m] = (r2[m] - sub[m] * q[m - 1]) / w
    for m in range(n - 2, -1, -1):
        p[m] -= cp[m] * p[m + 1]
        q[m] -= cp[m] * q[m + 1]


@njit(cache=True)
def _run(
    n, n_steps, dt, decim, rec_clamps,
    vdc, f1, fsw, ma, larm, rarm, rsw, vsw, ton_toff,
    cap_u, esr_u, gleak_u, cap_l, esr_l, gleak_l,
    lcl, rcl, vfd,
    pfrac_u, pfrac_l, dunit,
    dsched_step, dsched_v, delay_flag, zoh_stride,
    gate_mode, gsched_step, gsched_u, gsched_l,
    load_kind, ip, phi, rload, lload,
    max_iters,
    uu, ul, icu, icl_, iu0, il0, iout0,
    rec_t, rec_uu, rec_ul, rec_iu, rec_il, rec_vout, rec_iout,
    rec_icu, rec_icl, rec_e, rec_stored,
    rec_full, rec_vout_full,
):
    nc = n - 1
    two_pi = 2.0 * math.pi
    iu = iu0
    il_ = il0
    iout = iout0

    e = np.zeros(N_TALLIES)
    g_u = np.zeros(n, np.uint8)
    g_l = np.zeros(n, np.uint8)
    ng_u = np.zeros(n, np.uint8)
    ng_l = np.zeros(n, np.uint8)
    active_u = np.zeros(nc, np.uint8)
    active_l = np.zeros(nc, np.uint8)
    act0_u = np.zeros(nc, np.uint8)
    act0_l = np.zeros(nc, np.uint8)
    for m in range(nc):
        if icu[m] > 0.0:
            active_u[m] = 1
        if icl_[m] > 0.0:
            active_l[m] = 1

    abar_u = np.zeros(n)
    abar_l = np.zeros(n)
    beta_u = np.zeros(n)
    beta_l = np.zeros(n)
    ssw_u = np.zeros(n)
    ssw_l = np.zeros(n)
    sub_u = np.zeros(nc)
    diag_u = np.zeros(nc)
    sup_u = np.zeros(nc)
    r1_u = np.zeros(nc)
    r2_u = np.zeros(nc)
    cp_u = np.zeros(nc)
    p_u = np.zeros(nc)
    q_u = np.zeros(nc)
    sub_l = np.zeros(nc)
    diag_l = np.zeros(nc)
    sup_l = np.zeros(nc)
    r1_l = np.zeros(nc)
    r2_l = np.zeros(nc)
    cp_l = np.zeros(nc)
    p_l = np.zeros(nc)
    q_l = np.zeros(nc)
    y_u = np.zeros(nc)
    y_l = np.zeros(nc)
    it_u = np.zeros(n)
    it_l = np.zeros(n)
    u1_u = np.zeros(n)
    u1_l = np.zeros(n)

    s_uu = np.zeros(n)
    s_ul = np.zeros(n)
    s_icu = np.zeros(nc)
    s_icl = np.zeros(nc)
    s_au = np.zeros(nc, np.uint8)
    s_al = np.zeros(nc, np.uint8)
    s_e = np.zeros(N_TALLIES)

    status = STATUS_OK
    fail_time = -1.0
    max_it_seen = 0
    didx = 0
    gidx = 0
    last_vout = 0.0

    # initial gate frame (no switching energy charged at t = 0)
    t = 0.0
    if gate_mode == 0:
        da = dsched_v[0]
        ts = 0.0
        s_ref = math.sin(two_pi * f1 * ts)
        for qq in range(n):
            ref = 0.5 * (1.0 - ma * s_ref) - da * dunit[qq]
            x = fsw * t + pfrac_u[qq]
            fr = x - math.floor(x)
            c = 1.0 - abs(2.0 * fr - 1.0)
            g_u[qq] = 1 if ref >= c else 0
            ref = 0.5 * (1.0 + ma * s_ref) - da * dunit[qq]
            x = fsw * t + pfrac_l[qq]
            fr = x - math.floor(x)
            c = 1.0 - abs(2.0 * fr - 1.0)
            g_l[qq] = 1 if ref >= c else 0
    else:
        for qq in range(n):
            g_u[qq] = gsched_u[0, qq]
            g_l[qq] = gsched_l[0, qq]

    # record slot 0: initial state
    rec_t[0] = 0.0
    for qq in range(n):
        rec_uu[0, qq] = uu[qq]
        rec_ul[0, qq] = ul[qq]
    rec_iu[0] = iu
    rec_il[0] = il_
    rec_vout[0] = 0.0
    rec_iout[0] = iout
    if rec_clamps == 1:
        for m in range(nc):
            rec_icu[0, m] = icu[m]
            rec_icl[0, m] = icl_[m]
    stored = 0.0
    for qq in range(n):
        stored += 0.5 * (cap_u[qq] * uu[qq] * uu[qq] + cap_l[qq] * ul[qq] * ul[qq])
    for m in range(nc):
        stored += 0.5 * lcl[m] * (icu[m] * icu[m] + icl_[m] * icl_[m])
    stored += 0.5 * larm * (iu * iu + il_ * il_)
    if load_kind == 1:
        stored += 0.5 * lload * iout * iout
    rec_stored[0] = stored
    if rec_full == 1:
        rec_vout_full[0] = 0.0
    n_rec_done = 1

    for step in range(n_steps):
        t = step * dt
        t1 = t + dt

        # --- gate frame for this step ---
        if gate_mode == 0:
            while didx + 1 < dsched_step.shape[0] and step >= dsched_step[didx + 1]:
                didx += 1
            da = dsched_v[didx]
            if delay_flag == 1:
                if zoh_stride > 0:
                    ts = (step // zoh_stride) * zoh_stride * dt
                else:
                    rate = 2.0 * fsw
                    ts = math.floor(t * rate) / rate
            else:
                ts = t
            s_ref = math.sin(two_pi * f1 * ts)
            for qq in range(n):
                ref = 0.5 * (1.0 - ma * s_ref) - da * dunit[qq]
                x = fsw * t + pfrac_u[qq]
                fr = x - math.floor(x)
                c = 1.0 - abs(2.0 * fr - 1.0)
                ng_u[qq] = 1 if ref >= c else 0
                ref = 0.5 * (1.0 + ma * s_ref) - da * dunit[qq]
                x = fsw * t + pfrac_l[qq]
                fr = x - math.floor(x)
                c = 1.0 - abs(2.0 * fr - 1.0)
                ng_l[qq] = 1 if ref >= c else 0
        else:
            while gidx + 1 < gsched_step.shape[0] and step >= gsched_step[gidx + 1]:
                gidx += 1
            for qq in range(n):
                ng_u[qq] = gsched_u[gidx, qq]
                ng_l[qq] = gsched_l[gidx, qq]

        # --- commutation events: book 0.5*u*|i|*(ton+toff) out of the cap ---
        if ton_toff > 0.0:
            for qq in range(n):
                if ng_u[qq] != g_u[qq]:
                    ich = iu + (icu[qq - 1] if qq > 0 else 0.0)
                    ev = 0.5 * uu[qq] * abs(ich) * ton_toff
                    rel = cap_u[qq] * uu[qq] * uu[qq]  # 2x stored
                    if 2.0 * ev < rel:
                        uu[qq] = math.sqrt(uu[qq] * uu[qq] - 2.0 * ev / cap_u[qq])
                        e[E_SWITCHING] += ev
                    else:
                        e[E_SWITCHING] += 0.5 * rel
                        uu[qq] = 0.0
                if ng_l[qq] != g_l[qq]:
                    ich = il_ + (icl_[qq - 1] if qq > 0 else 0.0)
                    ev = 0.5 * ul[qq] * abs(ich) * ton_toff
                    rel = cap_l[qq] * ul[qq] * ul[qq]
                    if 2.0 * ev < rel:
                        ul[qq] = math.sqrt(ul[qq] * ul[qq] - 2.0 * ev / cap_l[qq])
                        e[E_SWITCHING] += ev
                    else:
                        e[E_SWITCHING] += 0.5 * rel
                        ul[qq] = 0.0
        for qq in range(n):
            g_u[qq] = ng_u[qq]
            g_l[qq] = ng_l[qq]

        # --- save state for substep retries ---
        for qq in range(n):
            s_uu[qq] = uu[qq]
            s_ul[qq] = ul[qq]
        for m in range(nc):
            s_icu[m] = icu[m]
            s_icl[m] = icl_[m]
            s_au[m] = active_u[m]
            s_al[m] = active_l[m]
        s_iu = iu
        s_il = il_
        s_iout = iout
        for kk in range(N_TALLIES):
            s_e[kk] = e[kk]

        step_ok = 0
        for attempt in range(7):
            n_sub = 1 << attempt
            # restore
            for qq in range(n):
                uu[qq] = s_uu[qq]
                ul[qq] = s_ul[qq]
            for m in range(nc):
                icu[m] = s_icu[m]
                icl_[m] = s_icl[m]
                active_u[m] = s_au[m]
                active_l[m] = s_al[m]
            iu = s_iu
            il_ = s_il
            iout = s_iout
            for kk in range(N_TALLIES):
                e[kk] = s_e[kk]

            dts = dt / n_sub
            all_ok = 1
            for sub in range(n_sub):
                t_end = t + (sub + 1) * dts

                for qq in range(n):
                    a = 1.0 / (1.0 + dts * gleak_u[qq] / cap_u[qq])
                    abar_u[qq] = a * uu[qq]
                    beta_u[qq] = a * dts / cap_u[qq] + esr_u[qq]
                    a = 1.0 / (1.0 + dts * gleak_l[qq] / cap_l[qq])
                    abar_l[qq] = a * ul[qq]
                    beta_l[qq] = a * dts / cap_l[qq] + esr_l[qq]
                for qq in range(n):
                    ich = iu + (icu[qq - 1] if qq > 0 else 0.0)
                    ssw_u[qq] = 1.0 if ich >= 0.0 else -1.0
                    ich = il_ + (icl_[qq - 1] if qq > 0 else 0.0)
                    ssw_l[qq] = 1.0 if ich >= 0.0 else -1.0

                io1 = 0.0
                if load_kind == 0:
                    io1 = ip * math.sin(two_pi * f1 * t_end - phi)

                for m in range(nc):
                    act0_u[m] = active_u[m]
                    act0_l[m] = active_l[m]

                converged = 0
                iu1 = iu
                il1 = il_
                iout1 = iout
                for itn in range(max_iters):
                    # assemble upper arm rows
                    for m in range(nc):
                        if active_u[m] == 1:
                            if g_u[m + 1] == 0:
                                diag_u[m] = lcl[m] / dts + rcl[m] + rsw + beta_u[m + 1] + beta_u[m]
                                sub_u[m] = beta_u[m] * (g_u[m] - 1.0)
                                sup_u[m] = -beta_u[m + 1]
                                armc = beta_u[m] * g_u[m] + rsw
                                rr = lcl[m] * icu[m] / dts + abar_u[m + 1] - abar_u[m] - vfd[m] - vsw * ssw_u[m + 1]
                            else:
                                diag_u[m] = lcl[m] / dts + rcl[m] - rsw + beta_u[m]
                                sub_u[m] = beta_u[m] * (g_u[m] - 1.0)
                                sup_u[m] = 0.0
                                armc = beta_u[m] * g_u[m] - rsw
                                rr = lcl[m] * icu[m] / dts - abar_u[m] - vfd[m] + vsw * ssw_u[m + 1]
                            if load_kind == 0:
                                rr -= armc * io1  # upper arm current is x + io1
                            r1_u[m] = rr
                            r2_u[m] = armc
                        else:
                            diag_u[m] = 1.0
                            sub_u[m] = 0.0
                            sup_u[m] = 0.0
                            r1_u[m] = 0.0
                            r2_u[m] = 0.0
                    # assemble lower arm rows
                    for m in range(nc):
                        if active_l[m] == 1:
                            if g_l[m + 1] == 0:
                                diag_l[m] = lcl[m] / dts + rcl[m] + rsw + beta_l[m + 1] + beta_l[m]
                                sub_l[m] = beta_l[m] * (g_l[m] - 1.0)
                                sup_l[m] = -beta_l[m + 1]
                                armc = beta_l[m] * g_l[m] + rsw
                                rr = lcl[m] * icl_[m] / dts + abar_l[m + 1] - abar_l[m] - vfd[m] - vsw * ssw_l[m + 1]
                            else:
                                diag_l[m] = lcl[m] / dts + rcl[m] - rsw + beta_l[m]
                                sub_l[m] = beta_l[m] * (g_l[m] - 1.0)
                                sup_l[m] = 0.0
                                armc = beta_l[m] * g_l[m] - rsw
                                rr = lcl[m] * icl_[m] / dts - abar_l[m] - vfd[m] + vsw * ssw_l[m + 1]
                            r1_l[m] = rr
                            r2_l[m] = armc
                        else:
                            diag_l[m] = 1.0
                            sub_l[m] = 0.0
                            sup_l[m] = 0.0
                            r1_l[m] = 0.0
                            r2_l[m] = 0.0

                    _thomas2(nc, sub_u, diag_u, sup_u, r1_u, r2_u, cp_u, p_u, q_u)
                    _thomas2(nc, sub_l, diag_l, sup_l, r1_l, r2_l, cp_l, p_l, q_l)

                    gbu = larm / dts + rarm + n * rsw
                    ku = -larm * iu / dts
                    for qq in range(n):
                        gbu += g_u[qq] * beta_u[qq]
                        ku += vsw * ssw_u[qq] + g_u[qq] * abar_u[qq]
                    gbl = larm / dts + rarm + n * rsw
                    kl = -larm * il_ / dts
                    for qq in range(n):
                        gbl += g_l[qq] * beta_l[qq]
                        kl += vsw * ssw_l[qq] + g_l[qq] * abar_l[qq]

                    wpu = 0.0
                    wqu = 0.0
                    wpl = 0.0
                    wql = 0.0
                    for m in range(nc):
                        wm = rsw + g_u[m] * beta_u[m]
                        wpu += wm * p_u[m]
                        wqu += wm * q_u[m]
                        wm = rsw + g_l[m] * beta_l[m]
                        wpl += wm * p_l[m]
                        wql += wm * q_l[m]

                    if load_kind == 0:
                        denom = gbu + gbl - wqu - wql
                        x = (vdc - gbu * io1 - wpu - wpl - ku - kl) / denom
                        il1 = x
                        iu1 = x + io1
                        iout1 = io1
                        for m in range(nc):
                            y_u[m] = p_u[m] - q_u[m] * x
                            y_l[m] = p_l[m] - q_l[m] * x
                    else:
                        a11 = gbu + gbl - wqu - wql
                        a12 = -gbl + wql
                        b1 = vdc - ku - kl - wpu - wpl
                        a21 = gbl - wql
                        a22 = -gbl + wql - rload - lload / dts
                        b2 = 0.5 * vdc - kl - wpl - lload * iout / dts
                        det = a11 * a22 - a12 * a21
                        x1 = (b1 * a22 - a12 * b2) / det
                        x2 = (a11 * b2 - a21 * b1) / det
                        iu1 = x1
                        iout1 = x2
                        il1 = x1 - x2
                        for m in range(nc):
                            y_u[m] = p_u[m] - q_u[m] * x1
                            y_l[m] = p_l[m] - q_l[m] * il1

                    # terminal currents and end-of-step voltages
                    for qq in range(n):
                        ylo = y_u[qq - 1] if qq > 0 else 0.0
                        yhi = y_u[qq] if qq < nc else 0.0
                        it_u[qq] = g_u[qq] * (iu1 + ylo) + yhi - ylo
                        u1_u[qq] = abar_u[qq] + (beta_u[qq] - esr_u[qq]) * it_u[qq]
                        ylo = y_l[qq - 1] if qq > 0 else 0.0
                        yhi = y_l[qq] if qq < nc else 0.0
                        it_l[qq] = g_l[qq] * (il1 + ylo) + yhi - ylo
                        u1_l[qq] = abar_l[qq] + (beta_l[qq] - esr_l[qq]) * it_l[qq]

                    # complementarity sweep
                    flips = 0
                    for m in range(nc):
                        if active_u[m] == 1:
                            if y_u[m] < 0.0:
                                active_u[m] = 0
                                flips += 1
                        elif g_u[m + 1] == 0:
                            yh = y_u[m + 1] if m + 1 < nc else 0.0
                            ylo = y_u[m - 1] if m > 0 else 0.0
                            itm1 = yh
                            itm = g_u[m] * (iu1 + ylo) - ylo
                            bias = (abar_u[m + 1] + beta_u[m + 1] * itm1) \
                                - (abar_u[m] + beta_u[m] * itm) \
                                - vfd[m] - vsw * ssw_u[m + 1] - rsw * iu1
                            if bias > 0.0:
                                active_u[m] = 1
                                flips += 1
                        if active_l[m] == 1:
                            if y_l[m] < 0.0:
                                active_l[m] = 0
                                flips += 1
                        elif g_l[m + 1] == 0:
                            yh = y_l[m + 1] if m + 1 < nc else 0.0
                            ylo = y_l[m - 1] if m > 0 else 0.0
                            itm1 = yh
                            itm = g_l[m] * (il1 + ylo) - ylo
                            bias = (abar_l[m + 1] + beta_l[m + 1] * itm1) \
                                - (abar_l[m] + beta_l[m] * itm) \
                                - vfd[m] - vsw * ssw_l[m + 1] - rsw * il1
                            if bias > 0.0:
                                active_l[m] = 1
                                flips += 1
                    if itn + 1 > max_it_seen:
                        max_it_seen = itn + 1
                    if flips == 0:
                        converged = 1
                        break

                if converged == 0:
                    all_ok = 0
                    break

                # commit substep: residual energy of branches forced off
                for m in range(nc):
                    if act0_u[m] == 1 and active_u[m] == 0:
                        e[E_CLAMP_RESIDUAL] += 0.5 * lcl[m] * icu[m] * icu[m]
                    if act0_l[m] == 1 and active_l[m] == 0:
                        e[E_CLAMP_RESIDUAL] += 0.5 * lcl[m] * icl_[m] * icl_[m]
                    icu[m] = y_u[m] if active_u[m] == 1 else 0.0
                    icl_[m] = y_l[m] if active_l[m] == 1 else 0.0

                # energy tallies at end-of-substep values
                e[E_SOURCE] += 0.5 * vdc * (iu1 + il1) * dts
                e[E_ARM_RES] += rarm * (iu1 * iu1 + il1 * il1) * dts
                for qq in range(n):
                    isw = iu1 + (icu[qq - 1] if qq > 0 else 0.0)
                    e[E_SWITCH_COND] += (vsw * ssw_u[qq] * isw + rsw * isw * isw) * dts
                    isw = il1 + (icl_[qq - 1] if qq > 0 else 0.0)
                    e[E_SWITCH_COND] += (vsw * ssw_l[qq] * isw + rsw * isw * isw) * dts
                    e[E_CAP_ESR] += (esr_u[qq] * it_u[qq] * it_u[qq] + esr_l[qq] * it_l[qq] * it_l[qq]) * dts
                    e[E_LEAK] += (gleak_u[qq] * u1_u[qq] * u1_u[qq] + gleak_l[qq] * u1_l[qq] * u1_l[qq]) * dts
                for m in range(nc):
                    if active_u[m] == 1:
                        e[E_CLAMP_COND] += (vfd[m] * icu[m] + rcl[m] * icu[m] * icu[m]) * dts
                    if active_l[m] == 1:
                        e[E_CLAMP_COND] += (vfd[m] * icl_[m] + rcl[m] * icl_[m] * icl_[m]) * dts

                # output voltage from the upper-arm loop
                wy = 0.0
                for m in range(nc):
                    wy += (rsw + g_u[m] * beta_u[m]) * y_u[m]
                vout1 = 0.5 * vdc - (gbu * iu1 + wy + ku)
                e[E_LOAD] += vout1 * iout1 * dts
                if load_kind == 1:
                    e[E_LOAD_RES] += rload * iout1 * iout1 * dts

                for qq in range(n):
                    uu[qq] = u1_u[qq]
                    ul[qq] = u1_l[qq]
                iu = iu1
                il_ = il1
                iout = iout1
                last_vout = vout1

            if all_ok == 1:
                step_ok = 1
                break

        if step_ok == 0:
            status = STATUS_DIODE_FAILURE
            fail_time = t
            break

        # --- record ---
        if rec_full == 1:
            rec_vout_full[step + 1] = last_vout
        if (step + 1) % decim == 0:
            r = (step + 1) // decim
            rec_t[r] = t1
            finite = 1
            for qq in range(n):
                rec_uu[r, qq] = uu[qq]
                rec_ul[r, qq] = ul[qq]
                if not (math.isfinite(uu[qq]) and math.isfinite(ul[qq])):
                    finite = 0
            rec_iu[r] = iu
            rec_il[r] = il_
            rec_vout[r] = last_vout
            rec_iout[r] = iout
            if rec_clamps == 1:
                for m in range(nc):
                    rec_icu[r, m] = icu[m]
                    rec_icl[r, m] = icl_[m]
            for kk in range(N_TALLIES):
                rec_e[r, kk] = e[kk]
            stored = 0.0
            for qq in range(n):
                stored += 0.5 * (cap_u[qq] * uu[qq] * uu[qq] + cap_l[qq] * ul[qq] * ul[qq])
            for m in range(nc):
                stored += 0.5 * lcl[m] * (icu[m] * icu[m] + icl_[m] * icl_[m])
            stored += 0.5 * larm * (iu * iu + il_ * il_)
            if load_kind == 1:
                stored += 0.5 * lload * iout * iout
            rec_stored[r] = stored
            n_rec_done = r + 1
            if finite == 0 or not math.isfinite(iu):
                status = STATUS_NON_FINITE
                fail_time = t1
                break

    return status, fail_time, max_it_seen, n_rec_done, iu, il_, iout
