"""Compiled inner loop of the time-domain solver.

State layout is structure-of-arrays: real and imaginary parts of the
optical coherence (er, ei) and the spin coherence (mr, mi) on the spatial
grid.  Each RK4 stage rebuilds the signal field by trapezoidal integration
of (iκ/c)·ρ_e from the entrance boundary (quasi-static field), then
advances the local coherence equations

    ∂t ρ_e = −γ_opt·ρ_e + i·Ω_s + i·Ω_c(t)·ρ_m
    ∂t ρ_m = −(γ_s + iδ)·ρ_m + i·Ω_c(t)·ρ_e

Absolute time is always n·dt with an integer global step index, so phased
kernel invocations are bitwise identical to a single uninterrupted run.
"""

import numpy as np
from numba import njit

SEG_CONSTANT = 0
SEG_RAMP = 1


@njit(cache=True, inline="always")
def _control_at(t, seg_end, seg_kind, seg_w0, seg_w1, seg_start, idx):
    while idx < seg_end.shape[0] - 1 and t > seg_end[idx]:
        idx += 1
    if seg_kind[idx] == SEG_CONSTANT:
        return seg_w0[idx], idx
    s = (t - seg_start[idx]) / (seg_end[idx] - seg_start[idx])
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    w = seg_w0[idx] + (seg_w1[idx] - seg_w0[idx]) * 0.5 * (1.0 - np.cos(np.pi * s))
    return w, idx


@njit(cache=True, inline="always")
def _boundary_at(t, p_amp, p_peak, p_sig, p_cut):
    x = (t - p_peak) / p_sig
    if x < -p_cut or x > p_cut:
        return 0.0
    return p_amp * np.exp(-0.5 * x * x)


@njit(cache=True, fastmath=True, nogil=True)
def run_kernel(er, ei, mr, mi,
               n0, nsteps, dt, dzw,
               g_opt, g_s, delta,
               seg_end, seg_kind, seg_w0, seg_w1, seg_start,
               p_amp, p_peak, p_sig, p_cut,
               stride, det_re, det_im, det_ctrl, det_in,
               bnd_m0r, bnd_m0i, bnd_mlr, bnd_mli,
               snap_steps, snap_er, snap_ei, snap_mr, snap_mi):
    """Advance the state by ``nsteps`` RK4 steps starting at step ``n0``.

    Detector rows are written at every global step divisible by ``stride``
    (sample slot = step // stride); ``snap_steps`` must be sorted.  Because
    time is derived from the absolute step index, splitting a run into
    several calls is bitwise identical to one long call.  Divergence
    checks live in the caller: fastmath code cannot test for NaN.
    """
    nz = er.shape[0]
    k1r = np.empty(nz); k1i = np.empty(nz); l1r = np.empty(nz); l1i = np.empty(nz)
    k2r = np.empty(nz); k2i = np.empty(nz); l2r = np.empty(nz); l2i = np.empty(nz)
    k3r = np.empty(nz); k3i = np.empty(nz); l3r = np.empty(nz); l3i = np.empty(nz)
    k4r = np.empty(nz); k4i = np.empty(nz); l4r = np.empty(nz); l4i = np.empty(nz)
    ar = np.empty(nz); ai = np.empty(nz); br = np.empty(nz); bi = np.empty(nz)

    seg_idx = 0
    snap_ptr = 0
    while snap_ptr < snap_steps.shape[0] and snap_steps[snap_ptr] < n0:
        snap_ptr += 1

    for n in range(nsteps):
        gstep = n0 + n
        t = gstep * dt

        if gstep % stride == 0 or (snap_ptr < snap_steps.shape[0]
                                   and snap_steps[snap_ptr] == gstep):
            # field profile of the current state (for detector / snapshot)
            bnd = _boundary_at(t, p_amp, p_peak, p_sig, p_cut)
            osr = bnd
            osi = 0.0
            if snap_ptr < snap_steps.shape[0] and snap_steps[snap_ptr] == gstep:
                for j in range(nz):
                    if j > 0:
                        osr += -dzw * (ei[j - 1] + ei[j])
                        osi += dzw * (er[j - 1] + er[j])
                    snap_er[snap_ptr, j] = er[j]
                    snap_ei[snap_ptr, j] = ei[j]
                    snap_mr[snap_ptr, j] = mr[j]
                    snap_mi[snap_ptr, j] = mi[j]
                snap_ptr += 1
            else:
                for j in range(1, nz):
                    osr += -dzw * (ei[j - 1] + ei[j])
                    osi += dzw * (er[j - 1] + er[j])
            if gstep % stride == 0:
                slot = gstep // stride
                oc_here, seg_idx = _control_at(t, seg_end, seg_kind, seg_w0,
                                               seg_w1, seg_start, seg_idx)
                det_re[slot] = osr
                det_im[slot] = osi
                det_ctrl[slot] = oc_here
                det_in[slot] = bnd * bnd
                bnd_m0r[slot] = mr[0]
                bnd_m0i[slot] = mi[0]
                bnd_mlr[slot] = mr[nz - 1]
                bnd_mli[slot] = mi[nz - 1]

        for stage in range(4):
            if stage == 0:
                ts = t
                cer = er; cei = ei; cmr = mr; cmi = mi
                dr = k1r; di = k1i; sr = l1r; si = l1i
            elif stage == 1:
                ts = t + 0.5 * dt
                for j in range(nz):
                    ar[j] = er[j] + 0.5 * dt * k1r[j]
                    ai[j] = ei[j] + 0.5 * dt * k1i[j]
                    br[j] = mr[j] + 0.5 * dt * l1r[j]
                    bi[j] = mi[j] + 0.5 * dt * l1i[j]
                cer = ar; cei = ai; cmr = br; cmi = bi
                dr = k2r; di = k2i; sr = l2r; si = l2i
            elif stage == 2:
                ts = t + 0.5 * dt
                for j in range(nz):
                    ar[j] = er[j] + 0.5 * dt * k2r[j]
                    ai[j] = ei[j] + 0.5 * dt * k2i[j]
                    br[j] = mr[j] + 0.5 * dt * l2r[j]
                    bi[j] = mi[j] + 0.5 * dt * l2i[j]
                cer = ar; cei = ai; cmr = br; cmi = bi
                dr = k3r; di = k3i; sr = l3r; si = l3i
            else:
                ts = t + dt
                for j in range(nz):
                    ar[j] = er[j] + dt * k3r[j]
                    ai[j] = ei[j] + dt * k3i[j]
                    br[j] = mr[j] + dt * l3r[j]
                    bi[j] = mi[j] + dt * l3i[j]
                cer = ar; cei = ai; cmr = br; cmi = bi
                dr = k4r; di = k4i; sr = l4r; si = l4i

            oc, seg_idx = _control_at(ts, seg_end, seg_kind, seg_w0, seg_w1,
                                      seg_start, seg_idx)
            osr = _boundary_at(ts, p_amp, p_peak, p_sig, p_cut)
            osi = 0.0
            dr[0] = -g_opt * cer[0] - osi - oc * cmi[0]
            di[0] = -g_opt * cei[0] + osr + oc * cmr[0]
            sr[0] = -g_s * cmr[0] + delta * cmi[0] - oc * cei[0]
            si[0] = -g_s * cmi[0] - delta * cmr[0] + oc * cer[0]
            for j in range(1, nz):
                osr += -dzw * (cei[j - 1] + cei[j])
                osi += dzw * (cer[j - 1] + cer[j])
                dr[j] = -g_opt * cer[j] - osi - oc * cmi[j]
                di[j] = -g_opt * cei[j] + osr + oc * cmr[j]
                sr[j] = -g_s * cmr[j] + delta * cmi[j] - oc * cei[j]
                si[j] = -g_s * cmi[j] - delta * cmr[j] + oc * cer[j]

        h = dt / 6.0
        for j in range(nz):
            er[j] += h * (k1r[j] + 2.0 * k2r[j] + 2.0 * k3r[j] + k4r[j])
            ei[j] += h * (k1i[j] + 2.0 * k2i[j] + 2.0 * k3i[j] + k4i[j])
            mr[j] += h * (l1r[j] + 2.0 * l2r[j] + 2.0 * l3r[j] + l4r[j])
            mi[j] += h * (l1i[j] + 2.0 * l2i[j] + 2.0 * l3i[j] + l4i[j])


def field_profile(er, ei, boundary_value, dzw):
    """Signal field on the grid from the optical coherence (trapezoid)."""
    nz = er.shape[0]
    osr = np.empty(nz)
    osi = np.empty(nz)
    incr = -dzw * (ei[:-1] + ei[1:])
    inci = dzw * (er[:-1] + er[1:])
    osr[0] = boundary_value
    osi[0] = 0.0
    osr[1:] = boundary_value + np.cumsum(incr)
    osi[1:] = np.cumsum(inci)
    return osr, osi
