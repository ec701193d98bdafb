"""Closed-form dark-state polariton machinery.

The polariton field is the superposition

    Ψ(z,t) = cosθ(t)·Ω_s(z,t) − sinθ(t)·√κ·ρ(z,t),
    cosθ = Ω_c/√(Ω_c²+κ),  sinθ = √κ/√(Ω_c²+κ),

which, in the adiabatic and lossless limit, advects rigidly at the
instantaneous group velocity v_g(t) = c·cos²θ(t).  Switching the control
field off maps the pulse into the ground-state coherence; switching it
back on releases it.  These maps are implemented exactly (characteristic
displacement plus interpolation) and double as the independent oracle for
the time-domain solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from .drive import ControlSchedule, SignalPulseSpec
from .exceptions import BoundaryError, ValidationError
from .medium import (DerivedConstants, MediumParams, compute_kappa,
                     group_velocity)
from .spectrum import transparency_window


def mixing_angle(omega_c, kappa):
    """Polariton mixing angle θ = atan2(√κ, Ω_c) ∈ [0, π/2].

    θ = 0 is a pure photon (strong control), θ = π/2 a pure spin
    excitation (control off).  Vectorized over ``omega_c``.
    """
    if kappa < 0:
        raise ValidationError(f"kappa must be >= 0, got {kappa}")
    return np.arctan2(math.sqrt(kappa), omega_c)


def to_polariton(omega_s, rho_mp, theta, kappa):
    """Dark-state polariton field Ψ = cosθ·Ω_s − sinθ·√κ·ρ."""
    omega_s = np.asarray(omega_s)
    rho_mp = np.asarray(rho_mp)
    if omega_s.shape != rho_mp.shape:
        raise ValidationError(
            f"grid mismatch: omega_s has shape {omega_s.shape}, rho_mp "
            f"has shape {rho_mp.shape}")
    return np.cos(theta) * omega_s - np.sin(theta) * math.sqrt(kappa) * rho_mp


def bright_component(omega_s, rho_mp, theta, kappa):
    """Orthogonal (bright) combination Φ = sinθ·Ω_s + cosθ·√κ·ρ."""
    omega_s = np.asarray(omega_s)
    rho_mp = np.asarray(rho_mp)
    if omega_s.shape != rho_mp.shape:
        raise ValidationError(
            f"grid mismatch: omega_s has shape {omega_s.shape}, rho_mp "
            f"has shape {rho_mp.shape}")
    return np.sin(theta) * omega_s + np.cos(theta) * math.sqrt(kappa) * rho_mp


def from_polariton(psi, phi, theta, kappa):
    """Invert the (Ψ, Φ) rotation back to (Ω_s, ρ)."""
    if kappa <= 0:
        raise ValidationError(f"kappa must be > 0, got {kappa}")
    c, s = np.cos(theta), np.sin(theta)
    omega_s = c * psi + s * phi
    rho_mp = (-s * psi + c * phi) / math.sqrt(kappa)
    return omega_s, rho_mp


class GroupVelocityIntegral:
    """Cumulative displacement s(t) = ∫ v_g dt' along a control schedule.

    Built once per (schedule, medium) pair; evaluation interpolates a
    dense per-segment Simpson table (constant segments are exact).
    """

    def __init__(self, schedule: ControlSchedule, medium: MediumParams,
                 points_per_segment: int = 2001):
        kappa = compute_kappa(medium)
        knots = [np.array([schedule.t_start])]
        svals = [np.array([0.0])]
        s_acc = 0.0
        for seg in schedule.segments:
            t = np.linspace(seg.t_start, seg.t_end, points_per_segment)
            om = np.asarray(seg.value(t))
            if kappa == 0.0:
                vg = np.full_like(t, medium.c_light)
            else:
                vg = medium.c_light * om**2 / (om**2 + kappa)
            s = s_acc + cumulative_simpson(vg, x=t, initial=0.0)
            knots.append(t[1:])
            svals.append(s[1:])
            s_acc = s[-1]
        self._t = np.concatenate(knots)
        self._s = np.concatenate(svals)
        self._t_lo = schedule.t_start
        self._t_hi = schedule.t_end

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < self._t_lo - 1e-9) or np.any(t_arr > self._t_hi + 1e-9):
            raise BoundaryError(
                f"displacement queried outside the schedule window "
                f"[{self._t_lo}, {self._t_hi}]")
        out = np.interp(t_arr, self._t, self._s)
        if t_arr.ndim == 0:
            return float(out)
        return out

    def between(self, t_from, t_to):
        """Displacement accumulated over [t_from, t_to] [cm]."""
        return self(t_to) - self(t_from)


def ideal_propagate(psi0, z, schedule: ControlSchedule, medium: MediumParams,
                    t_start: float, t_eval) -> np.ndarray:
    """Shape-preserving advection of a polariton profile.

    Given Ψ(z, t_start) = ``psi0`` on grid ``z``, returns
    Ψ(z, t) = Ψ(z − ∫ v_g dt', t_start) evaluated on the same grid at each
    requested time: a rigid displacement realized by cubic interpolation,
    with no numerical diffusion beyond interpolation error.

    Characteristics landing outside the provided support evaluate to zero
    when the profile already vanished at that edge; if the edge value is
    non-negligible the missing data is real (an unfed boundary) and a
    :class:`BoundaryError` is raised instead.  Pad ``z`` below 0 for
    boundary-fed pulses.
    """
    z = np.asarray(z, dtype=float)
    psi0 = np.asarray(psi0)
    if z.shape != psi0.shape:
        raise ValidationError("psi0 and z must have the same shape")
    motion = GroupVelocityIntegral(schedule, medium)
    spline = CubicSpline(z, psi0)
    scale = float(np.abs(psi0).max())
    edge_lo = abs(psi0[0]) > 1e-12 * scale
    edge_hi = abs(psi0[-1]) > 1e-12 * scale
    t_eval = np.atleast_1d(np.asarray(t_eval, dtype=float))
    out = np.zeros((t_eval.size, z.size), dtype=complex)
    for i, t in enumerate(t_eval):
        shift = motion.between(t_start, t)
        query = z - shift
        if (edge_lo and query.min() < z[0] - 1e-12) or \
                (edge_hi and query.max() > z[-1] + 1e-12):
            raise BoundaryError(
                f"displaced profile at t={t} needs data outside the "
                f"provided support [{z[0]}, {z[-1]}] where the profile is "
                f"non-negligible")
        inside = (query >= z[0]) & (query <= z[-1])
        out[i, inside] = spline(query[inside])
    return out


@dataclass
class StoredCoherence:
    """Ground-state coherence left in the cell after switch-off."""

    z: np.ndarray
    rho: np.ndarray
    v_g0: float
    t1: float
    stored_fraction: float
    truncated: bool
    warnings: list = field(default_factory=list)


def stored_coherence(pulse: SignalPulseSpec, schedule: ControlSchedule,
                     medium: MediumParams, nz: int = 512) -> StoredCoherence:
    """Map the input pulse into the stored coherence at t1.

    The portion of the boundary time series whose image falls inside the
    cell (0 < z < L) is frozen as

        ρ(z, t1) = −√(c/(v_g⁰·κ)) · Ω_s(0, t0 + (S − z)/v_g⁰),

    with S the displacement accumulated during switch-off and v_g⁰ the
    stationary group velocity before t0.  The leaked remainder is reported
    via ``stored_fraction``; ``truncated`` flags a pulse still entering at
    switch-off.
    """
    if schedule.t0 is None:
        raise ValidationError("schedule has no storage protocol timestamps")
    kappa = compute_kappa(medium)
    if kappa <= 0:
        raise ValidationError("stored_coherence requires a medium (kappa > 0)")
    omega_c0 = schedule.value(schedule.t0)
    v_g0 = group_velocity(omega_c0, kappa, medium.c_light)
    if v_g0 <= 0:
        raise ValidationError("stationary group velocity is zero; the pulse "
                              "never enters the medium")
    motion = GroupVelocityIntegral(schedule, medium)
    s01 = motion.between(schedule.t0, schedule.t1)

    z = np.linspace(0.0, medium.L_cell, nz)
    t_entry = schedule.t0 + (s01 - z) / v_g0
    rho = -math.sqrt(medium.c_light / (v_g0 * kappa)) * pulse.value(t_entry)

    # Energy fraction of the pulse whose image lies inside the cell.
    sigma = pulse.sigma / math.sqrt(2.0)   # width of the intensity envelope
    t_deep = schedule.t0 + (s01 - medium.L_cell) / v_g0
    t_front = schedule.t0 + s01 / v_g0
    lo = 0.5 * (1.0 + math.erf((t_deep - pulse.peak_time) / (sigma * math.sqrt(2.0))))
    hi = 0.5 * (1.0 + math.erf((t_front - pulse.peak_time) / (sigma * math.sqrt(2.0))))
    fraction = hi - lo

    warnings_list = []
    truncated = False
    if pulse.value(schedule.t0) > 1e-3 * pulse.amplitude:
        truncated = True
        warnings_list.append(
            "pulse still entering at switch-off; stored profile truncated "
            "at the entrance")
    if fraction < 1.0 - 1e-6:
        truncated = True

    return StoredCoherence(z=z, rho=rho, v_g0=v_g0, t1=schedule.t1,
                           stored_fraction=fraction, truncated=truncated,
                           warnings=warnings_list)


@dataclass
class ReleasedField:
    """Signal field released at the exit plane after storage."""

    t: np.ndarray
    omega: np.ndarray
    energy: float
    warnings: list = field(default_factory=list)


def released_field(stored: StoredCoherence, schedule: ControlSchedule,
                   medium: MediumParams, gamma_0: Optional[float] = None,
                   tau: Optional[float] = None, delta: float = 0.0,
                   t_eval=None) -> ReleasedField:
    """Field at z = L after the control is switched back on.

    Applies the storage-interval decay exp(−(γ_0/2 + iδ)·τ) to the stored
    coherence, then evaluates it along the exit characteristic:

        Ω_s(L, t) = −cosθ(t)·√κ·ρ(L − ∫_{t2}^t v_g dt', t2).

    If the schedule never turns the control back on, an all-zero series is
    returned with a warning recorded.
    """
    if schedule.t2 is None:
        raise ValidationError("schedule has no storage protocol timestamps")
    if gamma_0 is None:
        gamma_0 = medium.gamma_0
    if tau is None:
        tau = schedule.tau
    kappa = compute_kappa(medium)
    t2 = schedule.t2
    if t_eval is None:
        t_eval = np.linspace(t2, schedule.t_end, 4001)
    else:
        t_eval = np.asarray(t_eval, dtype=float)

    warnings_list = []
    omega_after = np.asarray(schedule.value(t_eval))
    if np.all(omega_after == 0.0):
        warnings_list.append("control stays off after t2: nothing released")
        return ReleasedField(t=t_eval, omega=np.zeros(t_eval.size, complex),
                             energy=0.0, warnings=warnings_list)

    decay = np.exp(-(0.5 * gamma_0 + 1j * delta) * tau)
    rho_spline = CubicSpline(stored.z, stored.rho * decay)
    motion = GroupVelocityIntegral(schedule, medium)
    s2 = motion(t_eval) - motion(t2)
    query = medium.L_cell - s2
    theta = mixing_angle(omega_after, kappa)
    omega = -np.cos(theta) * math.sqrt(kappa) * rho_spline(query)
    omega = np.where((query >= stored.z[0]) & (query <= stored.z[-1]),
                     omega, 0.0)
    energy = float(np.trapezoid(np.abs(omega)**2, t_eval))
    return ReleasedField(t=t_eval, omega=omega, energy=energy,
                         warnings=warnings_list)


@dataclass(frozen=True)
class AdiabaticityReport:
    """Pulse bandwidth vs. initial transparency window, plus raw opacity."""

    bandwidth_rad_us: float
    window_rad_us: float
    ratio: float
    optical_depth: float
    pulse_length_cm: float
    adiabatic: bool
    marginal: bool

    def to_dict(self) -> dict:
        return {
            "bandwidth_rad_us": self.bandwidth_rad_us,
            "window_rad_us": self.window_rad_us,
            "ratio": self.ratio,
            "optical_depth": self.optical_depth,
            "pulse_length_cm": self.pulse_length_cm,
            "adiabatic": self.adiabatic,
            "marginal": self.marginal,
        }


def adiabaticity_report(pulse: SignalPulseSpec, medium: MediumParams,
                        schedule: ControlSchedule) -> AdiabaticityReport:
    """Diagnose whether the pulse fits the initial transparency window.

    The operative criterion is spectral: the pulse power-spectrum FWHM
    must sit inside the transparency window of the *initial* (stationary)
    control level.  Ratios in [0.5, 1) are flagged marginal.  The raw
    opacity ingredients (optical depth, compressed pulse length) are
    reported alongside for diagnostics.
    """
    derived = DerivedConstants.from_params(medium)
    omega_c0 = schedule.value(schedule.t_start)
    bandwidth = pulse.bandwidth_fwhm
    window = transparency_window(omega_c0, medium.gamma_opt,
                                 derived.optical_depth)
    ratio = bandwidth / window if window > 0 else math.inf
    v_g0 = group_velocity(omega_c0, derived.kappa, medium.c_light)
    return AdiabaticityReport(
        bandwidth_rad_us=bandwidth,
        window_rad_us=window,
        ratio=ratio,
        optical_depth=derived.optical_depth,
        pulse_length_cm=v_g0 * pulse.fwhm,
        adiabatic=ratio < 1.0,
        marginal=0.5 <= ratio < 1.0,
    )
