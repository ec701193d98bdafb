"""Steady-state weak-probe response of the driven three-level medium.

The complex propagation exponent k(δ) is the steady state of the coupled
coherence equations used by the time-domain solver, so the two modules
agree by construction:  with spin amplitude damping γ_s = γ_0/2,

    k(δ) = −(κ/c) · (γ_s + iδ) / [(γ_opt + iΔ)(γ_s + iδ) + Ω_c²]

and the field obeys Ω_s(L) = Ω_s(0)·exp(k·L).  On resonance (Δ = 0) the
medium is passive, Re k ≤ 0.  With the control off this reduces to
two-level absorption with intensity transmission exp(−alpha·L).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .exceptions import SingularityError, ValidationError
from .medium import (DerivedConstants, MediumParams, b_field_to_detuning,
                     compute_kappa)


@dataclass(frozen=True)
class SteadyStateInputs:
    """Inputs for one steady-state evaluation.

    ``delta`` is the two-photon (Raman) detuning, ``Delta`` the one-photon
    detuning (zero on resonance, the default regime), both in rad/µs.
    """

    medium: MediumParams
    omega_c: float
    delta: float = 0.0
    Delta: float = 0.0

    def __post_init__(self):
        problems = []
        if self.omega_c < 0:
            problems.append(f"omega_c must be >= 0, got {self.omega_c}")
        for name in ("omega_c", "delta", "Delta"):
            if not math.isfinite(getattr(self, name)):
                problems.append(f"{name} must be finite")
        if problems:
            raise ValidationError(problems)


def steady_response(inputs: SteadyStateInputs) -> complex:
    """Complex amplitude response per unit length, k(δ) [1/cm]."""
    m = inputs.medium
    kappa = compute_kappa(m)
    gs = m.gamma_spin
    num = gs + 1j * inputs.delta
    den = (m.gamma_opt + 1j * inputs.Delta) * num + inputs.omega_c**2
    scale = max(m.gamma_opt, gs, inputs.omega_c,
                abs(inputs.delta), abs(inputs.Delta))**2
    if abs(den) < 1e-30 * max(scale, 1.0):
        raise SingularityError(
            "steady-state denominator vanished (gamma_opt, gamma_0 and "
            "omega_c are all zero)")
    return -(kappa / m.c_light) * num / den


def transmission(inputs: SteadyStateInputs) -> float:
    """Intensity transmission through the cell, exp(2·Re k·L)."""
    k = steady_response(inputs)
    return math.exp(2.0 * k.real * inputs.medium.L_cell)


@dataclass(frozen=True)
class SpectrumCurve:
    """A transmission scan: magnetic-field axis, detuning axis, T values."""

    b_field_mg: np.ndarray
    delta: np.ndarray
    transmission: np.ndarray


def transmission_spectrum(scan, inputs: SteadyStateInputs,
                          axis: str = "b_field") -> SpectrumCurve:
    """Transmission at each scan point, preserving scan order.

    ``axis`` selects how the scan values are interpreted: magnetic field
    in mG (default, mirroring a Faraday-resonance scan) or two-photon
    detuning in rad/µs.
    """
    values = np.asarray(scan, dtype=float)
    if values.size == 0:
        raise ValidationError("scan must be non-empty")
    if axis == "b_field":
        b = values
        deltas = np.array([b_field_to_detuning(x) for x in b])
    elif axis == "delta":
        deltas = values
        b = deltas / b_field_to_detuning(1.0)
    else:
        raise ValidationError(f"unknown scan axis {axis!r}")
    trans = np.array([
        transmission(SteadyStateInputs(medium=inputs.medium,
                                       omega_c=inputs.omega_c,
                                       delta=d, Delta=inputs.Delta))
        for d in deltas])
    return SpectrumCurve(b_field_mg=b, delta=deltas, transmission=trans)


def transparency_window(omega_c: float, gamma_opt: float,
                        optical_depth: float) -> float:
    """Transparency-window width estimate Ω_c²/(γ_opt·√depth) [rad/µs].

    Cheap diagnostic; the numerically measured FWHM of the transmission
    resonance is the ground truth (they agree within a small factor).
    """
    if optical_depth <= 0:
        raise ValidationError(
            f"optical_depth must be > 0, got {optical_depth}")
    if omega_c < 0 or gamma_opt <= 0:
        raise ValidationError("omega_c must be >= 0 and gamma_opt > 0")
    return omega_c**2 / (gamma_opt * math.sqrt(optical_depth))


def measure_fwhm(inputs: SteadyStateInputs) -> float:
    """Numerically measured FWHM of the transmission resonance [rad/µs].

    The peak sits at δ = 0 and T(δ) decreases monotonically in |δ| toward
    the opaque baseline, so the half-height crossing is found by bisection
    on the computed curve; the FWHM is twice the crossing detuning.
    """
    m = inputs.medium
    t_peak = transmission(SteadyStateInputs(medium=m, omega_c=inputs.omega_c,
                                            delta=0.0, Delta=inputs.Delta))
    baseline = math.exp(-DerivedConstants.from_params(m).optical_depth)
    level = baseline + 0.5 * (t_peak - baseline)
    if t_peak - baseline <= 1e-12:
        raise ValidationError(
            "no transmission resonance to measure (peak equals baseline)")

    def f(d):
        return transmission(SteadyStateInputs(
            medium=m, omega_c=inputs.omega_c, delta=d,
            Delta=inputs.Delta)) - level

    hi = max(inputs.omega_c, m.gamma_opt, 1e-6)
    for _ in range(200):
        if f(hi) < 0.0:
            break
        hi *= 2.0
    else:
        raise ValidationError("failed to bracket the half-height crossing")
    half = brentq(f, 0.0, hi, xtol=1e-14, rtol=1e-13)
    return 2.0 * half


def calibrate_control(medium: MediumParams, target_fwhm: float,
                      Delta: float = 0.0) -> float:
    """Control Rabi frequency whose resonance has the target FWHM [rad/µs].

    Solves measure_fwhm(Ω_c) = target_fwhm by bisection; the width grows
    monotonically with Ω_c in the regime of interest.
    """
    if target_fwhm <= 0:
        raise ValidationError(f"target_fwhm must be > 0, got {target_fwhm}")

    def g(omega_c):
        try:
            width = measure_fwhm(SteadyStateInputs(
                medium=medium, omega_c=omega_c, Delta=Delta))
        except ValidationError:
            # Resonance swallowed by the opaque baseline: narrower than any
            # target, treat as width zero for bracketing purposes.
            width = 0.0
        return width - target_fwhm

    # Wing-dominated estimate of the width: FWHM ≈ 2√ln2·Ω²/(γ_opt·√depth).
    depth = DerivedConstants.from_params(medium).optical_depth
    est = math.sqrt(target_fwhm * medium.gamma_opt * math.sqrt(depth)
                    / (2.0 * math.sqrt(math.log(2.0))))
    lo, hi = est / 4.0, est * 4.0
    for _ in range(200):
        if g(lo) < 0.0:
            break
        lo *= 0.5
    else:
        raise ValidationError("calibration failed to bracket from below")
    for _ in range(200):
        if g(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise ValidationError("calibration failed to bracket from above")
    return brentq(g, lo, hi, xtol=1e-12, rtol=1e-12)
