"""Time-dependent drive fields: the control schedule and the signal pulse.

A :class:`ControlSchedule` is a contiguous, non-overlapping list of
segments covering the run window.  Two segment shapes exist: a constant
level and a raised-cosine ramp between two levels (C¹ at its endpoints, so
the evaluated Ω_c(t) is continuous everywhere).  Storage protocols carry
the three protocol timestamps: t0 (switch-off start), t1 (switch-off
complete) and t2 (switch-on start, t2 = t1 + τ).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import ValidationError

_JOIN_TOL = 1e-9

CONSTANT = "constant"
RAMP = "ramp"


@dataclass(frozen=True)
class Segment:
    """One piece of the control waveform on [t_start, t_end]."""

    t_start: float
    t_end: float
    kind: str
    omega_start: float
    omega_end: float

    def __post_init__(self):
        problems = []
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)):
            problems.append("segment times must be finite")
        elif self.t_end <= self.t_start:
            problems.append(
                f"segment must have t_end > t_start, got "
                f"[{self.t_start}, {self.t_end}]")
        if self.kind not in (CONSTANT, RAMP):
            problems.append(f"unknown segment kind {self.kind!r}")
        if self.omega_start < 0 or self.omega_end < 0:
            problems.append("control Rabi frequency must be >= 0")
        if self.kind == CONSTANT and self.omega_start != self.omega_end:
            problems.append(
                "constant segment must have omega_start == omega_end")
        if problems:
            raise ValidationError(problems)

    def value(self, t):
        """Ω_c(t) on this segment; vectorized over ``t``."""
        if self.kind == CONSTANT:
            return np.full_like(np.asarray(t, dtype=float), self.omega_start)
        s = (np.asarray(t, dtype=float) - self.t_start) / (self.t_end - self.t_start)
        s = np.clip(s, 0.0, 1.0)
        return self.omega_start + (self.omega_end - self.omega_start) * 0.5 * (
            1.0 - np.cos(math.pi * s))


def constant(t_start: float, t_end: float, omega: float) -> Segment:
    return Segment(t_start, t_end, CONSTANT, omega, omega)


def ramp(t_start: float, t_end: float, omega_from: float,
         omega_to: float) -> Segment:
    """Raised-cosine ramp between two control levels."""
    return Segment(t_start, t_end, RAMP, omega_from, omega_to)


@dataclass(frozen=True)
class ControlSchedule:
    """Piecewise control field Ω_c(t) plus storage-protocol timestamps.

    ``t0``/``t1`` bracket the switch-off ramp and ``t2`` is the instant the
    switch-on ramp begins; the dark (storage) interval is [t1, t2] and
    τ = t2 − t1.  All three are ``None`` for schedules without a storage
    step (constant control, cw scans).
    """

    segments: tuple
    t0: Optional[float] = None
    t1: Optional[float] = None
    t2: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        problems = []
        if not self.segments:
            problems.append("schedule needs at least one segment")
        else:
            prev = None
            for seg in self.segments:
                if prev is not None:
                    if abs(seg.t_start - prev.t_end) > _JOIN_TOL:
                        problems.append(
                            f"segments must be contiguous: gap/overlap at "
                            f"t={prev.t_end} -> t={seg.t_start}")
                    prev_end = prev.value(prev.t_end)
                    here = seg.value(seg.t_start)
                    scale = max(abs(prev_end), abs(here), 1.0)
                    if abs(prev_end - here) > 1e-9 * scale:
                        problems.append(
                            f"control field discontinuous at t={seg.t_start}: "
                            f"{prev_end} != {here}")
                prev = seg
        stamps = (self.t0, self.t1, self.t2)
        if any(s is not None for s in stamps):
            if any(s is None for s in stamps):
                problems.append("t0, t1, t2 must be given together")
            elif not (self.t0 < self.t1 <= self.t2):
                problems.append(
                    f"need t0 < t1 <= t2, got {self.t0}, {self.t1}, {self.t2}")
        if problems:
            raise ValidationError(problems)

    @property
    def tau(self) -> Optional[float]:
        """Storage interval t2 − t1 [µs], or None for non-storage schedules."""
        if self.t1 is None:
            return None
        return self.t2 - self.t1

    @property
    def t_start(self) -> float:
        return self.segments[0].t_start

    @property
    def t_end(self) -> float:
        return self.segments[-1].t_end

    def value(self, t):
        """Evaluate Ω_c(t); accepts scalars or arrays, clamps outside ends."""
        t_arr = np.asarray(t, dtype=float)
        out = np.empty(t_arr.shape, dtype=float)
        edges = np.array([seg.t_start for seg in self.segments[1:]])
        idx = np.searchsorted(edges, t_arr, side="right")
        for i, seg in enumerate(self.segments):
            mask = idx == i
            if np.any(mask):
                out[mask] = seg.value(t_arr[mask])
        if t_arr.ndim == 0:
            return float(out)
        return out

    def max_omega(self) -> float:
        return max(max(seg.omega_start, seg.omega_end)
                   for seg in self.segments)

    def covers(self, t_lo: float, t_hi: float) -> bool:
        return (self.t_start <= t_lo + _JOIN_TOL
                and self.t_end >= t_hi - _JOIN_TOL)

    def zero_intervals(self):
        """Maximal [a, b] intervals where the control is identically zero."""
        out = []
        for seg in self.segments:
            if seg.kind == CONSTANT and seg.omega_start == 0.0:
                if out and abs(out[-1][1] - seg.t_start) <= _JOIN_TOL:
                    out[-1] = (out[-1][0], seg.t_end)
                else:
                    out.append((seg.t_start, seg.t_end))
        return out


def constant_schedule(omega_c: float, t_end: float,
                      t_start: float = 0.0) -> ControlSchedule:
    """Control held at a fixed level over the whole run (cw / slow light)."""
    return ControlSchedule(segments=(constant(t_start, t_end, omega_c),))


def storage_schedule(omega_c: float, t0: float, ramp_off: float, tau: float,
                     ramp_on: float, t_end: float,
                     t_start: float = 0.0) -> ControlSchedule:
    """Standard trap/store/release protocol.

    Control on at ``omega_c`` until ``t0``, raised-cosine off over
    ``ramp_off``, dark for ``tau``, raised-cosine back on over ``ramp_on``,
    then constant until ``t_end``.  A zero ``tau`` joins the two ramps.
    """
    if ramp_off <= 0 or ramp_on <= 0:
        raise ValidationError("ramp durations must be > 0")
    if tau < 0:
        raise ValidationError(f"tau must be >= 0, got {tau}")
    t1 = t0 + ramp_off
    t2 = t1 + tau
    t3 = t2 + ramp_on
    if not t_start < t0:
        raise ValidationError(f"t0 must be > t_start, got {t0}")
    if t3 >= t_end:
        raise ValidationError(
            f"schedule does not fit: switch-on ends at {t3} >= t_end={t_end}")
    segs = [constant(t_start, t0, omega_c),
            ramp(t0, t1, omega_c, 0.0)]
    if tau > 0:
        segs.append(constant(t1, t2, 0.0))
    segs.append(ramp(t2, t3, 0.0, omega_c))
    segs.append(constant(t3, t_end, omega_c))
    return ControlSchedule(segments=tuple(segs), t0=t0, t1=t1, t2=t2)


@dataclass(frozen=True)
class SignalPulseSpec:
    """Gaussian input signal pulse at the cell entrance.

    ``fwhm`` is the full width at half maximum of the *intensity* envelope
    |Ω_s|²; the field amplitude is
    Ω_s(0, t) = amplitude · exp(−(t − peak_time)²/(2σ²)) with
    σ = fwhm/(2√ln2).  The envelope is truncated to exactly zero beyond
    ``cutoff_sigmas`` standard deviations (relative amplitude < 3e-18 at
    the default cutoff), which gives the pulse compact support.
    """

    peak_time: float
    fwhm: float
    amplitude: float
    cutoff_sigmas: float = 9.0

    def __post_init__(self):
        problems = []
        if not (math.isfinite(self.fwhm) and self.fwhm > 0):
            problems.append(f"fwhm must be > 0, got {self.fwhm}")
        if not (math.isfinite(self.amplitude) and self.amplitude > 0):
            problems.append(f"amplitude must be > 0, got {self.amplitude}")
        if not math.isfinite(self.peak_time):
            problems.append("peak_time must be finite")
        if self.cutoff_sigmas < 6.0:
            problems.append("cutoff_sigmas must be >= 6")
        if problems:
            raise ValidationError(problems)
        if not 10.0 <= self.fwhm <= 30.0:
            warnings.warn(
                f"pulse fwhm {self.fwhm} µs outside the 10-30 µs family the "
                f"storage protocol is calibrated for", stacklevel=2)

    @property
    def sigma(self) -> float:
        """Gaussian width of the field amplitude [µs]."""
        return self.fwhm / (2.0 * math.sqrt(math.log(2.0)))

    @property
    def bandwidth_fwhm(self) -> float:
        """FWHM of the power spectrum |FT Ω_s|², 4·ln2/fwhm [rad/µs]."""
        return 4.0 * math.log(2.0) / self.fwhm

    def support(self):
        """(t_lo, t_hi) outside which the truncated envelope is exactly 0."""
        half = self.cutoff_sigmas * self.sigma
        return (self.peak_time - half, self.peak_time + half)

    def value(self, t):
        """Field amplitude at the entrance boundary; vectorized."""
        t_arr = np.asarray(t, dtype=float)
        x = (t_arr - self.peak_time) / self.sigma
        out = self.amplitude * np.exp(-0.5 * x * x)
        out = np.where(np.abs(x) < self.cutoff_sigmas, out, 0.0)
        if t_arr.ndim == 0:
            return float(out)
        return out

    def energy(self) -> float:
        """Time-integrated intensity ∫|Ω_s(0,t)|² dt = A²·σ·√π."""
        return self.amplitude**2 * self.sigma * math.sqrt(math.pi)
