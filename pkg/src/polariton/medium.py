"""Static vapor-cell parameters and the optical constants derived from them.

Internal unit system
--------------------
==============  =======================
length          cm
time            µs
rates           rad/µs (angular)
density         cm⁻³
speed           cm/µs
==============  =======================

All rates are angular frequencies; laboratory "kHz" figures convert via a
factor 2π.  In these units the speed of light is ≈ 3×10⁴ cm/µs and every
experimental scale (µs pulses, cm cells, MHz Rabi frequencies) sits near
unity, which keeps the numerics well conditioned.

Sign and factor conventions
---------------------------
* ``kappa`` is the collective atom-field coupling constant
  3·n·λ²·γ_r·c/(8π), in rad²/µs².  It sets both the photonic/atomic
  partition of the dark-state polariton and the opacity of the bare medium.
* ``alpha`` in :class:`DerivedConstants` is the *intensity* absorption
  coefficient of the medium without a control field, 2κ/(γ_opt·c); the
  amplitude coefficient is half of it.  The no-control intensity
  transmission of a cell of length L is exp(−alpha·L).
* ``gamma_0`` is the decay rate of the stored ground-state excitation:
  retrieval efficiency (energy) decays as exp(−gamma_0·τ) with storage
  time.  The coherence *amplitude* therefore damps at gamma_0/2, exposed
  as :attr:`MediumParams.gamma_spin`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import ValidationError

#: Free-space speed of light [cm/µs].
C_LIGHT = 2.99792458e4

#: Two-photon (Zeeman) detuning per unit magnetic field [rad/µs per mG].
#: 0.75 kHz/mG, as angular frequency.
ZEEMAN_RATE_PER_MG = 2.0 * math.pi * 7.5e-4


@dataclass(frozen=True)
class MediumParams:
    """Physical description of the vapor cell.

    Parameters
    ----------
    n:
        Atomic number density [cm⁻³].  May be zero (empty cell).
    wavelength:
        Optical transition wavelength [cm].
    gamma_r:
        Radiative (natural) linewidth of the optical transition [rad/µs].
    gamma_opt:
        Total optical coherence decay rate, including pressure broadening
        [rad/µs].  Must be at least ``gamma_r``.
    gamma_0:
        Decay rate of the stored ground-state excitation [rad/µs]; the
        retrieval efficiency decays as exp(−gamma_0·τ).  Zero disables
        ground-state decay.
    L_cell:
        Cell length [cm].
    c_light:
        Speed of light [cm/µs]; fixed physical constant, overridable only
        for unit experiments.
    """

    n: float
    wavelength: float
    gamma_r: float
    gamma_opt: float
    gamma_0: float
    L_cell: float
    c_light: float = C_LIGHT

    def __post_init__(self):
        problems = []
        for name in ("n", "wavelength", "gamma_r", "gamma_opt", "gamma_0",
                     "L_cell", "c_light"):
            value = getattr(self, name)
            if not math.isfinite(value):
                problems.append(f"{name} must be finite, got {value!r}")
        if not problems:
            if self.n < 0:
                problems.append(f"n must be >= 0, got {self.n}")
            for name in ("wavelength", "gamma_r", "L_cell", "c_light"):
                if getattr(self, name) <= 0:
                    problems.append(
                        f"{name} must be > 0, got {getattr(self, name)}")
            # gamma_opt == 0 is the idealized lossless limit used by the
            # excitation-bookkeeping checks; any physical value must cover
            # at least the radiative width.
            if self.gamma_0 < 0:
                problems.append(f"gamma_0 must be >= 0, got {self.gamma_0}")
            if self.gamma_opt < 0:
                problems.append(
                    f"gamma_opt must be >= 0, got {self.gamma_opt}")
            elif 0 < self.gamma_opt < self.gamma_r:
                problems.append(
                    f"gamma_opt ({self.gamma_opt}) must be >= gamma_r "
                    f"({self.gamma_r})")
        if problems:
            raise ValidationError(problems)

    @property
    def gamma_spin(self) -> float:
        """Amplitude damping rate of the ground-state coherence [rad/µs].

        Half of ``gamma_0`` so that stored energy decays at ``gamma_0``.
        """
        return 0.5 * self.gamma_0


@dataclass(frozen=True)
class DerivedConstants:
    """Optical constants derived from :class:`MediumParams`.

    ``kappa``         collective coupling constant [rad²/µs²]
    ``alpha``         intensity absorption coefficient without EIT [cm⁻¹]
    ``optical_depth`` alpha·L_cell, dimensionless
    """

    kappa: float
    alpha: float
    optical_depth: float

    @classmethod
    def from_params(cls, params: MediumParams) -> "DerivedConstants":
        return absorption_profile(params)


def compute_kappa(params: MediumParams) -> float:
    """Collective coupling constant 3·n·λ²·γ_r·c/(8π) [rad²/µs²].

    Linear in density and radiative width, quadratic in wavelength.
    """
    return (3.0 * params.n * params.wavelength**2 * params.gamma_r
            * params.c_light / (8.0 * math.pi))


def group_velocity(omega_c: float, kappa: float,
                   c_light: float = C_LIGHT) -> float:
    """Group velocity c·Ω_c²/(Ω_c² + κ) of the coupled excitation [cm/µs].

    Vanishes with the control field and approaches ``c_light`` from below
    as Ω_c → ∞.  With ``kappa == 0`` (no medium) the pulse moves at c.
    """
    if omega_c < 0:
        raise ValidationError(f"omega_c must be >= 0, got {omega_c}")
    if kappa < 0:
        raise ValidationError(f"kappa must be >= 0, got {kappa}")
    if kappa == 0.0:
        return c_light
    w2 = omega_c * omega_c
    return c_light * w2 / (w2 + kappa)


def control_for_group_velocity(v_g: float, kappa: float,
                               c_light: float = C_LIGHT) -> float:
    """Control Rabi frequency giving a target group velocity [rad/µs].

    Exact inversion of :func:`group_velocity`:
    Ω_c = sqrt(κ·v_g/(c − v_g)).
    """
    if not 0.0 < v_g < c_light:
        raise ValidationError(
            f"v_g must be in (0, c_light), got {v_g}")
    if kappa <= 0:
        raise ValidationError(f"kappa must be > 0, got {kappa}")
    return math.sqrt(kappa * v_g / (c_light - v_g))


def b_field_to_detuning(b_field_mg: float) -> float:
    """Two-photon detuning from a longitudinal magnetic field [rad/µs].

    Linear Zeeman shift, 0.75 kHz per mG (so 20 mG ↔ 15 kHz); odd in B.
    """
    if not math.isfinite(b_field_mg):
        raise ValidationError(f"b_field must be finite, got {b_field_mg!r}")
    return ZEEMAN_RATE_PER_MG * b_field_mg


def absorption_profile(params: MediumParams) -> DerivedConstants:
    """Populate the derived constants for a medium.

    ``alpha`` is the intensity absorption coefficient 2κ/(γ_opt·c) of the
    bare (no control field) medium; ``optical_depth`` is alpha·L_cell.
    """
    kappa = compute_kappa(params)
    if params.gamma_opt == 0.0:
        alpha = math.inf if kappa > 0 else 0.0
    else:
        alpha = 2.0 * kappa / (params.gamma_opt * params.c_light)
    return DerivedConstants(kappa=kappa, alpha=alpha,
                            optical_depth=alpha * params.L_cell)
