"""Pre-packaged experiment reproductions and parameter sweeps.

The builtin parameter set mirrors a warm-vapor storage experiment:
4 cm cell, density 1e12 cm⁻³, 795 nm transition with 2π·5.75 rad/µs
natural width, pressure-broadened optical linewidth 2π·100 rad/µs,
stored-excitation lifetime 150 µs, 15 µs input pulses, 3 µs control
ramps, and a control level calibrated to a 1 km/s group velocity.
Density, wavelength, natural width, lifetime, pulse length and ramp
duration are experimental figures; the optical linewidth and control
level are declared calibration choices.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import darkstate, spectrum
from .drive import SignalPulseSpec, constant_schedule, storage_schedule
from .exceptions import ContainmentError, PolaritonError, ValidationError
from .medium import (MediumParams, compute_kappa, control_for_group_velocity,
                     group_velocity)
from .solver import Grid, RunResult, evolve, measure_delay, \
    measure_compression, measure_transmission, _profile_fwhm

_TWO_PI = 2.0 * math.pi

_PAPER_MEDIUM = {
    "medium.n": 1e12,                    # cm^-3
    "medium.wavelength": 7.95e-5,        # cm (795 nm)
    "medium.gamma_r": _TWO_PI * 5.75,    # rad/µs
    "medium.gamma_opt": _TWO_PI * 100.0, # rad/µs, calibration choice
    "medium.gamma_0": 1.0 / 150.0,       # rad/µs (150 µs lifetime)
    "medium.L_cell": 4.0,                # cm
}

# Peak time and truncation are chosen so the pulse has compact support
# inside the run window (the solver rejects truncated tails).
_PAPER_PULSE = {
    "pulse.peak_time": 68.0,
    "pulse.fwhm": 15.0,
    "pulse.amplitude": 0.5,
    "pulse.cutoff_sigmas": 7.5,
}


@dataclass(frozen=True)
class Scenario:
    """A named, reproducible experiment configuration."""

    name: str
    description: str
    kind: str                      # "storage" | "constant" | "spectrum"
    defaults: dict
    oracle: str = "none"           # none | polariton | vacuum-reference
    snapshot_times: tuple = ()


def _storage_defaults(tau: float) -> dict:
    d = dict(_PAPER_MEDIUM)
    d.update(_PAPER_PULSE)
    d.update({
        "schedule.v_g": 0.1,        # cm/µs = 1 km/s
        "schedule.omega_scale": 1.0,
        "schedule.t0": 93.0,
        "schedule.ramp": 3.0,
        "schedule.tau": tau,
        "grid.nz": 512.0,
        "grid.t_max": 0.0,          # auto: t2 + switch-on + full release
        "grid.sample_dt": 0.01,
        "run.delta": 0.0,
        "run.decay_on": 1.0,
    })
    return d


def _constant_defaults(t_max: float, omega_scale: float = 1.0) -> dict:
    d = dict(_PAPER_MEDIUM)
    d.update(_PAPER_PULSE)
    d.update({
        "schedule.v_g": 0.1,
        "schedule.omega_scale": omega_scale,
        "grid.nz": 512.0,
        "grid.t_max": t_max,
        "grid.sample_dt": 0.01,
        "run.delta": 0.0,
        "run.decay_on": 1.0,
    })
    return d


def _ideal_defaults() -> dict:
    d = _storage_defaults(tau=25.0)
    d.update({
        "medium.gamma_opt": _TWO_PI * 6.0,
        "medium.gamma_0": 0.0,
        "schedule.v_g": 0.05,
        "schedule.t0": 104.0,
    })
    return d


SCENARIOS = {}


def _register(sc: Scenario):
    SCENARIOS[sc.name] = sc
    return sc


_register(Scenario(
    name="spectrum-fig1b",
    description="cw transmission vs magnetic field; control calibrated so "
                "the resonance FWHM is 15 kHz (20 mG)",
    kind="spectrum",
    defaults={**_PAPER_MEDIUM,
              "spectrum.b_max": 100.0,
              "spectrum.points": 401.0,
              "spectrum.target_fwhm": _TWO_PI * 0.015,
              "spectrum.omega_c": 0.0}))   # 0 = calibrate to target_fwhm

for _tau in (50.0, 100.0, 200.0):
    _register(Scenario(
        name=f"storage-{int(_tau)}us",
        description=f"trap/store/release protocol with a {int(_tau)} µs "
                    f"dark interval",
        kind="storage",
        defaults=_storage_defaults(_tau)))

_register(Scenario(
    name="slow-light",
    description="constant control, pulse delayed by L/v_g against an "
                "empty-cell reference",
    kind="constant",
    defaults=_constant_defaults(t_max=160.0),
    oracle="vacuum-reference",
    snapshot_times=(88.0,)))

_register(Scenario(
    name="cw-eit-weak",
    description="stationary EIT with the control intensity reduced "
                "fivefold: pulse bandwidth no longer fits the window",
    kind="constant",
    defaults=_constant_defaults(t_max=340.0, omega_scale=1.0 / math.sqrt(5.0))))

_register(Scenario(
    name="ideal-storage",
    description="fully contained pulse, no ground-state decay, narrow "
                "optical line: the regime where the closed-form polariton "
                "solution is exact",
    kind="storage",
    defaults=_ideal_defaults(),
    oracle="polariton"))


def get_scenario(name: str) -> Scenario:
    if name not in SCENARIOS:
        raise ValidationError(
            f"unknown scenario {name!r}; available: "
            f"{', '.join(sorted(SCENARIOS))}")
    return SCENARIOS[name]


def known_params(scenario: Scenario) -> set:
    extra = {"schedule.omega_c"} if scenario.kind != "spectrum" else set()
    return set(scenario.defaults) | extra


def _build_medium(params: dict) -> MediumParams:
    return MediumParams(
        n=params["medium.n"],
        wavelength=params["medium.wavelength"],
        gamma_r=params["medium.gamma_r"],
        gamma_opt=params["medium.gamma_opt"],
        gamma_0=params["medium.gamma_0"],
        L_cell=params["medium.L_cell"])


def _control_level(params: dict, medium: MediumParams) -> float:
    omega_c = params.get("schedule.omega_c")
    if omega_c is None:
        kappa = compute_kappa(medium)
        if kappa <= 0:
            raise ValidationError(
                "schedule.omega_c must be given explicitly for an empty "
                "medium (schedule.v_g cannot be inverted)")
        omega_c = control_for_group_velocity(params["schedule.v_g"], kappa,
                                             medium.c_light)
    return omega_c * params.get("schedule.omega_scale", 1.0)


@dataclass
class ScenarioResult:
    """Output of one scenario execution."""

    name: str
    params: dict
    observables: dict
    run: Optional[RunResult] = None
    curve: Optional[spectrum.SpectrumCurve] = None
    adiabaticity: Optional[darkstate.AdiabaticityReport] = None
    oracle: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


def _run_spectrum(sc: Scenario, params: dict) -> ScenarioResult:
    medium = _build_medium(params)
    omega_c = params.get("spectrum.omega_c", 0.0)
    if omega_c <= 0.0:
        omega_c = spectrum.calibrate_control(
            medium, params["spectrum.target_fwhm"])
    inputs = spectrum.SteadyStateInputs(medium=medium, omega_c=omega_c)
    b = np.linspace(-params["spectrum.b_max"], params["spectrum.b_max"],
                    int(params["spectrum.points"]))
    curve = spectrum.transmission_spectrum(b, inputs)
    fwhm = spectrum.measure_fwhm(inputs)
    obs = {
        "omega_c_rad_us": omega_c,
        "fwhm_rad_us": fwhm,
        "fwhm_khz": fwhm / _TWO_PI * 1e3,
        "peak_transmission": spectrum.transmission(inputs),
    }
    return ScenarioResult(name=sc.name, params=params, observables=obs,
                          curve=curve)


def _run_time_domain(sc: Scenario, params: dict, snapshot_times,
                     fast_dark: bool) -> ScenarioResult:
    medium = _build_medium(params)
    omega_c = _control_level(params, medium)
    t_max = params["grid.t_max"]
    sample_dt = params["grid.sample_dt"]
    if sc.kind == "storage" and t_max <= 0.0:
        # Window long enough for the switch-on plus a full release sweep
        # of the cell at the stationary group velocity.
        ramp = params["schedule.ramp"]
        t2 = params["schedule.t0"] + ramp + params["schedule.tau"]
        kappa = compute_kappa(medium)
        v_g0 = group_velocity(omega_c, kappa, medium.c_light)
        t_max = t2 + ramp + medium.L_cell / v_g0 + 20.0
    if t_max <= 0.0:
        raise ValidationError("grid.t_max must be positive")
    t_max = math.ceil(t_max / sample_dt - 1e-9) * sample_dt
    if sc.kind == "storage":
        ramp = params["schedule.ramp"]
        schedule = storage_schedule(omega_c, params["schedule.t0"], ramp,
                                    params["schedule.tau"], ramp, t_max)
    else:
        schedule = constant_schedule(omega_c, t_max)
    pulse = SignalPulseSpec(peak_time=params["pulse.peak_time"],
                            fwhm=params["pulse.fwhm"],
                            amplitude=params["pulse.amplitude"],
                            cutoff_sigmas=params.get("pulse.cutoff_sigmas",
                                                     9.0))
    delta = params.get("run.delta", 0.0)
    grid = Grid.make(medium, schedule, t_max, nz=int(params["grid.nz"]),
                     sample_dt=sample_dt, delta=delta)
    if snapshot_times is None:
        snapshot_times = sc.snapshot_times
    result = evolve(medium, schedule, pulse, grid,
                    decay_on=params.get("run.decay_on", 1.0) != 0.0,
                    delta=delta, snapshot_times=snapshot_times,
                    fast_dark=fast_dark)

    out = ScenarioResult(name=sc.name, params=params,
                         observables=dict(result.observables), run=result,
                         warnings=list(result.warnings))
    out.adiabaticity = darkstate.adiabaticity_report(pulse, medium, schedule)
    out.observables["adiabatic"] = out.adiabaticity.adiabatic
    out.observables["bandwidth_window_ratio"] = out.adiabaticity.ratio

    if sc.oracle == "vacuum-reference":
        vac_medium = MediumParams(
            n=0.0, wavelength=medium.wavelength, gamma_r=medium.gamma_r,
            gamma_opt=medium.gamma_opt, gamma_0=medium.gamma_0,
            L_cell=medium.L_cell)
        vac_grid = Grid.make(vac_medium, schedule, t_max, nz=64,
                             sample_dt=grid.sample_dt, delta=delta)
        reference = evolve(vac_medium, schedule, pulse, vac_grid,
                           decay_on=False, delta=delta)
        out.observables["delay_us"] = measure_delay(result, reference)
        out.oracle["reference_transmission"] = measure_transmission(reference)
        if result.snapshots:
            try:
                comp = measure_compression(result)
            except ContainmentError as exc:
                out.warnings.append(f"compression not measured: {exc}")
            else:
                out.observables["compression_ratio"] = comp.ratio
                out.observables["c_over_vg"] = comp.c_over_vg
    elif sc.oracle == "polariton":
        out.oracle.update(_polariton_comparison(result))
        out.observables["oracle_l2_error"] = out.oracle["l2_error"]
    return out


def _polariton_comparison(result: RunResult) -> dict:
    """Chain the closed-form storage and release maps against the solver."""
    sched = result.schedule
    stored = darkstate.stored_coherence(result.pulse, sched, result.medium,
                                        nz=2048)
    mask = result.t >= sched.t2
    gamma_0 = result.medium.gamma_0
    released = darkstate.released_field(stored, sched, result.medium,
                                        gamma_0=gamma_0, delta=result.delta,
                                        t_eval=result.t[mask])
    num = result.signal_out[mask]
    ana = released.omega
    norm = math.sqrt(float(np.sum(np.abs(ana)**2)))
    if norm == 0.0:
        raise ValidationError("analytic release is empty; cannot compare")
    err = math.sqrt(float(np.sum(np.abs(num - ana)**2))) / norm
    e_num = float(np.trapezoid(np.abs(num)**2, result.t[mask]))
    return {
        "l2_error": err,
        "analytic_energy": released.energy,
        "numeric_energy": e_num,
        "stored_fraction": stored.stored_fraction,
    }


def run_scenario(name, overrides: Optional[dict] = None,
                 snapshot_times=None, fast_dark: bool = True) -> ScenarioResult:
    """Execute a registered scenario, optionally overriding parameters.

    Pure function of its configuration: repeated execution returns
    identical results.
    """
    sc = get_scenario(name) if isinstance(name, str) else name
    params = dict(sc.defaults)
    for key, value in (overrides or {}).items():
        if key not in known_params(sc):
            raise ValidationError(
                f"parameter path {key!r} not resolvable in scenario "
                f"{sc.name!r}")
        params[key] = value
    if sc.kind == "spectrum":
        return _run_spectrum(sc, params)
    return _run_time_domain(sc, params, snapshot_times, fast_dark)


@dataclass(frozen=True)
class SweepSpec:
    """One-axis parameter sweep over a scenario.

    ``overrides`` are fixed parameter replacements applied to every point
    before the axis value.
    """

    scenario: str
    axis: str
    values: tuple
    metric: str = "efficiency"
    overrides: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if isinstance(self.overrides, dict):
            object.__setattr__(self, "overrides",
                               tuple(sorted(self.overrides.items())))
        problems = []
        if not self.values:
            problems.append("sweep needs a non-empty values list")
        if self.metric not in ("efficiency", "delay", "width",
                               "transmission"):
            problems.append(f"unknown sweep metric {self.metric!r}")
        sc = get_scenario(self.scenario)
        for path in (self.axis, *(k for k, _ in self.overrides)):
            if path not in known_params(sc):
                problems.append(
                    f"parameter path {path!r} not resolvable in scenario "
                    f"{self.scenario!r}")
        if problems:
            raise ValidationError(problems)


@dataclass
class SweepResult:
    spec: SweepSpec
    values: np.ndarray
    metrics: np.ndarray
    fit: Optional[dict] = None


def _temporal_fwhm(result: RunResult) -> float:
    t = result.t
    intensity = result.intensity
    if result.schedule.t2 is not None:
        mask = t > result.schedule.t2
        t, intensity = t[mask], intensity[mask]
    return _profile_fwhm(t, intensity)


def _sweep_metric(res: ScenarioResult, metric: str) -> float:
    if metric == "efficiency":
        return res.observables["retrieval_efficiency"]
    if metric == "delay":
        return res.observables["delay_us"]
    if metric == "transmission":
        r = res.run
        return measure_transmission(r)
    if metric == "width":
        return _temporal_fwhm(res.run)
    raise ValidationError(f"unknown metric {metric!r}")


def run_sweep(spec: SweepSpec, parallel: int = 1) -> SweepResult:
    """Run a scenario once per axis value and collect the chosen metric.

    Points execute independently (optionally on a thread pool; the solver
    kernel releases the GIL) and the result table always follows the input
    value order.  For an efficiency-vs-tau sweep the decay constant is
    recovered by a least-squares fit of ln(efficiency) against tau,
    excluding points with tau below twice the ramp duration.
    """
    sc = get_scenario(spec.scenario)

    def need_delay_oracle():
        return spec.metric == "delay" and sc.oracle != "vacuum-reference"

    if need_delay_oracle():
        sc = Scenario(name=sc.name, description=sc.description, kind=sc.kind,
                      defaults=sc.defaults, oracle="vacuum-reference",
                      snapshot_times=sc.snapshot_times)

    def one(value):
        try:
            overrides = dict(spec.overrides)
            overrides[spec.axis] = value
            res = run_scenario(sc, overrides=overrides)
            return _sweep_metric(res, spec.metric)
        except PolaritonError as exc:
            raise type(exc)(
                f"sweep failed at {spec.axis}={value}: {exc}") from exc

    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            metrics = list(pool.map(one, spec.values))
    else:
        metrics = [one(v) for v in spec.values]

    values = np.asarray(spec.values, dtype=float)
    metrics = np.asarray(metrics, dtype=float)
    fit = None
    if spec.metric == "efficiency" and spec.axis == "schedule.tau":
        ramp = dict(spec.overrides).get(
            "schedule.ramp", sc.defaults.get("schedule.ramp", 0.0))
        keep = (values >= 2.0 * ramp) & (metrics > 0.0)
        if keep.sum() >= 2:
            x = values[keep]
            y = np.log(metrics[keep])
            slope, intercept = np.polyfit(x, y, 1)
            pred = slope * x + intercept
            ss_res = float(np.sum((y - pred)**2))
            ss_tot = float(np.sum((y - y.mean())**2))
            fit = {
                "decay_constant_us": -1.0 / slope if slope < 0 else math.inf,
                "slope_per_us": float(slope),
                "efficiency_at_zero": float(math.exp(intercept)),
                "r2": 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0,
                "points_used": int(keep.sum()),
            }
    return SweepResult(spec=spec, values=values, metrics=metrics, fit=fit)
