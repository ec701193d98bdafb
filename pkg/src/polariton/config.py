"""Declarative run configuration: flat sectioned key-value text.

Every physical quantity in a config file carries an explicit unit and is
converted to internal units (cm, µs, rad/µs, cm⁻³, mG) on load; frequency
units (kHz, MHz, ...) convert to angular rad/µs with the 2π factor.  A
config names a registered scenario and overrides any subset of its
parameters; unknown sections or keys are rejected, and validation reports
every violation, not just the first.

Example::

    [run]
    scenario = storage-50us

    [medium]
    wavelength = 795 nm

    [schedule]
    tau = 80 us

    [output]
    detector_csv = true
    snapshots = 88 us, 120 us
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .exceptions import ConfigError
from .scenarios import get_scenario, known_params

_TWO_PI = 2.0 * math.pi

#: unit -> factor to internal units, grouped by dimension
UNIT_TABLES = {
    "length": {"nm": 1e-7, "um": 1e-4, "mm": 0.1, "cm": 1.0, "m": 100.0,
               "km": 1e5},
    "time": {"ns": 1e-3, "us": 1.0, "ms": 1e3, "s": 1e6},
    "rate": {"rad/us": 1.0, "rad/s": 1e-6, "1/us": 1.0, "1/s": 1e-6,
             "Hz": _TWO_PI * 1e-6, "kHz": _TWO_PI * 1e-3, "MHz": _TWO_PI,
             "GHz": _TWO_PI * 1e3},
    "density": {"/cm^3": 1.0, "cm^-3": 1.0, "/m^3": 1e-6, "m^-3": 1e-6},
    "speed": {"cm/us": 1.0, "m/s": 1e-4, "km/s": 0.1},
    "bfield": {"mG": 1.0, "G": 1e3},
    "none": {},
}

#: canonical unit used when emitting a config
CANONICAL_UNIT = {
    "length": "cm", "time": "us", "rate": "rad/us", "density": "/cm^3",
    "speed": "cm/us", "bfield": "mG", "none": "",
}

#: parameter path -> dimension
PARAM_DIMENSIONS = {
    "medium.n": "density",
    "medium.wavelength": "length",
    "medium.gamma_r": "rate",
    "medium.gamma_opt": "rate",
    "medium.gamma_0": "rate",
    "medium.L_cell": "length",
    "schedule.v_g": "speed",
    "schedule.omega_c": "rate",
    "schedule.omega_scale": "none",
    "schedule.t0": "time",
    "schedule.ramp": "time",
    "schedule.tau": "time",
    "pulse.peak_time": "time",
    "pulse.fwhm": "time",
    "pulse.amplitude": "rate",
    "pulse.cutoff_sigmas": "none",
    "grid.nz": "none",
    "grid.t_max": "time",
    "grid.sample_dt": "time",
    "run.delta": "rate",
    "run.decay_on": "none",
    "spectrum.b_max": "bfield",
    "spectrum.points": "none",
    "spectrum.target_fwhm": "rate",
    "spectrum.omega_c": "rate",
}


@dataclass(frozen=True)
class OutputOptions:
    """Which files a run emits."""

    detector_csv: bool = True
    summary_json: bool = True
    plot_data: bool = False
    snapshots: tuple = ()       # snapshot times [µs]


@dataclass(frozen=True)
class RunConfig:
    """A validated run configuration in internal units."""

    scenario: str
    params: dict = field(default_factory=dict)
    outputs: OutputOptions = OutputOptions()

    def effective(self) -> "RunConfig":
        """The config with every scenario default made explicit."""
        sc = get_scenario(self.scenario)
        merged = dict(sc.defaults)
        merged.update(self.params)
        return replace(self, params=merged)


def _parse_quantity(text: str, dimension: str, where: str, problems: list):
    parts = text.split()
    if dimension == "none":
        if len(parts) != 1:
            problems.append(f"{where}: expected a bare number, got {text!r}")
            return None
        try:
            return float(parts[0])
        except ValueError:
            problems.append(f"{where}: not a number: {parts[0]!r}")
            return None
    if len(parts) != 2:
        problems.append(
            f"{where}: expected '<number> <unit>', got {text!r}")
        return None
    try:
        value = float(parts[0])
    except ValueError:
        problems.append(f"{where}: not a number: {parts[0]!r}")
        return None
    table = UNIT_TABLES[dimension]
    if parts[1] not in table:
        problems.append(
            f"{where}: unit {parts[1]!r} is not a {dimension} unit "
            f"(one of {', '.join(sorted(table))})")
        return None
    return value * table[parts[1]]


def _parse_bool(text: str, where: str, problems: list):
    if text.lower() in ("true", "yes", "on", "1"):
        return True
    if text.lower() in ("false", "no", "off", "0"):
        return False
    problems.append(f"{where}: expected true/false, got {text!r}")
    return None


_RANGE_CHECKS = {
    "medium.n": (0.0, math.inf),
    "medium.wavelength": (1e-12, math.inf),
    "medium.gamma_r": (1e-12, math.inf),
    "medium.gamma_opt": (1e-12, math.inf),
    "medium.gamma_0": (0.0, math.inf),
    "medium.L_cell": (1e-12, math.inf),
    "schedule.v_g": (1e-12, math.inf),
    "schedule.omega_c": (0.0, math.inf),
    "schedule.omega_scale": (0.0, math.inf),
    "pulse.fwhm": (1e-12, math.inf),
    "pulse.amplitude": (1e-12, math.inf),
    "grid.nz": (64.0, 1e6),
    "grid.t_max": (0.0, math.inf),
    "grid.sample_dt": (1e-12, math.inf),
    "spectrum.points": (2.0, 1e9),
}


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config; raises :class:`ConfigError` with the
    full list of violations on failure."""
    problems = []
    section = None
    scenario = None
    params = {}
    out_kwargs = {}
    seen = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                problems.append(f"line {lineno}, col 1: unterminated "
                                f"section header")
                continue
            section = line[1:-1].strip()
            if section not in ("run", "output", "medium", "schedule",
                               "pulse", "grid", "spectrum"):
                problems.append(
                    f"line {lineno}, col 1: unknown section [{section}]")
                section = None
            continue
        if "=" not in line:
            problems.append(
                f"line {lineno}, col 1: expected 'key = value', got "
                f"{line!r}")
            continue
        if section is None:
            problems.append(
                f"line {lineno}, col 1: key outside of any valid section")
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        value_col = raw.index("=") + 2
        where = f"line {lineno}, col {value_col}: {section}.{key}"
        if (section, key) in seen:
            problems.append(f"{where}: duplicate key")
            continue
        seen.add((section, key))

        if section == "run" and key == "scenario":
            scenario = value
        elif section == "output":
            if key in ("detector_csv", "summary_json", "plot_data"):
                b = _parse_bool(value, where, problems)
                if b is not None:
                    out_kwargs[key] = b
            elif key == "snapshots":
                times = []
                ok = True
                for piece in value.split(","):
                    v = _parse_quantity(piece.strip(), "time", where,
                                        problems)
                    if v is None:
                        ok = False
                        break
                    times.append(v)
                if ok:
                    out_kwargs["snapshots"] = tuple(times)
            else:
                problems.append(f"{where}: unknown output option")
        else:
            path = f"{section}.{key}"
            if path not in PARAM_DIMENSIONS:
                problems.append(f"{where}: unknown key")
                continue
            v = _parse_quantity(value, PARAM_DIMENSIONS[path], where,
                                problems)
            if v is not None:
                lo, hi = _RANGE_CHECKS.get(path, (-math.inf, math.inf))
                if not lo <= v <= hi:
                    problems.append(
                        f"{where}: value {v:g} outside the allowed range "
                        f"[{lo:g}, {hi:g}]")
                else:
                    params[path] = v

    if scenario is None:
        problems.append("config must name a scenario ([run] scenario = ...)")
    else:
        try:
            sc = get_scenario(scenario)
        except Exception as exc:
            problems.append(str(exc))
        else:
            allowed = known_params(sc)
            for path in params:
                if path not in allowed:
                    problems.append(
                        f"key {path} is not a parameter of scenario "
                        f"{scenario!r}")
    if problems:
        raise ConfigError(problems)
    return RunConfig(scenario=scenario, params=params,
                     outputs=OutputOptions(**out_kwargs))


def emit_config(cfg: RunConfig) -> str:
    """Serialize a config in canonical internal units.

    Emitting the effective config and re-parsing it reproduces the same
    effective :class:`RunConfig` exactly (floats are written with full
    precision).
    """
    sections = {}
    for path, value in cfg.params.items():
        sec, key = path.split(".", 1)
        sections.setdefault(sec, []).append((key, path, value))
    lines = ["[run]", f"scenario = {cfg.scenario}"]
    for key, path, value in sorted(sections.pop("run", [])):
        unit = CANONICAL_UNIT[PARAM_DIMENSIONS[path]]
        tail = f" {unit}" if unit else ""
        lines.append(f"{key} = {value!r}{tail}")
    lines.append("")
    for sec in ("medium", "schedule", "pulse", "grid", "spectrum"):
        if sec not in sections:
            continue
        lines.append(f"[{sec}]")
        for key, path, value in sorted(sections[sec]):
            unit = CANONICAL_UNIT[PARAM_DIMENSIONS[path]]
            tail = f" {unit}" if unit else ""
            lines.append(f"{key} = {value!r}{tail}")
        lines.append("")
    o = cfg.outputs
    lines.append("[output]")
    lines.append(f"detector_csv = {str(o.detector_csv).lower()}")
    lines.append(f"summary_json = {str(o.summary_json).lower()}")
    lines.append(f"plot_data = {str(o.plot_data).lower()}")
    if o.snapshots:
        lines.append("snapshots = "
                     + ", ".join(f"{t!r} us" for t in o.snapshots))
    lines.append("")
    return "\n".join(lines)
