"""Command-line surface: spectrum, store, sweep, validate, list-scenarios.

All output files are written atomically (temp file + rename) with fixed
column orders, '.' decimal points and LF line endings regardless of
locale.  Exit codes: 0 success, 1 configuration error, 2 numerical
failure.  Set POLARITON_LOG=DEBUG|INFO|... for progress logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from .config import OutputOptions, RunConfig, emit_config, parse_config
from .exceptions import ConfigError, PolaritonError, ValidationError
from .scenarios import SCENARIOS, SweepSpec, run_scenario, run_sweep

log = logging.getLogger("polariton")


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as config errors (exit 1)."""

    def error(self, message):
        raise ConfigError([f"{message}\n{self.format_usage()}"])


def _build_parser() -> _Parser:
    parser = _Parser(prog="polariton",
                     description="Slow light and light storage simulator")
    sub = parser.add_subparsers(dest="command")

    def add_common(p, needs_out=True):
        p.add_argument("--config", "-c", help="run configuration file")
        p.add_argument("--scenario", help="registered scenario name")
        if needs_out:
            p.add_argument("--out", "-o", required=True,
                           help="output directory")

    p = sub.add_parser("spectrum", help="cw transmission spectrum")
    add_common(p)

    p = sub.add_parser("store", help="time-domain run of a scenario")
    add_common(p)
    p.add_argument("--snapshots",
                   help="comma-separated snapshot times [µs]")

    p = sub.add_parser("sweep", help="one-axis parameter sweep")
    add_common(p)
    p.add_argument("--sweep-axis", help="parameter path, e.g. schedule.tau")
    p.add_argument("--sweep-values",
                   help="comma-separated values (internal units)")
    p.add_argument("--metric", default="efficiency",
                   choices=("efficiency", "delay", "width", "transmission"))
    p.add_argument("--parallel", type=int, default=1, metavar="N",
                   help="run up to N sweep points concurrently")

    p = sub.add_parser("validate", help="check a config file")
    p.add_argument("config", help="config file to validate")

    sub.add_parser("list-scenarios", help="print registered scenarios")
    return parser


def _load_config(args) -> RunConfig:
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError([f"cannot read config {args.config}: {exc}"])
        cfg = parse_config(text)
        if args.scenario:
            cfg = RunConfig(scenario=args.scenario, params=cfg.params,
                            outputs=cfg.outputs)
        return cfg
    if args.scenario:
        return RunConfig(scenario=args.scenario)
    raise ConfigError(["either --config or --scenario is required"])


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(rows, header) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(f"{v:.12g}" for v in row))
    return "\n".join(lines) + "\n"


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_summary(out_dir: Path, payload: dict):
    text = json.dumps(_json_ready(payload), indent=2, sort_keys=True)
    _atomic_write(out_dir / "summary.json", text + "\n")


def _write_effective_config(out_dir: Path, cfg: RunConfig):
    _atomic_write(out_dir / "effective.cfg", emit_config(cfg.effective()))


def _cmd_spectrum(args) -> int:
    cfg = _load_config(args)
    out_dir = Path(args.out)
    res = run_scenario(cfg.scenario, overrides=cfg.params)
    if res.curve is None:
        raise ValidationError(
            f"scenario {cfg.scenario!r} is not a spectrum scenario")
    rows = zip(res.curve.b_field_mg, res.curve.delta, res.curve.transmission)
    _atomic_write(out_dir / "spectrum.csv",
                  _csv(rows, ("b_field_mG", "delta_rad_per_us",
                              "transmission")))
    if cfg.outputs.summary_json:
        _write_summary(out_dir, {"scenario": res.name,
                                 "observables": res.observables,
                                 "warnings": res.warnings})
    _write_effective_config(out_dir, cfg)
    log.info("spectrum written to %s", out_dir)
    return 0


def _snapshot_rows(state):
    return zip(state.z, state.omega_s.real, state.omega_s.imag,
               state.rho_ep.real, state.rho_ep.imag,
               state.rho_mp.real, state.rho_mp.imag)


_SNAPSHOT_HEADER = ("z_cm", "omega_s_re", "omega_s_im", "rho_ep_re",
                    "rho_ep_im", "rho_mp_re", "rho_mp_im")


def _cmd_store(args) -> int:
    cfg = _load_config(args)
    if args.snapshots:
        times = tuple(float(x) for x in args.snapshots.split(","))
        cfg = RunConfig(scenario=cfg.scenario, params=cfg.params,
                        outputs=OutputOptions(
                            detector_csv=cfg.outputs.detector_csv,
                            summary_json=cfg.outputs.summary_json,
                            plot_data=cfg.outputs.plot_data,
                            snapshots=times))
    out_dir = Path(args.out)
    t0 = time.perf_counter()
    res = run_scenario(cfg.scenario, overrides=cfg.params,
                       snapshot_times=cfg.outputs.snapshots or None)
    log.info("scenario %s ran in %.1f s", cfg.scenario,
             time.perf_counter() - t0)
    if res.run is None:
        raise ValidationError(
            f"scenario {cfg.scenario!r} is not a time-domain scenario")
    run = res.run
    if cfg.outputs.detector_csv:
        rows = zip(run.t, run.intensity, run.control)
        _atomic_write(out_dir / "detector.csv",
                      _csv(rows, ("t_us", "intensity", "control_rabi")))
    if cfg.outputs.plot_data:
        body = "# t_us intensity control_rabi input_intensity\n" + "\n".join(
            f"{t:.12g} {i:.12g} {c:.12g} {j:.12g}"
            for t, i, c, j in zip(run.t, run.intensity, run.control,
                                  run.input_intensity)) + "\n"
        _atomic_write(out_dir / "detector.dat", body)
    for snap in run.snapshots:
        _atomic_write(out_dir / f"snapshot_{snap.t:.3f}us.csv",
                      _csv(_snapshot_rows(snap.state), _SNAPSHOT_HEADER))
    if cfg.outputs.summary_json:
        payload = {"scenario": res.name,
                   "observables": res.observables,
                   "warnings": res.warnings}
        if res.adiabaticity is not None:
            payload["adiabaticity"] = res.adiabaticity.to_dict()
        if res.oracle:
            payload["oracle"] = res.oracle
        _write_summary(out_dir, payload)
    _write_effective_config(out_dir, cfg)
    log.info("run outputs written to %s", out_dir)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    if not args.sweep_axis or not args.sweep_values:
        raise ConfigError(["sweep requires --sweep-axis and --sweep-values"])
    values = tuple(float(x) for x in args.sweep_values.split(","))
    spec = SweepSpec(scenario=cfg.scenario, axis=args.sweep_axis,
                     values=values, metric=args.metric,
                     overrides=cfg.params)
    out_dir = Path(args.out)
    t0 = time.perf_counter()
    result = run_sweep(spec, parallel=max(1, args.parallel))
    log.info("sweep of %d points ran in %.1f s", len(values),
             time.perf_counter() - t0)
    rows = zip(result.values, result.metrics)
    _atomic_write(out_dir / "sweep.csv", _csv(rows, ("value", spec.metric)))
    payload = {"scenario": spec.scenario, "axis": spec.axis,
               "metric": spec.metric,
               "values": list(result.values),
               "metrics": list(result.metrics)}
    if result.fit is not None:
        payload["fit"] = result.fit
    _write_summary(out_dir, payload)
    _write_effective_config(out_dir, cfg)
    return 0


def _cmd_validate(args) -> int:
    text = Path(args.config).read_text(encoding="utf-8")
    parse_config(text)
    print("OK")
    return 0


def _cmd_list(_args) -> int:
    width = max(len(name) for name in SCENARIOS)
    for name in sorted(SCENARIOS):
        print(f"{name:<{width}}  {SCENARIOS[name].description}")
    return 0


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "store": _cmd_store,
    "sweep": _cmd_sweep,
    "validate": _cmd_validate,
    "list-scenarios": _cmd_list,
}


def cli_main(argv=None) -> int:
    """Entry point; returns the process exit code."""
    level = os.environ.get("POLARITON_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise ConfigError([parser.format_usage()])
        return _COMMANDS[args.command](args)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PolaritonError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
