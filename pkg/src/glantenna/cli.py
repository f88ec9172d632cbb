"""Command line: simulate liquid states, validate configs, run oracles.

    glantenna simulate --config run.json [--states L1,L2] [--jobs N]
                       [--reproducible] [--out DIR]
    glantenna validate-config --config run.json
    glantenna oracle {dipole,cavity,patch,cpml,dispersion,matched-load,kubo,all}
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, effective_config, parse_config
from .errors import ConfigError, GlAntennaError
from .io_files import write_json, write_pattern_csv, write_touchstone
from .runner import beam_map_report, run_states
from .scene import STATE_BEAM_AZIMUTH_DEG


def _load_config(path: str, overrides: argparse.Namespace) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    cfg = parse_config(text)
    if overrides.states:
        labels = tuple(s.strip() for s in overrides.states.split(",") if s.strip())
        cfg = dataclasses.replace(cfg, states=labels)
    if overrides.jobs is not None:
        cfg = dataclasses.replace(cfg, jobs=overrides.jobs)
    if overrides.out is not None:
        cfg = dataclasses.replace(
            cfg, outputs=dataclasses.replace(cfg.outputs, directory=overrides.out)
        )
    return cfg


def _write_state_outputs(cfg: RunConfig, result, out_dir: Path, reproducible: bool):
    state_dir = out_dir / result.label
    state_dir.mkdir(parents=True, exist_ok=True)
    summary = {
        "state": result.label,
        "termination": result.termination,
        "steps": result.steps,
        "resonance_hz": result.resonance_hz,
        "bandwidth_pct": result.bandwidth_pct,
        "warning": result.warning,
        "error": result.error,
    }
    if not reproducible:
        summary["elapsed_s"] = result.elapsed_s
    if result.ok:
        if cfg.outputs.touchstone:
            write_touchstone(result.spectra, state_dir / "s11.s1p", label=result.label)
        if cfg.outputs.pattern_csv:
            for f, pat in sorted(result.patterns.items()):
                if f not in result.metrics:
                    continue
                tag = f"{f / 1e9:.3f}".replace(".", "p")
                m = result.metrics[f]
                beam = None
                from .runner import match_beam

                beam = match_beam(m.peak[1], cfg.beam_match_tolerance_deg)
                write_pattern_csv(
                    pat,
                    m,
                    state_dir / f"pattern_{tag}ghz.csv",
                    summary_extra={
                        "state": result.label,
                        "matched_beam": beam if beam else "unmatched",
                        "poynting_flux_w": result.poynting_w.get(f),
                    },
                )
    if cfg.outputs.summary:
        write_json(summary, state_dir / "summary.json")


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config, args)
    out_dir = Path(cfg.outputs.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(effective_config(cfg), out_dir / "config.echo.json")
    results = run_states(cfg)
    for r in results:
        _write_state_outputs(cfg, r, out_dir, args.reproducible)
        status = "ok" if r.ok else f"FAILED ({r.error})"
        res = f"{r.resonance_hz / 1e9:.3f} GHz" if r.resonance_hz else "n/a"
        print(f"state {r.label}: {status}; resonance {res}; steps {r.steps}")
    report = beam_map_report(results, cfg)
    write_json(report, out_dir / "beam_map.json")
    for e in report["entries"]:
        if "error" in e:
            print(f"  {e['state']}: error: {e['error']}")
        else:
            print(
                f"  {e['state']}: azimuth {e['peak_azimuth_deg']:.0f} deg "
                f"(target {e['target_azimuth_deg']:.0f}) -> {e['matched_beam']}"
            )
    if len(results) > 1 and "stability" in report and "max_pairwise_deviation_pct" in report["stability"]:
        print(f"  resonance spread: {report['stability']['max_pairwise_deviation_pct']:.2f} %")
    if len(results) == 6:
        print(f"  beam bijection: {report['bijection']}")
    return 0 if all(r.ok for r in results) else 1


def cmd_validate_config(args) -> int:
    try:
        cfg = _load_config(args.config, args)
    except ConfigError as err:
        print(f"invalid: {err}")
        return 1
    print(f"ok: {len(cfg.states)} state(s), delta {cfg.sim.delta * 1e3:g} mm, "
          f"output -> {cfg.outputs.directory}")
    return 0


def cmd_oracle(args) -> int:
    from . import validation

    if args.scene == "all":
        names = list(validation.ORACLES)
    else:
        names = [args.scene]
    ok = True
    for name in names:
        for check in validation.ORACLES[name]:
            result = check()
            print(result.summary())
            ok = ok and result.passed
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glantenna",
        description="FDTD simulation of a beam-reconfigurable graphene-liquid antenna",
    )
    parser.add_argument("--version", action="version", version=f"glantenna {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the configured liquid states")
    sim.add_argument("--config", required=True)
    sim.add_argument("--states", help="comma-separated subset, e.g. L1,L2")
    sim.add_argument("--jobs", type=int, default=None)
    sim.add_argument("--reproducible", action="store_true",
                     help="omit wall-clock data so outputs are byte-stable")
    sim.add_argument("--out", help="output directory override")
    sim.set_defaults(fn=cmd_simulate)

    val = sub.add_parser("validate-config", help="parse and check a config file")
    val.add_argument("--config", required=True)
    val.add_argument("--states", help="comma-separated subset")
    val.add_argument("--jobs", type=int, default=None)
    val.add_argument("--out", default=None)
    val.set_defaults(fn=cmd_validate_config)

    orc = sub.add_parser("oracle", help="run built-in analytic validation scenes")
    orc.add_argument(
        "scene",
        choices=["dipole", "cavity", "patch", "cpml", "dispersion", "matched-load", "kubo", "all"],
    )
    orc.set_defaults(fn=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except GlAntennaError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
