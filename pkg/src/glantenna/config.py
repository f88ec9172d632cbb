"""Run configuration: strict JSON parsing with defaults and presets.

Unknown keys are rejected with their JSON path; invariant violations are
re-raised with the offending path. The effective (defaults-applied)
configuration can be rendered back to a dict that parses to an equal
RunConfig, which is how runs echo their configuration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .cpml import CpmlParams
from .errors import ConfigError, GlAntennaError
from .fdtd import SimConfig
from .materials import DielectricSpec, GrapheneSpec, MaterialSpec, graphene_material
from .ports import SourceWaveform
from .scene import STATE_LABELS, AntennaParams

GHZ = 1.0e9

# Tuned reproduction values live here so the preset carries them.
PRESET_TABLE1 = {
    "states": list(STATE_LABELS),
    "antenna": {
        "Ls": 68.0,
        "Ws": 56.0,
        "Hs": 3.0,
        "Lm": 46.0,
        "Wm": 35.0,
        "Dm": 3.0,
        "Lg": 12.0,
        "slug_volume_ml": 0.27,
        "materials": {
            "substrate": {"eps_r": 2.9, "tan_delta": 0.0025},
            "channel_wall": {"eps_r": 2.55, "tan_delta": 0.002},
            "liquid": {"bulk_sigma_s_per_m": 1.0e6},
            "ground": "pec",
        },
    },
}

PRESETS = {"paper-table1": PRESET_TABLE1}


@dataclass(frozen=True)
class OutputOptions:
    directory: str = "out"
    touchstone: bool = True
    pattern_csv: bool = True
    summary: bool = True


@dataclass(frozen=True)
class FarFieldOptions:
    frequencies: tuple = tuple((4.75 + 0.25 * n) * GHZ for n in range(7))
    theta_step_deg: float = 2.0
    phi_step_deg: float = 2.0

    def __post_init__(self):
        if not self.frequencies:
            raise ConfigError("farfield.frequencies_ghz must be non-empty")
        if 5.5 * GHZ not in self.frequencies:
            raise ConfigError("farfield.frequencies_ghz must include 5.5 GHz")


@dataclass(frozen=True)
class SpectrumOptions:
    f_min: float = 2.0 * GHZ
    f_max: float = 9.0 * GHZ
    points: int = 281

    def __post_init__(self):
        if not (0 < self.f_min < self.f_max):
            raise ConfigError("spectrum range must satisfy 0 < f_min < f_max")
        if self.points < 3:
            raise ConfigError("spectrum.points must be >= 3")


@dataclass(frozen=True)
class RunConfig:
    antenna: AntennaParams
    states: tuple
    sim: SimConfig
    source: SourceWaveform
    outputs: OutputOptions = OutputOptions()
    farfield: FarFieldOptions = FarFieldOptions()
    spectrum: SpectrumOptions = SpectrumOptions()
    pml_cells: int = 10
    margin_cells: int | None = None
    beam_match_tolerance_deg: float = 15.0
    jobs: int = 1

    def __post_init__(self):
        if not self.states:
            raise ConfigError("states required")
        for s in self.states:
            if s not in STATE_LABELS:
                raise ConfigError(f"unknown state {s!r}")
        if len(set(self.states)) != len(self.states):
            raise ConfigError("states must be unique")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")


def _reject_unknown(section: dict, allowed, path: str):
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key at {path}.{sorted(unknown)[0]}")


def _get(section: dict, key: str, kind, default, path: str):
    if key not in section:
        return default
    v = section[key]
    if kind is float and isinstance(v, int) and not isinstance(v, bool):
        v = float(v)
    if not isinstance(v, kind) or isinstance(v, bool) and kind is not bool:
        raise ConfigError(f"type mismatch at {path}.{key}: expected {kind.__name__}")
    return v


# subtrees replaced wholesale on merge: a user liquid model supersedes the
# preset's rather than mixing with it
_MERGE_LEAVES = {"liquid"}


def _merge(preset: dict, user: dict) -> dict:
    out = dict(preset)
    for k, v in user.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in _MERGE_LEAVES:
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _parse_dielectric(section: dict, path: str) -> DielectricSpec:
    _reject_unknown(section, {"eps_r", "tan_delta", "f_ref_ghz"}, path)
    try:
        return DielectricSpec(
            eps_r=_get(section, "eps_r", float, 1.0, path),
            tan_delta=_get(section, "tan_delta", float, 0.0, path),
            f_ref=_get(section, "f_ref_ghz", float, 5.5, path) * GHZ,
        )
    except GlAntennaError as err:
        raise ConfigError(f"invariant error at {path}: {err}") from err


def _parse_liquid(section: dict, path: str) -> MaterialSpec:
    _reject_unknown(section, {"bulk_sigma_s_per_m", "kubo"}, path)
    if "bulk_sigma_s_per_m" in section and "kubo" in section:
        raise ConfigError(f"{path}: give either bulk_sigma_s_per_m or kubo, not both")
    try:
        if "kubo" in section:
            k = section["kubo"]
            kp = f"{path}.kubo"
            _reject_unknown(
                k, {"mu_c_ev", "tau_s", "temperature_k", "model", "thickness_mm", "bulk_sigma_override"}, kp
            )
            spec = GrapheneSpec(
                mu_c=_get(k, "mu_c_ev", float, 0.5, kp),
                tau=_get(k, "tau_s", float, 1e-12, kp),
                temperature=_get(k, "temperature_k", float, 300.0, kp),
                model=_get(k, "model", str, "bulk", kp),
                thickness=_get(k, "thickness_mm", float, 3.0, kp) * 1e-3,
                bulk_sigma_override=k.get("bulk_sigma_override"),
            )
            return graphene_material(spec)
        sigma = _get(section, "bulk_sigma_s_per_m", float, 1.0e6, path)
        return MaterialSpec.bulk_conductor(sigma)
    except GlAntennaError as err:
        raise ConfigError(f"invariant error at {path}: {err}") from err


def _parse_antenna(section: dict, path: str = "antenna") -> AntennaParams:
    allowed = {"Ls", "Ws", "Hs", "Lm", "Wm", "Dm", "Lg", "slug_volume_ml", "materials"}
    _reject_unknown(section, allowed, path)
    mats_raw = section.get("materials", {})
    _reject_unknown(mats_raw, {"substrate", "channel_wall", "liquid", "ground"}, f"{path}.materials")
    ground = mats_raw.get("ground", "pec")
    if ground != "pec":
        raise ConfigError(f"{path}.materials.ground: only 'pec' is supported")
    materials = {
        "substrate": _parse_dielectric(mats_raw.get("substrate", {"eps_r": 2.9, "tan_delta": 0.0025}), f"{path}.materials.substrate"),
        "channel_wall": _parse_dielectric(mats_raw.get("channel_wall", {"eps_r": 2.55, "tan_delta": 0.002}), f"{path}.materials.channel_wall"),
        "liquid": _parse_liquid(mats_raw.get("liquid", {}), f"{path}.materials.liquid"),
        "ground": MaterialSpec.pec(),
    }
    kwargs = {}
    for json_key, attr in (("Ls", "ls"), ("Ws", "ws"), ("Hs", "hs"), ("Lm", "lm"),
                           ("Wm", "wm"), ("Dm", "dm"), ("Lg", "lg")):
        if json_key in section:
            v = section[json_key]
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ConfigError(f"type mismatch at {path}.{json_key}: expected number")
            kwargs[attr] = float(v)
    if "slug_volume_ml" in section:
        kwargs["slug_volume"] = _get(section, "slug_volume_ml", float, 0.27, path)
    try:
        return AntennaParams(materials=materials, **kwargs)
    except GlAntennaError as err:
        bad = getattr(err, "args", [""])[0]
        for json_key, attr in (("Ls", "ls"), ("Ws", "ws"), ("Hs", "hs"), ("Lm", "lm"),
                               ("Wm", "wm"), ("Dm", "dm"), ("Lg", "lg")):
            if isinstance(bad, str) and bad.startswith(attr):
                raise ConfigError(f"invariant error at {path}.{json_key}: {err}") from err
        raise ConfigError(f"invariant error at {path}: {err}") from err


def _parse_sim(section: dict, path: str = "sim") -> tuple:
    allowed = {"delta_mm", "dt_s", "courant_factor", "max_steps", "decay_stop_db",
               "precision", "check_interval", "pml_cells", "margin_cells", "cpml"}
    _reject_unknown(section, allowed, path)
    cp = section.get("cpml", {})
    _reject_unknown(cp, {"grading_order", "target_reflection", "kappa_max", "alpha_max"}, f"{path}.cpml")
    try:
        cpml = CpmlParams(
            grading_order=_get(cp, "grading_order", float, 3.0, f"{path}.cpml"),
            target_reflection=_get(cp, "target_reflection", float, 1e-8, f"{path}.cpml"),
            kappa_max=_get(cp, "kappa_max", float, 7.0, f"{path}.cpml"),
            alpha_max=_get(cp, "alpha_max", float, 0.2, f"{path}.cpml"),
        )
        sim = SimConfig(
            delta=_get(section, "delta_mm", float, 0.5, path) * 1e-3,
            dt=section.get("dt_s"),
            courant_factor=_get(section, "courant_factor", float, 0.99, path),
            max_steps=_get(section, "max_steps", int, 60000, path),
            decay_stop_db=_get(section, "decay_stop_db", float, -60.0, path),
            precision=_get(section, "precision", str, "single", path),
            check_interval=_get(section, "check_interval", int, 100, path),
            cpml=cpml,
        )
    except GlAntennaError as err:
        raise ConfigError(f"invariant error at {path}: {err}") from err
    pml_cells = _get(section, "pml_cells", int, 10, path)
    margin = section.get("margin_cells")
    return sim, pml_cells, margin


def parse_config(text: str) -> RunConfig:
    """Parse a JSON configuration document into a RunConfig."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"invalid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise ConfigError("the configuration document must be a JSON object")
    top_allowed = {"preset", "states", "antenna", "sim", "source", "farfield",
                   "spectrum", "outputs", "beam_match_tolerance_deg", "jobs"}
    _reject_unknown(doc, top_allowed, "$")
    preset_name = doc.pop("preset", None)
    if preset_name is not None:
        if preset_name not in PRESETS:
            raise ConfigError(f"unknown preset {preset_name!r}; available: {sorted(PRESETS)}")
        doc = _merge(PRESETS[preset_name], doc)

    if "states" not in doc or not doc["states"]:
        raise ConfigError("states required")
    states = doc["states"]
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise ConfigError("type mismatch at $.states: expected a list of labels")

    antenna = _parse_antenna(doc.get("antenna", {}))
    sim, pml_cells, margin = _parse_sim(doc.get("sim", {}))

    src_raw = doc.get("source", {})
    _reject_unknown(src_raw, {"f0_ghz", "bandwidth_ghz", "amplitude_v", "delay_s"}, "source")
    try:
        source = SourceWaveform(
            f0=_get(src_raw, "f0_ghz", float, 5.5, "source") * GHZ,
            f_bw=_get(src_raw, "bandwidth_ghz", float, 3.5, "source") * GHZ,
            amplitude=_get(src_raw, "amplitude_v", float, 1.0, "source"),
            delay=src_raw.get("delay_s"),
        )
    except GlAntennaError as err:
        raise ConfigError(f"invariant error at source: {err}") from err

    ff_raw = doc.get("farfield", {})
    _reject_unknown(ff_raw, {"frequencies_ghz", "theta_step_deg", "phi_step_deg"}, "farfield")
    try:
        ff_freqs = ff_raw.get("frequencies_ghz")
        farfield = FarFieldOptions(
            frequencies=tuple(float(f) * GHZ for f in ff_freqs) if ff_freqs else FarFieldOptions().frequencies,
            theta_step_deg=_get(ff_raw, "theta_step_deg", float, 2.0, "farfield"),
            phi_step_deg=_get(ff_raw, "phi_step_deg", float, 2.0, "farfield"),
        )
    except GlAntennaError as err:
        raise ConfigError(f"invariant error at farfield: {err}") from err

    sp_raw = doc.get("spectrum", {})
    _reject_unknown(sp_raw, {"f_min_ghz", "f_max_ghz", "points"}, "spectrum")
    try:
        spectrum = SpectrumOptions(
            f_min=_get(sp_raw, "f_min_ghz", float, 2.0, "spectrum") * GHZ,
            f_max=_get(sp_raw, "f_max_ghz", float, 9.0, "spectrum") * GHZ,
            points=_get(sp_raw, "points", int, 281, "spectrum"),
        )
    except GlAntennaError as err:
        raise ConfigError(f"invariant error at spectrum: {err}") from err

    out_raw = doc.get("outputs", {})
    _reject_unknown(out_raw, {"directory", "touchstone", "pattern_csv", "summary"}, "outputs")
    outputs = OutputOptions(
        directory=_get(out_raw, "directory", str, "out", "outputs"),
        touchstone=_get(out_raw, "touchstone", bool, True, "outputs"),
        pattern_csv=_get(out_raw, "pattern_csv", bool, True, "outputs"),
        summary=_get(out_raw, "summary", bool, True, "outputs"),
    )

    try:
        return RunConfig(
            antenna=antenna,
            states=tuple(states),
            sim=sim,
            source=source,
            outputs=outputs,
            farfield=farfield,
            spectrum=spectrum,
            pml_cells=pml_cells,
            margin_cells=margin,
            beam_match_tolerance_deg=_get(doc, "beam_match_tolerance_deg", float, 15.0, "$"),
            jobs=_get(doc, "jobs", int, 1, "$"),
        )
    except GlAntennaError as err:
        raise ConfigError(f"invariant error at $: {err}") from err


def effective_config(cfg: RunConfig) -> dict:
    """Render the defaults-applied configuration; parsing the rendered
    document yields an equal RunConfig."""
    ant = cfg.antenna
    liquid = ant.materials["liquid"]
    if liquid.kind == "bulk_conductor":
        liquid_doc = {"bulk_sigma_s_per_m": liquid.sigma}
    else:
        raise ConfigError(f"cannot render liquid material of kind {liquid.kind!r}")
    doc = {
        "states": list(cfg.states),
        "antenna": {
            "Ls": ant.ls, "Ws": ant.ws, "Hs": ant.hs, "Lm": ant.lm, "Wm": ant.wm,
            "Dm": ant.dm, "Lg": ant.lg, "slug_volume_ml": ant.slug_volume,
            "materials": {
                "substrate": {
                    "eps_r": ant.materials["substrate"].eps_r,
                    "tan_delta": ant.materials["substrate"].tan_delta,
                    "f_ref_ghz": ant.materials["substrate"].f_ref / GHZ,
                },
                "channel_wall": {
                    "eps_r": ant.materials["channel_wall"].eps_r,
                    "tan_delta": ant.materials["channel_wall"].tan_delta,
                    "f_ref_ghz": ant.materials["channel_wall"].f_ref / GHZ,
                },
                "liquid": liquid_doc,
                "ground": "pec",
            },
        },
        "sim": {
            "delta_mm": cfg.sim.delta * 1e3,
            "courant_factor": cfg.sim.courant_factor,
            "max_steps": cfg.sim.max_steps,
            "decay_stop_db": cfg.sim.decay_stop_db,
            "precision": cfg.sim.precision,
            "check_interval": cfg.sim.check_interval,
            "pml_cells": cfg.pml_cells,
            "cpml": {
                "grading_order": cfg.sim.cpml.grading_order,
                "target_reflection": cfg.sim.cpml.target_reflection,
                "kappa_max": cfg.sim.cpml.kappa_max,
                "alpha_max": cfg.sim.cpml.alpha_max,
            },
        },
        "source": {
            "f0_ghz": cfg.source.f0 / GHZ,
            "bandwidth_ghz": cfg.source.f_bw / GHZ,
            "amplitude_v": cfg.source.amplitude,
        },
        "farfield": {
            "frequencies_ghz": [f / GHZ for f in cfg.farfield.frequencies],
            "theta_step_deg": cfg.farfield.theta_step_deg,
            "phi_step_deg": cfg.farfield.phi_step_deg,
        },
        "spectrum": {
            "f_min_ghz": cfg.spectrum.f_min / GHZ,
            "f_max_ghz": cfg.spectrum.f_max / GHZ,
            "points": cfg.spectrum.points,
        },
        "outputs": {
            "directory": cfg.outputs.directory,
            "touchstone": cfg.outputs.touchstone,
            "pattern_csv": cfg.outputs.pattern_csv,
            "summary": cfg.outputs.summary,
        },
        "beam_match_tolerance_deg": cfg.beam_match_tolerance_deg,
        "jobs": cfg.jobs,
    }
    if cfg.sim.dt is not None:
        doc["sim"]["dt_s"] = cfg.sim.dt
    if cfg.margin_cells is not None:
        doc["sim"]["margin_cells"] = cfg.margin_cells
    return doc
