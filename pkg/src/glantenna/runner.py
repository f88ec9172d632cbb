"""Orchestration: one simulation per liquid state, beam map and reports.

States run independently (optionally across processes); per-state failures
are captured as error records without aborting the remaining states. The
beam-map report matches each state's measured peak azimuth to the design
azimuth table and checks that the six-state mapping is a bijection.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .errors import ExtractionError, GlAntennaError
from .farfield import (
    FarFieldPattern,
    NtffSurface,
    PatternMetrics,
    directivity_and_gain,
    ntff_transform,
)
from .fdtd import init_coeffs, make_port_source, run
from .ports import PortRecorder, PortSpectra, fractional_bandwidth, port_spectra, resonant_frequency
from .scene import STATE_BEAM_AZIMUTH_DEG, build_scene, liquid_location
from .voxelize import voxelize


@dataclass
class StateResult:
    label: str
    spectra: PortSpectra | None = None
    resonance_hz: float | None = None
    bandwidth_pct: float | None = None
    patterns: dict = field(default_factory=dict)  # f -> FarFieldPattern
    metrics: dict = field(default_factory=dict)   # f -> PatternMetrics
    poynting_w: dict = field(default_factory=dict)
    termination: str = ""
    warning: str | None = None
    steps: int = 0
    elapsed_s: float = 0.0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def pattern_at(self, f: float) -> FarFieldPattern:
        key = min(self.patterns, key=lambda k: abs(k - f))
        return self.patterns[key]

    def metrics_at(self, f: float) -> PatternMetrics:
        key = min(self.metrics, key=lambda k: abs(k - f))
        return self.metrics[key]


def accepted_power(spectra_fn, f: float) -> float:
    """Time-average power into the port at f: Re(V conj(I)) / 2."""
    sp = spectra_fn([f])
    return 0.5 * float(np.real(sp.v[0] * np.conj(sp.i[0])))


def run_state(cfg: RunConfig, label: str) -> StateResult:
    """Simulate one liquid state end to end."""
    t0 = time.perf_counter()
    result = StateResult(label=label)
    try:
        state = liquid_location(label, cfg.antenna)
        scene = build_scene(cfg.antenna, state)
        grid = voxelize(
            scene, cfg.sim.delta, pml_thickness=cfg.pml_cells, margin_cells=cfg.margin_cells
        )
        coeffs = init_coeffs(grid, cfg.sim)
        source = make_port_source(grid, coeffs, cfg.source)
        port = PortRecorder(grid, cfg.sim.resolved_dt)
        surface = NtffSurface.around_content(grid, cfg.farfield.frequencies, cfg.sim.resolved_dt)
        out = run(grid, cfg.sim, recorders=[port, surface], sources=[source], coeffs=coeffs)
        record = port.record()
        freqs = np.linspace(cfg.spectrum.f_min, cfg.spectrum.f_max, cfg.spectrum.points)
        result.spectra = port_spectra(record, freqs)
        result.resonance_hz = resonant_frequency(result.spectra)
        try:
            result.bandwidth_pct = fractional_bandwidth(result.spectra, -10.0)
        except ExtractionError:
            result.bandwidth_pct = None
        for f in cfg.farfield.frequencies:
            pat = ntff_transform(
                surface, f, cfg.farfield.theta_step_deg, cfg.farfield.phi_step_deg
            )
            p_acc = accepted_power(lambda fl: port_spectra(record, fl), f)
            result.patterns[f] = pat
            if p_acc > 0:
                result.metrics[f] = directivity_and_gain(pat, accepted_power=p_acc)
            result.poynting_w[f] = surface.poynting_flux(f)
        result.termination = out.termination
        result.warning = out.warning
        result.steps = out.steps
    except GlAntennaError as err:
        result.error = f"{type(err).__name__}: {err}"
    result.elapsed_s = time.perf_counter() - t0
    return result


def _run_state_job(args):
    cfg, label = args
    return run_state(cfg, label)


def run_states(cfg: RunConfig) -> list:
    """All requested states, optionally in parallel processes."""
    if cfg.jobs == 1 or len(cfg.states) == 1:
        return [run_state(cfg, label) for label in cfg.states]
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(_run_state_job, [(cfg, s) for s in cfg.states]))


def match_beam(azimuth_deg: float, tolerance_deg: float) -> str | None:
    """Nearest design beam label within tolerance, else None."""
    best, best_err = None, 1e9
    for label, target in STATE_BEAM_AZIMUTH_DEG.items():
        err = abs((azimuth_deg - target + 180.0) % 360.0 - 180.0)
        if err < best_err:
            best, best_err = label, err
    if best_err <= tolerance_deg:
        return f"B{best[1]}"
    return None


def beam_map_report(results: list, cfg: RunConfig, f_eval: float = 5.5e9) -> dict:
    """State -> peak azimuth -> matched beam label, plus the resonance
    stability summary across states."""
    entries = []
    matched_labels = []
    for r in results:
        entry = {"state": r.label}
        if not r.ok:
            entry["error"] = r.error
            entries.append(entry)
            continue
        try:
            m = r.metrics_at(f_eval)
            theta, phi = m.peak
            beam = match_beam(phi, cfg.beam_match_tolerance_deg)
            entry.update(
                {
                    "peak_theta_deg": theta,
                    "peak_azimuth_deg": phi,
                    "target_azimuth_deg": STATE_BEAM_AZIMUTH_DEG[r.label],
                    "matched_beam": beam if beam else "unmatched",
                    "gain_dbi": m.gain_dbi,
                    "front_to_back_db": m.front_to_back_db,
                }
            )
            matched_labels.append(beam)
        except (KeyError, ValueError, ExtractionError) as err:
            entry["error"] = f"{type(err).__name__}: {err}"
        entries.append(entry)

    resolved = [m for m in matched_labels if m]
    bijection = (
        len(results) == 6
        and all(r.ok for r in results)
        and len(resolved) == 6
        and len(set(resolved)) == 6
    )
    report = {
        "frequency_hz": f_eval,
        "entries": entries,
        "bijection": bijection,
        "tolerance_deg": cfg.beam_match_tolerance_deg,
    }
    resonances = {r.label: r.resonance_hz for r in results if r.ok and r.resonance_hz}
    if len(resonances) >= 2:
        vals = np.array(list(resonances.values()))
        pairwise = float(np.max(vals) - np.min(vals)) / float(np.mean(vals))
        report["stability"] = {
            "resonances_hz": {k: float(v) for k, v in sorted(resonances.items())},
            "max_pairwise_deviation_pct": pairwise * 100.0,
        }
    elif len(resonances) == 1:
        report["stability"] = {
            "resonances_hz": {k: float(v) for k, v in resonances.items()},
        }
    return report
