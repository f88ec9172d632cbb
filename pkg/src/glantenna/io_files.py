"""File outputs: Touchstone v1 S-parameters, pattern CSV, JSON summaries.

All writers emit byte-deterministic content for identical inputs; anything
time-of-day dependent (wall-clock durations, timestamps) is dropped when
`reproducible` is set.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError
from .farfield import FarFieldPattern, NormalizedPattern, PatternMetrics, normalize_pattern
from .ports import PortSpectra


def write_touchstone(s: PortSpectra, path, label: str = "") -> Path:
    """One-port Touchstone: `# GHz S RI R 50`, frequencies ascending,
    nine significant digits."""
    order = np.argsort(s.freqs, kind="stable")
    freqs = s.freqs[order]
    s11 = s.s11[order]
    valid = s.valid[order]
    if np.unique(freqs).size != freqs.size:
        raise DomainError("duplicate frequencies in spectra")
    lines = []
    if label:
        lines.append(f"! state: {label}")
    lines.append(f"! glantenna {__version__}")
    lines.append(f"# GHz S RI R {s.z_ref:g}")
    for f, v, ok in zip(freqs, s11, valid):
        if not ok:
            lines.append(f"! invalid sample at {f / 1e9:.12g} GHz (current below floor)")
            continue
        lines.append(f"{f / 1e9:.12g} {v.real:.12e} {v.imag:.12e}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_touchstone(path) -> tuple:
    """Parse a one-port `.s1p` written by :func:`write_touchstone`;
    returns (freqs_hz, s11, z_ref)."""
    freqs, vals = [], []
    z_ref = 50.0
    unit = 1e9
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("!"):
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) >= 1:
                unit = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}[parts[0].upper()]
            if "R" in [p.upper() for p in parts]:
                z_ref = float(parts[[p.upper() for p in parts].index("R") + 1])
            if len(parts) >= 3 and parts[2].upper() != "RI":
                raise DomainError(f"unsupported touchstone format {parts[2]!r}")
            continue
        cols = line.split()
        if len(cols) != 3:
            raise DomainError(f"malformed touchstone data line: {line!r}")
        freqs.append(float(cols[0]) * unit)
        vals.append(complex(float(cols[1]), float(cols[2])))
    return np.asarray(freqs), np.asarray(vals), z_ref


def write_pattern_csv(
    p: FarFieldPattern,
    metrics: PatternMetrics,
    path,
    summary_extra: dict | None = None,
) -> Path:
    """Theta-major rows of `theta_deg,phi_deg,gain_dbi,normalized_db`,
    plus a JSON sidecar with the metrics."""
    norm = normalize_pattern(p)
    u = p.intensity()
    # per-direction gain referenced to the accepted power
    with np.errstate(divide="ignore"):
        gain = 10.0 * np.log10(4.0 * math.pi * u / metrics.accepted_power)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["theta_deg,phi_deg,gain_dbi,normalized_db"]
    for it, th in enumerate(p.theta_deg):
        for ip, ph in enumerate(p.phi_deg):
            lines.append(f"{th:g},{ph:g},{gain[it, ip]:.6f},{norm.db[it, ip]:.6f}")
    path.write_text("\n".join(lines) + "\n")
    sidecar = path.with_suffix(".json")
    payload = {
        "frequency_hz": p.f,
        "gain_dbi": metrics.gain_dbi,
        "directivity_dbi": metrics.directivity_dbi,
        "peak_theta_deg": metrics.peak[0],
        "peak_phi_deg": metrics.peak[1],
        "front_to_back_db": metrics.front_to_back_db,
        "radiated_power_w": metrics.radiated_power,
        "accepted_power_w": metrics.accepted_power,
    }
    if summary_extra:
        payload.update(summary_extra)
    write_json(payload, sidecar)
    return path


def write_json(payload: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n")
    return path
