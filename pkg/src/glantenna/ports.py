"""Lumped-port bookkeeping: excitation waveform, V/I recording, spectra.

Port voltage is the gap-edge line integral (V = -Ez * delta, positive when
the wire sits above ground potential); port current is the Ampere loop of
H around the feed column, half-step averaged onto the voltage time base.
Spectra use a direct DFT at exactly the requested frequencies with the
e^{-j w t} kernel, so Z = V/I and S11 = (Z - z_ref)/(Z + z_ref) follow the
usual engineering sign conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ExtractionError
from .fdtd import FieldState
from .voxelize import VoxelGrid

_TURN_ON_LIMIT = 1.0e-8  # envelope fraction allowed at t = 0
_MIN_DELAY_SPREADS = math.sqrt(math.log(1.0 / _TURN_ON_LIMIT))  # ~4.29


@dataclass(frozen=True)
class SourceWaveform:
    """Gaussian-modulated sine: the -20 dB spectral points sit at f0 +- f_bw.

    Sine modulation makes the spectrum exactly zero at DC. The default
    delay (4.5 spreads) keeps the turn-on value below 1e-8 of the peak.
    """

    f0: float = 5.5e9
    f_bw: float = 3.5e9
    amplitude: float = 1.0
    delay: float | None = None

    def __post_init__(self):
        if self.f0 <= 0 or self.f_bw <= 0:
            raise DomainError("f0 and f_bw must be > 0 Hz")
        if self.amplitude == 0:
            raise DomainError("amplitude must be nonzero")
        if self.delay is not None and self.delay < _MIN_DELAY_SPREADS * self.spread:
            raise DomainError(
                f"delay {self.delay:.3e} s turns on above {_TURN_ON_LIMIT:.0e} "
                f"of peak; need >= {_MIN_DELAY_SPREADS * self.spread:.3e} s"
            )

    @property
    def spread(self) -> float:
        # exp(-(pi f_bw spread)^2) = 0.1  ->  -20 dB at f0 +- f_bw
        return math.sqrt(math.log(10.0)) / (math.pi * self.f_bw)

    @property
    def resolved_delay(self) -> float:
        return self.delay if self.delay is not None else 4.5 * self.spread

    @property
    def end_time(self) -> float:
        return self.resolved_delay + 4.5 * self.spread

    def __call__(self, t: float) -> float:
        return gaussian_modulated_pulse(t, self)

    def band(self) -> tuple:
        return (max(self.f0 - self.f_bw, 0.0), self.f0 + self.f_bw)


def gaussian_modulated_pulse(t: float, w: SourceWaveform) -> float:
    """Drive voltage at time t (seconds)."""
    if t < 0:
        raise DomainError(f"t must be >= 0 s, got {t}")
    u = t - w.resolved_delay
    return w.amplitude * math.exp(-((u / w.spread) ** 2)) * math.sin(2.0 * math.pi * w.f0 * u)


@dataclass
class PortRecord:
    """Aligned gap-voltage and loop-current series; t[m] = t0 + m dt."""

    v: np.ndarray
    i: np.ndarray
    dt: float
    t0: float
    z_ref: float = 50.0

    def __post_init__(self):
        if len(self.v) != len(self.i):
            raise DomainError("v and i must have equal lengths")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.v))


class PortRecorder:
    """Collects raw V and I during a run and assembles a PortRecord.

    The current loop sits `loop_offset` cells above the gap (0 = at the gap
    itself, for single-cell lumped validation loops).
    """

    name = "port"

    def __init__(self, grid: VoxelGrid, dt: float, loop_offset: int = 1):
        if grid.port is None:
            raise DomainError("grid has no port to record")
        p = grid.port
        self.i_idx = (p.i, p.j, min(p.k_gap + loop_offset, p.k_top - 1) if p.k_top - 1 > p.k_gap else p.k_gap)
        self.gap = (p.i, p.j, p.k_gap)
        self.delta = grid.delta
        self.dt = dt
        self.z_ref = p.z_ref
        self._v = []
        self._i_raw = []

    def after_h(self, fields: FieldState):
        i, j, k = self.i_idx
        hx, hy = fields.hx, fields.hy
        loop = (hy[i, j, k] - hy[i - 1, j, k]) - (hx[i, j, k] - hx[i, j - 1, k])
        self._i_raw.append(float(loop) * self.delta)

    def after_e(self, fields: FieldState):
        self._v.append(-float(fields.ez[self.gap]) * self.delta)

    def decay_samples(self) -> np.ndarray:
        return np.asarray(self._v)

    def record(self) -> PortRecord:
        v = np.asarray(self._v[:-1])
        i_raw = np.asarray(self._i_raw)
        i = 0.5 * (i_raw[:-1] + i_raw[1:])
        return PortRecord(v=v, i=i, dt=self.dt, t0=self.dt, z_ref=self.z_ref)


@dataclass
class PortSpectra:
    """Direct-DFT spectra; entries with |I| under the current floor are
    flagged invalid instead of divided."""

    freqs: np.ndarray
    v: np.ndarray
    i: np.ndarray
    z: np.ndarray
    s11: np.ndarray
    valid: np.ndarray
    z_ref: float

    def s11_db(self) -> np.ndarray:
        out = np.full(len(self.freqs), np.nan)
        ok = self.valid & (np.abs(self.s11) > 0)
        out[ok] = 20.0 * np.log10(np.abs(self.s11[ok]))
        return out


CURRENT_FLOOR = 1.0e-15


def port_spectra(rec: PortRecord, freqs) -> PortSpectra:
    """DFT at exactly the requested frequencies (no interpolation)."""
    freqs = np.atleast_1d(np.asarray(freqs, dtype=np.float64))
    if freqs.size == 0:
        raise DomainError("at least one frequency is required")
    t = rec.times
    v_f = np.empty(freqs.size, dtype=np.complex128)
    i_f = np.empty(freqs.size, dtype=np.complex128)
    for n, f in enumerate(freqs):
        kern = np.exp(-2j * np.pi * f * t)
        v_f[n] = np.sum(rec.v * kern) * rec.dt
        i_f[n] = np.sum(rec.i * kern) * rec.dt
    valid = np.abs(i_f) >= CURRENT_FLOOR
    z = np.full(freqs.size, np.nan + 0j)
    z[valid] = v_f[valid] / i_f[valid]
    s11 = np.full(freqs.size, np.nan + 0j)
    s11[valid] = (z[valid] - rec.z_ref) / (z[valid] + rec.z_ref)
    return PortSpectra(freqs=freqs, v=v_f, i=i_f, z=z, s11=s11, valid=valid, z_ref=rec.z_ref)


def resonant_frequency(s: PortSpectra) -> float:
    """Frequency of the global |S11| minimum, parabolically refined in dB;
    exact ties resolve toward the lower frequency."""
    ok = np.flatnonzero(s.valid)
    if ok.size < 3:
        raise ExtractionError(f"need >= 3 valid frequency samples, have {ok.size}")
    mag_db = s.s11_db()[ok]
    m = int(np.argmin(mag_db))  # argmin takes the first (lowest f) on ties
    if 0 < m < ok.size - 1 and ok[m + 1] - ok[m - 1] == 2:
        f_m1, f_0, f_p1 = s.freqs[ok[m - 1] : ok[m - 1] + 3]
        y_m1, y_0, y_p1 = mag_db[m - 1 : m + 2]
        denom = y_m1 - 2.0 * y_0 + y_p1
        if denom > 0:
            # uniform-spacing parabola vertex
            h = 0.5 * (f_p1 - f_m1)
            shift = 0.5 * (y_m1 - y_p1) / denom * h
            return float(f_0 + np.clip(shift, -h, h))
    return float(s.freqs[ok[m]])


def fractional_bandwidth(s: PortSpectra, threshold_db: float = -10.0) -> float:
    """Width of the contiguous |S11| <= threshold band around the global
    minimum, as a percentage of the refined resonant frequency. Returns 0
    when the curve never reaches the threshold."""
    if threshold_db >= 0:
        raise DomainError(f"threshold_db must be < 0, got {threshold_db}")
    ok = np.flatnonzero(s.valid)
    if ok.size < 3:
        raise ExtractionError(f"need >= 3 valid frequency samples, have {ok.size}")
    f = s.freqs[ok]
    y = s.s11_db()[ok]
    m = int(np.argmin(y))
    if y[m] > threshold_db:
        return 0.0
    lo = m
    while lo > 0 and y[lo - 1] <= threshold_db:
        lo -= 1
    hi = m
    while hi < y.size - 1 and y[hi + 1] <= threshold_db:
        hi += 1
    if lo == 0 or hi == y.size - 1:
        raise ExtractionError(
            "band unresolved: the threshold crossing lies outside the sampled range"
        )
    # linear interpolation in dB to the exact crossings
    f_lo = f[lo - 1] + (threshold_db - y[lo - 1]) / (y[lo] - y[lo - 1]) * (f[lo] - f[lo - 1])
    f_hi = f[hi] + (threshold_db - y[hi]) / (y[hi + 1] - y[hi]) * (f[hi + 1] - f[hi])
    f_c = resonant_frequency(s)
    return float((f_hi - f_lo) / f_c * 100.0)
