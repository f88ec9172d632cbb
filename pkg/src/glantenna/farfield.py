"""Near-to-far-field transform and radiation-pattern metrics.

Tangential E and H on a closed box around the antenna are accumulated as
running DFTs during the march (no time-domain field storage). At
post-processing the equivalence currents J = n x H and M = -n x E are
integrated into the radiation vectors, giving the far-zone coefficients

    E_theta = -j k / (4 pi) (L_phi + eta0 N_theta)
    E_phi   = +j k / (4 pi) (L_theta - eta0 N_phi)

(e^{+j w t} engineering convention; the physical field is E * e^{-jkr}/r).
Radiation intensity U = (|E_theta|^2 + |E_phi|^2) / (2 eta0) and the power
quadrature uses trapezoid-in-theta / rectangle-in-phi with sin(theta)
weights.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import kernels
from .constants import C0, ETA0
from .errors import DomainError, ExtractionError
from .fdtd import FieldState
from .voxelize import VoxelGrid

_FACES = ("xlo", "xhi", "ylo", "yhi", "zlo", "zhi")


class NtffSurface:
    """Closed recording box on node planes (i0, i1) x (j0, j1) x (k0, k1).

    Accumulates the complex tangential field phasors on every face at the
    requested frequencies, exactly once per step via the recorder hooks.
    """

    name = "ntff"

    def __init__(self, bounds, freqs, dt: float, delta: float):
        self.i0, self.i1, self.j0, self.j1, self.k0, self.k1 = bounds
        if not (self.i0 < self.i1 and self.j0 < self.j1 and self.k0 < self.k1):
            raise DomainError(f"degenerate recording box {bounds}")
        self.freqs = np.atleast_1d(np.asarray(freqs, dtype=np.float64))
        if self.freqs.size == 0:
            raise DomainError("at least one recorded frequency is required")
        self.dt = dt
        self.delta = delta
        self.steps = 0
        nf = self.freqs.size
        ni = self.i1 - self.i0
        nj = self.j1 - self.j0
        nk = self.k1 - self.k0
        self.acc = {}
        for side in ("lo", "hi"):
            for c in ("ey", "ez", "hy", "hz"):
                self.acc[f"x{side}_{c}"] = np.zeros((nf, nj, nk), dtype=np.complex128)
            for c in ("ex", "ez", "hx", "hz"):
                self.acc[f"y{side}_{c}"] = np.zeros((nf, ni, nk), dtype=np.complex128)
            for c in ("ex", "ey", "hx", "hy"):
                self.acc[f"z{side}_{c}"] = np.zeros((nf, ni, nj), dtype=np.complex128)

    @classmethod
    def around_content(cls, grid: VoxelGrid, freqs, dt: float, standoff: int | None = None):
        if grid.content_bounds is None:
            raise DomainError("grid has no content bounds; pass the box explicitly")
        (i0, i1), (j0, j1), (k0, k1) = grid.content_bounds
        margin_lo = min(i0, j0, k0) - grid.pml_thickness
        if standoff is None:
            standoff = max(2, margin_lo // 2)
        gap_limit = margin_lo - 2
        if standoff > gap_limit:
            raise DomainError(
                f"standoff {standoff} leaves under 2 cells before the absorber"
            )
        return cls(
            (i0 - standoff, i1 + standoff, j0 - standoff, j1 + standoff,
             k0 - standoff, k1 + standoff),
            freqs,
            dt,
            grid.delta,
        )

    def _phases(self, t: float) -> np.ndarray:
        return np.exp(-2j * np.pi * self.freqs * t)

    def after_h(self, fields: FieldState):
        # H sits half a step behind the upcoming E sample
        ph = self._phases((fields.step_index + 0.5) * self.dt)
        a = self.acc
        kernels.ntff_face_x_h(fields.hy, fields.hz, self.i0, self.j0, self.j1,
                              self.k0, self.k1, a["xlo_hy"], a["xlo_hz"], ph)
        kernels.ntff_face_x_h(fields.hy, fields.hz, self.i1, self.j0, self.j1,
                              self.k0, self.k1, a["xhi_hy"], a["xhi_hz"], ph)
        kernels.ntff_face_y_h(fields.hx, fields.hz, self.j0, self.i0, self.i1,
                              self.k0, self.k1, a["ylo_hx"], a["ylo_hz"], ph)
        kernels.ntff_face_y_h(fields.hx, fields.hz, self.j1, self.i0, self.i1,
                              self.k0, self.k1, a["yhi_hx"], a["yhi_hz"], ph)
        kernels.ntff_face_z_h(fields.hx, fields.hy, self.k0, self.i0, self.i1,
                              self.j0, self.j1, a["zlo_hx"], a["zlo_hy"], ph)
        kernels.ntff_face_z_h(fields.hx, fields.hy, self.k1, self.i0, self.i1,
                              self.j0, self.j1, a["zhi_hx"], a["zhi_hy"], ph)

    def after_e(self, fields: FieldState):
        ph = self._phases(fields.step_index * self.dt)
        a = self.acc
        kernels.ntff_face_x_e(fields.ey, fields.ez, self.i0, self.j0, self.j1,
                              self.k0, self.k1, a["xlo_ey"], a["xlo_ez"], ph)
        kernels.ntff_face_x_e(fields.ey, fields.ez, self.i1, self.j0, self.j1,
                              self.k0, self.k1, a["xhi_ey"], a["xhi_ez"], ph)
        kernels.ntff_face_y_e(fields.ex, fields.ez, self.j0, self.i0, self.i1,
                              self.k0, self.k1, a["ylo_ex"], a["ylo_ez"], ph)
        kernels.ntff_face_y_e(fields.ex, fields.ez, self.j1, self.i0, self.i1,
                              self.k0, self.k1, a["yhi_ex"], a["yhi_ez"], ph)
        kernels.ntff_face_z_e(fields.ex, fields.ey, self.k0, self.i0, self.i1,
                              self.j0, self.j1, a["zlo_ex"], a["zlo_ey"], ph)
        kernels.ntff_face_z_e(fields.ex, fields.ey, self.k1, self.i0, self.i1,
                              self.j0, self.j1, a["zhi_ex"], a["zhi_ey"], ph)
        self.steps = fields.step_index

    def freq_index(self, f: float) -> int:
        hits = np.flatnonzero(np.isclose(self.freqs, f, rtol=1e-9, atol=0.0))
        if hits.size == 0:
            raise ExtractionError(
                f"{f / 1e9:.4f} GHz was not recorded; available: "
                f"{np.round(self.freqs / 1e9, 4).tolist()} GHz"
            )
        return int(hits[0])

    def equivalent_currents(self, f: float):
        """Positions (m), complex J and M (A/m, V/m) and the outward face
        area element for every face cell, DFT-normalised by dt."""
        fi = self.freq_index(f)
        d, dt = self.delta, self.dt
        out_pos, out_j, out_m = [], [], []
        normals = {
            "xlo": (-1, 0, 0), "xhi": (1, 0, 0),
            "ylo": (0, -1, 0), "yhi": (0, 1, 0),
            "zlo": (0, 0, -1), "zhi": (0, 0, 1),
        }
        planes = {
            "xlo": self.i0, "xhi": self.i1,
            "ylo": self.j0, "yhi": self.j1,
            "zlo": self.k0, "zhi": self.k1,
        }
        for face in _FACES:
            n = np.array(normals[face], dtype=np.float64)
            ax = face[0]
            if ax == "x":
                u = (np.arange(self.j0, self.j1) + 0.5) * d
                w = (np.arange(self.k0, self.k1) + 0.5) * d
                uu, ww = np.meshgrid(u, w, indexing="ij")
                pos = np.stack([np.full_like(uu, planes[face] * d), uu, ww], axis=-1)
                e = (np.zeros_like(self.acc[f"{face}_ey"][fi]),
                     self.acc[f"{face}_ey"][fi] * dt, self.acc[f"{face}_ez"][fi] * dt)
                h = (np.zeros_like(e[0]),
                     self.acc[f"{face}_hy"][fi] * dt, self.acc[f"{face}_hz"][fi] * dt)
            elif ax == "y":
                u = (np.arange(self.i0, self.i1) + 0.5) * d
                w = (np.arange(self.k0, self.k1) + 0.5) * d
                uu, ww = np.meshgrid(u, w, indexing="ij")
                pos = np.stack([uu, np.full_like(uu, planes[face] * d), ww], axis=-1)
                e = (self.acc[f"{face}_ex"][fi] * dt,
                     np.zeros_like(uu, dtype=np.complex128), self.acc[f"{face}_ez"][fi] * dt)
                h = (self.acc[f"{face}_hx"][fi] * dt,
                     np.zeros_like(uu, dtype=np.complex128), self.acc[f"{face}_hz"][fi] * dt)
            else:
                u = (np.arange(self.i0, self.i1) + 0.5) * d
                w = (np.arange(self.j0, self.j1) + 0.5) * d
                uu, ww = np.meshgrid(u, w, indexing="ij")
                pos = np.stack([uu, ww, np.full_like(uu, planes[face] * d)], axis=-1)
                e = (self.acc[f"{face}_ex"][fi] * dt, self.acc[f"{face}_ey"][fi] * dt,
                     np.zeros_like(uu, dtype=np.complex128))
                h = (self.acc[f"{face}_hx"][fi] * dt, self.acc[f"{face}_hy"][fi] * dt,
                     np.zeros_like(uu, dtype=np.complex128))
            e = np.stack(e, axis=-1).reshape(-1, 3)
            h = np.stack(h, axis=-1).reshape(-1, 3)
            out_pos.append(pos.reshape(-1, 3))
            out_j.append(np.cross(np.broadcast_to(n, h.shape), h))
            out_m.append(-np.cross(np.broadcast_to(n, e.shape), e))
        return (
            np.concatenate(out_pos),
            np.concatenate(out_j),
            np.concatenate(out_m),
            d * d,
        )

    def poynting_flux(self, f: float) -> float:
        """Time-average power through the box: 1/2 Re(E x H*) . n summed
        over all faces (positive outward)."""
        fi = self.freq_index(f)
        dt, ds = self.dt, self.delta**2
        total = 0.0
        for face in _FACES:
            ax, sgn = face[0], (-1.0 if face.endswith("lo") else 1.0)
            if ax == "x":
                ey = self.acc[f"{face}_ey"][fi] * dt
                ez = self.acc[f"{face}_ez"][fi] * dt
                hy = self.acc[f"{face}_hy"][fi] * dt
                hz = self.acc[f"{face}_hz"][fi] * dt
                sx = 0.5 * np.real(ey * np.conj(hz) - ez * np.conj(hy))
                total += sgn * float(np.sum(sx)) * ds
            elif ax == "y":
                ex = self.acc[f"{face}_ex"][fi] * dt
                ez = self.acc[f"{face}_ez"][fi] * dt
                hx = self.acc[f"{face}_hx"][fi] * dt
                hz = self.acc[f"{face}_hz"][fi] * dt
                sy = 0.5 * np.real(ez * np.conj(hx) - ex * np.conj(hz))
                total += sgn * float(np.sum(sy)) * ds
            else:
                ex = self.acc[f"{face}_ex"][fi] * dt
                ey = self.acc[f"{face}_ey"][fi] * dt
                hx = self.acc[f"{face}_hx"][fi] * dt
                hy = self.acc[f"{face}_hy"][fi] * dt
                sz = 0.5 * np.real(ex * np.conj(hy) - ey * np.conj(hx))
                total += sgn * float(np.sum(sz)) * ds
        return total


@dataclass
class FarFieldPattern:
    """Far-zone coefficients on a (theta, phi) grid: field = E e^{-jkr}/r."""

    f: float
    theta_deg: np.ndarray
    phi_deg: np.ndarray
    e_theta: np.ndarray  # (n_theta, n_phi) complex, volts
    e_phi: np.ndarray

    def intensity(self) -> np.ndarray:
        return (np.abs(self.e_theta) ** 2 + np.abs(self.e_phi) ** 2) / (2.0 * ETA0)

    def total_magnitude(self) -> np.ndarray:
        return np.sqrt(np.abs(self.e_theta) ** 2 + np.abs(self.e_phi) ** 2)


@njit(cache=True, fastmath=True)
def _radiation_sums(pos, j_re, j_im, m_re, m_im, ux, uy, uz, k):
    na = ux.shape[0]
    nc = pos.shape[0]
    out = np.zeros((na, 12))
    for a in range(na):
        nx_re = ny_re = nz_re = nx_im = ny_im = nz_im = 0.0
        lx_re = ly_re = lz_re = lx_im = ly_im = lz_im = 0.0
        for c in range(nc):
            phase = k * (ux[a] * pos[c, 0] + uy[a] * pos[c, 1] + uz[a] * pos[c, 2])
            cr = math.cos(phase)
            ci = math.sin(phase)
            # complex multiply (j + i m) * e^{+j phase}
            nx_re += j_re[c, 0] * cr - j_im[c, 0] * ci
            nx_im += j_re[c, 0] * ci + j_im[c, 0] * cr
            ny_re += j_re[c, 1] * cr - j_im[c, 1] * ci
            ny_im += j_re[c, 1] * ci + j_im[c, 1] * cr
            nz_re += j_re[c, 2] * cr - j_im[c, 2] * ci
            nz_im += j_re[c, 2] * ci + j_im[c, 2] * cr
            lx_re += m_re[c, 0] * cr - m_im[c, 0] * ci
            lx_im += m_re[c, 0] * ci + m_im[c, 0] * cr
            ly_re += m_re[c, 1] * cr - m_im[c, 1] * ci
            ly_im += m_re[c, 1] * ci + m_im[c, 1] * cr
            lz_re += m_re[c, 2] * cr - m_im[c, 2] * ci
            lz_im += m_re[c, 2] * ci + m_im[c, 2] * cr
        out[a, 0] = nx_re
        out[a, 1] = nx_im
        out[a, 2] = ny_re
        out[a, 3] = ny_im
        out[a, 4] = nz_re
        out[a, 5] = nz_im
        out[a, 6] = lx_re
        out[a, 7] = lx_im
        out[a, 8] = ly_re
        out[a, 9] = ly_im
        out[a, 10] = lz_re
        out[a, 11] = lz_im
    return out


def ntff_transform(
    surface: NtffSurface, f: float, theta_step: float = 2.0, phi_step: float = 2.0
) -> FarFieldPattern:
    """Far-field coefficients at a recorded frequency on a uniform grid
    covering theta 0..180 (inclusive) and phi 0..360-step."""
    if not (0 < theta_step <= 90 and 0 < phi_step <= 90):
        raise DomainError("angle steps must be in (0, 90] degrees")
    pos, j_s, m_s, ds = surface.equivalent_currents(f)
    theta = np.arange(0.0, 180.0 + 0.5 * theta_step, theta_step)
    phi = np.arange(0.0, 360.0, phi_step)
    tt, pp = np.meshgrid(np.radians(theta), np.radians(phi), indexing="ij")
    st, ct = np.sin(tt), np.cos(tt)
    sp, cp = np.sin(pp), np.cos(pp)
    ux, uy, uz = (st * cp).ravel(), (st * sp).ravel(), ct.ravel()
    k = 2.0 * math.pi * f / C0
    sums = _radiation_sums(
        np.ascontiguousarray(pos),
        np.ascontiguousarray(j_s.real), np.ascontiguousarray(j_s.imag),
        np.ascontiguousarray(m_s.real), np.ascontiguousarray(m_s.imag),
        ux, uy, uz, k,
    )
    n_vec = (sums[:, 0::2][:, :3] + 1j * sums[:, 1::2][:, :3]) * ds
    l_vec = (sums[:, 6::2][:, :3].astype(np.complex128) + 1j * sums[:, 7::2][:, :3]) * ds
    shape = tt.shape
    nx, ny, nz = (n_vec[:, m].reshape(shape) for m in range(3))
    lx, ly, lz = (l_vec[:, m].reshape(shape) for m in range(3))
    n_theta = nx * ct * cp + ny * ct * sp - nz * st
    n_phi = -nx * sp + ny * cp
    l_theta = lx * ct * cp + ly * ct * sp - lz * st
    l_phi = -lx * sp + ly * cp
    pref = 1j * k / (4.0 * math.pi)
    e_theta = -pref * (l_phi + ETA0 * n_theta)
    e_phi = pref * (l_theta - ETA0 * n_phi)
    return FarFieldPattern(f=f, theta_deg=theta, phi_deg=phi, e_theta=e_theta, e_phi=e_phi)


def radiated_power(p: FarFieldPattern) -> float:
    """Quadrature of the intensity over the sphere: trapezoid in theta,
    rectangle in phi, sin(theta) weights."""
    u = p.intensity()
    th = np.radians(p.theta_deg)
    w_theta = np.gradient(th)
    w_theta[0] *= 0.5
    w_theta[-1] *= 0.5
    d_phi = math.radians(p.phi_deg[1] - p.phi_deg[0]) if p.phi_deg.size > 1 else 2 * math.pi
    return float(np.sum(u * np.sin(th)[:, None] * w_theta[:, None]) * d_phi)


@dataclass
class PatternMetrics:
    gain_dbi: float
    directivity_dbi: float
    peak: tuple
    front_to_back_db: float
    radiated_power: float
    accepted_power: float


def _argmax_peak(p: FarFieldPattern) -> tuple:
    """Peak grid point with the smallest-theta-then-phi tie rule, without
    the distinctness guard (flat patterns allowed)."""
    u = p.intensity()
    if not np.any(u > 0):
        raise ExtractionError("zero pattern has no peak")
    it, ip = np.unravel_index(int(np.argmax(u)), u.shape)  # first = smallest theta/phi
    return float(p.theta_deg[it]), float(p.phi_deg[ip])


def beam_peak(p: FarFieldPattern) -> tuple:
    """Grid point of maximum intensity; ties resolve to the smallest theta,
    then the smallest phi. A numerically flat pattern has no peak."""
    u = p.intensity()
    peak = _argmax_peak(p)
    if float(u.max()) / max(float(u.min()), 1e-300) < 1.0 + 1e-9:
        raise ExtractionError("no distinct peak: the pattern is flat")
    return peak


def _back_ratio_db(p: FarFieldPattern, peak: tuple) -> float:
    th, ph = peak
    u = p.intensity()
    it = int(np.argmin(np.abs(p.theta_deg - (180.0 - th))))
    ip = int(np.argmin(np.abs((p.phi_deg - (ph + 180.0)) % 360.0)))
    u_peak = float(u.max())
    u_back = float(u[it, ip])
    if u_back <= 0.0:
        return math.inf
    return 10.0 * math.log10(u_peak / u_back)


def front_to_back(p: FarFieldPattern) -> float:
    """Peak intensity over the intensity at the antipodal grid direction."""
    return _back_ratio_db(p, beam_peak(p))


def directivity_and_gain(p: FarFieldPattern, accepted_power: float) -> PatternMetrics:
    if accepted_power <= 0:
        raise DomainError(f"accepted power must be > 0 W, got {accepted_power}")
    u = p.intensity()
    if not np.any(u > 0):
        raise ExtractionError("zero pattern has no metrics")
    p_rad = radiated_power(p)
    u_max = float(u.max())
    peak = _argmax_peak(p)  # tolerate flat (isotropic) patterns
    return PatternMetrics(
        gain_dbi=10.0 * math.log10(4.0 * math.pi * u_max / accepted_power),
        directivity_dbi=10.0 * math.log10(4.0 * math.pi * u_max / p_rad),
        peak=peak,
        front_to_back_db=_back_ratio_db(p, peak),
        radiated_power=p_rad,
        accepted_power=accepted_power,
    )


@dataclass
class NormalizedPattern:
    """Pattern in dB with the (tie-broken) peak pinned to exactly 0 dB."""

    f: float
    theta_deg: np.ndarray
    phi_deg: np.ndarray
    db: np.ndarray
    peak: tuple

    def phi_cut(self) -> np.ndarray:
        """Values along theta at the peak's phi (a phi = const ring)."""
        ip = int(np.argmin(np.abs(self.phi_deg - self.peak[1])))
        return self.db[:, ip]

    def theta_cut(self) -> np.ndarray:
        """Values along phi at the peak's theta (a theta = const ring)."""
        it = int(np.argmin(np.abs(self.theta_deg - self.peak[0])))
        return self.db[it, :]


def normalize_pattern(p: FarFieldPattern, floor_db: float = -80.0) -> NormalizedPattern:
    u = p.intensity()
    u_max = float(u.max())
    if u_max <= 0.0:
        raise ExtractionError("zero pattern cannot be normalized")
    db = 10.0 * np.log10(np.maximum(u / u_max, 10.0 ** (floor_db / 10.0)))
    peak = beam_peak(p)
    it = int(np.argmin(np.abs(p.theta_deg - peak[0])))
    ip = int(np.argmin(np.abs(p.phi_deg - peak[1])))
    # exact ties elsewhere are nudged just below 0 so one point is the peak
    ties = (db == 0.0)
    ties[it, ip] = False
    db[ties] = -1e-12
    db[it, ip] = 0.0
    return NormalizedPattern(f=p.f, theta_deg=p.theta_deg, phi_deg=p.phi_deg, db=db, peak=peak)
