"""Leapfrog time-domain Maxwell solver on the voxelized Yee grid.

The march is the standard half-step pair: H advances from curl E, then E
advances from curl H through per-edge (ca, cb) coefficients that encode
the edge material, with CPML corrections applied in the absorber slabs
and lumped sources/resistors folded into their gap edges. Stepping is
strictly deterministic: identical inputs produce bit-identical fields.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .constants import C0, EPS0, MU0
from .cpml import CpmlParams, CpmlState
from .errors import ConfigError, DomainError, InstabilityError
from .materials import solver_constants
from .voxelize import VoxelGrid, edge_shapes

_DTYPES = {"double": np.float64, "single": np.float32}


def courant_dt(delta: float, factor: float) -> float:
    """Stable time step factor * delta / (c * sqrt(3)) for cubic cells."""
    if not (math.isfinite(delta) and delta > 0):
        raise DomainError(f"delta must be > 0 m, got {delta}")
    if not (math.isfinite(factor) and 0 < factor <= 1):
        raise DomainError(f"courant factor must be in (0, 1], got {factor}")
    return factor * delta / (C0 * math.sqrt(3.0))


@dataclass(frozen=True)
class SimConfig:
    """Time-stepping controls.

    dt defaults to the Courant step for `delta`; `courant_dims` is the
    number of axes the run actually propagates along (quasi-1-D validation
    columns may step at the 1-D limit). decay_stop_db sets how far the
    port-voltage envelope must fall below its peak before the run stops.
    """

    delta: float
    dt: float | None = None
    courant_factor: float = 0.99
    max_steps: int = 20000
    decay_stop_db: float = -60.0
    recorded_frequencies: tuple = ()
    f_material_ref: float = 5.5e9
    precision: str = "double"
    check_interval: int = 100
    courant_dims: int = 3
    cpml: CpmlParams = field(default_factory=CpmlParams)

    def __post_init__(self):
        if self.delta <= 0:
            raise ConfigError(f"delta must be > 0 m, got {self.delta}")
        if self.max_steps <= 0:
            raise ConfigError(f"max_steps must be > 0, got {self.max_steps}")
        if self.decay_stop_db >= 0:
            raise ConfigError(f"decay_stop_db must be < 0, got {self.decay_stop_db}")
        if self.precision not in _DTYPES:
            raise ConfigError(f"precision must be one of {sorted(_DTYPES)}")
        if self.courant_dims not in (1, 2, 3):
            raise ConfigError("courant_dims must be 1, 2 or 3")
        if not (0 < self.courant_factor <= 1):
            raise ConfigError(f"courant_factor must be in (0, 1], got {self.courant_factor}")
        limit = self.delta / (C0 * math.sqrt(self.courant_dims))
        if self.resolved_dt > limit * (1 + 1e-12):
            raise ConfigError(
                f"dt = {self.resolved_dt:.3e} s exceeds the Courant limit {limit:.3e} s"
            )

    @property
    def resolved_dt(self) -> float:
        return self.dt if self.dt is not None else courant_dt(self.delta, self.courant_factor)

    @property
    def dtype(self):
        return _DTYPES[self.precision]


@dataclass
class FieldState:
    """Staggered E and H arrays plus the leapfrog clock.

    After `step_index` steps of size dt, E sits at step_index * dt and H
    half a step behind.
    """

    ex: np.ndarray
    ey: np.ndarray
    ez: np.ndarray
    hx: np.ndarray
    hy: np.ndarray
    hz: np.ndarray
    dt: float
    step_index: int = 0

    @property
    def time(self) -> float:
        return self.step_index * self.dt

    @classmethod
    def zeros(cls, nx, ny, nz, dt, dtype) -> "FieldState":
        sh = edge_shapes(nx, ny, nz)
        return cls(
            ex=np.zeros(sh["ex"], dtype),
            ey=np.zeros(sh["ey"], dtype),
            ez=np.zeros(sh["ez"], dtype),
            hx=np.zeros((nx + 1, ny, nz), dtype),
            hy=np.zeros((nx, ny + 1, nz), dtype),
            hz=np.zeros((nx, ny, nz + 1), dtype),
            dt=dt,
        )


@dataclass(frozen=True)
class LumpedElement:
    """A resistor across one E-edge (axis is 'ex', 'ey' or 'ez')."""

    axis: str
    i: int
    j: int
    k: int
    resistance: float


@dataclass
class UpdateCoeffs:
    """Per-edge update coefficients plus the CPML state for one grid."""

    ca: dict
    cb: dict
    dh: float
    dt: float
    delta: float
    cpml: CpmlState
    pec_mask: dict
    eps_edge: dict  # absolute permittivity per edge, float64, for diagnostics
    dtype: type


def _material_luts(grid: VoxelGrid, f_ref: float):
    eps = np.empty(len(grid.materials))
    sig = np.empty(len(grid.materials))
    pec = np.zeros(len(grid.materials), dtype=bool)
    for idx, mat in enumerate(grid.materials):
        eps_r, sigma, is_pec = solver_constants(mat, f_ref)
        eps[idx] = eps_r * EPS0
        sig[idx] = sigma
        pec[idx] = is_pec
    return eps, sig, pec


def init_coeffs(grid: VoxelGrid, cfg: SimConfig) -> UpdateCoeffs:
    """Material (ca, cb) per E-edge: ca = (1 - s)/(1 + s), cb =
    (dt/(eps*delta))/(1 + s) with s = sigma*dt/(2 eps); PEC edges get
    (0, 0) which pins them to zero. Lumped resistors add their conductance
    to the hosting edge."""
    dt = cfg.resolved_dt
    dtype = cfg.dtype
    eps_lut, sig_lut, pec_lut = _material_luts(grid, cfg.f_material_ref)
    ca, cb, pec_mask, eps_edge = {}, {}, {}, {}
    for axis in ("ex", "ey", "ez"):
        ids = getattr(grid, f"mat_{axis}")
        eps = eps_lut[ids]
        sigma = sig_lut[ids]
        is_pec = pec_lut[ids]
        loss = sigma * dt / (2.0 * eps)
        ca_arr = (1.0 - loss) / (1.0 + loss)
        cb_arr = (dt / (eps * cfg.delta)) / (1.0 + loss)
        ca_arr[is_pec] = 0.0
        cb_arr[is_pec] = 0.0
        ca[axis] = ca_arr.astype(dtype)
        cb[axis] = cb_arr.astype(dtype)
        pec_mask[axis] = is_pec
        eps_edge[axis] = eps
    coeffs = UpdateCoeffs(
        ca=ca,
        cb=cb,
        dh=dt / (MU0 * cfg.delta),
        dt=dt,
        delta=cfg.delta,
        cpml=CpmlState.build(
            grid.nx, grid.ny, grid.nz, grid.pml_thickness, cfg.delta, dt, cfg.cpml, dtype
        ),
        pec_mask=pec_mask,
        eps_edge=eps_edge,
        dtype=dtype,
    )
    for el in getattr(grid, "lumped", ()) or ():
        add_lumped_resistance(coeffs, el)
    return coeffs


def add_lumped_resistance(coeffs: UpdateCoeffs, el: LumpedElement) -> float:
    """Fold a lumped resistor into its edge's update; returns the drive
    coefficient cs such that a series voltage source injects E += cs * V."""
    if el.resistance <= 0:
        raise ConfigError("lumped resistance must be > 0 ohm")
    axis, idx = el.axis, (el.i, el.j, el.k)
    eps = coeffs.eps_edge[axis][idx]
    if coeffs.pec_mask[axis][idx]:
        raise ConfigError(f"lumped element on a PEC edge at {axis}{idx}")
    dt, d = coeffs.dt, coeffs.delta
    # recover the edge's material loss term from its unmodified coefficients
    ca_old = float(coeffs.ca[axis][idx])
    loss = (1.0 - ca_old) / (1.0 + ca_old)
    beta = dt / (2.0 * eps * el.resistance * d)
    denom = 1.0 + loss + beta
    coeffs.ca[axis][idx] = coeffs.dtype((1.0 - loss - beta) / denom)
    coeffs.cb[axis][idx] = coeffs.dtype((dt / (eps * d)) / denom)
    return -(dt / (eps * el.resistance * d * d)) / denom


@dataclass
class PortSource:
    """Resistive voltage source on the port gap edge."""

    i: int
    j: int
    k: int
    cs: float
    waveform: object  # callable t -> volts, with .end_time

    def inject(self, fields: FieldState, t: float):
        fields.ez[self.i, self.j, self.k] += fields.ez.dtype.type(self.cs * self.waveform(t))

    @property
    def end_time(self) -> float:
        return getattr(self.waveform, "end_time", 0.0)


@dataclass
class SoftSource:
    """Additive E-field drive on one edge (current-dipole excitation)."""

    axis: str
    i: int
    j: int
    k: int
    waveform: object
    amplitude: float = 1.0

    def inject(self, fields: FieldState, t: float):
        arr = getattr(fields, self.axis)
        arr[self.i, self.j, self.k] += arr.dtype.type(self.amplitude * self.waveform(t))

    @property
    def end_time(self) -> float:
        return getattr(self.waveform, "end_time", 0.0)


def make_port_source(grid: VoxelGrid, coeffs: UpdateCoeffs, waveform) -> PortSource:
    if grid.port is None:
        raise ConfigError("grid has no port to drive")
    p = grid.port
    cs = add_lumped_resistance(
        coeffs, LumpedElement("ez", p.i, p.j, p.k_gap, p.z_ref)
    )
    return PortSource(i=p.i, j=p.j, k=p.k_gap, cs=cs, waveform=waveform)


def step(fields: FieldState, coeffs: UpdateCoeffs, sources=(), recorders=()):
    """Advance one leapfrog step in place and return the state.

    Recorder hooks run after each half-update: `after_h` sees H at
    (n + 1/2) dt, `after_e` sees E at (n + 1) dt.
    """
    c = coeffs.cpml
    dh = coeffs.dtype(coeffs.dh)
    kernels.update_h(
        fields.ex, fields.ey, fields.ez, fields.hx, fields.hy, fields.hz,
        dh, c.x.inv_k_h, c.y.inv_k_h, c.z.inv_k_h,
    )
    if c.npml > 0:
        s = c.slabs
        nx, ny, nz = fields.hx.shape[0] - 1, fields.hy.shape[1] - 1, fields.hz.shape[2] - 1
        kernels.cpml_h_x(fields.hy, fields.hz, fields.ey, fields.ez, dh,
                         s["hyx_lo"], s["hzx_lo"], c.x.b_h, c.x.c_h, 0)
        kernels.cpml_h_x(fields.hy, fields.hz, fields.ey, fields.ez, dh,
                         s["hyx_hi"], s["hzx_hi"], c.x.b_h, c.x.c_h, nx - c.npml)
        kernels.cpml_h_y(fields.hx, fields.hz, fields.ex, fields.ez, dh,
                         s["hxy_lo"], s["hzy_lo"], c.y.b_h, c.y.c_h, 0)
        kernels.cpml_h_y(fields.hx, fields.hz, fields.ex, fields.ez, dh,
                         s["hxy_hi"], s["hzy_hi"], c.y.b_h, c.y.c_h, ny - c.npml)
        kernels.cpml_h_z(fields.hx, fields.hy, fields.ex, fields.ey, dh,
                         s["hxz_lo"], s["hyz_lo"], c.z.b_h, c.z.c_h, 0)
        kernels.cpml_h_z(fields.hx, fields.hy, fields.ex, fields.ey, dh,
                         s["hxz_hi"], s["hyz_hi"], c.z.b_h, c.z.c_h, nz - c.npml)
    for r in recorders:
        hook = getattr(r, "after_h", None)
        if hook is not None:
            hook(fields)

    kernels.update_e(
        fields.ex, fields.ey, fields.ez, fields.hx, fields.hy, fields.hz,
        coeffs.ca["ex"], coeffs.cb["ex"], coeffs.ca["ey"], coeffs.cb["ey"],
        coeffs.ca["ez"], coeffs.cb["ez"], c.x.inv_k_e, c.y.inv_k_e, c.z.inv_k_e,
    )
    if c.npml > 0:
        s = c.slabs
        nx, ny, nz = fields.hx.shape[0] - 1, fields.hy.shape[1] - 1, fields.hz.shape[2] - 1
        kernels.cpml_e_x(fields.ey, fields.ez, fields.hy, fields.hz,
                         coeffs.cb["ey"], coeffs.cb["ez"],
                         s["eyx_lo"], s["ezx_lo"], c.x.b_e, c.x.c_e, 1)
        kernels.cpml_e_x(fields.ey, fields.ez, fields.hy, fields.hz,
                         coeffs.cb["ey"], coeffs.cb["ez"],
                         s["eyx_hi"], s["ezx_hi"], c.x.b_e, c.x.c_e, nx - c.npml)
        kernels.cpml_e_y(fields.ex, fields.ez, fields.hx, fields.hz,
                         coeffs.cb["ex"], coeffs.cb["ez"],
                         s["exy_lo"], s["ezy_lo"], c.y.b_e, c.y.c_e, 1)
        kernels.cpml_e_y(fields.ex, fields.ez, fields.hx, fields.hz,
                         coeffs.cb["ex"], coeffs.cb["ez"],
                         s["exy_hi"], s["ezy_hi"], c.y.b_e, c.y.c_e, ny - c.npml)
        kernels.cpml_e_z(fields.ex, fields.ey, fields.hx, fields.hy,
                         coeffs.cb["ex"], coeffs.cb["ey"],
                         s["exz_lo"], s["eyz_lo"], c.z.b_e, c.z.c_e, 1)
        kernels.cpml_e_z(fields.ex, fields.ey, fields.hx, fields.hy,
                         coeffs.cb["ex"], coeffs.cb["ey"],
                         s["exz_hi"], s["eyz_hi"], c.z.b_e, c.z.c_e, nz - c.npml)

    t_mid = (fields.step_index + 0.5) * coeffs.dt
    for src in sources:
        src.inject(fields, t_mid)
    fields.step_index += 1
    for r in recorders:
        hook = getattr(r, "after_e", None)
        if hook is not None:
            hook(fields)
    return fields


@dataclass
class RunResult:
    recorders: list
    termination: str
    steps: int
    warning: str | None = None
    elapsed_s: float = 0.0

    def recorder(self, name: str):
        for r in self.recorders:
            if getattr(r, "name", None) == name:
                return r
        raise KeyError(name)


def run(grid: VoxelGrid, cfg: SimConfig, recorders, sources=(), coeffs=None) -> RunResult:
    """March until the port voltage has decayed `decay_stop_db` below its
    peak (after the source has turned off) or `max_steps` is reached.

    Instability is sampled every `check_interval` steps on the source edges
    and an interior probe; non-finite values raise InstabilityError.
    """
    if coeffs is None:
        coeffs = init_coeffs(grid, cfg)
    if not recorders:
        raise ConfigError("at least one recorder is required")
    fields = FieldState.zeros(grid.nx, grid.ny, grid.nz, cfg.resolved_dt, cfg.dtype)
    monitor = next((r for r in recorders if getattr(r, "decay_samples", None) is not None), None)
    src_end = max((getattr(s, "end_time", 0.0) for s in sources), default=0.0)
    stop_ratio = 10.0 ** (cfg.decay_stop_db / 20.0)
    probe = (grid.nx // 2, grid.ny // 2, max(grid.nz // 2, 1) - 1)

    termination, warning = "max_steps", None
    t0 = _time.perf_counter()
    for _ in range(cfg.max_steps):
        step(fields, coeffs, sources, recorders)
        if fields.step_index % cfg.check_interval == 0:
            v_probe = float(fields.ez[probe])
            if not math.isfinite(v_probe):
                raise InstabilityError(
                    f"non-finite field at step {fields.step_index}",
                    step=fields.step_index,
                    location=("ez", *probe),
                )
            if monitor is not None:
                v = monitor.decay_samples()
                if len(v) >= 2 * cfg.check_interval:
                    if not np.isfinite(v[-1]):
                        raise InstabilityError(
                            f"non-finite port voltage at step {fields.step_index}",
                            step=fields.step_index,
                        )
                    peak = float(np.max(np.abs(v)))
                    recent = float(np.max(np.abs(v[-2 * cfg.check_interval :])))
                    if (
                        peak > 0.0
                        and fields.time > src_end
                        and recent <= peak * stop_ratio
                    ):
                        termination = "decayed"
                        break
    if termination == "max_steps":
        warning = "max_steps reached before the decay criterion"
    return RunResult(
        recorders=list(recorders),
        termination=termination,
        steps=fields.step_index,
        warning=warning,
        elapsed_s=_time.perf_counter() - t0,
    )


class EnergyRecorder:
    """Yee-consistent electromagnetic energy per step (diagnostics).

    Uses the exactly conserved discrete form: sum(eps * E^2) at step n plus
    mu0 * sum(H^{n-1/2} . H^{n+1/2}), each times the cell volume over two.
    Copies H every step, so meant for small validation grids.
    """

    name = "energy"

    def __init__(self, grid: VoxelGrid, coeffs: UpdateCoeffs):
        self.delta = grid.delta
        self.eps = coeffs.eps_edge
        self._h_prev = None
        self._e_term = None
        self.values = []

    def after_h(self, fields: FieldState):
        e_term = 0.0
        for axis in ("ex", "ey", "ez"):
            arr = getattr(fields, axis).astype(np.float64, copy=False)
            e_term += float(np.sum(self.eps[axis] * arr * arr))
        h_now = (fields.hx, fields.hy, fields.hz)
        if self._h_prev is not None:
            h_term = sum(
                float(np.sum(p.astype(np.float64) * n.astype(np.float64)))
                for p, n in zip(self._h_prev, h_now)
            )
            self.values.append(0.5 * self.delta**3 * (e_term + MU0 * h_term))
        self._h_prev = tuple(h.copy() for h in h_now)


class PointProbe:
    """Time series of one E component at a fixed edge."""

    def __init__(self, axis: str, i: int, j: int, k: int, name: str = "probe"):
        self.axis, self.idx, self.name = axis, (i, j, k), name
        self.samples = []

    def after_e(self, fields: FieldState):
        self.samples.append(float(getattr(fields, self.axis)[self.idx]))


def div_h(fields: FieldState, delta: float) -> np.ndarray:
    """Discrete divergence of H at cell centres; identically conserved by
    the curl updates, so it stays at rounding level when it starts at 0."""
    hx, hy, hz = fields.hx, fields.hy, fields.hz
    return (
        (hx[1:, :, :] - hx[:-1, :, :])
        + (hy[:, 1:, :] - hy[:, :-1, :])
        + (hz[:, :, 1:] - hz[:, :, :-1])
    ) / delta
