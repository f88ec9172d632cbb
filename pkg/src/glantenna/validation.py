"""Built-in analytic validation scenes with their pass/fail tolerances.

Each check builds a small scene whose answer is known in closed form, runs
the solver, and reports the measured figure against its tolerance. These
back both the `oracle` CLI subcommands and the acceptance suite, so the
tolerances live here as constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .constants import C0
from .errors import GlAntennaError
from .fdtd import (
    FieldState,
    LumpedElement,
    SimConfig,
    EnergyRecorder,
    PointProbe,
    init_coeffs,
    make_port_source,
    run,
    step,
)
from .farfield import NtffSurface, directivity_and_gain, ntff_transform, radiated_power
from .materials import DielectricSpec, GrapheneSpec, MaterialSpec, kubo_intraband, _kubo_intraband_raw
from .ports import PortRecorder, SourceWaveform, port_spectra, resonant_frequency
from .scene import (
    Box,
    PortPlacement,
    SceneObject,
    SceneSpec,
    microstrip_eps_eff,
    microstrip_length_extension,
    patch_cavity_resonance,
)
from .voxelize import PortSite, VoxelGrid, vacuum_grid, voxelize

MM = 1e-3

CAVITY_MODE_TOL = 0.01            # 1 % per analytic mode
ENERGY_DRIFT_TOL = 1e-9           # relative drift per 1000 steps
CPML_REFLECTION_DB = -60.0
DIPOLE_PATTERN_TOL = 0.02         # fraction of peak
DIPOLE_DIRECTIVITY_DBI = 1.7609   # 10 log10(1.5)
DIPOLE_DIRECTIVITY_TOL_DB = 0.1
DIPOLE_POWER_TOL = 0.03
DISPERSION_TOL = 0.005            # measured vs dispersion-relation velocity
MATCHED_LOAD_S11_DB = -25.0
PATCH_RESONANCE_TOL = 0.05
KUBO_SAMPLES = 1000


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict

    def summary(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={v}" for k, v in self.details.items())
        return f"[{state}] {self.name}: {parts}"


def check_cavity_modes() -> CheckResult:
    """40 x 30 x 20 mm vacuum PEC box: the first three analytic resonances
    must appear in a probe spectrum within 1 %."""
    a, b, d = 0.040, 0.030, 0.020
    grid = vacuum_grid(40, 30, 20, delta=1e-3, pml_thickness=0)
    cfg = SimConfig(delta=1e-3, precision="double")
    coeffs = init_coeffs(grid, cfg)
    fields = FieldState.zeros(grid.nx, grid.ny, grid.nz, cfg.resolved_dt, cfg.dtype)
    # broadband kick on off-symmetry edges of all three polarisations
    fields.ez[13, 11, 7] = 1.0
    fields.ex[7, 17, 11] = 0.7
    fields.ey[23, 9, 13] = 0.4
    n_steps = 16384
    samples = np.empty(n_steps)
    for s in range(n_steps):
        step(fields, coeffs)
        samples[s] = fields.ez[29, 21, 9] + fields.ex[11, 23, 15] + fields.ey[17, 13, 11]
    spec = np.abs(np.fft.rfft(samples * np.hanning(n_steps), n=8 * n_steps))
    freqs = np.fft.rfftfreq(8 * n_steps, cfg.resolved_dt)
    modes = sorted(
        {
            C0 / 2.0 * math.sqrt((m / a) ** 2 + (n / b) ** 2 + (p / d) ** 2)
            for m in range(4)
            for n in range(4)
            for p in range(4)
            if (m > 0) + (n > 0) + (p > 0) >= 2
        }
    )[:3]
    mask = (freqs > 3e9) & (freqs < 11e9)
    peaks, _ = find_peaks(spec[mask], prominence=spec[mask].max() * 5e-3)
    f_peaks = freqs[mask][peaks]
    errs = [float(np.min(np.abs(f_peaks - fm)) / fm) for fm in modes]
    return CheckResult(
        name="cavity-modes",
        passed=all(e <= CAVITY_MODE_TOL for e in errs),
        details={
            "modes_ghz": [round(fm / 1e9, 4) for fm in modes],
            "errors_pct": [round(e * 100, 3) for e in errs],
            "tol_pct": CAVITY_MODE_TOL * 100,
        },
    )


def check_energy_conservation(n_steps: int = 10000) -> CheckResult:
    """Closed lossless cavity: the discrete energy sum must hold to
    1e-9 relative drift per 1000 steps."""
    grid = vacuum_grid(20, 16, 12, delta=1e-3, pml_thickness=0)
    cfg = SimConfig(delta=1e-3, courant_factor=0.99, precision="double")
    coeffs = init_coeffs(grid, cfg)
    fields = FieldState.zeros(grid.nx, grid.ny, grid.nz, cfg.resolved_dt, cfg.dtype)
    fields.ez[7, 6, 5] = 1.0
    rec = EnergyRecorder(grid, coeffs)
    for _ in range(n_steps):
        step(fields, coeffs, recorders=[rec])
    u = np.asarray(rec.values)
    drift = float(np.max(np.abs(u - u[0])) / u[0])
    per_1000 = drift / (n_steps / 1000.0)
    return CheckResult(
        name="energy-conservation",
        passed=per_1000 <= ENERGY_DRIFT_TOL,
        details={"drift_per_1000_steps": f"{per_1000:.3e}", "tol": f"{ENERGY_DRIFT_TOL:.0e}"},
    )


def check_cpml_reflection() -> CheckResult:
    """Pulse normally incident on the +x absorber, isolated by a second
    run whose +x wall sits far enough away that its echo cannot arrive:
    the probe-series difference is purely the absorber reflection."""
    npml = 10
    ny = nz = 44
    src_i, probe_i = 20, 60
    nx_test = 80
    delta = 1e-3
    cfg = SimConfig(delta=delta, precision="double")
    dt = cfg.resolved_dt
    w = SourceWaveform(f0=15e9, f_bw=8e9)
    from .fdtd import SoftSource

    wall = nx_test - npml
    t_echo = (2 * wall - src_i - probe_i) * delta / C0
    t_end = t_echo + w.end_time + 0.25e-9
    n_steps = int(t_end / dt)
    # reference wall is pushed far enough that its own echo stays outside
    nx_ref = nx_test + int(math.ceil(C0 * t_end / (2 * delta))) + 4

    def probe_series(nx):
        grid = vacuum_grid(nx, ny, nz, delta=delta, pml_thickness=npml)
        coeffs = init_coeffs(grid, cfg)
        fields = FieldState.zeros(nx, ny, nz, cfg.resolved_dt, cfg.dtype)
        src = SoftSource("ez", src_i, ny // 2, nz // 2, w)
        probe = PointProbe("ez", probe_i, ny // 2, nz // 2)
        for _ in range(n_steps):
            step(fields, coeffs, sources=[src], recorders=[probe])
        return np.asarray(probe.samples)

    v_test = probe_series(nx_test)
    v_ref = probe_series(nx_ref)
    a_inc = float(np.abs(v_ref).max())
    a_echo = float(np.abs(v_test - v_ref).max())
    # spherical spreading: the echo comes from the image source
    r_direct = probe_i - src_i
    r_image = 2 * wall - src_i - probe_i
    gamma = a_echo / a_inc * (r_image / r_direct)
    level_db = 20.0 * math.log10(max(gamma, 1e-300))
    return CheckResult(
        name="cpml-reflection",
        passed=level_db <= CPML_REFLECTION_DB,
        details={"reflection_db": round(level_db, 1), "tol_db": CPML_REFLECTION_DB},
    )


def check_dipole() -> CheckResult:
    """Hertzian dipole in vacuum at 30 cells per wavelength: sin(theta)
    pattern, 1.76 dBi directivity, NTFF power equal to the box flux."""
    n = 64
    f0 = 10e9
    grid = vacuum_grid(n, n, n, delta=1e-3, pml_thickness=10)
    cfg = SimConfig(delta=1e-3, precision="double")
    coeffs = init_coeffs(grid, cfg)
    fields = FieldState.zeros(n, n, n, cfg.resolved_dt, cfg.dtype)
    from .fdtd import SoftSource

    src = SoftSource("ez", n // 2, n // 2, n // 2, SourceWaveform(f0=f0, f_bw=5e9))
    surf = NtffSurface((16, 48, 16, 48, 16, 48), [f0], cfg.resolved_dt, grid.delta)
    for _ in range(3200):
        step(fields, coeffs, sources=[src], recorders=[surf])
    pat = ntff_transform(surf, f0, 2.0, 2.0)
    mag = pat.total_magnitude()
    peak = float(mag.max())
    sin_t = np.sin(np.radians(pat.theta_deg))[:, None]
    dev = float(np.max(np.abs(mag - peak * sin_t)) / peak)
    p_rad = radiated_power(pat)
    p_poy = surf.poynting_flux(f0)
    metrics = directivity_and_gain(pat, accepted_power=p_poy)
    d_err = abs(metrics.directivity_dbi - DIPOLE_DIRECTIVITY_DBI)
    p_err = abs(p_rad / p_poy - 1.0)
    return CheckResult(
        name="hertzian-dipole",
        passed=(dev <= DIPOLE_PATTERN_TOL) and (d_err <= DIPOLE_DIRECTIVITY_TOL_DB) and (p_err <= DIPOLE_POWER_TOL),
        details={
            "pattern_dev_pct": round(dev * 100, 2),
            "directivity_dbi": round(metrics.directivity_dbi, 3),
            "power_ratio": round(p_rad / p_poy, 4),
        },
    )


def dispersion_oracle_velocity(f: float, delta: float, dt: float) -> float:
    """Axis phase velocity from the discrete dispersion relation
    sin(w dt / 2) = S sin(k delta / 2), S = c dt / delta."""
    s = C0 * dt / delta
    w = 2.0 * math.pi * f
    k = 2.0 / delta * math.asin(math.sin(w * dt / 2.0) / s)
    return w / k


def check_dispersion() -> CheckResult:
    """Wave launched by a dipole, phase measured broadside between two
    on-axis probes at 10 cells per wavelength, against the dispersion
    relation. (At the 3-D Courant step the oracle itself sits ~1.1 %
    below c; the check is solver vs oracle.)"""
    delta = 1e-3
    f0 = C0 / (10 * delta)  # 10 cells per wavelength
    nx, ny, nz = 140, 44, 44
    grid = vacuum_grid(nx, ny, nz, delta=delta, pml_thickness=10)
    cfg = SimConfig(delta=delta, precision="double")
    coeffs = init_coeffs(grid, cfg)
    fields = FieldState.zeros(nx, ny, nz, cfg.resolved_dt, cfg.dtype)
    from .fdtd import SoftSource

    src = SoftSource("ez", 25, ny // 2, nz // 2, SourceWaveform(f0=f0, f_bw=f0 / 3))
    p1 = PointProbe("ez", 65, ny // 2, nz // 2, name="p1")
    p2 = PointProbe("ez", 105, ny // 2, nz // 2, name="p2")
    dt = cfg.resolved_dt
    n_steps = int((115 * delta / C0 + SourceWaveform(f0=f0, f_bw=f0 / 3).end_time + 0.2e-9) / dt)
    for _ in range(n_steps):
        step(fields, coeffs, sources=[src], recorders=[p1, p2])
    t = dt * (1 + np.arange(len(p1.samples)))
    kern = np.exp(-2j * np.pi * f0 * t)
    ph1 = np.angle(np.sum(np.asarray(p1.samples) * kern))
    ph2 = np.angle(np.sum(np.asarray(p2.samples) * kern))
    span = 40 * delta
    v_oracle = dispersion_oracle_velocity(f0, delta, dt)
    # unwrap using the oracle's expected phase advance
    k_expected = 2.0 * math.pi * f0 / v_oracle
    dphi_raw = ph1 - ph2
    n_wraps = round((k_expected * span - dphi_raw) / (2.0 * math.pi))
    k_meas = (dphi_raw + 2.0 * math.pi * n_wraps) / span
    v_meas = 2.0 * math.pi * f0 / k_meas
    rel = abs(v_meas - v_oracle) / C0
    return CheckResult(
        name="dispersion",
        passed=rel <= DISPERSION_TOL,
        details={
            "v_meas_over_c": round(v_meas / C0, 5),
            "v_oracle_over_c": round(v_oracle / C0, 5),
            "solver_vs_oracle_pct": round(rel * 100, 3),
        },
    )


def lumped_loop_grid(load: str, delta: float = 1e-4):
    """Single-cell source/load loop over a small ground sheet.

    `load` is "matched" (a z_ref resistor one cell from the source gap),
    "pec" (shorting post) or "open" (no second leg).
    """
    margin, npml, g = 14, 10, 10
    n = g + 2 * (margin + npml)
    nz = 2 + 2 * (margin + npml)
    grid = vacuum_grid(n, n, nz, delta=delta, pml_thickness=npml)
    mats = list(grid.materials)
    mats.append(MaterialSpec.pec())
    grid.materials = tuple(mats)
    pec = 1
    kg = npml + margin  # ground plane node
    c0_idx = n // 2
    lo, hi = c0_idx - g // 2, c0_idx + g // 2
    grid.mat_ex[lo:hi, lo : hi + 1, kg] = pec
    grid.mat_ey[lo : hi + 1, lo:hi, kg] = pec
    # top bar joining the two legs one cell above the ground
    grid.mat_ex[c0_idx, c0_idx, kg + 1] = pec
    if load == "pec":
        grid.mat_ez[c0_idx + 1, c0_idx, kg] = pec
    elif load == "matched":
        grid.lumped = (LumpedElement("ez", c0_idx + 1, c0_idx, kg, 50.0),)
    elif load != "open":
        raise GlAntennaError(f"unknown load {load!r}")
    grid.port = PortSite(i=c0_idx, j=c0_idx, k_gap=kg, k_top=kg + 1, z_ref=50.0)
    grid.content_bounds = ((lo, hi), (lo, hi), (kg, kg + 1))
    return grid


def run_lumped_loop(load: str, freqs=None, delta: float = 1e-4):
    grid = lumped_loop_grid(load, delta)
    w = SourceWaveform(f0=5.5e9, f_bw=2.5e9)
    cfg = SimConfig(delta=delta, max_steps=12000, decay_stop_db=-70.0, precision="double")
    coeffs = init_coeffs(grid, cfg)
    src = make_port_source(grid, coeffs, w)
    port = PortRecorder(grid, cfg.resolved_dt, loop_offset=0)
    result = run(grid, cfg, recorders=[port], sources=[src], coeffs=coeffs)
    if freqs is None:
        freqs = np.linspace(3.5e9, 7.5e9, 41)
    return port_spectra(port.record(), freqs), result


def check_matched_load() -> CheckResult:
    """Source gap loaded by a z_ref resistor: |S11| stays under -25 dB
    across the band (the residual is the one-cell loop inductance)."""
    spectra, _ = run_lumped_loop("matched")
    worst = float(np.max(spectra.s11_db()[spectra.valid]))
    return CheckResult(
        name="matched-load",
        passed=worst <= MATCHED_LOAD_S11_DB,
        details={"worst_s11_db": round(worst, 1), "tol_db": MATCHED_LOAD_S11_DB},
    )


def patch_scene(
    length: float = 9 * MM,
    width: float = 11.5 * MM,
    height: float = 1.5 * MM,
    eps_r: float = 2.2,
    feed_offset: float = 3 * MM,
    f_design: float = 10e9,
):
    """Plain probe-fed rectangular PEC patch over a lossless substrate;
    the resonant length runs along x. The defaults sit in the regime
    where the half-wave design formula is calibrated (thin substrate,
    moderate permittivity)."""
    sub_l, sub_w = length + 10 * MM, width + 10 * MM
    substrate = DielectricSpec(eps_r=eps_r, tan_delta=0.0)
    objects = (
        SceneObject("ground", MaterialSpec.pec(), (Box(-sub_l / 2, sub_l / 2, -sub_w / 2, sub_w / 2, 0.0, 0.0),)),
        SceneObject(
            "substrate",
            MaterialSpec.from_dielectric(substrate),
            (Box(-sub_l / 2, sub_l / 2, -sub_w / 2, sub_w / 2, 0.0, height),),
        ),
        SceneObject(
            "patch",
            MaterialSpec.pec(),
            (Box(-length / 2, length / 2, -width / 2, width / 2, height, height),),
        ),
    )
    port = PortPlacement(index=1, x=-feed_offset, y=0.0, z_top=height)
    return SceneSpec(objects=objects, port=port, f_design=f_design)


def check_patch_resonance(delta: float = 0.25 * MM) -> CheckResult:
    """Probe-fed patch vs the half-wave closed form evaluated at the
    fringing-extended length with the microstrip effective permittivity.

    The staircase dielectric assignment biases the simulated resonance
    low by O(delta); a refinement study gave -6.0 % at 0.5 mm and -3.5 %
    at 0.25 mm against the formula, converging toward about -1 %.
    """
    length, width, height, eps_r = 9 * MM, 11.5 * MM, 1.5 * MM, 2.2
    scene = patch_scene(length, width, height, eps_r)
    grid = voxelize(scene, delta=delta, pml_thickness=10, min_feature_cells=2)
    cfg = SimConfig(delta=delta, max_steps=30000, decay_stop_db=-55.0, precision="double")
    coeffs = init_coeffs(grid, cfg)
    w = SourceWaveform(f0=10e9, f_bw=5.0e9)
    src = make_port_source(grid, coeffs, w)
    port = PortRecorder(grid, cfg.resolved_dt)
    run(grid, cfg, recorders=[port], sources=[src], coeffs=coeffs)
    spectra = port_spectra(port.record(), np.linspace(6.0e9, 14.0e9, 321))
    f_sim = resonant_frequency(spectra)
    eps_eff = microstrip_eps_eff(width, height, eps_r)
    l_eff = length + 2.0 * microstrip_length_extension(width, height, eps_r)
    f_oracle = patch_cavity_resonance(l_eff, eps_eff)
    err = abs(f_sim - f_oracle) / f_oracle
    return CheckResult(
        name="patch-resonance",
        passed=err <= PATCH_RESONANCE_TOL,
        details={
            "f_sim_ghz": round(f_sim / 1e9, 4),
            "f_oracle_ghz": round(f_oracle / 1e9, 4),
            "error_pct": round(err * 100, 2),
        },
    )


def check_kubo_randomized(n_samples: int = KUBO_SAMPLES, seed: int = 20260809) -> CheckResult:
    """Hermitian symmetry, passivity and DC-limit flatness over randomized
    valid graphene parameters, plus the mu_c = 0 closed form."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(n_samples):
        mu_c = float(rng.uniform(0.0, 2.0))
        tau = float(10 ** rng.uniform(-15, -11))
        temperature = float(rng.uniform(1.0, 1000.0))
        f = float(10 ** rng.uniform(6, 14))
        w = 2.0 * math.pi * f
        plus = _kubo_intraband_raw(mu_c, tau, temperature, w)
        minus = _kubo_intraband_raw(mu_c, tau, temperature, -w)
        if abs(minus - plus.conjugate()) > 1e-13 * abs(plus):
            failures += 1
            continue
        if plus.real < 0:
            failures += 1
            continue
        spec = GrapheneSpec(mu_c=mu_c, tau=tau, temperature=temperature)
        s0 = abs(kubo_intraband(spec, 0.0))
        f_low = 1e-4 / (2.0 * math.pi * tau)
        if abs(abs(kubo_intraband(spec, f_low)) - s0) / s0 > 1e-6:
            failures += 1
    # mu_c = 0, f = 0 closed form: 2 ln 2 scaling to 1e-12 relative
    from .constants import HBAR, K_B, Q_E

    closed_ok = True
    for temperature, tau in ((77.0, 3e-13), (300.0, 1e-12), (500.0, 5e-12)):
        got = kubo_intraband(GrapheneSpec(mu_c=0.0, tau=tau, temperature=temperature), 0.0)
        want = Q_E**2 * K_B * temperature * tau / (math.pi * HBAR**2) * 2.0 * math.log(2.0)
        if abs(got.real - want) > 1e-12 * want or got.imag != 0.0:
            closed_ok = False
    return CheckResult(
        name="kubo-randomized",
        passed=(failures == 0) and closed_ok,
        details={"samples": n_samples, "failures": failures, "closed_form_ok": closed_ok},
    )


ORACLES = {
    "cavity": (check_cavity_modes, check_energy_conservation),
    "dipole": (check_dipole,),
    "patch": (check_patch_resonance,),
    "cpml": (check_cpml_reflection,),
    "dispersion": (check_dispersion,),
    "matched-load": (check_matched_load,),
    "kubo": (check_kubo_randomized,),
}
