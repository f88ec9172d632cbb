"""Material models: graphene-liquid conductivity, lossy dielectrics, conductors.

The graphene liquid is described by its intra-band (Drude-like) surface
conductivity at microwave frequencies,

    sigma_s(w) = (e^2 kB T / (pi hbar^2)) * tau / (1 - i w tau)
                 * [ mu_c/(kB T) + 2 ln(1 + exp(-mu_c/(kB T))) ]

with the e^{-iwt} time convention, so Im(sigma_s) > 0 for w > 0.  All other
materials reduce to a relative permittivity plus an equivalent conductivity
at a reference frequency, which is what the time-domain solver consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import EPS0, HBAR, K_B, PEC_SIGMA_THRESHOLD, Q_E
from .errors import ConfigError, DomainError

GRAPHENE_MODELS = ("sheet", "bulk")


def _require_finite(name, *values):
    for v in values:
        if not math.isfinite(v):
            raise DomainError(f"{name}: non-finite value {v!r}")


@dataclass(frozen=True)
class GrapheneSpec:
    """Intra-band conductivity parameters of the graphene liquid.

    mu_c is the chemical potential in eV, tau the carrier relaxation time in
    seconds, temperature in kelvin.  With model="bulk" the sheet conductivity
    is spread over `thickness` metres of liquid; `bulk_sigma_override`, when
    set, bypasses the closed form entirely and pins the volumetric
    conductivity (the liquid's effective bulk value is not derivable from
    the sheet model alone).
    """

    mu_c: float = 0.5
    tau: float = 1.0e-12
    temperature: float = 300.0
    model: str = "bulk"
    thickness: float | None = 3.0e-3
    bulk_sigma_override: float | None = 1.0e6

    def __post_init__(self):
        _require_finite("GrapheneSpec", self.mu_c, self.tau, self.temperature)
        if self.mu_c < 0:
            raise DomainError(f"mu_c must be >= 0 eV, got {self.mu_c}")
        if self.tau <= 0:
            raise DomainError(f"tau must be > 0 s, got {self.tau}")
        if self.temperature <= 0:
            raise DomainError(f"temperature must be > 0 K, got {self.temperature}")
        if self.model not in GRAPHENE_MODELS:
            raise DomainError(f"model must be one of {GRAPHENE_MODELS}, got {self.model!r}")
        if self.model == "bulk":
            if self.bulk_sigma_override is None:
                if self.thickness is None or self.thickness <= 0:
                    raise DomainError("bulk model needs thickness > 0 m")
            elif self.bulk_sigma_override <= 0:
                raise DomainError("bulk_sigma_override must be > 0 S/m")


@dataclass(frozen=True)
class DielectricSpec:
    """Lossy dielectric: relative permittivity and loss tangent at f_ref."""

    eps_r: float
    tan_delta: float = 0.0
    f_ref: float = 5.5e9

    def __post_init__(self):
        _require_finite("DielectricSpec", self.eps_r, self.tan_delta, self.f_ref)
        if self.eps_r < 1:
            raise DomainError(f"eps_r must be >= 1, got {self.eps_r}")
        if self.tan_delta < 0:
            raise DomainError(f"tan_delta must be >= 0, got {self.tan_delta}")
        if self.f_ref <= 0:
            raise DomainError(f"f_ref must be > 0 Hz, got {self.f_ref}")


@dataclass(frozen=True)
class MaterialSpec:
    """Tagged union over the material kinds the voxelizer can assign.

    Use the factory classmethods; the constructor checks that the payload
    matches the kind.
    """

    kind: str
    dielectric: DielectricSpec | None = None
    sigma: float | None = None        # S/m, bulk_conductor
    sigma_s: complex | None = None    # S, sheet_conductor

    def __post_init__(self):
        if self.kind in ("vacuum", "pec"):
            pass
        elif self.kind == "dielectric":
            if self.dielectric is None:
                raise ConfigError("dielectric material needs a DielectricSpec")
        elif self.kind == "bulk_conductor":
            if self.sigma is None or not math.isfinite(self.sigma) or self.sigma <= 0:
                raise DomainError(f"bulk_conductor needs sigma > 0 S/m, got {self.sigma}")
        elif self.kind == "sheet_conductor":
            if self.sigma_s is None or not np.isfinite(self.sigma_s):
                raise DomainError("sheet_conductor needs a finite sigma_s")
            if self.sigma_s.real < 0:
                raise DomainError(f"sheet_conductor needs Re(sigma_s) >= 0, got {self.sigma_s}")
        else:
            raise ConfigError(f"unknown material kind {self.kind!r}")

    @classmethod
    def vacuum(cls):
        return cls(kind="vacuum")

    @classmethod
    def pec(cls):
        return cls(kind="pec")

    @classmethod
    def from_dielectric(cls, spec: DielectricSpec):
        return cls(kind="dielectric", dielectric=spec)

    @classmethod
    def bulk_conductor(cls, sigma: float):
        return cls(kind="bulk_conductor", sigma=float(sigma))

    @classmethod
    def sheet_conductor(cls, sigma_s: complex):
        return cls(kind="sheet_conductor", sigma_s=complex(sigma_s))


def kubo_intraband(spec: GrapheneSpec, f: float) -> complex:
    """Intra-band sheet conductivity sigma_s(2*pi*f) in siemens.

    Purely real at f = 0; Re(sigma_s) >= 0 for all f >= 0 (passivity).
    The Fermi bracket uses log1p so the mu_c/(kB*T) >> 1 limit is exact
    instead of overflowing.
    """
    if not math.isfinite(f):
        raise DomainError(f"frequency must be finite, got {f}")
    if f < 0:
        raise DomainError(f"frequency must be >= 0 Hz, got {f}")
    return _kubo_intraband_raw(spec.mu_c, spec.tau, spec.temperature, 2.0 * math.pi * f)


def _kubo_intraband_raw(mu_c_ev: float, tau: float, temperature: float, omega: float) -> complex:
    kt = K_B * temperature
    x = Q_E * mu_c_ev / kt
    bracket = x + 2.0 * math.log1p(math.exp(-x))
    prefactor = Q_E * Q_E * kt / (math.pi * HBAR * HBAR)
    return prefactor * bracket * tau / (1.0 - 1j * omega * tau)


def sheet_to_bulk(sigma_s: complex, thickness: float) -> complex:
    """Spread a sheet conductivity (S) over a layer thickness (m) -> S/m."""
    if not math.isfinite(thickness) or thickness <= 0:
        raise DomainError(f"thickness must be > 0 m, got {thickness}")
    return complex(sigma_s) / thickness


def dielectric_loss_sigma(spec: DielectricSpec, f: float) -> float:
    """Equivalent conductivity of a loss tangent: 2*pi*f*eps0*eps_r*tan_delta."""
    if not math.isfinite(f) or f <= 0:
        raise DomainError(f"frequency must be > 0 Hz, got {f}")
    return 2.0 * math.pi * f * EPS0 * spec.eps_r * spec.tan_delta


def graphene_material(spec: GrapheneSpec, f_ref: float = 5.5e9) -> MaterialSpec:
    """Solver-ready material for the graphene liquid.

    With the override set (the default) the liquid is a plain bulk conductor.
    Otherwise the sheet conductivity is evaluated at f_ref and, for the bulk
    model, divided by the layer thickness; only the real part enters the
    conductive update (the reactive part is < 4 % of the real part for
    2*pi*f_ref*tau << 1 and is dropped).
    """
    if spec.model == "bulk" and spec.bulk_sigma_override is not None:
        return MaterialSpec.bulk_conductor(spec.bulk_sigma_override)
    sigma_s = kubo_intraband(spec, f_ref)
    if spec.model == "sheet":
        return MaterialSpec.sheet_conductor(sigma_s)
    return MaterialSpec.bulk_conductor(sheet_to_bulk(sigma_s, spec.thickness).real)


def solver_constants(mat: MaterialSpec, f_ref: float) -> tuple[float, float, bool]:
    """Resolve a material to ``(eps_r, sigma_eq, is_pec)`` at f_ref.

    Bulk conductors above the PEC threshold collapse to PEC.  Sheet
    conductors carry no thickness and cannot be resolved volumetrically;
    convert with :func:`sheet_to_bulk` first.
    """
    if mat.kind == "vacuum":
        return 1.0, 0.0, False
    if mat.kind == "pec":
        return 1.0, 0.0, True
    if mat.kind == "dielectric":
        d = mat.dielectric
        return d.eps_r, dielectric_loss_sigma(d, f_ref), False
    if mat.kind == "bulk_conductor":
        if mat.sigma >= PEC_SIGMA_THRESHOLD:
            return 1.0, 0.0, True
        return 1.0, mat.sigma, False
    raise ConfigError(
        f"material kind {mat.kind!r} has no volumetric solver constants; "
        "convert sheet conductors with sheet_to_bulk() first"
    )
