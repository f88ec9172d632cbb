"""Convolutional PML: graded 1-D stretching profiles and auxiliary fields.

The absorber occupies the outermost `thickness` cells of each face. Along
each axis two sets of profiles exist, sampled at integer node positions
(used by E-field spatial derivatives) and at half-cell positions (used by
H-field derivatives):

    rho        depth fraction, 1 at the outer wall, 0 at the interface
    sigma(rho) = sigma_max * rho^m,  sigma_max from the target reflection
    kappa(rho) = 1 + (kappa_max - 1) * rho^m
    alpha(rho) = alpha_max * (1 - rho)

    b = exp(-(sigma/kappa + alpha) * dt / eps0)
    c = sigma * (b - 1) / ((sigma + kappa * alpha) * kappa)

The recursions run on raw field differences (the 1/delta of the derivative
is folded into the update coefficients), so `c` stays dimensionless and the
psi arrays carry field units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import C0, EPS0
from .errors import ConfigError


@dataclass(frozen=True)
class CpmlParams:
    """Grading of the absorber; defaults follow common antenna practice."""

    grading_order: float = 3.0
    target_reflection: float = 1.0e-8
    kappa_max: float = 7.0
    alpha_max: float = 0.2  # S/m, graded down from the interface

    def __post_init__(self):
        if self.grading_order <= 0:
            raise ConfigError("grading_order must be > 0")
        if not (0 < self.target_reflection < 1):
            raise ConfigError("target_reflection must be in (0, 1)")
        if self.kappa_max < 1:
            raise ConfigError("kappa_max must be >= 1")
        if self.alpha_max < 0:
            raise ConfigError("alpha_max must be >= 0")


@dataclass
class AxisProfiles:
    """b, c and 1/kappa along one axis at node and half-cell positions."""

    b_e: np.ndarray
    c_e: np.ndarray
    inv_k_e: np.ndarray
    b_h: np.ndarray
    c_h: np.ndarray
    inv_k_h: np.ndarray


def _profile(positions, n_cells, npml, delta, dt, params: CpmlParams):
    m = params.grading_order
    sigma_max = -(m + 1.0) * EPS0 * C0 * math.log(params.target_reflection) / (2.0 * npml * delta)
    rho_lo = (npml - positions) / npml
    rho_hi = (positions - (n_cells - npml)) / npml
    rho = np.maximum(0.0, np.maximum(rho_lo, rho_hi))
    sigma = sigma_max * rho**m
    kappa = 1.0 + (params.kappa_max - 1.0) * rho**m
    alpha = params.alpha_max * (1.0 - rho)
    b = np.exp(-(sigma / kappa + alpha) * dt / EPS0)
    denom = (sigma + kappa * alpha) * kappa
    c = np.where(sigma > 0.0, sigma * (b - 1.0) / np.where(denom > 0.0, denom, 1.0), 0.0)
    return b, c, 1.0 / kappa


def axis_profiles(n_cells: int, npml: int, delta: float, dt: float, params: CpmlParams, dtype) -> AxisProfiles:
    if npml > 0 and n_cells < 2 * npml + 2:
        raise ConfigError(f"axis of {n_cells} cells cannot host two {npml}-cell absorbers")
    nodes = np.arange(n_cells + 1, dtype=np.float64)
    halves = np.arange(n_cells, dtype=np.float64) + 0.5
    if npml == 0:
        one = np.ones
        return AxisProfiles(
            b_e=np.zeros(n_cells + 1, dtype),
            c_e=np.zeros(n_cells + 1, dtype),
            inv_k_e=one(n_cells + 1, dtype),
            b_h=np.zeros(n_cells, dtype),
            c_h=np.zeros(n_cells, dtype),
            inv_k_h=one(n_cells, dtype),
        )
    b_e, c_e, ik_e = _profile(nodes, n_cells, npml, delta, dt, params)
    b_h, c_h, ik_h = _profile(halves, n_cells, npml, delta, dt, params)
    return AxisProfiles(
        b_e=b_e.astype(dtype),
        c_e=c_e.astype(dtype),
        inv_k_e=ik_e.astype(dtype),
        b_h=b_h.astype(dtype),
        c_h=c_h.astype(dtype),
        inv_k_h=ik_h.astype(dtype),
    )


def _zeros(shape, dtype):
    return np.zeros(shape, dtype)


@dataclass
class CpmlState:
    """Auxiliary psi slabs, one low/high pair per (component, axis) term."""

    npml: int
    x: AxisProfiles
    y: AxisProfiles
    z: AxisProfiles
    slabs: dict = field(default_factory=dict)

    @classmethod
    def build(cls, nx, ny, nz, npml, delta, dt, params: CpmlParams, dtype):
        state = cls(
            npml=npml,
            x=axis_profiles(nx, npml, delta, dt, params, dtype),
            y=axis_profiles(ny, npml, delta, dt, params, dtype),
            z=axis_profiles(nz, npml, delta, dt, params, dtype),
        )
        if npml == 0:
            return state
        p = npml
        shapes = {
            # E-side: psi for the derivative of (component) along (axis)
            "eyx": (p, ny, nz + 1),
            "ezx": (p, ny + 1, nz),
            "exy": (nx, p, nz + 1),
            "ezy": (nx + 1, p, nz),
            "exz": (nx, ny + 1, p),
            "eyz": (nx + 1, ny, p),
            # H-side
            "hyx": (p, ny + 1, nz),
            "hzx": (p, ny, nz + 1),
            "hxy": (nx + 1, p, nz),
            "hzy": (nx, p, nz + 1),
            "hxz": (nx + 1, ny, p),
            "hyz": (nx, ny + 1, p),
        }
        for name, shape in shapes.items():
            state.slabs[name + "_lo"] = _zeros(shape, dtype)
            state.slabs[name + "_hi"] = _zeros(shape, dtype)
        return state
