"""Rasterization of a scene onto a uniform Yee grid.

Each electric-field edge takes the material of the region containing its
midpoint; boundary claims are resolved by material priority (PEC >
conductor > dielectric > vacuum) and, within a priority class, by painting
order. The probe wire and source gap are placed on exact grid nodes, so
the port column snaps to the nearest node of the requested position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C0
from .errors import GeometryError, ResolutionError
from .materials import MaterialSpec
from .scene import MATERIAL_PRIORITY, Box, SceneSpec

# fraction of a cell used to absorb float noise in closed-interval tests
_SNAP_TOL = 1e-6

EDGE_AXES = ("ex", "ey", "ez")


def edge_shapes(nx: int, ny: int, nz: int) -> dict:
    return {
        "ex": (nx, ny + 1, nz + 1),
        "ey": (nx + 1, ny, nz + 1),
        "ez": (nx + 1, ny + 1, nz),
    }


@dataclass(frozen=True)
class PortSite:
    """Grid realisation of the probe: a vertical source gap edge topped by
    a PEC wire column reaching k_top."""

    i: int
    j: int
    k_gap: int
    k_top: int
    z_ref: float = 50.0


@dataclass
class VoxelGrid:
    """Uniform Yee grid with a material id per E-edge.

    mat_ex/mat_ey/mat_ez index into `materials`; id 0 is always vacuum.
    content_bounds gives node-index bounds of the painted scene, used to
    place recording surfaces.
    """

    delta: float
    nx: int
    ny: int
    nz: int
    origin: tuple
    mat_ex: np.ndarray
    mat_ey: np.ndarray
    mat_ez: np.ndarray
    materials: tuple
    pml_thickness: int = 0
    port: PortSite | None = None
    content_bounds: tuple | None = None
    lumped: tuple = ()  # extra LumpedElement resistors (validation scenes)

    @property
    def dims(self) -> tuple:
        return (self.nx, self.ny, self.nz)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny * self.nz

    def material_id(self, mat: MaterialSpec) -> int:
        return self.materials.index(mat)

    def node_index(self, x: float, y: float, z: float) -> tuple:
        x0, y0, z0 = self.origin
        return (
            int(round((x - x0) / self.delta)),
            int(round((y - y0) / self.delta)),
            int(round((z - z0) / self.delta)),
        )


def vacuum_grid(nx: int, ny: int, nz: int, delta: float, pml_thickness: int = 0) -> VoxelGrid:
    """All-vacuum grid; with pml_thickness = 0 the outer boundary is PEC,
    which is exactly a closed PEC box (cavity)."""
    shapes = edge_shapes(nx, ny, nz)
    return VoxelGrid(
        delta=delta,
        nx=nx,
        ny=ny,
        nz=nz,
        origin=(0.0, 0.0, 0.0),
        mat_ex=np.zeros(shapes["ex"], dtype=np.uint8),
        mat_ey=np.zeros(shapes["ey"], dtype=np.uint8),
        mat_ez=np.zeros(shapes["ez"], dtype=np.uint8),
        materials=(MaterialSpec.vacuum(),),
        pml_thickness=pml_thickness,
    )


def _axis_range(b0: float, b1: float, r0: float, delta: float, n: int, half: bool):
    """Inclusive index range of edge midpoints falling inside [b0, b1]."""
    off = 0.5 if half else 0.0
    lo = math.ceil((b0 - r0) / delta - off - _SNAP_TOL)
    hi = math.floor((b1 - r0) / delta - off + _SNAP_TOL)
    lo = max(lo, 0)
    hi = min(hi, n - 1)
    return lo, hi


def _paint_box(grid: VoxelGrid, prio, box: Box, mat_id: int, priority: int):
    x0, y0, z0 = grid.origin
    d = grid.delta
    specs = {
        "ex": ((True, grid.nx), (False, grid.ny + 1), (False, grid.nz + 1)),
        "ey": ((False, grid.nx + 1), (True, grid.ny), (False, grid.nz + 1)),
        "ez": ((False, grid.nx + 1), (False, grid.ny + 1), (True, grid.nz)),
    }
    for axis in EDGE_AXES:
        (hx, nnx), (hy, nny), (hz, nnz) = specs[axis]
        i0, i1 = _axis_range(box.x0, box.x1, x0, d, nnx, hx)
        j0, j1 = _axis_range(box.y0, box.y1, y0, d, nny, hy)
        k0, k1 = _axis_range(box.z0, box.z1, z0, d, nnz, hz)
        if i0 > i1 or j0 > j1 or k0 > k1:
            continue
        region = (slice(i0, i1 + 1), slice(j0, j1 + 1), slice(k0, k1 + 1))
        mat = getattr(grid, f"mat_{axis}")
        pr = prio[axis]
        mask = pr[region] <= priority
        mat[region][mask] = mat_id
        pr[region][mask] = priority


def _check_resolution(scene: SceneSpec, delta: float, min_feature_cells: int):
    for obj in scene.objects:
        for box in obj.boxes:
            for name, extent in (
                ("x", box.x1 - box.x0),
                ("y", box.y1 - box.y0),
                ("z", box.z1 - box.z0),
            ):
                if 0 < extent < min_feature_cells * delta - _SNAP_TOL * delta:
                    raise ResolutionError(
                        f"object {obj.name!r}: {name}-extent {extent * 1e3:.3f} mm spans fewer "
                        f"than {min_feature_cells} cells at delta = {delta * 1e3:.3f} mm"
                    )


def voxelize(
    scene: SceneSpec,
    delta: float,
    pml_thickness: int = 10,
    margin_cells: int | None = None,
    min_feature_cells: int = 3,
) -> VoxelGrid:
    """Rasterize a scene, surrounding it with an air margin plus CPML.

    The margin defaults to a quarter wavelength at the scene design
    frequency on every face (required whenever the grid is absorbing);
    grids built with pml_thickness = 0 are closed PEC boxes and may use
    margin_cells = 0 for geometry analysis.
    """
    if delta <= 0:
        raise GeometryError(f"delta must be > 0 m, got {delta}")
    _check_resolution(scene, delta, min_feature_cells)

    if margin_cells is None:
        margin_cells = math.ceil(C0 / scene.f_design / 4.0 / delta)
    elif pml_thickness > 0 and margin_cells * delta < C0 / scene.f_design / 4.0 - _SNAP_TOL * delta:
        raise GeometryError(
            f"air margin {margin_cells} cells is below a quarter wavelength "
            f"at {scene.f_design / 1e9:.2f} GHz for an absorbing grid"
        )

    bbox = scene.bounding_box()
    pad = margin_cells + pml_thickness
    cx = math.ceil((bbox.x1 - bbox.x0) / delta - _SNAP_TOL)
    cy = math.ceil((bbox.y1 - bbox.y0) / delta - _SNAP_TOL)
    cz = math.ceil((bbox.z1 - bbox.z0) / delta - _SNAP_TOL)
    nx, ny, nz = cx + 2 * pad, cy + 2 * pad, cz + 2 * pad
    origin = (bbox.x0 - pad * delta, bbox.y0 - pad * delta, bbox.z0 - pad * delta)

    shapes = edge_shapes(nx, ny, nz)
    grid = VoxelGrid(
        delta=delta,
        nx=nx,
        ny=ny,
        nz=nz,
        origin=origin,
        mat_ex=np.zeros(shapes["ex"], dtype=np.uint8),
        mat_ey=np.zeros(shapes["ey"], dtype=np.uint8),
        mat_ez=np.zeros(shapes["ez"], dtype=np.uint8),
        materials=(),
        pml_thickness=pml_thickness,
        content_bounds=((pad, pad + cx), (pad, pad + cy), (pad, pad + cz)),
    )

    # material table: vacuum first, then one slot per distinct material
    table = [MaterialSpec.vacuum()]
    for obj in scene.objects:
        if obj.material not in table:
            table.append(obj.material)
    pec = MaterialSpec.pec()
    if scene.port is not None and pec not in table:
        table.append(pec)
    if len(table) > 255:
        raise GeometryError("more than 255 distinct materials")
    grid.materials = tuple(table)

    prio = {axis: np.zeros(shapes[axis], dtype=np.int8) for axis in EDGE_AXES}
    for obj in scene.objects:
        mat_id = table.index(obj.material)
        priority = MATERIAL_PRIORITY[obj.material.kind]
        for box in obj.boxes:
            _paint_box(grid, prio, box, mat_id, priority)

    if scene.port is not None:
        grid.port = _place_port(grid, scene, table.index(pec))
    return grid


def _snap_index(v: float, center: float) -> int:
    """Nearest integer to v, breaking exact halves away from `center` so
    point-reflected positions snap to point-reflected nodes."""
    r = v - center
    # land float noise exactly on the half grid before the tie test
    q = r * 2.0
    if abs(q - round(q)) < 1e-6:
        r = round(q) / 2.0
    off = math.floor(r + 0.5) if r >= 0 else math.ceil(r - 0.5)
    return int(round(center + off))


def _place_port(grid: VoxelGrid, scene: SceneSpec, pec_id: int) -> PortSite:
    port = scene.port
    x0, y0, z0 = grid.origin
    d = grid.delta
    (i0, i1), (j0, j1), _ = grid.content_bounds
    i = _snap_index((port.x - x0) / d, (i0 + i1) / 2.0)
    j = _snap_index((port.y - y0) / d, (j0 + j1) / 2.0)
    k_gap = int(round((0.0 - z0) / d))
    k_top = int(round((port.z_top - z0) / d))
    if k_top <= k_gap:
        raise GeometryError("port wire has no vertical extent on this grid")
    if not (0 < i < grid.nx and 0 < j < grid.ny and 0 <= k_gap and k_top <= grid.nz):
        raise GeometryError("port column lies outside the grid")
    # PEC wire above the source gap, up to the duct floor node
    grid.mat_ez[i, j, k_gap + 1 : k_top] = pec_id
    return PortSite(i=i, j=j, k_gap=k_gap, k_top=k_top, z_ref=port.reference_impedance)


def classify_point(scene: SceneSpec, x: float, y: float, z: float) -> MaterialSpec:
    """Material at a point by the same closed-interval + priority rule the
    painter uses; reference implementation for oracle tests."""
    best = MaterialSpec.vacuum()
    best_pr = -1
    for obj in scene.objects:
        pr = MATERIAL_PRIORITY[obj.material.kind]
        if pr < best_pr:
            continue
        if any(b.contains(x, y, z) for b in obj.boxes):
            best, best_pr = obj.material, pr
    return best
