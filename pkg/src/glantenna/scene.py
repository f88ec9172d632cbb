"""Parametric antenna geometry and the six liquid-slug states.

The antenna is a PEC ground sheet, a lossy substrate slab, a rectangular
ring duct (square cross-section approximating the round tube) resting on
the substrate, and a conductive-liquid slug occupying an arc of the duct.
Slug positions are addressed by arclength along the duct centerline,
measured counterclockwise from the midpoint of the +x leg.

Dimensions in :class:`AntennaParams` are in millimetres (and the slug
volume in millilitres), matching how such antennas are tabulated; scene
geometry is emitted in metres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import DomainError, GeometryError
from .materials import DielectricSpec, MaterialSpec
from .constants import C0

MM = 1.0e-3
ML = 1.0e-6  # m^3

STATE_LABELS = ("L1", "L2", "L3", "L4", "L5", "L6")

# Beam azimuth (degrees) each state is designed to produce, used by the
# beam-map report. States 180 deg apart are point reflections of each other.
STATE_BEAM_AZIMUTH_DEG = {
    "L2": 0.0,
    "L3": 45.0,
    "L4": 135.0,
    "L5": 180.0,
    "L6": 225.0,
    "L1": 315.0,
}

ANTIPODAL_STATES = (("L2", "L5"), ("L3", "L6"), ("L4", "L1"))

# Painting priority of material kinds; higher wins at shared midpoints.
MATERIAL_PRIORITY = {
    "vacuum": 0,
    "dielectric": 1,
    "bulk_conductor": 2,
    "sheet_conductor": 2,
    "pec": 3,
}


def default_materials() -> dict:
    """Stackup used by the reference design: LCP substrate, acrylic duct,
    pinned-conductivity graphene liquid over a PEC ground."""
    return {
        "substrate": DielectricSpec(eps_r=2.9, tan_delta=0.0025),
        "channel_wall": DielectricSpec(eps_r=2.55, tan_delta=0.002),
        "liquid": MaterialSpec.bulk_conductor(1.0e6),
        "ground": MaterialSpec.pec(),
    }


@dataclass(frozen=True)
class AntennaParams:
    """Antenna dimensions (mm) and material assignment.

    ls/ws/hs: substrate length, width, height. lm/wm: duct centerline
    rectangle. dm: duct bore (square side). lg: feed offset of the probe
    from the slug center, measured along the duct arc. slug_volume: liquid
    volume in ml (arc length = volume / dm^2).
    """

    ls: float = 68.0
    ws: float = 56.0
    hs: float = 3.0
    lm: float = 46.0
    wm: float = 35.0
    dm: float = 3.0
    lg: float = 12.0
    slug_volume: float = 0.27
    materials: dict = field(default_factory=default_materials)

    def __post_init__(self):
        for name in ("ls", "ws", "hs", "lm", "wm", "dm", "lg", "slug_volume"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise DomainError(f"AntennaParams.{name}: non-finite value {v!r}")
        if self.dm <= 0:
            raise GeometryError(f"dm must be > 0 mm, got {self.dm}")
        if self.hs <= 0:
            raise GeometryError(f"hs must be > 0 mm, got {self.hs}")
        if self.lm <= 0 or self.wm <= 0:
            raise GeometryError("duct rectangle lm, wm must be > 0 mm")
        if self.lm + self.dm >= self.ls:
            raise GeometryError(f"duct exceeds substrate: lm + dm = {self.lm + self.dm} >= ls = {self.ls}")
        if self.wm + self.dm >= self.ws:
            raise GeometryError(f"duct exceeds substrate: wm + dm = {self.wm + self.dm} >= ws = {self.ws}")
        if self.slug_volume <= 0:
            raise GeometryError(f"slug_volume must be > 0 ml, got {self.slug_volume}")
        if not (0 <= self.lg < min(self.lm, self.wm) / 2):
            raise GeometryError(f"lg must satisfy 0 <= lg < min(lm, wm)/2, got {self.lg}")
        missing = {"substrate", "channel_wall", "liquid", "ground"} - set(self.materials)
        if missing:
            raise GeometryError(f"materials missing entries: {sorted(missing)}")

    @property
    def ring_perimeter(self) -> float:
        """Duct centerline perimeter in mm."""
        return 2.0 * (self.lm + self.wm)

    @property
    def slug_arc_length(self) -> float:
        """Slug arc length in mm: volume over duct cross-section area."""
        return self.slug_volume * 1000.0 / (self.dm * self.dm)


@dataclass(frozen=True)
class LiquidLocation:
    """One of the six discrete slug positions, as a centerline arclength."""

    label: str
    slug_center_arclength: float  # mm

    def __post_init__(self):
        if self.label not in STATE_LABELS:
            raise DomainError(f"label must be one of {STATE_LABELS}, got {self.label!r}")


# Offset of each slug center from its duct corner, in mm. Tuned on the
# reference geometry: the radiated beam tilts along the slug axis away
# from the feed, and straddling a corner by this amount steers the six
# beams onto the design azimuths while keeping the six resonances close.
CORNER_STATE_SHIFT = 4.0


def state_arclengths(params: AntennaParams) -> dict:
    """Slug-center arclength (mm) per state label.

    Every state straddles one of the four duct corners, displaced by
    +-CORNER_STATE_SHIFT along the arc; antipodal labels (L2/L5, L3/L6,
    L4/L1) occupy point-reflected positions.
    """
    p = params.ring_perimeter
    ne = params.wm / 2.0
    nw = ne + params.lm
    sw = p / 2.0 + ne
    se = p / 2.0 + nw
    d = CORNER_STATE_SHIFT
    return {
        "L2": sw - d,
        "L5": ne - d,
        "L3": sw + d,
        "L6": ne + d,
        "L1": nw - d,
        "L4": se - d,
    }


def liquid_location(label: str, params: AntennaParams) -> LiquidLocation:
    if label not in STATE_LABELS:
        raise DomainError(f"unknown state label {label!r}")
    return LiquidLocation(label=label, slug_center_arclength=state_arclengths(params)[label])


def ring_point(params: AntennaParams, s: float) -> tuple:
    """Centerline point (x, y) in mm at arclength s (mm), wrapping modulo
    the perimeter. s = 0 is the +x leg midpoint; s increases toward +y."""
    p = params.ring_perimeter
    s = s % p
    hl, hw = params.lm / 2.0, params.wm / 2.0
    if s < hw:                       # +x leg, upper half
        return hl, s
    s -= hw
    if s < params.lm:                # top leg, heading -x
        return hl - s, hw
    s -= params.lm
    if s < params.wm:                # -x leg, heading -y
        return -hl, hw - s
    s -= params.wm
    if s < params.lm:                # bottom leg, heading +x
        return -hl + s, -hw
    s -= params.lm
    return hl, -hw + s               # +x leg, lower half


@dataclass(frozen=True)
class Box:
    """Axis-aligned closed box in metres; zero extent per axis is allowed."""

    x0: float
    x1: float
    y0: float
    y1: float
    z0: float
    z1: float

    def __post_init__(self):
        if self.x1 < self.x0 or self.y1 < self.y0 or self.z1 < self.z0:
            raise GeometryError(f"inverted box bounds: {self}")

    def contains(self, x, y, z) -> bool:
        return (self.x0 <= x <= self.x1) and (self.y0 <= y <= self.y1) and (self.z0 <= z <= self.z1)

    def volume(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0) * (self.z1 - self.z0)


@dataclass(frozen=True)
class SceneObject:
    name: str
    material: MaterialSpec
    boxes: tuple

    @property
    def priority(self) -> int:
        return MATERIAL_PRIORITY[self.material.kind]


@dataclass(frozen=True)
class PortPlacement:
    """Vertical probe: source gap at the ground plane, PEC wire up to z_top."""

    index: int
    x: float  # m
    y: float  # m
    z_top: float  # m
    reference_impedance: float = 50.0

    def __post_init__(self):
        if not (1 <= self.index <= 6):
            raise DomainError(f"port index must be 1..6, got {self.index}")
        if self.reference_impedance <= 0:
            raise DomainError("reference impedance must be > 0 ohm")


@dataclass(frozen=True)
class SceneSpec:
    """Materialized scene: objects in painting order plus the active port."""

    objects: tuple
    port: PortPlacement | None = None
    f_design: float = 5.5e9

    def bounding_box(self) -> Box:
        boxes = [b for obj in self.objects for b in obj.boxes]
        if not boxes:
            return Box(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        return Box(
            x0=min(b.x0 for b in boxes),
            x1=max(b.x1 for b in boxes),
            y0=min(b.y0 for b in boxes),
            y1=max(b.y1 for b in boxes),
            z0=min(b.z0 for b in boxes),
            z1=max(b.z1 for b in boxes),
        )

    def find_object(self, name: str) -> SceneObject:
        for obj in self.objects:
            if obj.name == name:
                return obj
        raise KeyError(name)


def _leg_segments(params: AntennaParams):
    """Centerline legs as (s_start, s_end, point_start, point_end)."""
    hl, hw = params.lm / 2.0, params.wm / 2.0
    p = params.ring_perimeter
    return (
        (0.0, hw, (hl, 0.0), (hl, hw)),
        (hw, hw + params.lm, (hl, hw), (-hl, hw)),
        (hw + params.lm, hw + params.lm + params.wm, (-hl, hw), (-hl, -hw)),
        (hw + params.lm + params.wm, p - hw, (-hl, -hw), (hl, -hw)),
        (p - hw, p, (hl, -hw), (hl, 0.0)),
    )


def _segment_box(params: AntennaParams, p0, p1, extend_start, extend_end) -> Box:
    """Duct box (mm -> m) over a straight centerline run from p0 to p1.

    When the slug continues around a corner the box is extended half a bore
    into the corner cube so the bend is filled rather than notched.
    """
    half = params.dm / 2.0
    (x0, y0), (x1, y1) = p0, p1
    if x0 == x1:  # run along y, possibly decreasing
        sgn = 1.0 if y1 >= y0 else -1.0
        a = y0 - (half * sgn if extend_start else 0.0)
        b = y1 + (half * sgn if extend_end else 0.0)
        xa, xb, ya, yb = x0 - half, x0 + half, min(a, b), max(a, b)
    elif y0 == y1:  # run along x, possibly decreasing
        sgn = 1.0 if x1 >= x0 else -1.0
        a = x0 - (half * sgn if extend_start else 0.0)
        b = x1 + (half * sgn if extend_end else 0.0)
        xa, xb, ya, yb = min(a, b), max(a, b), y0 - half, y0 + half
    else:
        raise GeometryError("duct centerline runs must be axis-aligned")
    return Box(
        x0=xa * MM, x1=xb * MM, y0=ya * MM, y1=yb * MM,
        z0=params.hs * MM, z1=(params.hs + params.dm) * MM,
    )


def slug_boxes(params: AntennaParams, center_s: float, length: float) -> tuple:
    """Boxes covering a slug of the given arc length centred at center_s."""
    p = params.ring_perimeter
    if length > p:
        raise GeometryError(f"slug arc {length:.1f} mm exceeds duct perimeter {p:.1f} mm")
    s0 = (center_s - length / 2.0) % p
    boxes = []
    remaining = length
    s = s0
    first = True
    while remaining > 1e-12:
        # locate the leg containing s and clip the run to the leg end
        for a, b, pa, pb in _leg_segments(params):
            if a - 1e-12 <= s < b - 1e-12:
                run = min(remaining, b - s)
                t0 = (s - a) / (b - a)
                t1 = (s + run - a) / (b - a)
                q0 = (pa[0] + t0 * (pb[0] - pa[0]), pa[1] + t0 * (pb[1] - pa[1]))
                q1 = (pa[0] + t1 * (pb[0] - pa[0]), pa[1] + t1 * (pb[1] - pa[1]))
                # wrap-around continuity at corners: extend when the slug
                # started mid-ring earlier (not its true cap) or continues on
                ends_at_corner = abs((s + run) - b) < 1e-12 and remaining > run + 1e-12
                starts_at_corner = (not first) and abs(s - a) < 1e-12
                # a full-ring slug also joins back onto itself
                boxes.append(_segment_box(params, q0, q1, starts_at_corner, ends_at_corner))
                s = (s + run) % p
                remaining -= run
                first = False
                break
        else:
            raise GeometryError(f"arclength {s} not on any duct leg")
    return tuple(_merge_collinear(boxes))


def _merge_collinear(boxes):
    """Fuse boxes that share a cross-section and overlap or abut along the
    remaining axis (a straight run split at the arclength origin)."""
    out = list(boxes)
    merged = True
    while merged:
        merged = False
        for i in range(len(out)):
            for j in range(i + 1, len(out)):
                a, b = out[i], out[j]
                same_x = (a.x0, a.x1) == (b.x0, b.x1)
                same_y = (a.y0, a.y1) == (b.y0, b.y1)
                same_z = (a.z0, a.z1) == (b.z0, b.z1)
                if same_x and same_z and a.y0 <= b.y1 + 1e-12 and b.y0 <= a.y1 + 1e-12:
                    out[i] = Box(a.x0, a.x1, min(a.y0, b.y0), max(a.y1, b.y1), a.z0, a.z1)
                elif same_y and same_z and a.x0 <= b.x1 + 1e-12 and b.x0 <= a.x1 + 1e-12:
                    out[i] = Box(min(a.x0, b.x0), max(a.x1, b.x1), a.y0, a.y1, a.z0, a.z1)
                else:
                    continue
                del out[j]
                merged = True
                break
            if merged:
                break
    return out


def channel_boxes(params: AntennaParams) -> tuple:
    """The full duct ring as four overlapping leg boxes (corners included)."""
    hl, hw, half = params.lm / 2.0, params.wm / 2.0, params.dm / 2.0
    z0, z1 = params.hs * MM, (params.hs + params.dm) * MM
    return (
        Box((hl - half) * MM, (hl + half) * MM, (-hw - half) * MM, (hw + half) * MM, z0, z1),
        Box((-hl - half) * MM, (-hl + half) * MM, (-hw - half) * MM, (hw + half) * MM, z0, z1),
        Box((-hl - half) * MM, (hl + half) * MM, (hw - half) * MM, (hw + half) * MM, z0, z1),
        Box((-hl - half) * MM, (hl + half) * MM, (-hw - half) * MM, (-hw + half) * MM, z0, z1),
    )


def state_port_map(state: LiquidLocation, params: AntennaParams) -> PortPlacement:
    """The probe paired with a state: under the duct centerline, offset lg
    along the arc from the slug center, wire rising to the duct floor."""
    port_s = state.slug_center_arclength + params.lg
    x, y = ring_point(params, port_s)
    index = STATE_LABELS.index(state.label) + 1
    return PortPlacement(index=index, x=x * MM, y=y * MM, z_top=params.hs * MM)


def build_scene(params: AntennaParams, state: LiquidLocation) -> SceneSpec:
    """Assemble the antenna for one liquid state.

    Objects are emitted in painting order (ground, substrate, duct, slug);
    material priority resolves any shared-boundary claims.
    """
    m = params.materials
    hx, hy = params.ls / 2.0 * MM, params.ws / 2.0 * MM
    ground = SceneObject("ground", m["ground"], (Box(-hx, hx, -hy, hy, 0.0, 0.0),))
    substrate = SceneObject(
        "substrate",
        MaterialSpec.from_dielectric(m["substrate"]),
        (Box(-hx, hx, -hy, hy, 0.0, params.hs * MM),),
    )
    channel = SceneObject(
        "channel", MaterialSpec.from_dielectric(m["channel_wall"]), channel_boxes(params)
    )
    slug = SceneObject(
        "slug",
        m["liquid"],
        slug_boxes(params, state.slug_center_arclength, params.slug_arc_length),
    )
    port = state_port_map(state, params)
    if not (-hx < port.x < hx and -hy < port.y < hy):
        raise GeometryError(f"port at ({port.x / MM:.1f}, {port.y / MM:.1f}) mm lies outside the substrate")
    if params.lg >= params.slug_arc_length / 2.0:
        raise GeometryError(
            f"feed offset lg = {params.lg} mm places the probe beyond the "
            f"{params.slug_arc_length:.1f} mm slug; it would not contact the liquid"
        )
    return SceneSpec(objects=(ground, substrate, channel, slug), port=port)


def patch_cavity_resonance(length: float, eps_eff: float) -> float:
    """Half-wave resonator estimate c / (2 L sqrt(eps_eff)), length in m."""
    if not (math.isfinite(length) and length > 0):
        raise DomainError(f"length must be > 0 m, got {length}")
    if not (math.isfinite(eps_eff) and eps_eff >= 1):
        raise DomainError(f"eps_eff must be >= 1, got {eps_eff}")
    return C0 / (2.0 * length * math.sqrt(eps_eff))


def microstrip_eps_eff(width: float, height: float, eps_r: float) -> float:
    """Quasi-static effective permittivity of a microstrip of the given
    width over a substrate of the given height (both m), w/h >= 1 form."""
    if width <= 0 or height <= 0:
        raise DomainError("width and height must be > 0 m")
    if eps_r < 1:
        raise DomainError(f"eps_r must be >= 1, got {eps_r}")
    return (eps_r + 1.0) / 2.0 + (eps_r - 1.0) / 2.0 / math.sqrt(1.0 + 12.0 * height / width)


def microstrip_length_extension(width: float, height: float, eps_r: float) -> float:
    """Open-end length extension of a microstrip resonator (m); the
    half-wave patch resonates at the physical length plus one extension
    per radiating edge."""
    e = microstrip_eps_eff(width, height, eps_r)
    wh = width / height
    return 0.412 * height * (e + 0.3) * (wh + 0.264) / ((e - 0.258) * (wh + 0.8))
