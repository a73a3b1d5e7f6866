"""Static network layout: base stations, backhaul links, and initial user placement.

Macros are laid out on a grid whose tiles they must fully cover, so the disk
union spans the whole area and a serving cell always exists for any user
position. Small cells add capacity and overlap inside that umbrella.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError

MACRO = "macro"
SMALL = "small"

# device-id offset separating base-station telemetry rows from UE rows
BS_DEVICE_OFFSET = 100_000


@dataclass
class BaseStation:
    bs_id: int
    kind: str
    position: tuple[float, float]
    capacity: float
    radius: float


@dataclass
class BackhaulLink:
    link_id: int
    a: int
    b: int
    capacity_mbps: float
    latency_ms: float


@dataclass
class UserEquipment:
    ue_id: int
    position: tuple[float, float]
    velocity: tuple[float, float]
    serving_bs: int
    session_active: bool = True
    sla_class: str = "latency_bound"   # latency_bound | throughput_bound


@dataclass
class NetworkTopology:
    base_stations: list[BaseStation]
    links: list[BackhaulLink]
    ue_count: int
    side_m: float
    home_link: dict[int, int] = field(default_factory=dict)   # small cell -> primary link
    alt_macro: dict[int, int] = field(default_factory=dict)   # small cell -> fallback macro

    def __post_init__(self) -> None:
        ids = {bs.bs_id for bs in self.base_stations}
        for bs in self.base_stations:
            if bs.capacity <= 0 or bs.radius <= 0:
                raise ConfigurationError(f"base station {bs.bs_id} has non-positive capacity/radius")
        for link in self.links:
            if link.capacity_mbps <= 0:
                raise ConfigurationError(f"link {link.link_id} has non-positive capacity")
            if link.a not in ids or link.b not in ids:
                raise ConfigurationError(f"link {link.link_id} references unknown base station")

    @property
    def bs_count(self) -> int:
        return len(self.base_stations)

    @property
    def link_count(self) -> int:
        return len(self.links)

    def positions(self) -> np.ndarray:
        return np.array([bs.position for bs in self.base_stations], dtype=float)

    def radii(self) -> np.ndarray:
        return np.array([bs.radius for bs in self.base_stations], dtype=float)

    def capacities(self) -> np.ndarray:
        return np.array([bs.capacity for bs in self.base_stations], dtype=float)

    def covers(self, bs_id: int, xy: tuple[float, float]) -> bool:
        bs = self.base_stations[bs_id]
        return math.dist(bs.position, xy) <= bs.radius

    def covering_cells(self, xy: tuple[float, float]) -> list[int]:
        return [bs.bs_id for bs in self.base_stations if self.covers(bs.bs_id, xy)]

    def overlap_neighbors(self, bs_id: int) -> list[int]:
        """Cells whose coverage disk overlaps bs_id's disk."""
        me = self.base_stations[bs_id]
        out = []
        for other in self.base_stations:
            if other.bs_id == bs_id:
                continue
            if math.dist(me.position, other.position) < me.radius + other.radius:
                out.append(other.bs_id)
        return out


def _macro_grid(macro_count: int, side: float) -> tuple[int, int]:
    rows = max(1, int(math.floor(math.sqrt(macro_count))))
    cols = int(math.ceil(macro_count / rows))
    return rows, cols


def build_topology(
    seed: int,
    bs_count: int = 12,
    ue_count: int = 300,
    area_m2: float = 4.0e6,
    macro_radius: float = 780.0,
    small_radius: float = 320.0,
    macro_capacity: float = 900.0,
    small_capacity: float = 420.0,
    link_capacity: float = 1200.0,
    link_latency: float = 1.5,
    mean_speed: float = 1.2,
    speed_sigma: float = 0.35,
    v_max: float = 60.0,
) -> tuple[NetworkTopology, list[UserEquipment]]:
    """Deterministically build the layout and the initial UE population."""
    if bs_count < 1 or ue_count < 1 or area_m2 <= 0:
        raise ConfigurationError("bs_count and ue_count must be >= 1 and area positive")

    side = math.sqrt(area_m2)
    macro_count = max(1, bs_count // 3)
    small_count = bs_count - macro_count
    rows, cols = _macro_grid(macro_count, side)
    if rows * cols != macro_count:
        raise ConfigurationError(
            f"macro count {macro_count} does not tile the area (grid {rows}x{cols})"
        )
    tile_w, tile_h = side / cols, side / rows
    half_diag = math.hypot(tile_w / 2, tile_h / 2)
    if half_diag > macro_radius:
        raise ConfigurationError(
            f"coverage unachievable: macro radius {macro_radius:.0f} m < tile half-diagonal "
            f"{half_diag:.0f} m for area {area_m2:.3g} m^2"
        )

    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x70b0]))

    stations: list[BaseStation] = []
    for i in range(macro_count):
        r, c = divmod(i, cols)
        pos = ((c + 0.5) * tile_w, (r + 0.5) * tile_h)
        stations.append(BaseStation(i, MACRO, pos, macro_capacity, macro_radius))
    # small cells: jittered ring positions so layouts stay spread out but seeded
    for j in range(small_count):
        angle = 2 * math.pi * (j / max(1, small_count)) + rng.uniform(-0.25, 0.25)
        rad = side * (0.22 + 0.18 * rng.random())
        x = min(max(side / 2 + rad * math.cos(angle), 0.05 * side), 0.95 * side)
        y = min(max(side / 2 + rad * math.sin(angle), 0.05 * side), 0.95 * side)
        stations.append(BaseStation(macro_count + j, SMALL, (x, y), small_capacity, small_radius))

    links: list[BackhaulLink] = []
    home_link: dict[int, int] = {}
    alt_macro: dict[int, int] = {}
    macros = stations[:macro_count]
    for bs in stations[macro_count:]:
        order = sorted(macros, key=lambda m: math.dist(m.position, bs.position))
        nearest = order[0]
        links.append(BackhaulLink(len(links), bs.bs_id, nearest.bs_id, link_capacity, link_latency))
        home_link[bs.bs_id] = links[-1].link_id
        alt_macro[bs.bs_id] = order[1].bs_id if len(order) > 1 else nearest.bs_id
    if macro_count > 1:
        center = (side / 2, side / 2)
        ring = sorted(
            macros,
            key=lambda m: math.atan2(m.position[1] - center[1], m.position[0] - center[0]),
        )
        for i, m in enumerate(ring):
            nxt = ring[(i + 1) % len(ring)]
            if macro_count == 2 and i == 1:
                break
            links.append(
                BackhaulLink(len(links), m.bs_id, nxt.bs_id, link_capacity * 2, link_latency)
            )

    topo = NetworkTopology(stations, links, ue_count, side, home_link, alt_macro)

    positions = rng.uniform(0.0, side, size=(ue_count, 2))
    speeds = np.clip(rng.normal(mean_speed, speed_sigma, size=ue_count), 0.0, v_max)
    headings = rng.uniform(-math.pi, math.pi, size=ue_count)
    bs_pos = topo.positions()
    bs_rad = topo.radii()
    d = np.linalg.norm(positions[:, None, :] - bs_pos[None, :, :], axis=2)
    margin = 1.0 - d / bs_rad[None, :]
    serving = np.argmax(margin, axis=1)

    ues = []
    for i in range(ue_count):
        if margin[i, serving[i]] < 0:
            raise ConfigurationError(f"UE {i} not covered by any base station")
        ues.append(
            UserEquipment(
                ue_id=i,
                position=(float(positions[i, 0]), float(positions[i, 1])),
                velocity=(
                    float(speeds[i] * math.cos(headings[i])),
                    float(speeds[i] * math.sin(headings[i])),
                ),
                serving_bs=int(serving[i]),
                session_active=True,
                sla_class="latency_bound" if i % 2 == 0 else "throughput_bound",
            )
        )
    return topo, ues
