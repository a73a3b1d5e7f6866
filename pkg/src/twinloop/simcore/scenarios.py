"""Scenario catalog: timed event schedules loaded from JSON documents.

Each scenario file fixes the event schedule, traffic intensity, mobility
level, and the ground-truth anomaly marks (the event start steps) used by the
benchmark to meter response times. The ten catalog entries ship with the
package; extra scenarios can be loaded from user files with the same schema.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..config import data_path
from ..errors import ConfigurationError

EVENT_KINDS = (
    "traffic_burst",
    "edge_congestion",
    "mobility_spike",
    "interference",
    "link_degradation",
    "chaining_delay",
    "resource_constraint",
    "backhaul_fault",
)

CELL_EVENTS = {
    "traffic_burst",
    "edge_congestion",
    "mobility_spike",
    "interference",
    "chaining_delay",
    "resource_constraint",
}
LINK_EVENTS = {"link_degradation", "backhaul_fault"}


@dataclass
class ScenarioEvent:
    kind: str
    start: int
    duration: int
    magnitude: float
    cells: tuple[int, ...] = ()
    links: tuple[int, ...] = ()
    ramp_steps: int = 12

    def active(self, t: int) -> bool:
        return self.start <= t < self.start + self.duration

    def ramp(self, t: int) -> float:
        """Effect level in [0, 1]: linear ramp-in, full hold, instant release."""
        if not self.active(t):
            return 0.0
        if self.ramp_steps <= 0:
            return 1.0
        return min(1.0, (t - self.start + 1) / self.ramp_steps)


@dataclass
class ScenarioSpec:
    scenario_id: int
    description: str
    events: list[ScenarioEvent] = field(default_factory=list)
    anomaly_marks: list[int] = field(default_factory=list)
    ue_count: int | None = None
    traffic_intensity: float = 0.5
    mean_speed: float | None = None

    def validate_horizon(self, horizon: int) -> None:
        for mark in self.anomaly_marks:
            if not 0 <= mark < horizon:
                raise ConfigurationError(
                    f"scenario {self.scenario_id}: anomaly mark {mark} outside horizon {horizon}"
                )
        for ev in self.events:
            if ev.start >= horizon:
                raise ConfigurationError(
                    f"scenario {self.scenario_id}: event at step {ev.start} outside horizon {horizon}"
                )

    def events_active(self, t: int) -> list[ScenarioEvent]:
        return [ev for ev in self.events if ev.active(t)]


def _parse_event(raw: dict, where: str) -> ScenarioEvent:
    kind = raw.get("kind")
    if kind not in EVENT_KINDS:
        raise ConfigurationError(f"{where}: unknown event kind {kind!r}")
    ev = ScenarioEvent(
        kind=kind,
        start=int(raw["start"]),
        duration=int(raw["duration"]),
        magnitude=float(raw["magnitude"]),
        cells=tuple(int(c) for c in raw.get("cells", [])),
        links=tuple(int(l) for l in raw.get("links", [])),
        ramp_steps=int(raw.get("ramp_steps", 12)),
    )
    if ev.start < 0 or ev.duration < 1:
        raise ConfigurationError(f"{where}: event window invalid (start {ev.start}, duration {ev.duration})")
    if kind in LINK_EVENTS and not ev.links:
        raise ConfigurationError(f"{where}: {kind} requires target links")
    return ev


def parse_scenario(raw: dict, where: str = "scenario") -> ScenarioSpec:
    try:
        spec = ScenarioSpec(
            scenario_id=int(raw["scenario_id"]),
            description=str(raw["description"]),
            events=[_parse_event(e, where) for e in raw.get("events", [])],
            anomaly_marks=[int(m) for m in raw.get("anomaly_marks", [])],
            ue_count=int(raw["ue_count"]) if raw.get("ue_count") is not None else None,
            traffic_intensity=float(raw.get("traffic_intensity", 0.5)),
            mean_speed=float(raw["mean_speed"]) if raw.get("mean_speed") is not None else None,
        )
    except KeyError as exc:
        raise ConfigurationError(f"{where}: missing field {exc}") from exc
    # default: one ground-truth mark per scheduled event, at its start step
    if not spec.anomaly_marks and spec.events:
        spec.anomaly_marks = [ev.start for ev in spec.events]
    return spec


def load_scenario_file(path: str | Path) -> ScenarioSpec:
    p = Path(path)
    try:
        raw = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot load scenario file {p}: {exc}") from exc
    return parse_scenario(raw, where=str(p))


def load_catalog(scenario_dir: str | Path | None = None) -> dict[int, ScenarioSpec]:
    """Load the ten shipped scenarios, or every *.json in a custom directory."""
    base = Path(scenario_dir) if scenario_dir else data_path("scenarios")
    catalog: dict[int, ScenarioSpec] = {}
    for p in sorted(base.glob("*.json")):
        spec = load_scenario_file(p)
        if spec.scenario_id in catalog:
            raise ConfigurationError(f"duplicate scenario id {spec.scenario_id} in {p}")
        catalog[spec.scenario_id] = spec
    if not catalog:
        raise ConfigurationError(f"no scenario files found under {base}")
    return catalog


def scenario_by_id(scenario_id: int, scenario_dir: str | Path | None = None) -> ScenarioSpec:
    catalog = load_catalog(scenario_dir)
    if scenario_id not in catalog:
        raise ConfigurationError(f"scenario {scenario_id} not in catalog {sorted(catalog)}")
    return catalog[scenario_id]
