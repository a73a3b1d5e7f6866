"""Benchmark metric computation.

Response time: per ground-truth anomaly mark, the simulated delay until the
first enforced instruction touching an element implicated by that event; no
responding action in the run yields an explicit missed marker, never a
sample. SLA violation rate comes from the streaming session tracker, and
decision overhead from the controller's cost meter.
"""

from __future__ import annotations

from ..costs import CostMeter
from ..simcore.scenarios import CELL_EVENTS, ScenarioEvent, ScenarioSpec
from ..simcore.topology import NetworkTopology
from ..control.dispatch import ActionLogEntry

_CELL_VERBS = {"set_capacity", "set_admission", "migrate", "set_priority", "set_power",
               "switch_backhaul"}


def implicated_elements(
    event: ScenarioEvent, topo: NetworkTopology
) -> tuple[set[int], set[int]]:
    """(cells, links) an action must touch to count as responding to this event."""
    cells: set[int] = set(event.cells)
    links: set[int] = set(event.links)
    if event.kind in CELL_EVENTS and not cells:
        cells = set(range(topo.bs_count))
    for link_id in list(links):
        link = topo.links[link_id]
        cells.add(link.a)
        cells.add(link.b)
        for cell, lk in topo.home_link.items():
            if lk == link_id:
                cells.add(cell)
    return cells, links


def instruction_element(entry: ActionLogEntry) -> tuple[str, int]:
    if entry.verb == "isolate":
        return "link", entry.target
    if entry.verb == "shift_flows" and entry.params.get("domain") == "link":
        return "link", entry.target
    if entry.verb in _CELL_VERBS or entry.verb == "shift_flows":
        return "cell", entry.target
    return "cell", entry.target


def compute_response_time(
    spec: ScenarioSpec,
    log: list[ActionLogEntry],
    topo: NetworkTopology,
    step_seconds: float = 0.1,
) -> dict:
    """One sample or one missed marker per anomaly mark."""
    marks = list(spec.anomaly_marks)
    events = list(spec.events)
    # pair marks with events positionally when they align with the event starts
    if len(marks) == len(events) and sorted(marks) == sorted(ev.start for ev in events):
        paired: list[tuple[int, ScenarioEvent | None]] = list(zip(marks, events))
    else:
        by_start: dict[int, list[ScenarioEvent]] = {}
        for ev in events:
            by_start.setdefault(ev.start, []).append(ev)
        paired = [(m, (by_start.get(m) or [None])[0]) for m in marks]

    enforced = [e for e in log if e.enforce_step is not None and e.error is None]
    samples: list[float] = []
    per_mark: list[dict] = []
    missed = 0
    for mark, event in paired:
        if event is None:
            cells, links = set(range(topo.bs_count)), set(range(topo.link_count))
        else:
            cells, links = implicated_elements(event, topo)
        best: int | None = None
        for entry in enforced:
            if entry.enforce_step < mark:
                continue
            domain, element = instruction_element(entry)
            hit = element in cells if domain == "cell" else element in links
            if domain == "cell" and entry.verb == "shift_flows":
                to = entry.params.get("to")
                hit = hit or (isinstance(to, int) and to in cells)
            if hit and (best is None or entry.enforce_step < best):
                best = entry.enforce_step
        if best is None:
            missed += 1
            per_mark.append({"mark": mark, "missed": True})
        else:
            delay = (best - mark) * step_seconds
            samples.append(delay)
            per_mark.append({"mark": mark, "missed": False, "delay_s": delay})

    return {
        "samples_s": samples,
        "mean_s": (sum(samples) / len(samples)) if samples else None,
        "missed": missed,
        "marks": len(marks),
        "per_mark": per_mark,
    }


def compute_decision_overhead(meter: CostMeter) -> dict:
    snap = meter.snapshot()
    return {
        "compute_units": snap["compute_units"],
        "per_decision_units": (snap["compute_units"] / snap["decisions"]
                               if snap["decisions"] else 0.0),
        "decisions": snap["decisions"],
        "message_bytes": snap["message_bytes"],
        "comparisons": snap["comparisons"],
        "mac_breakdown": snap["mac_breakdown"],
        "counters": snap["counters"],
    }
