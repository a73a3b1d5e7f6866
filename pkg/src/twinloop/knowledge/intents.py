"""Intent derivation: anomaly reports to high-level directives via a rule table.

The table is ordered data (shipped as JSON): the first row whose (node kind,
feature group) matches one of a report's top contributing features wins, so a
node yields at most one intent per step. Urgency is the anomaly score, with a
bonus once the same node has stayed anomalous past the escalation window.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError, ConsistencyError
from .graph import KnowledgeGraph, NODE_KINDS
from .reasoning import AnomalyReport, BaselineTracker

INTENT_KINDS = (
    "reroute_traffic",
    "load_balance",
    "scale_up",
    "scale_down",
    "migrate_function",
    "restrict_access",
    "handover_optimize",
    "admission_control",
    "slice_reconfigure",
    "power_adjust",
    "backhaul_switch",
    "priority_boost",
    "congestion_throttle",
    "fault_isolate",
    "cache_prefetch",
)

CONTEXT_DIM = 8  # node-kind one-hot (4) + three clipped z-scores + score


@dataclass
class Intent:
    intent_id: str
    kind: str
    target: str        # node id
    urgency: float
    context: np.ndarray
    origin_step: int

    def __post_init__(self) -> None:
        if self.kind not in INTENT_KINDS:
            raise ConsistencyError(f"intent kind {self.kind!r} outside the taxonomy")
        if not 0.0 <= self.urgency <= 1.0:
            raise ConsistencyError(f"urgency {self.urgency} outside [0, 1]")


@dataclass
class IntentRule:
    node_kind: str
    feature_group: str   # "*" matches anything
    intent_kind: str


class IntentRuleTable:
    def __init__(self, rules: list[IntentRule]) -> None:
        for rule in rules:
            if rule.node_kind not in NODE_KINDS:
                raise ConfigurationError(f"rule references unknown node kind {rule.node_kind!r}")
            if rule.intent_kind not in INTENT_KINDS:
                raise ConfigurationError(f"rule maps to unknown intent {rule.intent_kind!r}")
        self.rules = rules

    @classmethod
    def load(cls, path: str | Path) -> "IntentRuleTable":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot load intent rule table {path}: {exc}") from exc
        return cls([IntentRule(r["node_kind"], r["feature_group"], r["intent_kind"])
                    for r in doc["rules"]])

    def match(self, node_kind: str, groups: list[str]) -> str | None:
        """First rule (table order) matching any of the contributing groups."""
        for rule in self.rules:
            if rule.node_kind != node_kind:
                continue
            if rule.feature_group == "*" or rule.feature_group in groups:
                return rule.intent_kind
        return None


def _context_vector(node_kind: str, report: AnomalyReport) -> np.ndarray:
    ctx = np.zeros(CONTEXT_DIM)
    ctx[NODE_KINDS.index(node_kind)] = 1.0
    for i, (_, z) in enumerate(report.contributing[:3]):
        ctx[4 + i] = float(np.clip(z / 5.0, -1.0, 1.0))
    ctx[7] = report.score
    return ctx


def derive_intents(
    reports: list[AnomalyReport],
    graph: KnowledgeGraph,
    table: IntentRuleTable,
    baselines: BaselineTracker | None = None,
    escalation_steps: int = 10,
    escalation_bonus: float = 0.1,
) -> list[Intent]:
    """Map this step's reports to at most one intent per node, deterministically."""
    best: dict[str, AnomalyReport] = {}
    for report in reports:
        if report.node_id not in graph.index:
            raise ConsistencyError(f"report for unknown node {report.node_id!r}")
        prev = best.get(report.node_id)
        if prev is None or report.score > prev.score:
            best[report.node_id] = report

    intents: list[Intent] = []
    for node_id in sorted(best):
        report = best[node_id]
        node = graph.node(node_id)
        groups = [g for g, _ in report.contributing]
        kind = table.match(node.kind, groups)
        if kind is None:
            continue
        urgency = report.score
        if baselines is not None:
            streak = baselines.persistence.get(node_id, 0)
            if streak > escalation_steps:
                urgency = min(1.0, urgency + escalation_bonus)
        intents.append(
            Intent(
                intent_id=f"i{graph.t}-{node_id}",
                kind=kind,
                target=node_id,
                urgency=float(urgency),
                context=_context_vector(node.kind, report),
                origin_step=graph.t,
            )
        )
    return intents
