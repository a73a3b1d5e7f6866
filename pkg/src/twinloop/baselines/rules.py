"""Static policy control: an ordered table of threshold rules.

Conditions reference current-step aggregates only (no forecasts, no graph).
The first matching rule fires; nothing matches, nothing happens. Rules that
fired stay quiet for a cooldown so a sustained condition does not re-trigger
every step. The shipped table is generated from the benign and single-cause
conditions the operator has seen, which is exactly why compound or unfamiliar
patterns fall through.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..costs import CostMeter
from ..errors import ConfigurationError
from ..simcore.world import TelemetryFrame

AGGREGATE_METRICS = (
    "mean_latency",
    "p95_latency",
    "mean_util",
    "max_cell_util",
    "mean_error",
    "handover_rate",
    "min_link_up",
    "max_link_util",
)

TARGET_SELECTORS = ("max_util", "max_handover", "max_error", "max_latency")


@dataclass
class Rule:
    metric: str
    op: str              # ">" or "<"
    threshold: float
    action: str          # policy name
    target_select: str = "max_util"

    def matches(self, aggregates: dict[str, float]) -> bool:
        value = aggregates[self.metric]
        return value > self.threshold if self.op == ">" else value < self.threshold


@dataclass
class RuleSet:
    rules: list[Rule]
    cooldown_steps: int = 40

    def __post_init__(self) -> None:
        for rule in self.rules:
            if rule.metric not in AGGREGATE_METRICS:
                raise ConfigurationError(f"rule metric {rule.metric!r} is not an aggregate")
            if rule.op not in (">", "<"):
                raise ConfigurationError(f"rule comparator {rule.op!r} must be > or <")
            if rule.target_select not in TARGET_SELECTORS:
                raise ConfigurationError(f"unknown target selector {rule.target_select!r}")

    @classmethod
    def load(cls, path: str | Path) -> "RuleSet":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot load rule set {path}: {exc}") from exc
        rules = [Rule(r["metric"], r["op"], float(r["threshold"]), r["action"],
                      r.get("target_select", "max_util")) for r in doc["rules"]]
        return cls(rules=rules, cooldown_steps=int(doc.get("cooldown_steps", 40)))


def static_decide(
    aggregates: dict[str, float],
    ruleset: RuleSet,
    meter: CostMeter | None = None,
) -> Rule | None:
    """Ordered evaluation; returns the first matching rule or None."""
    for rule in ruleset.rules:
        if meter is not None:
            meter.add_comparisons(1)
        if rule.matches(aggregates):
            return rule
    return None


def select_target_cell(selector: str, frame: TelemetryFrame) -> int:
    if selector == "max_util":
        return int(np.argmax(frame.bs_util))
    if selector == "max_handover":
        return int(np.argmax(frame.bs_mobility))
    if selector == "max_error":
        return int(np.argmax(frame.bs_error))
    return int(np.argmax(frame.bs_latency))


@dataclass
class StaticRuleEngine:
    ruleset: RuleSet
    _last_fired: dict[int, int] = field(default_factory=dict)

    def decide(
        self,
        aggregates: dict[str, float],
        frame: TelemetryFrame,
        step: int,
        meter: CostMeter | None = None,
    ) -> tuple[str, int] | None:
        """(policy name, target cell) of the first matching non-cooling rule."""
        for idx, rule in enumerate(self.ruleset.rules):
            if meter is not None:
                meter.add_comparisons(1)
            if not rule.matches(aggregates):
                continue
            last = self._last_fired.get(idx)
            if last is not None and step - last < self.ruleset.cooldown_steps:
                continue
            self._last_fired[idx] = step
            return rule.action, select_target_cell(rule.target_select, frame)
        return None
