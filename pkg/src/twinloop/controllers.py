"""The three swappable controllers behind one observe -> decide contract.

Every controller sees the same per-step inputs (telemetry frame plus the
current virtual state) and returns zero or more management actions; the
runner translates and dispatches them identically. Capability isolation is
enforced structurally: the static engine touches only current-step
aggregates, the supervised engine only the current virtual state, and only
the closed-loop controller owns a forecaster and a knowledge graph.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .baselines.classifier import CLASS_TARGET_SELECT, SupervisedEngine
from .baselines.rules import StaticRuleEngine, select_target_cell
from .config import RunConfig
from .control.feedback import FeedbackRecord, OutcomeCollector
from .control.translate import ManagementAction
from .costs import CostMeter
from .knowledge.graph import build_graph
from .knowledge.intents import CONTEXT_DIM, Intent, IntentRuleTable, derive_intents
from .knowledge.reasoning import BaselineTracker, ReadoutConfig, detect_anomalies, message_pass, score_nodes
from .management.encoder import FeedbackOutcome, SemanticEncoder
from .management.library import MatchResult, PolicyLibrary
from .simcore.world import TelemetryFrame, World
from .twin.features import VirtualState
from .twin.forecaster import Forecaster


def _pseudo_match(policy_name: str, library: PolicyLibrary) -> MatchResult:
    policy = library.by_name(policy_name)
    return MatchResult(
        intent_id=f"{policy_name}",
        policy_id=policy.policy_id,
        policy_name=policy.name,
        score=1.0,
        runner_up_id=None,
        runner_up_score=None,
    )


def _baseline_intent(policy_name: str, cell: int, step: int, urgency: float = 0.6) -> Intent:
    return Intent(
        intent_id=f"{policy_name}-{step}-gnb{cell}",
        kind=policy_name,
        target=f"gnb{cell}",
        urgency=urgency,
        context=np.zeros(CONTEXT_DIM),
        origin_step=step,
    )


class ZslDtController:
    """Twin-forecast + graph-reasoning + zero-shot matching closed loop."""

    name = "zsl-dt"

    def __init__(
        self,
        config: RunConfig,
        world: World,
        forecaster: Forecaster,
        encoder: SemanticEncoder,
        readout: ReadoutConfig,
        rule_table: IntentRuleTable,
    ) -> None:
        self.config = config
        self.world = world
        self.forecaster = forecaster
        self.encoder = encoder
        self.readout = readout
        self.rule_table = rule_table
        self.meter = CostMeter()
        self.baselines = BaselineTracker(decay=config.knowledge.ema_decay)
        self.collector = OutcomeCollector(
            horizon=config.control.resolution_horizon,
            threshold=config.knowledge.score_threshold,
        )
        self._history: deque[VirtualState] = deque(maxlen=config.twin.k)
        self._pending_forecasts: dict[int, tuple[list[VirtualState], VirtualState]] = {}
        self._latest_forecast: VirtualState | None = None
        self._reports = []
        self._cooldown: dict[str, int] = {}
        self._actions: dict[str, ManagementAction] = {}
        self._registered: set[str] = set()
        self.forecast_mse: list[float] = []
        self.feedback_records: list[FeedbackRecord] = []

    def observe(self, step: int, frame: TelemetryFrame, state: VirtualState) -> None:
        cfg = self.config
        # settle a matured forecast against the observed state, then refine online
        pending = self._pending_forecasts.pop(state.t, None)
        if pending is not None:
            history, predicted = pending
            err = self.forecaster.normalize(predicted.vector) - self.forecaster.normalize(
                state.vector
            )
            self.forecast_mse.append(float(np.mean(err * err)))
            if cfg.twin.feedback_enabled:
                self.forecaster.feedback_update(history, state, self.meter)

        self._history.append(state)
        if len(self._history) == cfg.twin.k:
            history = list(self._history)
            forecast = self.forecaster.forecast(history, self.meter)
            self.meter.bump("forecast_calls")
            self._pending_forecasts[forecast.t] = (history, forecast)
            self._latest_forecast = forecast

        forecast_view = self._latest_forecast if self._latest_forecast is not None else state
        graph = build_graph(state, forecast_view, self.world.topo,
                            slices=cfg.knowledge.slices)
        self.meter.bump("graph_builds")
        hidden = message_pass(graph, layers=cfg.knowledge.layers, meter=self.meter)
        scores = score_nodes(graph, hidden, self.readout, self.meter)
        self._reports = detect_anomalies(graph, hidden, self.readout, self.baselines,
                                         scores=scores)
        self._graph = graph
        self.baselines.update(graph)
        self.baselines.note_reports({r.node_id for r in self._reports})

        self.collector.observe_scores(scores)
        for record in self.collector.poll(step, scores):
            self.feedback_records.append(record)
            resolved = None if record.neutral else record.resolution
            if not record.neutral and not record.resolution:
                # count as negative only when the anomaly clearly worsened
                resolved = False if record.post_score > record.pre_score + 0.02 else None
            self.encoder.feedback_update(
                FeedbackOutcome(intent_id=record.intent_id, resolved=resolved), self.meter
            )
            self._finalize(record)

    def _finalize(self, record: FeedbackRecord) -> None:
        self._actions.pop(record.intent_id, None)
        self._registered.discard(record.intent_id)

    def decide(self, step: int) -> list[ManagementAction]:
        actions: list[ManagementAction] = []
        if not self._reports:
            return actions
        intents = derive_intents(
            self._reports,
            self._graph,
            self.rule_table,
            self.baselines,
            escalation_steps=self.config.knowledge.escalation_steps,
            escalation_bonus=self.config.knowledge.escalation_bonus,
        )
        for intent in intents:
            if self._cooldown.get(intent.target, -1) >= step:
                continue
            match = self.encoder.match_intent(intent, self.meter)
            template = self.encoder.library.by_id(match.policy_id).action_template
            action = ManagementAction(intent=intent, match=match,
                                      template=template, issue_step=step)
            self._cooldown[intent.target] = step + self.config.control.action_cooldown
            self._actions[intent.intent_id] = action
            actions.append(action)
        return actions

    def on_enforced(self, intent_id: str, enforce_step: int) -> None:
        if intent_id in self._registered:
            return
        action = self._actions.get(intent_id)
        if action is not None:
            self.collector.register(action, enforce_step)
            self._registered.add(intent_id)


class StaticController:
    """Ordered threshold rules over current-step aggregates."""

    name = "static"

    def __init__(self, config: RunConfig, engine: StaticRuleEngine,
                 library: PolicyLibrary) -> None:
        self.config = config
        self.engine = engine
        self.library = library
        self.meter = CostMeter()
        self._frame: TelemetryFrame | None = None
        self._aggregates: dict[str, float] | None = None

    def observe(self, step: int, frame: TelemetryFrame, state: VirtualState) -> None:
        self._frame = frame
        act = frame.active
        self._aggregates = {
            "mean_latency": float(frame.latency[act].mean()) if act.any() else 0.0,
            "p95_latency": float(np.percentile(frame.latency[act], 95)) if act.any() else 0.0,
            "mean_util": float(frame.bs_util.mean()),
            "max_cell_util": float(frame.bs_util.max()),
            "mean_error": float(frame.error[act].mean()) if act.any() else 0.0,
            "handover_rate": float(frame.bs_mobility.max()),
            "min_link_up": float(frame.link_up.min()) if len(frame.link_up) else 1.0,
            "max_link_util": float(frame.link_load_frac.max()) if len(frame.link_load_frac) else 0.0,
        }

    def decide(self, step: int) -> list[ManagementAction]:
        if self._aggregates is None:
            return []
        hit = self.engine.decide(self._aggregates, self._frame, step, self.meter)
        if hit is None:
            return []
        policy_name, cell = hit
        intent = _baseline_intent(policy_name, cell, step)
        match = _pseudo_match(policy_name, self.library)
        template = self.library.by_id(match.policy_id).action_template
        return [ManagementAction(intent=intent, match=match, template=template,
                                 issue_step=step)]

    def on_enforced(self, intent_id: str, enforce_step: int) -> None:
        pass


class SupervisedController:
    """Closed-set state classifier with periodic retraining."""

    name = "supervised"

    def __init__(self, config: RunConfig, engine: SupervisedEngine,
                 library: PolicyLibrary) -> None:
        self.config = config
        self.engine = engine
        self.library = library
        self.meter = CostMeter()
        self._frame: TelemetryFrame | None = None
        self._state: VirtualState | None = None
        self._cooldown: dict[tuple[str, int], int] = {}
        self._breach_cool = -1

    def observe(self, step: int, frame: TelemetryFrame, state: VirtualState) -> None:
        self._frame = frame
        self._state = state
        if self.engine.maybe_retrain(step, self.meter):
            self.meter.bump("retrain_events")

    def note_breach(self, step: int) -> None:
        """An SLA breach onset was observed; log it as a labeled event."""
        if step <= self._breach_cool or self._state is None:
            return
        self._breach_cool = step + 25
        self.engine.note_event(self._state.vector, "")

    def decide(self, step: int) -> list[ManagementAction]:
        if self._state is None:
            return []
        hit = self.engine.decide(self._state.vector, step, self.meter)
        if hit is None:
            return []
        class_name, prob = hit
        selector = CLASS_TARGET_SELECT.get(class_name, "max_util")
        cell = select_target_cell(selector, self._frame)
        key = (class_name, cell)
        if self._cooldown.get(key, -1) >= step:
            return []
        self._cooldown[key] = step + self.config.baseline.action_cooldown
        intent = _baseline_intent(class_name, cell, step, urgency=float(prob))
        match = _pseudo_match(class_name, self.library)
        template = self.library.by_id(match.policy_id).action_template
        return [ManagementAction(intent=intent, match=match, template=template,
                                 issue_step=step)]

    def on_enforced(self, intent_id: str, enforce_step: int) -> None:
        pass


Controller = ZslDtController | StaticController | SupervisedController
