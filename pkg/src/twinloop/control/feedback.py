"""Closed-loop outcome collection.

After an action enforces, the collector watches the triggering node's anomaly
score for a horizon of H steps. Resolution means the score dipped below the
detection threshold within the horizon; outcomes where the pre- and
post-action score levels are indistinguishable are tagged neutral so the
management feedback applies no signal.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .translate import ManagementAction


@dataclass
class FeedbackRecord:
    intent_id: str
    node_id: str
    policy_id: int
    enforce_step: int
    pre_score: float
    post_score: float
    resolution: bool
    neutral: bool


@dataclass
class _Watch:
    action: ManagementAction
    node_id: str
    enforce_step: int
    pre_score: float
    post_scores: list[float] = field(default_factory=list)
    dipped: bool = False


class OutcomeCollector:
    def __init__(self, horizon: int = 10, threshold: float = 0.7,
                 neutral_margin: float = 0.02) -> None:
        self.horizon = horizon
        self.threshold = threshold
        self.neutral_margin = neutral_margin
        self._history: dict[str, deque[float]] = {}
        self._watches: list[_Watch] = []

    def observe_scores(self, scores: dict[str, float]) -> None:
        """Record this step's per-node anomaly scores (all nodes, fired or not)."""
        for node_id, score in scores.items():
            self._history.setdefault(node_id, deque(maxlen=2 * self.horizon)).append(score)

    def register(self, action: ManagementAction, enforce_step: int) -> None:
        node = action.intent.target
        hist = self._history.get(node)
        pre = sum(hist) / len(hist) if hist else 0.0
        self._watches.append(_Watch(action, node, enforce_step, pre))

    def poll(self, step: int, scores: dict[str, float]) -> list[FeedbackRecord]:
        """Advance all watches with this step's scores; emit records whose horizon elapsed."""
        ready: list[FeedbackRecord] = []
        keep: list[_Watch] = []
        for watch in self._watches:
            if step > watch.enforce_step:
                score = scores.get(watch.node_id, 0.0)
                watch.post_scores.append(score)
                if score < self.threshold:
                    watch.dipped = True
            if step >= watch.enforce_step + self.horizon:
                post = (sum(watch.post_scores) / len(watch.post_scores)
                        if watch.post_scores else watch.pre_score)
                neutral = (not watch.dipped
                           and abs(post - watch.pre_score) <= self.neutral_margin)
                ready.append(
                    FeedbackRecord(
                        intent_id=watch.action.intent.intent_id,
                        node_id=watch.node_id,
                        policy_id=watch.action.match.policy_id,
                        enforce_step=watch.enforce_step,
                        pre_score=watch.pre_score,
                        post_score=post,
                        resolution=watch.dipped,
                        neutral=neutral,
                    )
                )
            else:
                keep.append(watch)
        self._watches = keep
        return ready

    def collect_outcome(self, intent_id: str, step: int,
                        scores: dict[str, float]) -> FeedbackRecord | None:
        """Outcome for one action, or None while its horizon has not elapsed."""
        for watch in self._watches:
            if watch.action.intent.intent_id == intent_id:
                if step < watch.enforce_step + self.horizon:
                    return None
                records = self.poll(step, scores)
                for rec in records:
                    if rec.intent_id == intent_id:
                        return rec
                return None
        return None

    @property
    def pending(self) -> int:
        return len(self._watches)
