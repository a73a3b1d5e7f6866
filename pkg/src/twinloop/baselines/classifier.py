"""Supervised baseline: a two-layer softmax classifier with periodic retraining.

The classifier maps the current virtual state (never forecasts, never the
graph) to one of the action classes seen in its training logs, plus a
no-action class. In-run, labeled events accumulate from its own firings and
from observed SLA breaches; at every retraining boundary with fresh labels it
re-fits on the accumulated set, paying the training cost and blocking
decisions for the configured retraining latency.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..costs import CostMeter
from ..errors import ModelFormatError, PreconditionError, TrainingDivergenceError

FORMAT_VERSION = 1
NO_ACTION = "no_action"

CLASS_TARGET_SELECT = {
    "load_balance": "max_util",
    "scale_up": "max_util",
    "handover_optimize": "max_handover",
    "power_adjust": "max_error",
}


@dataclass
class ClassifierModel:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    classes: list[str]
    norm_min: np.ndarray
    norm_max: np.ndarray
    trained: bool = False
    train_log: list[dict] = field(default_factory=list)
    # base labeled event log; in-run retraining re-fits on this plus new events
    base_states: np.ndarray | None = None
    base_labels: list[str] = field(default_factory=list)

    @property
    def input_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[1]

    def normalize(self, x: np.ndarray) -> np.ndarray:
        span = np.where(self.norm_max - self.norm_min > 1e-9,
                        self.norm_max - self.norm_min, 1.0)
        return (x - self.norm_min) / span

    def forward(self, x: np.ndarray, meter: CostMeter | None = None) -> np.ndarray:
        h = np.tanh(x @ self.w1 + self.b1)
        logits = h @ self.w2 + self.b2
        if meter is not None:
            batch = 1 if x.ndim == 1 else x.shape[0]
            meter.add_macs("classifier_forward", batch * (self.w1.size + self.w2.size))
        return logits

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "kind": "action_classifier",
            "classes": self.classes,
            "shapes": {"w1": list(self.w1.shape), "w2": list(self.w2.shape)},
            "weights": {
                "w1": self.w1.reshape(-1).tolist(), "b1": self.b1.tolist(),
                "w2": self.w2.reshape(-1).tolist(), "b2": self.b2.tolist(),
            },
            "norm_min": self.norm_min.tolist(),
            "norm_max": self.norm_max.tolist(),
            "train_log": self.train_log,
            "base_states": None if self.base_states is None else self.base_states.tolist(),
            "base_labels": self.base_labels,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def from_json(cls, doc: dict) -> "ClassifierModel":
        if doc.get("format_version") != FORMAT_VERSION or doc.get("kind") != "action_classifier":
            raise ModelFormatError("unsupported classifier file")
        s1, s2 = tuple(doc["shapes"]["w1"]), tuple(doc["shapes"]["w2"])
        w = doc["weights"]
        model = cls(
            w1=np.array(w["w1"], dtype=float).reshape(s1),
            b1=np.array(w["b1"], dtype=float),
            w2=np.array(w["w2"], dtype=float).reshape(s2),
            b2=np.array(w["b2"], dtype=float),
            classes=list(doc["classes"]),
            norm_min=np.array(doc["norm_min"], dtype=float),
            norm_max=np.array(doc["norm_max"], dtype=float),
            trained=True,
            train_log=list(doc.get("train_log", [])),
            base_states=(None if doc.get("base_states") is None
                         else np.array(doc["base_states"], dtype=float)),
            base_labels=list(doc.get("base_labels", [])),
        )
        if model.w2.shape[1] != len(model.classes):
            raise ModelFormatError("class count does not match output width")
        return model

    @classmethod
    def load(cls, path: str | Path) -> "ClassifierModel":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ModelFormatError(f"cannot read classifier file {path}: {exc}") from exc
        return cls.from_json(doc)


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _fit(
    model: ClassifierModel,
    states: np.ndarray,
    labels: np.ndarray,
    epochs: int,
    learning_rate: float,
    momentum: float,
    meter: CostMeter | None,
) -> list[float]:
    x = model.normalize(states)
    onehot = np.eye(len(model.classes))[labels]
    vel = [np.zeros_like(a) for a in (model.w1, model.b1, model.w2, model.b2)]
    losses = []
    for epoch in range(epochs):
        h = np.tanh(x @ model.w1 + model.b1)
        probs = _softmax(h @ model.w2 + model.b2)
        loss = float(-np.mean(np.sum(onehot * np.log(probs + 1e-12), axis=1)))
        if not np.isfinite(loss):
            raise TrainingDivergenceError(epoch)
        losses.append(loss)
        dlogits = (probs - onehot) / len(x)
        gw2 = h.T @ dlogits
        gb2 = dlogits.sum(axis=0)
        dh = (dlogits @ model.w2.T) * (1.0 - h * h)
        gw1 = x.T @ dh
        gb1 = dh.sum(axis=0)
        for v, g, arr in zip(vel, (gw1, gb1, gw2, gb2),
                             (model.w1, model.b1, model.w2, model.b2)):
            v *= momentum
            v -= learning_rate * g
            arr += v
        if meter is not None:
            meter.add_macs("classifier_training", len(x) * 3 * (model.w1.size + model.w2.size))
    return losses


def train_classifier(
    states: np.ndarray,
    labels: list[str],
    classes: list[str],
    hidden_dim: int,
    epochs: int,
    seed: int,
    learning_rate: float = 0.3,
    momentum: float = 0.9,
    meter: CostMeter | None = None,
) -> ClassifierModel:
    """Initial fit on labeled event logs; class order is fixed by `classes`."""
    if NO_ACTION not in classes:
        raise PreconditionError(f"classes must include {NO_ACTION!r}")
    unknown = set(labels) - set(classes)
    if unknown:
        raise PreconditionError(f"labels outside class set: {sorted(unknown)}")
    states = np.asarray(states, dtype=float)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xC1A]))
    d = states.shape[1]
    model = ClassifierModel(
        w1=rng.uniform(-1, 1, size=(d, hidden_dim)) / np.sqrt(d),
        b1=np.zeros(hidden_dim),
        w2=rng.uniform(-1, 1, size=(hidden_dim, len(classes))) / np.sqrt(hidden_dim),
        b2=np.zeros(len(classes)),
        classes=list(classes),
        norm_min=states.min(axis=0),
        norm_max=states.max(axis=0),
    )
    label_idx = np.array([classes.index(l) for l in labels])
    losses = _fit(model, states, label_idx, epochs, learning_rate, momentum, meter)
    model.trained = True
    model.train_log.append({"event": "initial_fit", "examples": len(states),
                            "epochs": epochs, "final_loss": losses[-1] if losses else None})
    return model


def supervised_decide(
    state_vec: np.ndarray,
    model: ClassifierModel,
    meter: CostMeter | None = None,
) -> tuple[str, float]:
    """Argmax class for one state; deterministic, no abstention beyond no_action."""
    if not model.trained:
        raise PreconditionError("classifier has not been trained")
    if len(state_vec) != model.input_dim:
        raise PreconditionError(
            f"state width {len(state_vec)} != classifier input {model.input_dim}"
        )
    probs = _softmax(model.forward(model.normalize(np.asarray(state_vec, dtype=float)), meter))
    idx = int(np.argmax(probs))
    return model.classes[idx], float(probs[idx])


@dataclass
class SupervisedEngine:
    model: ClassifierModel
    retrain_interval: int = 200
    retrain_latency: int = 5
    retrain_epochs: int = 20
    fire_threshold: float = 0.5
    learning_rate: float = 0.1
    _events: list[tuple[np.ndarray, str]] = field(default_factory=list)
    _new_since_fit: int = 0
    blocked_until: int = -1
    retrain_events: list[dict] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.model.base_states is not None and not self._events:
            self._events = [
                (self.model.base_states[i], self.model.base_labels[i])
                for i in range(len(self.model.base_labels))
            ]

    def note_event(self, state_vec: np.ndarray, label: str) -> None:
        if label not in self.model.classes:
            label = self._pseudo_label(state_vec)
        self._events.append((np.asarray(state_vec, dtype=float), label))
        self._new_since_fit += 1

    def _pseudo_label(self, state_vec: np.ndarray) -> str:
        logits = self.model.forward(self.model.normalize(np.asarray(state_vec, dtype=float)))
        order = np.argsort(-logits)
        for idx in order:
            if self.model.classes[idx] != NO_ACTION:
                return self.model.classes[idx]
        return NO_ACTION

    def decide(
        self, state_vec: np.ndarray, step: int, meter: CostMeter | None = None
    ) -> tuple[str, float] | None:
        """Classify unless blocked by an in-progress retraining window."""
        if step < self.blocked_until:
            return None
        name, prob = supervised_decide(state_vec, self.model, meter)
        if name == NO_ACTION or prob < self.fire_threshold:
            return None
        self.note_event(state_vec, name)
        return name, prob

    def maybe_retrain(self, step: int, meter: CostMeter | None = None) -> bool:
        """Full re-fit on the accumulated event set at a boundary with fresh labels."""
        if step <= 0 or step % self.retrain_interval != 0:
            return False
        if self._new_since_fit == 0:
            self.model.train_log.append({"event": "retrain_skipped", "step": step})
            return False
        states = np.stack([s for s, _ in self._events])
        labels = np.array([self.model.classes.index(l) for _, l in self._events])
        losses = _fit(self.model, states, labels, self.retrain_epochs,
                      self.learning_rate, 0.9, meter)
        self._new_since_fit = 0
        self.blocked_until = step + self.retrain_latency
        entry = {"event": "retrain", "step": step, "examples": len(states),
                 "epochs": self.retrain_epochs, "final_loss": losses[-1] if losses else None}
        self.model.train_log.append(entry)
        self.retrain_events.append(entry)
        return True
