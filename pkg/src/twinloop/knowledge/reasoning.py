"""Graph reasoning: message passing, rolling baselines, and anomaly scoring.

Message passing is fixed-depth mean aggregation with diagonal non-negative
weights: h' = relu(w_self * h + w_nbr * mean(neighbor h)). Scoring applies a
per-kind linear read-out with a logistic squashing; contributing features are
ranked by their z-scores against exponentially decaying baselines.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..costs import CostMeter
from ..errors import ConfigurationError, PreconditionError
from .graph import FEATURE_WIDTH, GRAPH_FEATURE_GROUPS, KnowledgeGraph, N_GROUPS, group_index


def message_pass(
    graph: KnowledgeGraph,
    layers: int = 2,
    w_self: float = 0.8,
    w_nbr: float = 0.2,
    meter: CostMeter | None = None,
) -> np.ndarray:
    """Fixed-depth smoothing over the graph; isolated nodes see a zero neighbor mean."""
    if layers < 1:
        raise PreconditionError("layers must be >= 1")
    h = graph.features.copy()
    nbrs = graph.neighbors()
    for _ in range(layers):
        agg = np.zeros_like(h)
        for i, ns in enumerate(nbrs):
            if ns:
                agg[i] = h[ns].mean(axis=0)
        h = np.maximum(w_self * h + w_nbr * agg, 0.0)
    if meter is not None:
        deg = sum(len(ns) for ns in nbrs)
        meter.add_macs("message_pass", layers * (2 * len(graph.nodes) + deg) * FEATURE_WIDTH)
    return h


@dataclass
class ReadoutConfig:
    """Per-kind linear read-out over message-passed features."""

    weights: dict[str, dict[str, float]]   # kind -> {"group.component": weight}
    bias: dict[str, float]
    threshold: float = 0.7

    @classmethod
    def load(cls, path: str | Path) -> "ReadoutConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot load read-out config {path}: {exc}") from exc
        for kind, wmap in doc["weights"].items():
            for key in wmap:
                group, comp = key.rsplit(".", 1)
                if group not in GRAPH_FEATURE_GROUPS or comp not in ("cur", "fcst", "delta"):
                    raise ConfigurationError(f"read-out references unknown feature {key!r}")
        return cls(weights=doc["weights"], bias=doc["bias"],
                   threshold=float(doc.get("threshold", 0.7)))

    def weight_vector(self, kind: str) -> np.ndarray:
        w = np.zeros(FEATURE_WIDTH)
        for key, value in self.weights.get(kind, {}).items():
            group, comp = key.rsplit(".", 1)
            w[group_index(group, comp)] = value
        return w


@dataclass
class AnomalyReport:
    node_id: str
    score: float
    contributing: list[tuple[str, float]]   # (feature group, z-score), top-3 by |z|
    detected_step: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise PreconditionError(f"anomaly score {self.score} outside [0, 1]")


class BaselineTracker:
    """Rolling per-node feature baselines: exponential moving mean and variance."""

    def __init__(self, decay: float = 0.95, eps: float = 1e-3) -> None:
        self.decay = decay
        self.eps = eps
        self.mean: dict[str, np.ndarray] = {}
        self.var: dict[str, np.ndarray] = {}
        self.persistence: dict[str, int] = {}

    def update(self, graph: KnowledgeGraph) -> None:
        """EMA update from the current-value section of every node's features."""
        for i, node in enumerate(graph.nodes):
            x = graph.features[i, :N_GROUPS]
            if node.node_id not in self.mean:
                self.mean[node.node_id] = x.copy()
                self.var[node.node_id] = np.full(N_GROUPS, self.eps)
                continue
            m = self.mean[node.node_id]
            diff = x - m
            self.mean[node.node_id] = self.decay * m + (1 - self.decay) * x
            self.var[node.node_id] = self.decay * self.var[node.node_id] + (
                1 - self.decay
            ) * diff * diff
        # drop nodes that left the graph
        live = {n.node_id for n in graph.nodes}
        for stale in set(self.mean) - live:
            del self.mean[stale], self.var[stale]
            self.persistence.pop(stale, None)

    def zscores(self, node_id: str, current: np.ndarray) -> np.ndarray:
        if node_id not in self.mean:
            return np.zeros(N_GROUPS)
        std = np.sqrt(np.maximum(self.var[node_id], self.eps))
        return (current - self.mean[node_id]) / std

    def note_reports(self, reported: set[str]) -> None:
        """Track consecutive report streaks per node for urgency escalation."""
        for node_id in reported:
            self.persistence[node_id] = self.persistence.get(node_id, 0) + 1
        for node_id in list(self.persistence):
            if node_id not in reported:
                del self.persistence[node_id]


def score_nodes(
    graph: KnowledgeGraph,
    hidden: np.ndarray,
    readout: ReadoutConfig,
    meter: CostMeter | None = None,
) -> dict[str, float]:
    """Logistic read-out score for every node (fired or not)."""
    if hidden.shape != graph.features.shape:
        raise PreconditionError("hidden matrix does not match this graph")
    kind_weights = {kind: readout.weight_vector(kind)
                    for kind in {n.kind for n in graph.nodes}}
    scores: dict[str, float] = {}
    for i, node in enumerate(graph.nodes):
        w = kind_weights[node.kind]
        logit = float(hidden[i] @ w) + readout.bias.get(node.kind, 0.0)
        scores[node.node_id] = float(1.0 / (1.0 + np.exp(-logit)))
    if meter is not None:
        meter.add_macs("anomaly_readout", len(graph.nodes) * FEATURE_WIDTH)
    return scores


def detect_anomalies(
    graph: KnowledgeGraph,
    hidden: np.ndarray,
    readout: ReadoutConfig,
    baselines: BaselineTracker,
    meter: CostMeter | None = None,
    scores: dict[str, float] | None = None,
) -> list[AnomalyReport]:
    """Score every node; emit a report with top-3 contributing features when above threshold."""
    if scores is None:
        scores = score_nodes(graph, hidden, readout, meter)
    reports: list[AnomalyReport] = []
    for i, node in enumerate(graph.nodes):
        score = scores[node.node_id]
        if score > readout.threshold:
            z = baselines.zscores(node.node_id, graph.features[i, :N_GROUPS])
            # only groups this node actually carries
            mask = graph.features[i, :N_GROUPS] != 0.0
            mask |= np.array([node.kind == "link_fn" and g in ("link_load", "link_up")
                              for g in GRAPH_FEATURE_GROUPS])
            zeff = np.where(mask, np.abs(z), -1.0)
            top = np.argsort(-zeff, kind="stable")[:3]
            contributing = [(GRAPH_FEATURE_GROUPS[j], float(z[j])) for j in top]
            reports.append(
                AnomalyReport(
                    node_id=node.node_id,
                    score=score,
                    contributing=contributing,
                    detected_step=graph.t,
                )
            )
    return reports
