"""Offline model building: twin pre-training, encoder fitting, baseline fitting.

All three jobs are deterministic functions of the run configuration. Results
are cached in-process as serialized documents and hydrated into fresh model
objects per run, so state accumulated inside one run can never leak into
another.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from ..config import RunConfig, data_path
from ..errors import ConfigurationError
from ..knowledge.graph import NODE_KINDS
from ..knowledge.intents import CONTEXT_DIM, INTENT_KINDS
from ..baselines.classifier import NO_ACTION, ClassifierModel, train_classifier
from ..management.encoder import (
    FEATURE_WIDTH,
    SemanticEncoder,
    train_encoder,
)
from ..management.library import PolicyLibrary
from ..twin.features import FeatureRegistry
from ..twin.forecaster import ForecastConfig, Forecaster, train_forecaster

_CACHE: dict[str, dict] = {}

EVENT_CLASS = {
    "traffic_burst": "load_balance",
    "edge_congestion": "scale_up",
    "resource_constraint": "scale_up",
    "mobility_spike": "handover_optimize",
    "interference": "power_adjust",
    "chaining_delay": "priority_boost",
}

# node kind a given intent kind typically originates from (for synthetic pairs)
_KIND_NODE = {
    "reroute_traffic": "link_fn",
    "backhaul_switch": "link_fn",
    "fault_isolate": "link_fn",
    "admission_control": "slice",
    "slice_reconfigure": "slice",
}


def _cache_key(name: str, payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str)
    return name + ":" + hashlib.sha256(blob.encode()).hexdigest()


def load_library(config: RunConfig) -> PolicyLibrary:
    path = config.paths.policy_library or data_path("policy_library.json")
    return PolicyLibrary.load(path, dim=config.management.embed_dim)


def _twin_payload(config: RunConfig) -> dict:
    import dataclasses

    return {
        "twin": dataclasses.asdict(config.twin),
        "sim": dataclasses.asdict(config.sim),
        "scenario_dir": config.paths.scenario_dir,
    }


def train_twin_job(config: RunConfig) -> tuple[dict, list[float]]:
    """Pre-train the forecaster on observe-only warm-up traces; returns (doc, losses)."""
    from .runner import observe_run  # local import to avoid a cycle

    twin = config.twin
    traces = []
    for sid in twin.warmup_scenarios:
        trace, _ = observe_run(config, sid, seed=twin.warmup_seed,
                               horizon=twin.warmup_steps)
        traces.append(trace)
    registry = _registry(config)
    fconfig = ForecastConfig(
        k=twin.k, delta=twin.delta, hidden_dim=twin.hidden_dim,
        learning_rate=twin.learning_rate, momentum=twin.momentum,
        epochs=twin.epochs, grad_clip=twin.grad_clip, online_lr=twin.online_lr,
        replay_capacity=twin.replay_capacity, refit_every=twin.refit_every,
        refit_batch=twin.refit_batch,
    )
    forecaster, losses = train_forecaster(
        traces, fconfig, seed=twin.warmup_seed,
        stat_dim=registry.stat_dim, struct_dim=registry.struct_dim,
        fraction_mask=registry.fraction_mask(),
    )
    return forecaster.to_json(), losses


def _registry(config: RunConfig) -> FeatureRegistry:
    # link count for the default layout: one per small cell plus the macro ring
    bs = config.sim.bs_count
    macro = max(1, bs // 3)
    ring = macro if macro > 2 else (1 if macro == 2 else 0)
    return FeatureRegistry(bs, (bs - macro) + ring)


def synthetic_training_pairs(
    library: PolicyLibrary, withheld: tuple[str, ...]
) -> list[tuple[np.ndarray, int]]:
    """Curated intent->policy pairs covering every non-withheld intent kind."""
    pairs = []
    for kind in INTENT_KINDS:
        if kind in withheld:
            continue
        policy_id = library.by_name(kind).policy_id
        node_kind = _KIND_NODE.get(kind, "gnb")
        for urgency, z in ((0.55, 0.4), (0.75, 0.55), (0.95, 0.7)):
            x = np.zeros(FEATURE_WIDTH)
            x[INTENT_KINDS.index(kind)] = 1.0
            ctx = np.zeros(CONTEXT_DIM)
            ctx[NODE_KINDS.index(node_kind)] = 1.0
            ctx[4:7] = (z, z * 0.7, z * 0.4)
            ctx[7] = urgency
            x[len(INTENT_KINDS): len(INTENT_KINDS) + CONTEXT_DIM] = ctx
            x[-1] = urgency
            pairs.append((x, policy_id))
    return pairs


def train_encoder_job(config: RunConfig) -> tuple[dict, object]:
    """Fit the semantic encoder with the configured policies withheld; returns (doc, report)."""
    library = load_library(config)
    withheld = tuple(config.management.withheld_policies)
    for name in withheld:
        library.by_name(name)  # raises if unknown
    pairs = synthetic_training_pairs(library, withheld)
    params, report = train_encoder(
        pairs, library, seed=config.management.train_seed,
        margin=config.management.margin,
        learning_rate=config.management.learning_rate,
        epochs=config.management.epochs,
        dim=config.management.embed_dim,
    )
    encoder = SemanticEncoder(
        params, library,
        feedback_lr=config.management.feedback_scale * config.management.learning_rate,
        withheld=withheld,
    )
    return encoder.to_json(), report


def train_baseline_job(config: RunConfig) -> tuple[dict, dict]:
    """Fit the supervised classifier on labeled logs from the seen scenarios."""
    from .runner import observe_run
    from ..simcore.scenarios import scenario_by_id

    states_all: list[np.ndarray] = []
    labels_all: list[str] = []
    scen_dir = config.paths.scenario_dir or None
    for sid in config.baseline.train_scenarios:
        spec = scenario_by_id(sid, scen_dir)
        trace, _ = observe_run(config, sid, seed=config.baseline.train_seed,
                               horizon=config.baseline.train_steps)
        labels = [NO_ACTION] * len(trace)
        for ev in spec.events:
            cls = EVENT_CLASS.get(ev.kind)
            if cls is None:
                continue
            lo = ev.start + max(1, ev.ramp_steps // 2)
            hi = min(ev.start + ev.duration, len(trace))
            for t in range(lo, hi):
                labels[t] = cls
        # drop warm-up steps; subsample the normal class to balance
        for t in range(40, len(trace)):
            if labels[t] == NO_ACTION and t % 3 != 0:
                continue
            states_all.append(trace[t])
            labels_all.append(labels[t])

    classes = [NO_ACTION] + sorted({l for l in labels_all if l != NO_ACTION})
    states = np.stack(states_all)
    model = train_classifier(
        states, labels_all, classes,
        hidden_dim=config.baseline.classifier_hidden,
        epochs=config.baseline.classifier_epochs,
        seed=config.baseline.train_seed,
    )
    model.base_states = states
    model.base_labels = list(labels_all)
    summary = {
        "examples": len(states),
        "classes": classes,
        "final_loss": model.train_log[-1]["final_loss"],
    }
    return model.to_json(), summary


class ModelBundle:
    """Serialized model documents; hydrate fresh instances per run."""

    def __init__(self, twin_doc: dict, encoder_doc: dict, classifier_doc: dict):
        self.twin_doc = twin_doc
        self.encoder_doc = encoder_doc
        self.classifier_doc = classifier_doc

    def forecaster(self, config: RunConfig, seed: int) -> Forecaster:
        return Forecaster.from_json(self.twin_doc, seed=seed)

    def encoder(self, config: RunConfig, library: PolicyLibrary) -> SemanticEncoder:
        return SemanticEncoder.from_json(
            self.encoder_doc, library,
            feedback_lr=config.management.feedback_scale * config.management.learning_rate,
        )

    def classifier(self) -> ClassifierModel:
        return ClassifierModel.from_json(self.classifier_doc)


def build_models(config: RunConfig, need: set[str] | None = None) -> ModelBundle:
    """Load models from configured paths or train them deterministically (cached)."""
    import dataclasses

    need = need or {"twin", "encoder", "classifier"}
    twin_doc = encoder_doc = classifier_doc = None

    if "twin" in need:
        if config.paths.twin_model:
            twin_doc = json.loads(open(config.paths.twin_model).read())
        else:
            key = _cache_key("twin", _twin_payload(config))
            if key not in _CACHE:
                _CACHE[key], _ = train_twin_job(config)
            twin_doc = _CACHE[key]

    if "encoder" in need:
        if config.paths.encoder_model:
            encoder_doc = json.loads(open(config.paths.encoder_model).read())
        else:
            key = _cache_key("encoder", {
                "management": dataclasses.asdict(config.management),
                "library": config.paths.policy_library,
            })
            if key not in _CACHE:
                doc, report = train_encoder_job(config)
                if report.warning:
                    raise ConfigurationError(f"encoder training failed: {report.warning}")
                _CACHE[key] = doc
            encoder_doc = _CACHE[key]

    if "classifier" in need:
        if config.paths.classifier_model:
            classifier_doc = json.loads(open(config.paths.classifier_model).read())
        else:
            key = _cache_key("classifier", {
                "baseline": dataclasses.asdict(config.baseline),
                "sim": dataclasses.asdict(config.sim),
                "scenario_dir": config.paths.scenario_dir,
            })
            if key not in _CACHE:
                _CACHE[key], _ = train_baseline_job(config)
            classifier_doc = _CACHE[key]

    return ModelBundle(twin_doc, encoder_doc, classifier_doc)
