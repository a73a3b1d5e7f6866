"""Run configuration: defaults, dotted-path overrides, and the config hash.

Every tunable lives here so a run is fully described by (RunConfig, seed).
The config hash covers the resolved values and is embedded in every report.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigurationError

CONTROLLER_NAMES = ("zsl-dt", "static", "supervised")


@dataclass
class MobilityDefaults:
    alpha: float = 0.85
    mean_speed: float = 1.2          # m/s
    sigma: float = 0.35              # m/s, speed noise scale
    direction_sigma: float = 0.45    # rad, reused noise scale for the heading recursion
    v_max: float = 60.0              # m/s, hard clamp applied by the world


@dataclass
class SimParams:
    bs_count: int = 12
    ue_count: int = 300
    area_m2: float = 4.0e6
    macro_radius_m: float = 780.0
    small_radius_m: float = 320.0
    macro_capacity: float = 900.0    # Mbps-equivalent resource units
    small_capacity: float = 200.0
    link_capacity: float = 280.0     # backhaul Mbps (small-cell uplink)
    link_latency_ms: float = 1.5
    small_cell_bias: float = 0.08    # range-expansion offset on the serving margin
    mobility: MobilityDefaults = field(default_factory=MobilityDefaults)

    # traffic synthesis
    demand_mean_mbps: float = 1.35   # per-UE mean at traffic_intensity 1.0
    demand_jitter: float = 0.18      # per-step lognormal-ish jitter fraction
    function_load_frac: float = 0.05  # per-cell compute load, fraction of capacity

    # latency model: base + queue(rho) + backhaul + adders
    base_latency_ms: float = 4.0
    queue_coef_ms: float = 7.0
    queue_cap: float = 4.0           # cap on rho^2/(1-rho) queueing term
    link_queue_coef_ms: float = 5.0
    latency_noise_ms: float = 0.5
    handover_penalty_ms: float = 9.0
    handover_penalty_steps: int = 3
    handover_signaling_coef: float = 1.2  # capacity fraction consumed per unit cell handover rate

    # error-rate model
    theta_base: float = 0.01
    theta_dist_coef: float = 0.03
    theta_noise: float = 0.004
    interference_theta_coef: float = 0.55
    interference_latency_ms: float = 8.0

    # backhaul fault backlog: extra latency ramps up over this many steps
    fault_latency_ms: float = 26.0
    fault_ramp_steps: int = 12
    chain_latency_ms: float = 24.0
    alt_backhaul_latency_ms: float = 2.5
    isolate_reroute_latency_ms: float = 3.0

    # SLA thresholds (defaults per run config, overridable)
    sla_latency_ms: float = 20.0
    sla_breach_steps: int = 3
    sla_throughput_floor_mbps: float = 1.0
    sla_throughput_frac: float = 0.5

    # serving-cell selection
    handover_window: int = 20
    hysteresis_margin: float = 0.02
    hysteresis_steps: int = 2


@dataclass
class TwinParams:
    k: int = 5
    delta: int = 3
    hidden_dim: int = 32
    learning_rate: float = 0.05
    momentum: float = 0.9
    epochs: int = 60
    grad_clip: float = 5.0
    online_lr: float = 1.5e-3
    replay_capacity: int = 512
    refit_every: int = 150
    refit_batch: int = 32
    feedback_enabled: bool = True
    warmup_seed: int = 20240601
    warmup_scenarios: tuple[int, ...] = (2, 4, 5)
    warmup_steps: int = 700


@dataclass
class KnowledgeParams:
    layers: int = 2
    score_threshold: float = 0.7
    ema_decay: float = 0.95
    escalation_steps: int = 10
    escalation_bonus: float = 0.1
    slices: tuple[str, ...] = ("embb", "urllc")


@dataclass
class ManagementParams:
    embed_dim: int = 64
    margin: float = 0.2
    learning_rate: float = 0.05
    epochs: int = 300
    feedback_scale: float = 0.1
    train_seed: int = 20240602
    withheld_policies: tuple[str, ...] = ("reroute_traffic", "fault_isolate", "backhaul_switch")


@dataclass
class ControlParams:
    enforcement_latency: int = 1
    resolution_horizon: int = 10
    action_cooldown: int = 30


@dataclass
class BaselineParams:
    retrain_interval: int = 200
    retrain_latency: int = 5
    classifier_hidden: int = 128
    classifier_epochs: int = 40
    retrain_epochs: int = 20
    fire_threshold: float = 0.5
    action_cooldown: int = 30
    train_seed: int = 20240603
    train_scenarios: tuple[int, ...] = (1, 2, 4, 5, 6)
    train_steps: int = 700


@dataclass
class PathParams:
    twin_model: str = ""
    encoder_model: str = ""
    classifier_model: str = ""
    policy_library: str = ""
    scenario_dir: str = ""
    static_rules: str = ""


@dataclass
class RunConfig:
    scenarios: tuple[int, ...] = tuple(range(1, 11))
    controllers: tuple[str, ...] = ("zsl-dt",)
    seed: int = 7
    horizon: int = 3000
    step_seconds: float = 0.1
    decision_start: int = 60
    out_dir: str = "out"
    report_format: str = "json"      # csv | json
    export_telemetry: bool = False
    keep_traces: bool = False
    sim: SimParams = field(default_factory=SimParams)
    twin: TwinParams = field(default_factory=TwinParams)
    knowledge: KnowledgeParams = field(default_factory=KnowledgeParams)
    management: ManagementParams = field(default_factory=ManagementParams)
    control: ControlParams = field(default_factory=ControlParams)
    baseline: BaselineParams = field(default_factory=BaselineParams)
    paths: PathParams = field(default_factory=PathParams)

    def validate(self) -> None:
        if self.report_format not in ("csv", "json"):
            raise ConfigurationError(f"unknown report format {self.report_format!r}")
        for c in self.controllers:
            if c not in CONTROLLER_NAMES:
                raise ConfigurationError(f"unknown controller {c!r}")
        for s in self.scenarios:
            if not 1 <= int(s) <= 10:
                raise ConfigurationError(f"scenario id {s} outside catalog 1..10")
        if self.horizon < 1:
            raise ConfigurationError("horizon must be >= 1")
        if self.twin.k < 1 or self.twin.delta < 1:
            raise ConfigurationError("twin window k and look-ahead delta must be >= 1")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=_json_default)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _json_default(obj):
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"unhashable config value {obj!r}")


def apply_overrides(config: RunConfig, overrides: dict[str, str]) -> RunConfig:
    """Apply dotted-path overrides (e.g. ``sim.sla_latency_ms=15``) onto a config copy."""
    cfg = dataclasses.replace(config)
    for key, raw in overrides.items():
        parts = key.split(".")
        target = cfg
        for part in parts[:-1]:
            if not hasattr(target, part):
                raise ConfigurationError(f"unknown override section {key!r}")
            target = getattr(target, part)
        leaf = parts[-1]
        if not hasattr(target, leaf):
            raise ConfigurationError(f"unknown override key {key!r}")
        current = getattr(target, leaf)
        setattr(target, leaf, _coerce(raw, current, key))
    return cfg


def _coerce(raw, current, key: str):
    if not isinstance(raw, str):
        return raw
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    if isinstance(current, bool):
        if isinstance(value, bool):
            return value
        raise ConfigurationError(f"override {key!r} expects true/false")
    if isinstance(current, int) and not isinstance(current, bool):
        if isinstance(value, (int, float)) and float(value) == int(value):
            return int(value)
        raise ConfigurationError(f"override {key!r} expects an integer")
    if isinstance(current, float):
        if isinstance(value, (int, float)):
            return float(value)
        raise ConfigurationError(f"override {key!r} expects a number")
    if isinstance(current, tuple):
        if isinstance(value, list):
            return tuple(value)
        if isinstance(value, (int, str)):
            return (value,)
        raise ConfigurationError(f"override {key!r} expects a list")
    return value


def data_path(name: str) -> Path:
    """Resolve a file shipped under twinloop/data."""
    root = resources.files("twinloop").joinpath("data")
    p = Path(str(root.joinpath(name)))
    if not p.exists():
        raise ConfigurationError(f"missing packaged data file {name!r}")
    return p
