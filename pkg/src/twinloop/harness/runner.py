"""Run engine: steps the world, drives a controller, and aggregates metrics.

A run is fully determined by (config, scenario, controller, seed): topology,
mobility, traffic, events, model hydration, and every decision derive from
seeded generators, so repeated executions are bit-identical.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .. import __version__
from ..config import RunConfig, data_path
from ..control.dispatch import ACTION_LOG_HEADER, Dispatcher
from ..control.translate import TranslationTable, translate_policy
from ..controllers import StaticController, SupervisedController, ZslDtController
from ..baselines.classifier import SupervisedEngine
from ..baselines.rules import RuleSet, StaticRuleEngine
from ..errors import ConfigurationError
from ..knowledge.intents import IntentRuleTable
from ..knowledge.reasoning import ReadoutConfig
from ..management.library import PolicyLibrary
from ..simcore.scenarios import ScenarioSpec, scenario_by_id
from ..simcore.sla import SlaTracker
from ..simcore.topology import build_topology
from ..simcore.world import World
from ..twin.features import FeatureRegistry, construct_virtual_state
from ..twin.forecaster import Forecaster
from .metrics import compute_decision_overhead, compute_response_time
from .training import ModelBundle, build_models, load_library


def _build_world(config: RunConfig, spec: ScenarioSpec, seed: int):
    sim = config.sim
    ue_count = spec.ue_count if spec.ue_count is not None else sim.ue_count
    topo, ues = build_topology(
        seed=seed,
        bs_count=sim.bs_count,
        ue_count=ue_count,
        area_m2=sim.area_m2,
        macro_radius=sim.macro_radius_m,
        small_radius=sim.small_radius_m,
        macro_capacity=sim.macro_capacity,
        small_capacity=sim.small_capacity,
        link_capacity=sim.link_capacity,
        link_latency=sim.link_latency_ms,
        mean_speed=spec.mean_speed if spec.mean_speed is not None else sim.mobility.mean_speed,
        speed_sigma=sim.mobility.sigma,
        v_max=sim.mobility.v_max,
    )
    world = World(topo, ues, spec, sim, seed=seed, step_seconds=config.step_seconds)
    registry = FeatureRegistry(topo.bs_count, topo.link_count)
    return topo, world, registry


def observe_run(
    config: RunConfig,
    scenario_id: int,
    seed: int,
    horizon: int,
    forecaster: Forecaster | None = None,
    feedback: bool = False,
) -> tuple[np.ndarray, list[float]]:
    """Controller-free run; returns the virtual-state trace and, when a
    forecaster rides along, its per-step forecast MSE in normalized space."""
    spec = scenario_by_id(scenario_id, config.paths.scenario_dir or None)
    spec.validate_horizon(horizon)
    topo, world, registry = _build_world(config, spec, seed)
    k = forecaster.config.k if forecaster is not None else 0
    history: list = []
    pending: dict[int, tuple[list, object]] = {}
    mse: list[float] = []
    states = np.zeros((horizon, registry.dim))
    for t in range(horizon):
        frame = world.step(t)
        state = construct_virtual_state(frame, frame.struct_view(), registry)
        states[t] = state.vector
        if forecaster is None:
            continue
        matured = pending.pop(state.t, None)
        if matured is not None:
            hist, predicted = matured
            err = forecaster.normalize(predicted.vector) - forecaster.normalize(state.vector)
            mse.append(float(np.mean(err * err)))
            if feedback:
                forecaster.feedback_update(hist, state)
        history.append(state)
        if len(history) > k:
            history.pop(0)
        if len(history) == k:
            fc = forecaster.forecast(history)
            pending[fc.t] = (list(history), fc)
    return states, mse


def _make_controller(
    name: str,
    config: RunConfig,
    world: World,
    bundle: ModelBundle,
    library: PolicyLibrary,
    readout: ReadoutConfig,
    rule_table: IntentRuleTable,
    seed: int,
):
    if name == "zsl-dt":
        return ZslDtController(
            config, world,
            forecaster=bundle.forecaster(config, seed),
            encoder=bundle.encoder(config, library),
            readout=readout,
            rule_table=rule_table,
        )
    if name == "static":
        rules_path = config.paths.static_rules or data_path("static_rules.json")
        return StaticController(config, StaticRuleEngine(RuleSet.load(rules_path)), library)
    if name == "supervised":
        engine = SupervisedEngine(
            model=bundle.classifier(),
            retrain_interval=config.baseline.retrain_interval,
            retrain_latency=config.baseline.retrain_latency,
            retrain_epochs=config.baseline.retrain_epochs,
            fire_threshold=config.baseline.fire_threshold,
        )
        return SupervisedController(config, engine, library)
    raise ConfigurationError(f"unknown controller {name!r}")


def run_single(
    config: RunConfig,
    scenario_id: int,
    controller_name: str,
    bundle: ModelBundle | None = None,
    write_artifacts: bool = True,
) -> dict:
    """Execute one (scenario, controller) run and return its metrics report."""
    config.validate()
    seed = config.seed
    spec = scenario_by_id(scenario_id, config.paths.scenario_dir or None)
    spec.validate_horizon(config.horizon)
    needs = {"twin", "encoder"} if controller_name == "zsl-dt" else (
        {"classifier"} if controller_name == "supervised" else set()
    )
    if bundle is None:
        bundle = build_models(config, needs or None)

    library = load_library(config)
    readout = ReadoutConfig.load(data_path("knowledge_readout.json"))
    readout.threshold = config.knowledge.score_threshold
    rule_table = IntentRuleTable.load(data_path("intent_rules.json"))
    ttable = TranslationTable.load(data_path("translation_table.json"))

    topo, world, registry = _build_world(config, spec, seed)
    controller = _make_controller(controller_name, config, world, bundle, library,
                                  readout, rule_table, seed)
    dispatcher = Dispatcher(enforcement_latency=config.control.enforcement_latency,
                            meter=controller.meter)
    tracker = SlaTracker(
        lat_bound_mask=world.lat_bound,
        demand_floor=np.maximum(world.base_demand, config.sim.sla_throughput_floor_mbps),
        latency_ms=config.sim.sla_latency_ms,
        throughput_frac=config.sim.sla_throughput_frac,
        breach_steps=config.sim.sla_breach_steps,
    )

    telemetry_rows: list[list] = []
    prev_violated = 0
    for t in range(config.horizon):
        enforced = dispatcher.flush(world, t)
        frame = world.step(t)
        for entry in enforced:
            controller.on_enforced(entry.intent_id, t)
        tracker.update(frame.latency, frame.throughput, frame.active)
        state = construct_virtual_state(frame, frame.struct_view(), registry)
        controller.observe(t, frame, state)
        newly = int(tracker.violated.sum()) - prev_violated
        prev_violated = int(tracker.violated.sum())
        if newly > 0 and isinstance(controller, SupervisedController):
            controller.note_breach(t)
        if t >= config.decision_start:
            controller.meter.decisions += 1
            for action in controller.decide(t):
                instructions, _ = translate_policy(action, world, ttable,
                                                   dispatcher.next_seq)
                dispatcher.issue(action, instructions, t)
        if config.export_telemetry:
            for rec in frame.to_records():
                telemetry_rows.append([
                    rec.t, rec.device_id, rec.latency_ms, rec.throughput_mbps,
                    rec.mobility_level, rec.resource_utilization, rec.error_rate,
                ])

    # backfill resolutions onto the action log
    if isinstance(controller, ZslDtController):
        res = {r.intent_id: ("neutral" if r.neutral else str(r.resolution).lower())
               for r in controller.feedback_records}
        for entry in dispatcher.log:
            entry.resolution = res.get(entry.intent_id, entry.resolution)

    response = compute_response_time(spec, dispatcher.log, topo, config.step_seconds)
    overhead = compute_decision_overhead(controller.meter)
    report = {
        "scenario": int(scenario_id),
        "controller": controller_name,
        "description": spec.description,
        "response_time": response,
        "sla": {
            "violation_rate": tracker.violation_rate(),
            "violated_sessions": int(tracker.violated.sum()),
            "total_sessions": int(tracker._seen_active.sum()),
        },
        "overhead": overhead,
        "actions": {
            "issued": len({e.intent_id for e in dispatcher.log}),
            "instructions": len(dispatcher.log),
            "enforcement_errors": len(dispatcher.errors),
        },
        "meta": {
            "seed": int(seed),
            "horizon": int(config.horizon),
            "config_hash": config.config_hash(),
            "version": __version__,
        },
    }
    if isinstance(controller, ZslDtController) and controller.forecast_mse:
        report["twin"] = {
            "forecast_mse": float(np.mean(controller.forecast_mse)),
            "feedback_steps": len(controller.forecast_mse),
        }

    if write_artifacts:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        log_path = out / f"sc{scenario_id:02d}_{controller_name}_actions.csv"
        with open(log_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(ACTION_LOG_HEADER)
            for entry in dispatcher.log:
                writer.writerow(entry.csv_row())
        report["artifacts"] = {"action_log": log_path.name}
        if config.export_telemetry:
            tel_path = out / f"sc{scenario_id:02d}_{controller_name}_telemetry.csv"
            with open(tel_path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["t", "device_id", "latency_ms", "throughput_mbps",
                                 "mobility", "utilization", "error_rate"])
                writer.writerows(telemetry_rows)
            report["artifacts"]["telemetry"] = tel_path.name
    return report


def run_grid(config: RunConfig, bundle: ModelBundle | None = None,
             write_artifacts: bool = True) -> list[dict]:
    """Every (scenario, controller) pair in the config, reports in stable order."""
    config.validate()
    if bundle is None:
        need = set()
        if "zsl-dt" in config.controllers:
            need |= {"twin", "encoder"}
        if "supervised" in config.controllers:
            need |= {"classifier"}
        bundle = build_models(config, need) if need else ModelBundle(None, None, None)
    reports = []
    for sid in sorted(config.scenarios):
        for controller in config.controllers:
            reports.append(run_single(config, sid, controller, bundle, write_artifacts))
    return reports


def twin_replay_experiment(
    config: RunConfig,
    scenario_id: int = 5,
    feedback: bool = True,
) -> dict:
    """Replay one scenario twice with the same seed, carrying twin state across.

    With feedback on, online updates from the first pass persist into the
    second; with feedback off the two passes must be identical.
    """
    bundle = build_models(config, {"twin"})
    forecaster = bundle.forecaster(config, seed=config.seed)
    _, mse1 = observe_run(config, scenario_id, seed=config.seed,
                          horizon=config.horizon, forecaster=forecaster,
                          feedback=feedback)
    _, mse2 = observe_run(config, scenario_id, seed=config.seed,
                          horizon=config.horizon, forecaster=forecaster,
                          feedback=feedback)
    return {
        "scenario": scenario_id,
        "feedback": feedback,
        "pass1_mse": float(np.mean(mse1)),
        "pass2_mse": float(np.mean(mse2)),
        "pass1_steps": len(mse1),
        "pass2_steps": len(mse2),
        "identical": mse1 == mse2,
    }
