"""FastAPI surface wrapping the benchmark engine.

Every endpoint is a thin adapter: build a RunConfig from the request, call the
core package, and return its (already deterministic) structures. The CLI
drives the same functions in-process by default and this app over HTTP when
a server address is given.
"""

from __future__ import annotations

import json
import time

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import RunConfig, apply_overrides
from ..errors import TwinloopError
from ..harness.report import emit_report
from ..harness.runner import run_grid, twin_replay_experiment
from ..harness.training import load_library, train_baseline_job, train_encoder_job, train_twin_job
from ..harness.validate import run_validation
from ..simcore.scenarios import load_catalog
from . import schemas


def config_from_run_request(req: schemas.RunRequest) -> RunConfig:
    config = RunConfig(
        scenarios=tuple(req.scenarios),
        controllers=tuple(req.controllers),
        seed=req.seed,
        horizon=req.horizon,
        out_dir=req.out_dir,
        report_format=req.report_format,
        export_telemetry=req.export_telemetry,
    )
    config = apply_overrides(config, req.overrides)
    config.validate()
    return config


def execute_run(req: schemas.RunRequest) -> tuple[dict, list[str], float]:
    """Shared by the HTTP handler and the in-process CLI client."""
    t0 = time.perf_counter()
    config = config_from_run_request(req)
    reports = run_grid(config, write_artifacts=req.write_artifacts)
    meta = {
        "seed": config.seed,
        "config_hash": config.config_hash(),
        "version": __version__,
        "scenarios": sorted(config.scenarios),
        "controllers": list(config.controllers),
    }
    files: list[str] = []
    if req.write_artifacts:
        files = [str(p) for p in emit_report(reports, config.report_format,
                                             config.out_dir, meta)]
    wall = time.perf_counter() - t0
    return {"meta": meta, "reports": reports}, files, wall


def execute_train(req: schemas.TrainRequest) -> tuple[dict, float]:
    t0 = time.perf_counter()
    config = apply_overrides(RunConfig(), req.overrides)
    if req.kind == "twin":
        doc, losses = train_twin_job(config)
        summary = {"epochs": len(losses), "final_loss": losses[-1] if losses else None}
    elif req.kind == "encoder":
        doc, report = train_encoder_job(config)
        summary = {
            "accuracy": report.accuracy,
            "withheld": doc.get("withheld", []),
            "warning": report.warning,
        }
    else:
        doc, summary = train_baseline_job(config)
    with open(req.out_path, "w") as fh:
        json.dump(doc, fh)
    return {"kind": req.kind, "out_path": req.out_path, "summary": summary}, (
        time.perf_counter() - t0
    )


def create_app() -> FastAPI:
    app = FastAPI(title="twinloop", version=__version__)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/scenarios", response_model=list[schemas.ScenarioInfo])
    def scenarios() -> list[schemas.ScenarioInfo]:
        catalog = load_catalog()
        return [
            schemas.ScenarioInfo(
                scenario_id=sid,
                description=spec.description,
                events=len(spec.events),
                anomaly_marks=spec.anomaly_marks,
            )
            for sid, spec in sorted(catalog.items())
        ]

    @app.get("/policies", response_model=list[schemas.PolicyInfo])
    def policies() -> list[schemas.PolicyInfo]:
        library = load_library(RunConfig())
        return [
            schemas.PolicyInfo(policy_id=p.policy_id, name=p.name, keywords=list(p.keywords))
            for p in library.policies
        ]

    @app.post("/runs", response_model=schemas.RunResponse)
    def runs(req: schemas.RunRequest) -> schemas.RunResponse:
        try:
            payload, files, wall = execute_run(req)
        except TwinloopError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.RunResponse(
            config_hash=payload["meta"]["config_hash"],
            reports=payload["reports"],
            report_files=files,
            wall_clock_s=wall,
        )

    @app.post("/train", response_model=schemas.TrainResponse)
    def train(req: schemas.TrainRequest) -> schemas.TrainResponse:
        try:
            payload, wall = execute_train(req)
        except TwinloopError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.TrainResponse(wall_clock_s=wall, **payload)

    @app.post("/validate", response_model=schemas.ValidateResponse)
    def validate() -> schemas.ValidateResponse:
        checks = run_validation()
        return schemas.ValidateResponse(passed=all(c["passed"] for c in checks), checks=checks)

    @app.post("/replay", response_model=schemas.ReplayResponse)
    def replay(req: schemas.ReplayRequest) -> schemas.ReplayResponse:
        config = apply_overrides(
            RunConfig(seed=req.seed, horizon=req.horizon), req.overrides
        )
        try:
            result = twin_replay_experiment(config, req.scenario, feedback=req.feedback)
        except TwinloopError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.ReplayResponse(
            scenario=result["scenario"],
            feedback=result["feedback"],
            pass1_mse=result["pass1_mse"],
            pass2_mse=result["pass2_mse"],
            identical=result["identical"],
        )

    return app
