"""Request/response models for the benchmark service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    scenarios: list[int] = Field(default_factory=lambda: list(range(1, 11)))
    controllers: list[str] = Field(default_factory=lambda: ["zsl-dt"])
    seed: int = 7
    horizon: int = 3000
    out_dir: str = "out"
    report_format: str = "json"
    export_telemetry: bool = False
    write_artifacts: bool = True
    overrides: dict[str, str] = Field(default_factory=dict)


class ResponseTimeModel(BaseModel):
    samples_s: list[float]
    mean_s: float | None
    missed: int
    marks: int


class SlaModel(BaseModel):
    violation_rate: float
    violated_sessions: int
    total_sessions: int


class OverheadModel(BaseModel):
    compute_units: int
    per_decision_units: float
    decisions: int
    message_bytes: int
    comparisons: int


class ScenarioReport(BaseModel):
    scenario: int
    controller: str
    description: str
    response_time: ResponseTimeModel
    sla: SlaModel
    overhead: OverheadModel
    meta: dict


class RunResponse(BaseModel):
    config_hash: str
    reports: list[ScenarioReport]
    report_files: list[str]
    wall_clock_s: float


class TrainRequest(BaseModel):
    kind: str = Field(pattern="^(twin|encoder|baseline)$")
    out_path: str
    overrides: dict[str, str] = Field(default_factory=dict)


class TrainResponse(BaseModel):
    kind: str
    out_path: str
    summary: dict
    wall_clock_s: float


class ValidateResponse(BaseModel):
    passed: bool
    checks: list[dict]


class ScenarioInfo(BaseModel):
    scenario_id: int
    description: str
    events: int
    anomaly_marks: list[int]


class PolicyInfo(BaseModel):
    policy_id: int
    name: str
    keywords: list[str]


class ReplayRequest(BaseModel):
    scenario: int = 5
    seed: int = 7
    horizon: int = 3000
    feedback: bool = True
    overrides: dict[str, str] = Field(default_factory=dict)


class ReplayResponse(BaseModel):
    scenario: int
    feedback: bool
    pass1_mse: float
    pass2_mse: float
    identical: bool
