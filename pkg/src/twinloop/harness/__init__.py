from .runner import observe_run, run_grid, run_single, twin_replay_experiment
from .metrics import compute_decision_overhead, compute_response_time
from .report import emit_report, load_report
from .training import ModelBundle, build_models, train_baseline_job, train_encoder_job, train_twin_job
from .validate import run_validation

__all__ = [
    "observe_run",
    "run_grid",
    "run_single",
    "twin_replay_experiment",
    "compute_decision_overhead",
    "compute_response_time",
    "emit_report",
    "load_report",
    "ModelBundle",
    "build_models",
    "train_baseline_job",
    "train_encoder_job",
    "train_twin_job",
    "run_validation",
]
