"""Report emission: plot-ready CSV and full-structure JSON.

Files are written to a temporary name and atomically renamed, so a failing
write never leaves a partial report behind. Reports contain no wall-clock
values; repeated runs of the same config are byte-identical.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from ..errors import PreconditionError

CSV_HEADER = "scenario,controller,metric,value,detail"
METRICS = ("response_time_mean_s", "sla_violation_rate", "decision_overhead_per_decision")


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(text)
        os.replace(tmp, path)
    except OSError:
        if tmp.exists():
            tmp.unlink()
        raise


def _csv_rows(reports: list[dict]) -> list[str]:
    rows = [CSV_HEADER]
    for rep in reports:
        sc, ctl = rep["scenario"], rep["controller"]
        rt = rep["response_time"]
        mean = "" if rt["mean_s"] is None else f"{rt['mean_s']:.6f}"
        rows.append(f"{sc},{ctl},response_time_mean_s,{mean},"
                    f"samples={len(rt['samples_s'])};missed={rt['missed']}")
        rows.append(f"{sc},{ctl},sla_violation_rate,{rep['sla']['violation_rate']:.6f},"
                    f"violated={rep['sla']['violated_sessions']};"
                    f"sessions={rep['sla']['total_sessions']}")
        ov = rep["overhead"]
        rows.append(f"{sc},{ctl},decision_overhead_per_decision,"
                    f"{ov['per_decision_units']:.3f},"
                    f"total={ov['compute_units']};bytes={ov['message_bytes']}")
    return rows


def emit_report(
    reports: list[dict],
    fmt: str,
    out_dir: str | Path,
    meta: dict | None = None,
) -> list[Path]:
    """Write report files; returns the created paths."""
    if not reports:
        raise PreconditionError("no reports to emit")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "csv":
        path = out / "report.csv"
        _atomic_write(path, "\n".join(_csv_rows(reports)) + "\n")
        written.append(path)
    elif fmt == "json":
        path = out / "report.json"
        doc = {"meta": meta or {}, "reports": reports}
        _atomic_write(path, json.dumps(doc, sort_keys=True, indent=1) + "\n")
        written.append(path)
    else:
        raise PreconditionError(f"unknown report format {fmt!r}")
    return written


def load_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())
