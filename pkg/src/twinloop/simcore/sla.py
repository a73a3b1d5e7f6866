"""Session-level SLA evaluation.

A session is violated when its class metric breaches the threshold for a
sustained run of consecutive steps (default 3): latency above the bound for
latency-class sessions, throughput below half the class floor for
throughput-class sessions.
"""

from __future__ import annotations

import numpy as np

from ..errors import PreconditionError
from .topology import UserEquipment
from .world import TelemetryRecord

COMPLIANT = "compliant"
VIOLATED = "violated"


def _has_sustained_breach(breach: np.ndarray, min_run: int) -> bool:
    run = 0
    for b in breach:
        run = run + 1 if b else 0
        if run >= min_run:
            return True
    return False


def session_sla_status(
    ue: UserEquipment,
    window: list[TelemetryRecord],
    latency_ms: float = 20.0,
    throughput_floor_mbps: float = 1.0,
    throughput_frac: float = 0.5,
    breach_steps: int = 3,
) -> str:
    """Classify one session's trace as compliant or violated."""
    if not window:
        raise PreconditionError("empty SLA evaluation window")
    for rec in window:
        if rec.device_id != ue.ue_id:
            raise PreconditionError(
                f"record for device {rec.device_id} in window of UE {ue.ue_id}"
            )
    if ue.sla_class == "latency_bound":
        breach = np.array([rec.latency_ms > latency_ms for rec in window])
    else:
        floor = throughput_frac * throughput_floor_mbps
        breach = np.array([rec.throughput_mbps < floor for rec in window])
    return VIOLATED if _has_sustained_breach(breach, breach_steps) else COMPLIANT


class SlaTracker:
    """Streaming per-session breach tracking over a whole run.

    Equivalent to applying session_sla_status to each session's full trace but
    O(1) memory per UE: a consecutive-breach counter and a sticky flag.
    """

    def __init__(
        self,
        lat_bound_mask: np.ndarray,
        demand_floor: np.ndarray,
        latency_ms: float = 20.0,
        throughput_frac: float = 0.5,
        breach_steps: int = 3,
    ) -> None:
        self.lat_bound = lat_bound_mask
        self.floor = throughput_frac * demand_floor
        self.latency_ms = latency_ms
        self.breach_steps = breach_steps
        n = len(lat_bound_mask)
        self._run = np.zeros(n, dtype=int)
        self.violated = np.zeros(n, dtype=bool)
        self._seen_active = np.zeros(n, dtype=bool)

    def update(self, latency: np.ndarray, throughput: np.ndarray, active: np.ndarray) -> None:
        breach = np.where(self.lat_bound, latency > self.latency_ms, throughput < self.floor)
        breach &= active
        self._run = np.where(breach, self._run + 1, 0)
        self.violated |= self._run >= self.breach_steps
        self._seen_active |= active

    def violation_rate(self) -> float:
        total = int(self._seen_active.sum())
        if total == 0:
            from ..errors import UndefinedMetricError

            raise UndefinedMetricError("no active sessions in run")
        return float(self.violated[self._seen_active].sum()) / total
