"""Decision-overhead instrumentation.

Compute units are multiply-accumulate counts of the dense products a
controller executes (matmul element products only; elementwise gate math and
bias adds are not charged). Rule engines charge one unit per comparison.
Communication cost is the serialized byte size of dispatched instructions.
"""

from __future__ import annotations

from collections import Counter


class CostMeter:
    def __init__(self) -> None:
        self.macs: Counter[str] = Counter()
        self.comparisons = 0
        self.message_bytes = 0
        self.decisions = 0
        self.counters: Counter[str] = Counter()

    def add_macs(self, category: str, count: int) -> None:
        self.macs[category] += int(count)

    def matmul(self, category: str, m: int, n: int, p: int) -> None:
        """Charge an (m x n) @ (n x p) product."""
        self.macs[category] += int(m) * int(n) * int(p)

    def add_comparisons(self, count: int) -> None:
        self.comparisons += int(count)

    def add_message_bytes(self, count: int) -> None:
        self.message_bytes += int(count)

    def bump(self, name: str, count: int = 1) -> None:
        self.counters[name] += count

    @property
    def total_compute_units(self) -> int:
        return sum(self.macs.values()) + self.comparisons

    def per_decision_units(self) -> float:
        if self.decisions == 0:
            return 0.0
        return self.total_compute_units / self.decisions

    def snapshot(self) -> dict:
        return {
            "compute_units": self.total_compute_units,
            "mac_breakdown": dict(sorted(self.macs.items())),
            "comparisons": self.comparisons,
            "message_bytes": self.message_bytes,
            "decisions": self.decisions,
            "counters": dict(sorted(self.counters.items())),
        }
