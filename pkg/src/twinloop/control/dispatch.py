"""Instruction dispatch with one-step enforcement latency and replay guarding.

Issued instructions queue until their enforcement step, then apply to the
world in sequence-number order. Stale sequence numbers are rejected and
reported; per-instruction enforcement failures are collected, never thrown.
All dispatched bytes are charged to the controller's communication meter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..costs import CostMeter
from ..simcore.world import DeviceInstruction, EnforcementError, World
from .translate import ManagementAction


@dataclass
class ActionLogEntry:
    intent_id: str
    policy_id: int
    policy_name: str
    target: int
    verb: str
    params: dict
    issue_step: int
    enforce_step: int | None = None
    error: str | None = None
    resolution: str = ""

    def csv_row(self) -> list[str]:
        return [
            str(self.issue_step),
            str(self.policy_id),
            self.policy_name,
            str(self.target),
            self.verb,
            json.dumps(self.params, sort_keys=True),
            "" if self.enforce_step is None else str(self.enforce_step),
            self.resolution,
        ]


ACTION_LOG_HEADER = [
    "issue_step", "policy_id", "policy_name", "target", "verb", "params",
    "enforce_step", "resolution",
]


@dataclass
class _Pending:
    action: ManagementAction
    instruction: DeviceInstruction
    entry: ActionLogEntry
    due_step: int


@dataclass
class Dispatcher:
    enforcement_latency: int = 1
    meter: CostMeter | None = None
    log: list[ActionLogEntry] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    _queue: list[_Pending] = field(default_factory=list)
    _last_seq: int = -1
    next_seq: int = 0

    def issue(
        self,
        action: ManagementAction,
        instructions: list[DeviceInstruction],
        issue_step: int,
    ) -> list[ActionLogEntry]:
        """Queue instructions for enforcement at issue_step + latency."""
        entries = []
        for instr in instructions:
            entry = ActionLogEntry(
                intent_id=action.intent.intent_id,
                policy_id=action.match.policy_id,
                policy_name=action.match.policy_name,
                target=instr.target,
                verb=instr.verb,
                params=instr.params,
                issue_step=issue_step,
            )
            if instr.seq <= self._last_seq:
                entry.error = f"stale sequence number {instr.seq}"
                self.errors.append(entry.error)
                self.log.append(entry)
                entries.append(entry)
                continue
            self._last_seq = instr.seq
            self.next_seq = instr.seq + 1
            if self.meter is not None:
                self.meter.add_message_bytes(instr.wire_bytes())
            self._queue.append(
                _Pending(action, instr, entry, issue_step + self.enforcement_latency)
            )
            self.log.append(entry)
            entries.append(entry)
        return entries

    def flush(self, world: World, step: int) -> list[ActionLogEntry]:
        """Apply all instructions due at `step`; returns the enforced entries."""
        due = [p for p in self._queue if p.due_step <= step]
        self._queue = [p for p in self._queue if p.due_step > step]
        enforced = []
        for pending in sorted(due, key=lambda p: p.instruction.seq):
            try:
                world.apply_action(pending.instruction)
                pending.entry.enforce_step = step
                enforced.append(pending.entry)
            except EnforcementError as exc:
                pending.entry.error = str(exc)
                self.errors.append(str(exc))
        return enforced

    @property
    def pending_count(self) -> int:
        return len(self._queue)
