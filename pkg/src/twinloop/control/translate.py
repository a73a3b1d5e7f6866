"""Policy-to-instruction translation.

The table mapping each policy to its 1..3 device instructions is data (JSON),
not code: each row names a verb, how to resolve its target from the intent's
node id ("cell", "link", or "homed_cell"), literal parameters, and optional
placeholders the resolver fills from the live world ("$neighbor" picks the
least-loaded covering neighbor; "$urgency_delta" scales a base delta with the
intent's urgency inside the (0, 0.5] slot constraint). A row whose resolution
is infeasible degrades to its fallback row with a warning, never to silence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError, PreconditionError
from ..knowledge.intents import Intent
from ..management.library import MatchResult
from ..simcore.world import DeviceInstruction, INSTRUCTION_VERBS, World


@dataclass
class ManagementAction:
    intent: Intent
    match: MatchResult
    template: dict
    issue_step: int
    params: dict = field(default_factory=dict)


class TranslationTable:
    """Policy name -> ordered instruction template rows."""

    def __init__(self, table: dict[str, list[dict]]) -> None:
        for policy, rows in table.items():
            if not rows:
                raise ConfigurationError(f"translation table entry {policy!r} is empty")
            for row in rows:
                if row.get("verb") not in INSTRUCTION_VERBS:
                    raise ConfigurationError(
                        f"translation table {policy!r}: unknown verb {row.get('verb')!r}"
                    )
        self.table = table

    @classmethod
    def load(cls, path: str | Path) -> "TranslationTable":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot load translation table {path}: {exc}") from exc
        return cls(doc)

    def rows(self, policy: str) -> list[dict]:
        if policy not in self.table:
            raise ConfigurationError(f"no translation for policy {policy!r}")
        return self.table[policy]


def _cell_from_node(target: str, world: World) -> int | None:
    if target.startswith("gnb"):
        cell = int(target[3:])
        return cell if 0 <= cell < world.topo.bs_count else None
    if target.startswith("link"):
        return _homed_cell(int(target[4:]), world)
    if target.startswith("slice"):
        return int(np.argmax(world.last_frame.bs_util)) if world.last_frame is not None else 0
    return None


def _link_from_node(target: str, world: World) -> int | None:
    if target.startswith("link"):
        link = int(target[4:])
        return link if 0 <= link < world.topo.link_count else None
    if target.startswith("gnb"):
        return world.topo.home_link.get(int(target[3:]))
    return None


def _homed_cell(link_id: int, world: World) -> int | None:
    if not 0 <= link_id < world.topo.link_count:
        return None
    for cell, lk in world.topo.home_link.items():
        if lk == link_id:
            return cell
    return world.topo.links[link_id].a


def _least_loaded_neighbor(cell: int, world: World) -> int | None:
    neighbors = world.topo.overlap_neighbors(cell)
    if not neighbors:
        return None
    utils = (world.last_frame.bs_util if world.last_frame is not None
             else np.zeros(world.topo.bs_count))
    return int(min(neighbors, key=lambda j: (float(utils[j]), j)))


def _resolve_params(row_params: dict, cell: int | None, world: World, urgency: float):
    params = {}
    for key, value in row_params.items():
        if value == "$neighbor":
            if cell is None:
                return None
            neighbor = _least_loaded_neighbor(cell, world)
            if neighbor is None:
                return None
            params[key] = neighbor
        elif isinstance(value, dict) and "$urgency_delta" in value:
            base = float(value["$urgency_delta"])
            mag = float(np.clip(abs(base) * (0.8 + 0.4 * urgency), 0.05, 0.5))
            params[key] = mag if base >= 0 else -mag
        else:
            params[key] = value
    return params


def translate_policy(
    action: ManagementAction,
    world: World,
    table: TranslationTable,
    seq_start: int,
) -> tuple[list[DeviceInstruction], list[str]]:
    """Instantiate a policy's table rows against the world; degraded, never empty."""
    policy = action.match.policy_name
    urgency = action.intent.urgency
    node = action.intent.target
    cell = _cell_from_node(node, world)
    link = _link_from_node(node, world)
    warnings: list[str] = []
    instructions: list[DeviceInstruction] = []
    seq = seq_start

    def emit(verb: str, tgt: int | None, params: dict | None, label: str) -> bool:
        nonlocal seq
        if tgt is None or params is None:
            return False
        instructions.append(DeviceInstruction(target=int(tgt), verb=verb, params=params, seq=seq))
        seq += 1
        return True

    for row in table.rows(policy):
        when = row.get("when", {})
        if "urgency_gt" in when and not urgency > float(when["urgency_gt"]):
            continue
        domain = row.get("target", "cell")
        tgt = {"cell": cell, "link": link,
               "homed_cell": _homed_cell(link, world) if link is not None else None}.get(domain)
        params = _resolve_params(row.get("params", {}), cell, world, urgency)
        if emit(row["verb"], tgt, params, policy):
            continue
        fallback = row.get("fallback")
        if fallback is not None:
            fb_params = _resolve_params(fallback.get("params", {}), cell, world, urgency)
            fb_cell = cell if cell is not None else 0
            if emit(fallback["verb"], fb_cell, fb_params, policy):
                warnings.append(
                    f"{policy}: row {row['verb']} infeasible for {node}; degraded to "
                    f"{fallback['verb']}"
                )
                continue
        if row.get("required", True):
            raise PreconditionError(f"{policy}: cannot resolve {row['verb']} for target {node!r}")

    if not instructions:
        raise PreconditionError(f"{policy}: translation produced no instructions for {node!r}")
    return instructions, warnings
