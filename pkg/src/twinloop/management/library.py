"""Policy library and exact argmax matching.

The library is a JSON array of policies; vectors are regenerated
deterministically from each policy's keyword set when the file does not pin
them. Matching scans the full library in policy-id order and breaks exact
ties toward the lowest policy id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..costs import CostMeter
from ..errors import ConfigurationError, PreconditionError
from .embedding import cosine_similarity, keyword_embedding


@dataclass
class PolicyEmbedding:
    policy_id: int
    name: str
    vector: np.ndarray
    action_template: dict
    keywords: tuple[str, ...] = ()


@dataclass
class IntentEmbedding:
    intent_id: str
    vector: np.ndarray

    def __post_init__(self) -> None:
        if np.linalg.norm(self.vector) == 0:
            raise PreconditionError("intent embedding has zero norm")


@dataclass
class MatchResult:
    intent_id: str
    policy_id: int
    policy_name: str
    score: float
    runner_up_id: int | None
    runner_up_score: float | None

    def __post_init__(self) -> None:
        if self.runner_up_score is not None and self.score < self.runner_up_score:
            raise PreconditionError("selected score below runner-up score")


@dataclass
class PolicyLibrary:
    policies: list[PolicyEmbedding] = field(default_factory=list)

    def __post_init__(self) -> None:
        ids = [p.policy_id for p in self.policies]
        if len(ids) != len(set(ids)):
            raise ConfigurationError("duplicate policy ids in library")
        self.policies = sorted(self.policies, key=lambda p: p.policy_id)

    def __len__(self) -> int:
        return len(self.policies)

    def by_id(self, policy_id: int) -> PolicyEmbedding:
        for p in self.policies:
            if p.policy_id == policy_id:
                return p
        raise PreconditionError(f"no policy with id {policy_id}")

    def by_name(self, name: str) -> PolicyEmbedding:
        for p in self.policies:
            if p.name == name:
                return p
        raise PreconditionError(f"no policy named {name!r}")

    def names(self) -> list[str]:
        return [p.name for p in self.policies]

    @classmethod
    def load(cls, path: str | Path, dim: int = 64) -> "PolicyLibrary":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot load policy library {path}: {exc}") from exc
        policies = []
        for entry in doc:
            keywords = tuple(entry.get("keywords", ()))
            if "vector" in entry and entry["vector"] is not None:
                vector = np.array(entry["vector"], dtype=float)
                if vector.shape != (dim,):
                    raise ConfigurationError(
                        f"policy {entry['name']}: vector length {vector.size} != {dim}"
                    )
            else:
                vector = keyword_embedding(keywords, dim)
            policies.append(
                PolicyEmbedding(
                    policy_id=int(entry["policy_id"]),
                    name=str(entry["name"]),
                    vector=vector,
                    action_template=dict(entry.get("action_template", {"kind": entry["name"]})),
                    keywords=keywords,
                )
            )
        return cls(policies)


def match_policy(
    embedding: IntentEmbedding,
    library: PolicyLibrary,
    meter: CostMeter | None = None,
) -> MatchResult:
    """Exact cosine argmax over the whole library; ties go to the lowest policy id."""
    if len(library) == 0:
        raise PreconditionError("policy library is empty")
    best: tuple[float, PolicyEmbedding] | None = None
    second: tuple[float, PolicyEmbedding] | None = None
    for policy in library.policies:
        score = cosine_similarity(embedding.vector, policy.vector)
        if best is None or score > best[0]:
            second = best
            best = (score, policy)
        elif second is None or score > second[0]:
            second = (score, policy)
    if meter is not None:
        meter.add_macs("policy_match", 2 * len(library) * len(embedding.vector))
    return MatchResult(
        intent_id=embedding.intent_id,
        policy_id=best[1].policy_id,
        policy_name=best[1].name,
        score=best[0],
        runner_up_id=second[1].policy_id if second else None,
        runner_up_score=second[0] if second else None,
    )
