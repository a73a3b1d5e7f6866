"""Semantic intent encoder and its contrastive training / feedback refinement.

The encoder is a two-layer map from the intent feature vector (taxonomy
one-hot, context snapshot, urgency) to the shared 64-d space. Taxonomy rows of
the first layer start at the intent kind's keyword embedding, scaled into the
linear range of tanh, with the second layer undoing the scale; a fresh encoder
therefore already places every intent kind near its semantically related
policies, and training only sharpens the seen pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..costs import CostMeter
from ..errors import ConsistencyError, ModelFormatError, PreconditionError
from ..knowledge.intents import CONTEXT_DIM, INTENT_KINDS, Intent
from .embedding import cosine_similarity, keyword_embedding
from .library import IntentEmbedding, MatchResult, PolicyLibrary, match_policy

FORMAT_VERSION = 1
FEATURE_WIDTH = len(INTENT_KINDS) + CONTEXT_DIM + 1
_INIT_SCALE = 0.2
_BIAS_FLOOR = 1e-3


@dataclass
class EncoderParams:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def validate(self, feature_width: int = FEATURE_WIDTH) -> None:
        if self.w1.shape[0] != feature_width:
            raise PreconditionError(
                f"encoder input width {self.w1.shape[0]} != feature width {feature_width}"
            )
        for arr in (self.w1, self.b1, self.w2, self.b2):
            if not np.all(np.isfinite(arr)):
                raise PreconditionError("encoder weights contain non-finite entries")

    def copy(self) -> "EncoderParams":
        return EncoderParams(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())


def intent_features(intent: Intent) -> np.ndarray:
    x = np.zeros(FEATURE_WIDTH)
    x[INTENT_KINDS.index(intent.kind)] = 1.0
    ctx = np.asarray(intent.context, dtype=float)
    if len(ctx) != CONTEXT_DIM:
        raise PreconditionError(f"intent context width {len(ctx)} != {CONTEXT_DIM}")
    x[len(INTENT_KINDS): len(INTENT_KINDS) + CONTEXT_DIM] = ctx
    x[-1] = intent.urgency
    return x


def init_encoder_params(library: PolicyLibrary, dim: int, seed: int) -> EncoderParams:
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xE2C]))
    w1 = rng.normal(0.0, 0.002, size=(FEATURE_WIDTH, dim))
    for k, kind in enumerate(INTENT_KINDS):
        try:
            keywords = library.by_name(kind).keywords or (kind,)
        except PreconditionError:
            keywords = (kind,)
        w1[k] = _INIT_SCALE * keyword_embedding(list(keywords), dim)
    w2 = np.eye(dim) / _INIT_SCALE
    return EncoderParams(w1=w1, b1=np.zeros(dim), w2=w2, b2=np.full(dim, _BIAS_FLOOR))


def _forward(params: EncoderParams, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = np.tanh(x @ params.w1 + params.b1)
    y = h @ params.w2 + params.b2
    return h, y


def encode_features(
    params: EncoderParams, x: np.ndarray, meter: CostMeter | None = None
) -> np.ndarray:
    if len(x) != params.w1.shape[0]:
        raise PreconditionError(f"feature width {len(x)} != encoder input {params.w1.shape[0]}")
    _, y = _forward(params, x)
    if np.linalg.norm(y) < 1e-9:
        y = y + _BIAS_FLOOR
    if meter is not None:
        meter.add_macs("intent_encoder", params.w1.size + params.w2.size)
    return y


def encode_intent(
    intent: Intent, params: EncoderParams, meter: CostMeter | None = None
) -> IntentEmbedding:
    return IntentEmbedding(
        intent_id=intent.intent_id,
        vector=encode_features(params, intent_features(intent), meter),
    )


def _cos_grad(y: np.ndarray, p: np.ndarray) -> np.ndarray:
    """d cos(y, p) / d y."""
    ny, np_ = np.linalg.norm(y), np.linalg.norm(p)
    c = float(y @ p / (ny * np_))
    return p / (ny * np_) - c * y / (ny * ny)


@dataclass
class TrainReport:
    losses: list[float]
    accuracy: float
    failures: list[tuple[int, int]] = field(default_factory=list)  # (pair index, chosen id)
    warning: str | None = None


def train_encoder(
    pairs: list[tuple[np.ndarray, int]],
    library: PolicyLibrary,
    seed: int,
    margin: float = 0.2,
    learning_rate: float = 0.05,
    epochs: int = 300,
    dim: int = 64,
    meter: CostMeter | None = None,
) -> tuple[EncoderParams, TrainReport]:
    """Margin-contrastive fit of the encoder against frozen policy vectors."""
    ids = {p.policy_id for p in library.policies}
    for i, (_, pid) in enumerate(pairs):
        if pid not in ids:
            raise PreconditionError(f"training pair {i} references unknown policy {pid}")
    params = init_encoder_params(library, dim, seed)
    vectors = {p.policy_id: p.vector for p in library.policies}

    losses: list[float] = []
    for _ in range(epochs):
        total = 0.0
        gw1 = np.zeros_like(params.w1)
        gb1 = np.zeros_like(params.b1)
        gw2 = np.zeros_like(params.w2)
        gb2 = np.zeros_like(params.b2)
        for x, pid in pairs:
            h, y = _forward(params, x)
            pos = vectors[pid]
            cos_pos = cosine_similarity(y, pos)
            hard_id, hard_cos = None, -2.0
            for other_id, vec in vectors.items():
                if other_id == pid:
                    continue
                c = cosine_similarity(y, vec)
                if c > hard_cos:
                    hard_id, hard_cos = other_id, c
            hinge = margin - cos_pos + hard_cos
            if hinge <= 0:
                continue
            total += hinge
            dy = -_cos_grad(y, pos) + _cos_grad(y, vectors[hard_id])
            gw2 += np.outer(h, dy)
            gb2 += dy
            dh = (dy @ params.w2.T) * (1.0 - h * h)
            gw1 += np.outer(x, dh)
            gb1 += dh
        losses.append(total / max(len(pairs), 1))
        params.w1 -= learning_rate * gw1
        params.b1 -= learning_rate * gb1
        params.w2 -= learning_rate * gw2
        params.b2 -= learning_rate * gb2
        if meter is not None:
            meter.add_macs("encoder_training",
                           len(pairs) * 3 * (params.w1.size + params.w2.size))

    failures = []
    for i, (x, pid) in enumerate(pairs):
        emb = IntentEmbedding(intent_id=f"train{i}", vector=encode_features(params, x))
        chosen = match_policy(emb, library).policy_id
        if chosen != pid:
            failures.append((i, chosen))
    accuracy = 1.0 - len(failures) / max(len(pairs), 1)
    warning = None
    if failures:
        warning = f"{len(failures)} training pairs mismatched after fitting: {failures}"
    return params, TrainReport(losses=losses, accuracy=accuracy,
                               failures=failures, warning=warning)


@dataclass
class FeedbackOutcome:
    intent_id: str
    resolved: bool | None   # True: improved, False: worsened, None: neutral


class SemanticEncoder:
    """Encoder + matcher with the state needed for closed-loop refinement."""

    def __init__(
        self,
        params: EncoderParams,
        library: PolicyLibrary,
        feedback_lr: float = 0.005,
        withheld: tuple[str, ...] = (),
    ) -> None:
        params.validate()
        self.params = params
        self.library = library
        self.feedback_lr = feedback_lr
        self.withheld = tuple(withheld)
        self._history: dict[str, tuple[np.ndarray, int]] = {}

    def match_intent(self, intent: Intent, meter: CostMeter | None = None) -> MatchResult:
        x = intent_features(intent)
        emb = IntentEmbedding(intent_id=intent.intent_id,
                              vector=encode_features(self.params, x, meter))
        result = match_policy(emb, self.library, meter)
        self._history[intent.intent_id] = (x, result.policy_id)
        return result

    def feedback_update(self, outcome: FeedbackOutcome, meter: CostMeter | None = None) -> None:
        """One signed step on the stored intent: toward the chosen policy on success."""
        if outcome.intent_id not in self._history:
            raise ConsistencyError(f"feedback for unknown match {outcome.intent_id!r}")
        if outcome.resolved is None:
            return
        x, pid = self._history[outcome.intent_id]
        sign = 1.0 if outcome.resolved else -1.0
        h, y = _forward(self.params, x)
        dy = sign * _cos_grad(y, self.library.by_id(pid).vector)
        self.params.w2 += self.feedback_lr * np.outer(h, dy)
        self.params.b2 += self.feedback_lr * dy
        dh = (dy @ self.params.w2.T) * (1.0 - h * h)
        self.params.w1 += self.feedback_lr * np.outer(x, dh)
        self.params.b1 += self.feedback_lr * dh
        if meter is not None:
            meter.add_macs("encoder_feedback",
                           3 * (self.params.w1.size + self.params.w2.size))

    # ------------------------------------------------------------ persistence

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "kind": "semantic_encoder",
            "feature_width": FEATURE_WIDTH,
            "dim": self.params.w2.shape[1],
            "withheld": list(self.withheld),
            "weights": {
                "w1": self.params.w1.reshape(-1).tolist(),
                "b1": self.params.b1.tolist(),
                "w2": self.params.w2.reshape(-1).tolist(),
                "b2": self.params.b2.tolist(),
            },
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def from_json(cls, doc: dict, library: PolicyLibrary,
                  feedback_lr: float = 0.005) -> "SemanticEncoder":
        if doc.get("format_version") != FORMAT_VERSION or doc.get("kind") != "semantic_encoder":
            raise ModelFormatError("unsupported encoder file")
        width, dim = int(doc["feature_width"]), int(doc["dim"])
        if width != FEATURE_WIDTH:
            raise ModelFormatError(f"encoder feature width {width} != {FEATURE_WIDTH}")
        w = doc["weights"]
        params = EncoderParams(
            w1=np.array(w["w1"], dtype=float).reshape(width, dim),
            b1=np.array(w["b1"], dtype=float),
            w2=np.array(w["w2"], dtype=float).reshape(dim, dim),
            b2=np.array(w["b2"], dtype=float),
        )
        return cls(params, library, feedback_lr=feedback_lr,
                   withheld=tuple(doc.get("withheld", ())))

    @classmethod
    def load(cls, path: str | Path, library: PolicyLibrary,
             feedback_lr: float = 0.005) -> "SemanticEncoder":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ModelFormatError(f"cannot read encoder file {path}: {exc}") from exc
        return cls.from_json(doc, library, feedback_lr)
