"""Short-horizon state forecaster: training, online refinement, persistence.

The forecaster consumes the last k virtual states (min-max normalized with
statistics frozen at pre-training time) and predicts the state delta steps
ahead. Closed-loop refinement performs one gradient step per
(prediction, observation) pair and keeps a bounded replay store that periodic
re-fits sample from.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..costs import CostMeter
from ..errors import ModelFormatError, PreconditionError, TrainingDivergenceError
from .features import VirtualState
from .gru import GATE_NAMES, GruParams, gru_forward, gru_gradients, init_gru_params

FORMAT_VERSION = 1


@dataclass
class ForecastConfig:
    k: int = 5
    delta: int = 3
    hidden_dim: int = 32
    learning_rate: float = 0.05
    momentum: float = 0.9
    epochs: int = 60
    grad_clip: float = 5.0
    online_lr: float = 1.5e-3
    replay_capacity: int = 512
    refit_every: int = 100
    refit_batch: int = 64

    def __post_init__(self) -> None:
        if self.k < 1 or self.delta < 1:
            raise PreconditionError("k and delta must be >= 1")


def _clip_grads(grads: dict[str, np.ndarray], max_norm: float) -> dict[str, np.ndarray]:
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > max_norm > 0:
        scale = max_norm / total
        return {k: g * scale for k, g in grads.items()}
    return grads


class Forecaster:
    def __init__(
        self,
        params: GruParams,
        config: ForecastConfig,
        norm_min: np.ndarray,
        norm_max: np.ndarray,
        stat_dim: int,
        struct_dim: int,
        fraction_mask: np.ndarray,
        seed: int = 0,
    ) -> None:
        params.validate()
        self.params = params
        self.config = config
        self.norm_min = np.asarray(norm_min, dtype=float)
        self.norm_max = np.asarray(norm_max, dtype=float)
        self.stat_dim = stat_dim
        self.struct_dim = struct_dim
        self.fraction_mask = np.asarray(fraction_mask, dtype=bool)
        self._span = np.where(self.norm_max - self.norm_min > 1e-9,
                              self.norm_max - self.norm_min, 1.0)
        self.replay: deque[tuple[np.ndarray, np.ndarray]] = deque(maxlen=config.replay_capacity)
        self._feedback_count = 0
        self._refit_rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xF17]))
        self._velocity = {name: np.zeros_like(getattr(params, name)) for name in GATE_NAMES}

    # ---------------------------------------------------------------- scaling

    def normalize(self, vec: np.ndarray) -> np.ndarray:
        return (np.asarray(vec, dtype=float) - self.norm_min) / self._span

    def denormalize(self, vec: np.ndarray) -> np.ndarray:
        return np.asarray(vec, dtype=float) * self._span + self.norm_min

    # -------------------------------------------------------------- inference

    def _window(self, history: list[VirtualState]) -> np.ndarray:
        if len(history) != self.config.k:
            raise PreconditionError(
                f"history length {len(history)} != window k={self.config.k}"
            )
        ts = [s.t for s in history]
        if any(b - a != 1 for a, b in zip(ts, ts[1:])):
            raise PreconditionError(f"history steps not consecutive: {ts}")
        return np.stack([self.normalize(s.vector) for s in history])

    def forecast(self, history: list[VirtualState], meter: CostMeter | None = None) -> VirtualState:
        """Predict the virtual state config.delta steps past the last history entry."""
        xs = self._window(history)
        y = gru_forward(xs[None, :, :], self.params, meter)[0]
        vec = np.maximum(self.denormalize(y), 0.0)
        vec[self.fraction_mask] = np.clip(vec[self.fraction_mask], 0.0, 1.0)
        return VirtualState(
            vector=vec,
            t=history[-1].t + self.config.delta,
            stat_dim=self.stat_dim,
            struct_dim=self.struct_dim,
        )

    # --------------------------------------------------------------- feedback

    def feedback_update(
        self,
        history: list[VirtualState],
        observed: VirtualState,
        meter: CostMeter | None = None,
    ) -> None:
        """One online gradient step on the (forecast, observation) pair."""
        if len(observed.vector) != self.stat_dim + self.struct_dim:
            raise PreconditionError("observed state has wrong dimension")
        xs = self._window(history)
        target = self.normalize(observed.vector)
        self._apply_step([xs], [target], self.config.online_lr, meter)
        self.replay.append((xs, target))
        self._feedback_count += 1
        if self.config.refit_every > 0 and self._feedback_count % self.config.refit_every == 0:
            self._refit(meter)

    def _refit(self, meter: CostMeter | None) -> None:
        if not self.replay:
            return
        size = min(self.config.refit_batch, len(self.replay))
        idx = self._refit_rng.choice(len(self.replay), size=size, replace=False)
        xs = [self.replay[i][0] for i in idx]
        ys = [self.replay[i][1] for i in idx]
        self._apply_step(xs, ys, self.config.online_lr * 4.0, meter)

    def _apply_step(self, xs_list, target_list, lr: float, meter: CostMeter | None) -> float:
        xs = np.stack(xs_list)
        targets = np.stack(target_list)
        loss, grads = gru_gradients(xs, targets, self.params, meter)
        grads = _clip_grads(grads, self.config.grad_clip)
        for name in GATE_NAMES:
            getattr(self.params, name)[...] -= lr * grads[name]
        return loss

    # ------------------------------------------------------------ persistence

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "kind": "gru_forecaster",
            "config": asdict(self.config),
            "stat_dim": self.stat_dim,
            "struct_dim": self.struct_dim,
            "shapes": {name: list(getattr(self.params, name).shape) for name in GATE_NAMES},
            "weights": {name: getattr(self.params, name).reshape(-1).tolist()
                        for name in GATE_NAMES},
            "norm_min": self.norm_min.tolist(),
            "norm_max": self.norm_max.tolist(),
            "fraction_mask": self.fraction_mask.astype(int).tolist(),
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def from_json(cls, doc: dict, seed: int = 0) -> "Forecaster":
        if doc.get("format_version") != FORMAT_VERSION or doc.get("kind") != "gru_forecaster":
            raise ModelFormatError(
                f"unsupported forecaster file (version {doc.get('format_version')!r}, "
                f"kind {doc.get('kind')!r})"
            )
        config = ForecastConfig(**doc["config"])
        weights = {}
        for name in GATE_NAMES:
            shape = tuple(doc["shapes"][name])
            flat = np.array(doc["weights"][name], dtype=float)
            if flat.size != int(np.prod(shape)):
                raise ModelFormatError(f"weight {name} has {flat.size} values, expected {shape}")
            weights[name] = flat.reshape(shape)
        params = GruParams(**weights)
        try:
            params.validate()
        except PreconditionError as exc:
            raise ModelFormatError(str(exc)) from exc
        fc = cls(
            params=params,
            config=config,
            norm_min=np.array(doc["norm_min"], dtype=float),
            norm_max=np.array(doc["norm_max"], dtype=float),
            stat_dim=int(doc["stat_dim"]),
            struct_dim=int(doc["struct_dim"]),
            fraction_mask=np.array(doc["fraction_mask"], dtype=bool),
            seed=seed,
        )
        if fc.params.input_dim != fc.stat_dim + fc.struct_dim:
            raise ModelFormatError(
                f"input dim {fc.params.input_dim} != state dim {fc.stat_dim + fc.struct_dim}"
            )
        return fc

    @classmethod
    def load(cls, path: str | Path, seed: int = 0) -> "Forecaster":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ModelFormatError(f"cannot read forecaster file {path}: {exc}") from exc
        return cls.from_json(doc, seed=seed)


def _windows_from_trace(
    trace: np.ndarray, k: int, delta: int
) -> tuple[np.ndarray, np.ndarray]:
    T = len(trace)
    n = T - k - delta + 1
    xs = np.stack([trace[i: i + k] for i in range(n)])
    ys = np.stack([trace[i + k + delta - 1] for i in range(n)])
    return xs, ys


def train_forecaster(
    traces: list[np.ndarray],
    config: ForecastConfig,
    seed: int,
    stat_dim: int,
    struct_dim: int,
    fraction_mask: np.ndarray,
    meter: CostMeter | None = None,
) -> tuple[Forecaster, list[float]]:
    """Fit the forecaster on raw state traces (each an array of shape (T, dim)).

    Gradient descent with momentum on the mean squared error between the
    window forecast and the state delta steps ahead; deterministic per seed.
    """
    dim = stat_dim + struct_dim
    for i, trace in enumerate(traces):
        if len(trace) < config.k + config.delta:
            raise PreconditionError(
                f"trace {i} has {len(trace)} steps; needs >= k+delta={config.k + config.delta}"
            )
        if trace.shape[1] != dim:
            raise PreconditionError(f"trace {i} feature width {trace.shape[1]} != {dim}")

    stacked = np.concatenate(traces, axis=0)
    norm_min = stacked.min(axis=0)
    norm_max = stacked.max(axis=0)
    params = init_gru_params(dim, config.hidden_dim, dim, seed)
    fc = Forecaster(params, config, norm_min, norm_max, stat_dim, struct_dim,
                    fraction_mask, seed=seed)

    xs_all, ys_all = [], []
    for trace in traces:
        normed = fc.normalize(trace)
        xs, ys = _windows_from_trace(normed, config.k, config.delta)
        xs_all.append(xs)
        ys_all.append(ys)
    xs = np.concatenate(xs_all)
    ys = np.concatenate(ys_all)

    velocity = {name: np.zeros_like(getattr(params, name)) for name in GATE_NAMES}
    losses: list[float] = []
    for epoch in range(config.epochs):
        loss, grads = gru_gradients(xs, ys, params, meter)
        if not np.isfinite(loss):
            raise TrainingDivergenceError(epoch)
        grads = _clip_grads(grads, config.grad_clip)
        for name in GATE_NAMES:
            velocity[name] = config.momentum * velocity[name] - config.learning_rate * grads[name]
            getattr(params, name)[...] += velocity[name]
        losses.append(loss)
    return fc, losses
