"""Gated recurrent cell with analytic backpropagation through time.

Gate convention, fixed across the package:

    z_t = sigmoid(x W_z + h_{t-1} U_z + b_z)
    r_t = sigmoid(x W_r + h_{t-1} U_r + b_r)
    g_t = tanh(x W_h + (r_t * h_{t-1}) U_h + b_h)
    h_t = (1 - z_t) * h_{t-1} + z_t * g_t

followed by a linear projection y = h_k W_o + b_o after the last input of the
window. Compute cost is charged as matmul element products only, so one
forward step over a window of k inputs costs k * 3 * (d*h + h*h) + h*out.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from ..costs import CostMeter
from ..errors import PreconditionError

GATE_NAMES = ("wz", "uz", "bz", "wr", "ur", "br", "wh", "uh", "bh", "wo", "bo")


@dataclass
class GruParams:
    wz: np.ndarray
    uz: np.ndarray
    bz: np.ndarray
    wr: np.ndarray
    ur: np.ndarray
    br: np.ndarray
    wh: np.ndarray
    uh: np.ndarray
    bh: np.ndarray
    wo: np.ndarray
    bo: np.ndarray

    @property
    def input_dim(self) -> int:
        return self.wz.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.wz.shape[1]

    @property
    def output_dim(self) -> int:
        return self.wo.shape[1]

    def validate(self) -> None:
        d, h, o = self.input_dim, self.hidden_dim, self.output_dim
        expect = {
            "wz": (d, h), "uz": (h, h), "bz": (h,),
            "wr": (d, h), "ur": (h, h), "br": (h,),
            "wh": (d, h), "uh": (h, h), "bh": (h,),
            "wo": (h, o), "bo": (o,),
        }
        for name, shape in expect.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise PreconditionError(f"gru weight {name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise PreconditionError(f"gru weight {name} contains non-finite entries")

    def copy(self) -> "GruParams":
        return GruParams(**{f.name: getattr(self, f.name).copy() for f in fields(self)})

    def as_dict(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def init_gru_params(input_dim: int, hidden_dim: int, output_dim: int, seed: int) -> GruParams:
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x6272]))

    def mat(rows, cols, scale):
        return rng.uniform(-scale, scale, size=(rows, cols))

    sx = 1.0 / np.sqrt(input_dim)
    sh = 1.0 / np.sqrt(hidden_dim)
    return GruParams(
        wz=mat(input_dim, hidden_dim, sx), uz=mat(hidden_dim, hidden_dim, sh),
        bz=np.zeros(hidden_dim),
        wr=mat(input_dim, hidden_dim, sx), ur=mat(hidden_dim, hidden_dim, sh),
        br=np.zeros(hidden_dim),
        wh=mat(input_dim, hidden_dim, sx), uh=mat(hidden_dim, hidden_dim, sh),
        bh=np.zeros(hidden_dim),
        wo=mat(hidden_dim, output_dim, sh), bo=np.zeros(output_dim),
    )


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def gru_cell_forward(
    x: np.ndarray, h_prev: np.ndarray, params: GruParams, meter: CostMeter | None = None
) -> np.ndarray:
    """One recurrence step; accepts (d,) / (h,) vectors or (B, d) / (B, h) batches."""
    single = np.asarray(x).ndim == 1
    x = np.atleast_2d(np.asarray(x, dtype=float))
    h_prev = np.atleast_2d(np.asarray(h_prev, dtype=float))
    if x.shape[1] != params.input_dim or h_prev.shape[1] != params.hidden_dim:
        raise PreconditionError(
            f"gru input shapes {x.shape}/{h_prev.shape} do not match "
            f"({params.input_dim}, {params.hidden_dim})"
        )
    if x.shape[0] != h_prev.shape[0]:
        raise PreconditionError("batch sizes of x and h_prev differ")
    z = _sigmoid(x @ params.wz + h_prev @ params.uz + params.bz)
    r = _sigmoid(x @ params.wr + h_prev @ params.ur + params.br)
    g = np.tanh(x @ params.wh + (r * h_prev) @ params.uh + params.bh)
    h = (1.0 - z) * h_prev + z * g
    if meter is not None:
        b, d, hd = x.shape[0], params.input_dim, params.hidden_dim
        meter.add_macs("gru_forward", b * 3 * (d * hd + hd * hd))
    return h[0] if single else h


def _run_cells(xs: np.ndarray, params: GruParams):
    """Forward over a window; returns output, final hidden state, and the BPTT cache."""
    B, k, d = xs.shape
    hd = params.hidden_dim
    h = np.zeros((B, hd))
    cache = []
    for t in range(k):
        x = xs[:, t, :]
        z = _sigmoid(x @ params.wz + h @ params.uz + params.bz)
        r = _sigmoid(x @ params.wr + h @ params.ur + params.br)
        g = np.tanh(x @ params.wh + (r * h) @ params.uh + params.bh)
        h_new = (1.0 - z) * h + z * g
        cache.append((x, h, z, r, g))
        h = h_new
    y = h @ params.wo + params.bo
    return y, h, cache


def gru_forward(xs: np.ndarray, params: GruParams, meter: CostMeter | None = None) -> np.ndarray:
    """Project the final hidden state of a (B, k, d) batch of windows."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 2:
        xs = xs[None, :, :]
    if xs.shape[2] != params.input_dim:
        raise PreconditionError(f"window feature width {xs.shape[2]} != {params.input_dim}")
    y, _, _ = _run_cells(xs, params)
    if meter is not None:
        B, k, d = xs.shape
        hd, out = params.hidden_dim, params.output_dim
        meter.add_macs("gru_forward", B * (k * 3 * (d * hd + hd * hd) + hd * out))
    return y


def gru_gradients(
    xs: np.ndarray,
    targets: np.ndarray,
    params: GruParams,
    meter: CostMeter | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean-squared-error loss and analytic gradients over a batch of windows."""
    xs = np.asarray(xs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if xs.ndim == 2:
        xs = xs[None, :, :]
    if targets.ndim == 1:
        targets = targets[None, :]
    B, k, d = xs.shape
    hd, out = params.hidden_dim, params.output_dim

    y, h_last, cache = _run_cells(xs, params)
    diff = y - targets
    loss = float(np.mean(diff**2))

    grads = {name: np.zeros_like(getattr(params, name)) for name in GATE_NAMES}
    dy = 2.0 * diff / diff.size
    grads["wo"] = h_last.T @ dy
    grads["bo"] = dy.sum(axis=0)
    dh = dy @ params.wo.T

    for t in range(k - 1, -1, -1):
        x, h_prev, z, r, g = cache[t]
        dz = dh * (g - h_prev)
        dg = dh * z
        dh_prev = dh * (1.0 - z)

        dg_pre = dg * (1.0 - g * g)
        grads["wh"] += x.T @ dg_pre
        grads["uh"] += (r * h_prev).T @ dg_pre
        grads["bh"] += dg_pre.sum(axis=0)
        d_rh = dg_pre @ params.uh.T
        dr = d_rh * h_prev
        dh_prev += d_rh * r

        dz_pre = dz * z * (1.0 - z)
        dr_pre = dr * r * (1.0 - r)
        grads["wz"] += x.T @ dz_pre
        grads["uz"] += h_prev.T @ dz_pre
        grads["bz"] += dz_pre.sum(axis=0)
        grads["wr"] += x.T @ dr_pre
        grads["ur"] += h_prev.T @ dr_pre
        grads["br"] += dr_pre.sum(axis=0)
        dh_prev += dz_pre @ params.uz.T + dr_pre @ params.ur.T
        dh = dh_prev

    if meter is not None:
        forward = B * (k * 3 * (d * hd + hd * hd) + hd * out)
        # backward pass costs roughly two extra matmul sweeps of the forward shapes
        meter.add_macs("gru_backward", 3 * forward)
    return loss, grads
