"""Virtual network state: fixed-order feature vector built from one telemetry step.

The vector is the concatenation of a statistical block (per-cell aggregates of
user telemetry) and a structural block (backhaul load fractions, link up
flags, attachment counts). The order is fixed by the registry below, so the
vector length is a pure function of the topology:

    stat_dim   = 6 * bs_count      (mean latency, p95 latency, mean throughput,
                                    mean utilization, mean error, handover rate)
    struct_dim = 2 * link_count + bs_count
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError
from ..simcore.topology import BS_DEVICE_OFFSET
from ..simcore.world import StructuralView, TelemetryFrame, TelemetryRecord

STAT_PER_CELL = ("mean_latency", "p95_latency", "mean_throughput", "mean_util",
                 "mean_error", "handover_rate")


@dataclass
class FeatureRegistry:
    bs_count: int
    link_count: int

    @property
    def stat_dim(self) -> int:
        return len(STAT_PER_CELL) * self.bs_count

    @property
    def struct_dim(self) -> int:
        return 2 * self.link_count + self.bs_count

    @property
    def dim(self) -> int:
        return self.stat_dim + self.struct_dim

    def names(self) -> list[str]:
        out = [f"cell{j}.{name}" for j in range(self.bs_count) for name in STAT_PER_CELL]
        out += [f"link{e}.load_frac" for e in range(self.link_count)]
        out += [f"link{e}.up" for e in range(self.link_count)]
        out += [f"cell{j}.attached" for j in range(self.bs_count)]
        return out

    def fraction_mask(self) -> np.ndarray:
        """Features constrained to [0, 1]: utilization, error, link fractions, flags."""
        mask = np.zeros(self.dim, dtype=bool)
        for j in range(self.bs_count):
            base = j * len(STAT_PER_CELL)
            mask[base + 3] = True   # mean_util
            mask[base + 4] = True   # mean_error
        mask[self.stat_dim: self.stat_dim + 2 * self.link_count] = True
        return mask

    def stat_index(self, cell: int, name: str) -> int:
        return cell * len(STAT_PER_CELL) + STAT_PER_CELL.index(name)


@dataclass
class VirtualState:
    vector: np.ndarray
    t: int
    stat_dim: int
    struct_dim: int

    def __post_init__(self) -> None:
        if len(self.vector) != self.stat_dim + self.struct_dim:
            raise PreconditionError(
                f"virtual state length {len(self.vector)} != {self.stat_dim}+{self.struct_dim}"
            )

    @property
    def stat(self) -> np.ndarray:
        return self.vector[: self.stat_dim]

    @property
    def struct(self) -> np.ndarray:
        return self.vector[self.stat_dim:]


def _frame_from_records(records: list[TelemetryRecord]) -> tuple[np.ndarray, ...]:
    ts = {rec.t for rec in records}
    if len(ts) > 1:
        raise PreconditionError(f"telemetry batch mixes steps {sorted(ts)}")
    ue = [r for r in records if r.device_id < BS_DEVICE_OFFSET]
    ids = np.array([r.device_id for r in ue], dtype=int)
    lat = np.array([r.latency_ms for r in ue])
    tput = np.array([r.throughput_mbps for r in ue])
    mob = np.array([r.mobility_level for r in ue])
    util = np.array([r.resource_utilization for r in ue])
    err = np.array([r.error_rate for r in ue])
    return ids, lat, tput, mob, util, err


def _grouped_p95(serving: np.ndarray, values: np.ndarray, n_groups: int) -> np.ndarray:
    """Per-group 95th percentile (linear interpolation), one sort for all groups."""
    out = np.zeros(n_groups)
    if len(values) == 0:
        return out
    order = np.lexsort((values, serving))
    grp = serving[order]
    vals = values[order]
    starts = np.searchsorted(grp, np.arange(n_groups), side="left")
    ends = np.searchsorted(grp, np.arange(n_groups), side="right")
    for j in range(n_groups):
        n = ends[j] - starts[j]
        if n == 0:
            continue
        q = 0.95 * (n - 1)
        lo = int(np.floor(q))
        frac = q - lo
        hi = min(lo + 1, n - 1)
        out[j] = vals[starts[j] + lo] * (1 - frac) + vals[starts[j] + hi] * frac
    return out


def construct_virtual_state(
    batch: TelemetryFrame | list[TelemetryRecord],
    view: StructuralView,
    registry: FeatureRegistry | None = None,
) -> VirtualState:
    """Aggregate one step's telemetry into the fixed-order virtual state vector."""
    registry = registry or FeatureRegistry(view.bs_count, view.link_count)
    B = view.bs_count

    if isinstance(batch, TelemetryFrame):
        t = batch.t
        mask = batch.active
        serving = batch.serving[mask]
        lat, tput = batch.latency[mask], batch.throughput[mask]
        mob, util, err = batch.mobility[mask], batch.util[mask], batch.error[mask]
    else:
        if not batch:
            raise PreconditionError("empty telemetry batch")
        t = batch[0].t
        ids, lat, tput, mob, util, err = _frame_from_records(batch)
        serving = view.serving[ids]

    counts = np.bincount(serving, minlength=B).astype(float)
    denom = np.maximum(counts, 1.0)

    def cell_mean(values: np.ndarray) -> np.ndarray:
        return np.bincount(serving, weights=values, minlength=B) / denom

    stat = np.zeros(registry.stat_dim)
    mean_lat = cell_mean(lat)
    mean_tput = cell_mean(tput)
    mean_util = cell_mean(util)
    mean_err = cell_mean(err)
    ho_rate = cell_mean(mob)
    p95 = _grouped_p95(serving, lat, B)
    per_cell = np.stack([mean_lat, p95, mean_tput, mean_util, mean_err, ho_rate], axis=1)
    stat[:] = per_cell.reshape(-1)

    struct = np.concatenate([
        np.asarray(view.link_load_frac, dtype=float),
        np.asarray(view.link_up, dtype=float),
        np.asarray(view.attached, dtype=float),
    ])
    return VirtualState(
        vector=np.concatenate([stat, struct]),
        t=int(t),
        stat_dim=registry.stat_dim,
        struct_dim=registry.struct_dim,
    )
