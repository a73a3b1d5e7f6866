"""Vectorized world state: mobility, traffic, event effects, and enforcement.

The world advances one 100 ms step at a time. Scheduled scenario events act
as transient modifiers recomputed every step (so they revert when their
window closes), while enforced instructions edit the base configuration and
therefore persist. All randomness flows from generators derived from the run
seed, and the number of draws per step is state-independent, which makes a
run bit-reproducible for a given (seed, scenario, controller).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..config import SimParams
from ..errors import PreconditionError, TwinloopError
from .scenarios import ScenarioSpec
from .topology import BS_DEVICE_OFFSET, NetworkTopology, UserEquipment

INSTRUCTION_VERBS = (
    "set_capacity",
    "shift_flows",
    "set_admission",
    "migrate",
    "set_priority",
    "isolate",
    "set_power",
    "switch_backhaul",
)


class EnforcementError(TwinloopError):
    """Instruction could not be applied; reported to the harness, not fatal."""


@dataclass
class DeviceInstruction:
    target: int
    verb: str
    params: dict
    seq: int

    def wire_bytes(self) -> int:
        payload = json.dumps(
            {"target": self.target, "verb": self.verb, "params": self.params, "seq": self.seq},
            sort_keys=True,
        )
        return len(payload.encode())


@dataclass
class TelemetryRecord:
    device_id: int
    t: int
    latency_ms: float
    throughput_mbps: float
    mobility_level: float
    resource_utilization: float
    error_rate: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.resource_utilization <= 1.0:
            raise PreconditionError(f"utilization {self.resource_utilization} outside [0, 1]")
        if not 0.0 <= self.error_rate <= 1.0:
            raise PreconditionError(f"error rate {self.error_rate} outside [0, 1]")
        if self.latency_ms < 0 or self.throughput_mbps < 0 or self.mobility_level < 0:
            raise PreconditionError("latency, throughput and mobility must be >= 0")


@dataclass
class StructuralView:
    """Structural side of one step: attachment and backhaul state."""

    serving: np.ndarray          # (N,) serving cell per UE
    active: np.ndarray           # (N,) bool
    attached: np.ndarray         # (B,) attached-UE counts
    link_load_frac: np.ndarray   # (L,) carried/capacity, clipped to [0, 1]
    link_up: np.ndarray          # (L,) {0, 1}
    bs_count: int
    link_count: int


@dataclass
class TelemetryFrame:
    """One step of telemetry as a struct of arrays (UE rows plus BS rows)."""

    t: int
    latency: np.ndarray
    throughput: np.ndarray
    mobility: np.ndarray
    util: np.ndarray
    error: np.ndarray
    serving: np.ndarray
    active: np.ndarray
    bs_latency: np.ndarray
    bs_throughput: np.ndarray
    bs_mobility: np.ndarray
    bs_util: np.ndarray
    bs_error: np.ndarray
    attached: np.ndarray
    link_load_frac: np.ndarray
    link_up: np.ndarray
    offered_load: np.ndarray = field(default=None)  # (B,) sum of attached UE demand
    demand: np.ndarray = field(default=None)        # (N,) per-UE generated traffic

    @property
    def record_count(self) -> int:
        return int(self.active.sum()) + len(self.bs_util)

    def struct_view(self) -> StructuralView:
        return StructuralView(
            serving=self.serving,
            active=self.active,
            attached=self.attached,
            link_load_frac=self.link_load_frac,
            link_up=self.link_up,
            bs_count=len(self.bs_util),
            link_count=len(self.link_up),
        )

    def to_records(self) -> list[TelemetryRecord]:
        records = []
        for i in np.flatnonzero(self.active):
            records.append(
                TelemetryRecord(
                    device_id=int(i),
                    t=self.t,
                    latency_ms=float(self.latency[i]),
                    throughput_mbps=float(self.throughput[i]),
                    mobility_level=float(self.mobility[i]),
                    resource_utilization=float(self.util[i]),
                    error_rate=float(self.error[i]),
                )
            )
        for j in range(len(self.bs_util)):
            records.append(
                TelemetryRecord(
                    device_id=BS_DEVICE_OFFSET + j,
                    t=self.t,
                    latency_ms=float(self.bs_latency[j]),
                    throughput_mbps=float(self.bs_throughput[j]),
                    mobility_level=float(self.bs_mobility[j]),
                    resource_utilization=float(self.bs_util[j]),
                    error_rate=float(self.bs_error[j]),
                )
            )
        return records


def _queue_term(util: np.ndarray, cap: float, knee: float = 0.97) -> np.ndarray:
    """Convex queueing delay factor, capped so overload saturates instead of exploding."""
    u = np.minimum(util, knee)
    return np.minimum(u * u / (1.0 - u), cap)


class World:
    def __init__(
        self,
        topo: NetworkTopology,
        ues: list[UserEquipment],
        spec: ScenarioSpec,
        params: SimParams,
        seed: int,
        step_seconds: float = 0.1,
    ) -> None:
        self.topo = topo
        self.spec = spec
        self.p = params
        self.dt = step_seconds
        self.t = -1
        self.n = len(ues)
        B, L = topo.bs_count, topo.link_count

        ss = np.random.SeedSequence([int(seed), spec.scenario_id, 0x51E])
        self._rng_mob, self._rng_tel = (np.random.default_rng(s) for s in ss.spawn(2))

        self.pos = np.array([ue.position for ue in ues], dtype=float)
        vel = np.array([ue.velocity for ue in ues], dtype=float)
        self.speed = np.linalg.norm(vel, axis=1)
        self.heading = np.arctan2(vel[:, 1], vel[:, 0])
        self.mean_heading = self._rng_mob.uniform(-math.pi, math.pi, size=self.n)
        self.serving = np.array([ue.serving_bs for ue in ues], dtype=int)
        self.active = np.array([ue.session_active for ue in ues], dtype=bool)
        self.lat_bound = np.array([ue.sla_class == "latency_bound" for ue in ues], dtype=bool)

        mean_speed = spec.mean_speed if spec.mean_speed is not None else params.mobility.mean_speed
        self.base_mean_speed = float(mean_speed)

        # per-UE nominal demand, fixed for the run
        jitter = self._rng_tel.normal(0.0, 0.25, size=self.n)
        self.base_demand = params.demand_mean_mbps * spec.traffic_intensity * 10.0 * np.exp(
            jitter - 0.25**2 / 2
        )

        # mutable base configuration (edited by enforced instructions)
        self.base_capacity = topo.capacities().copy()
        self.fn_load = params.function_load_frac * self.base_capacity
        self.cell_admission = np.ones(B)
        self.cell_priority_relief = np.zeros(B)
        self.cell_hyst_bonus = np.zeros(B)
        self.cell_ho_smooth = np.zeros(B)
        self.cell_power_boost = np.zeros(B)
        self.cell_demand_relief = np.ones(B)
        self.cell_switched = np.zeros(B, dtype=bool)
        self.steer = np.zeros((self.n, B))
        self.link_shift = np.zeros(L)
        self.link_isolated = np.zeros(L, dtype=bool)

        # handover state
        self.pending_target = np.full(self.n, -1, dtype=int)
        self.pending_count = np.zeros(self.n, dtype=int)
        self.steps_since_ho = np.full(self.n, 10_000, dtype=int)
        self._ho_window = np.zeros((params.handover_window, self.n), dtype=np.uint8)

        self._bs_pos = topo.positions()
        self._bs_rad = topo.radii()
        self._link_cap = np.array([lk.capacity_mbps for lk in topo.links], dtype=float)
        self._link_lat = np.array([lk.latency_ms for lk in topo.links], dtype=float)
        self._home_link = np.full(B, -1, dtype=int)
        for cell, link in topo.home_link.items():
            self._home_link[cell] = link
        self._macro_mask = np.array([bs.kind == "macro" for bs in topo.base_stations])
        # small-cell range-expansion offset applied to the serving margin
        self._cell_bias = np.where(self._macro_mask, 0.0, params.small_cell_bias)
        ring = [lk for lk in topo.links if self._macro_mask[lk.a] and self._macro_mask[lk.b]]
        self._ring_ids = np.array([lk.link_id for lk in ring], dtype=int)
        self._ring_a = np.array([lk.a for lk in ring], dtype=int)
        self._ring_b = np.array([lk.b for lk in ring], dtype=int)

        self.last_frame: TelemetryFrame | None = None
        self.enforcement_errors: list[str] = []

    # ------------------------------------------------------------------ events

    def _event_modifiers(self, t: int) -> dict:
        B, L = self.topo.bs_count, self.topo.link_count
        mods = {
            "demand_mult": np.ones(B),
            "capacity_mult": np.ones(B),
            "speed_factor": np.ones(B),
            "interference": np.zeros(B),
            "chain_ms": np.zeros(B),
            "link_cap_mult": np.ones(L),
            "link_fault": np.zeros(L, dtype=bool),
            "fault_level": np.zeros(L),
        }
        for ev in self.spec.events_active(t):
            level = ev.ramp(t) * ev.magnitude
            cells = np.array(ev.cells, dtype=int) if ev.cells else np.arange(B)
            if ev.kind == "traffic_burst":
                mods["demand_mult"][cells] *= 1.0 + level
            elif ev.kind in ("edge_congestion", "resource_constraint"):
                mods["capacity_mult"][cells] *= max(0.05, 1.0 - level)
            elif ev.kind == "mobility_spike":
                mods["speed_factor"][cells] = np.maximum(mods["speed_factor"][cells], 1.0 + level)
            elif ev.kind == "interference":
                mods["interference"][cells] += level
            elif ev.kind == "chaining_delay":
                mods["chain_ms"][cells] += level * self.p.chain_latency_ms
            elif ev.kind == "link_degradation":
                links = np.array(ev.links, dtype=int)
                mods["link_cap_mult"][links] *= max(0.05, 1.0 - level)
            elif ev.kind == "backhaul_fault":
                links = np.array(ev.links, dtype=int)
                mods["link_fault"][links] = True
                age = t - ev.start + 1
                mods["fault_level"][links] = np.maximum(
                    mods["fault_level"][links], min(1.0, age / self.p.fault_ramp_steps)
                )
        return mods

    # ---------------------------------------------------------------- stepping

    def step(self, t: int) -> TelemetryFrame:
        if t != self.t + 1:
            raise PreconditionError(f"world at step {self.t} cannot advance to {t}")
        self.t = t
        p = self.p
        mods = self._event_modifiers(t)
        self._advance_mobility(mods)
        ho_events = self._update_serving()

        self._ho_window[t % p.handover_window] = ho_events
        ue_ho = self._ho_window.sum(axis=0).astype(float)
        attached = np.bincount(self.serving[self.active], minlength=self.topo.bs_count).astype(float)
        cell_ho = np.bincount(
            self.serving[self.active], weights=ue_ho[self.active], minlength=self.topo.bs_count
        )
        # denominator floor keeps nearly-empty cells from spiking the rate
        cell_ho_rate = cell_ho / np.maximum(attached, 5.0)

        # demand and cell load
        jitter = np.exp(
            self._rng_tel.normal(0.0, p.demand_jitter, size=self.n) - p.demand_jitter**2 / 2
        )
        demand = (
            self.base_demand
            * jitter
            * mods["demand_mult"][self.serving]
            * self.cell_admission[self.serving]
            * self.cell_demand_relief[self.serving]
        )
        demand[~self.active] = 0.0
        ue_load = np.bincount(self.serving, weights=demand, minlength=self.topo.bs_count)

        signaling = np.minimum(p.handover_signaling_coef * cell_ho_rate, 0.4)
        eff_capacity = self.base_capacity * mods["capacity_mult"] * (1.0 - signaling)
        rho_raw = (ue_load + self.fn_load) / np.maximum(eff_capacity, 1e-9)
        rho = np.clip(rho_raw, 0.0, 1.0)

        # backhaul: small cells route through their home link unless switched
        L = self.topo.link_count
        link_natural = np.zeros(L)
        homed = (self._home_link >= 0) & ~self.cell_switched
        if homed.any():
            np.add.at(link_natural, self._home_link[homed],
                      (ue_load + self.fn_load)[homed])
        if len(self._ring_ids):
            # ring links carry a light coordination share of their endpoints' load
            cell_total = ue_load + self.fn_load
            link_natural[self._ring_ids] += 0.1 * (
                cell_total[self._ring_a] + cell_total[self._ring_b]
            )

        link_carried = link_natural * (1.0 - self.link_shift)
        link_cap_eff = self._link_cap * mods["link_cap_mult"]
        link_util_raw = link_carried / np.maximum(link_cap_eff, 1e-9)
        link_up = (~(mods["link_fault"] | self.link_isolated)).astype(float)

        # per-cell backhaul latency
        has_link = self._home_link >= 0
        link_of_cell = np.where(has_link, self._home_link, 0)
        residual = 1.0 - self.link_shift[link_of_cell]
        queue = p.link_queue_coef_ms * _queue_term(link_util_raw[link_of_cell], p.queue_cap)
        fault = p.fault_latency_ms * mods["fault_level"][link_of_cell]
        normal_bh = (self._link_lat[link_of_cell] + residual * (queue + fault)
                     + self.link_shift[link_of_cell] * p.isolate_reroute_latency_ms)
        bh_lat = np.where(
            ~has_link,
            0.0,
            np.where(
                self.cell_switched,
                p.alt_backhaul_latency_ms,
                np.where(self.link_isolated[link_of_cell],
                         p.isolate_reroute_latency_ms, normal_bh),
            ),
        )

        # latency per UE
        relief = 1.0 - 0.5 * self.cell_priority_relief
        queue_ms = p.queue_coef_ms * _queue_term(rho_raw, p.queue_cap) * relief
        chain_ms = mods["chain_ms"] * relief
        interference_ms = p.interference_latency_ms * mods["interference"] * (
            1.0 - self.cell_power_boost
        )
        cell_lat = p.base_latency_ms + queue_ms + chain_ms + interference_ms + bh_lat

        # handover interruption: worse under load, softened by smoothing actions
        ho_recent = (self.steps_since_ho < p.handover_penalty_steps).astype(float)
        penalty = (
            p.handover_penalty_ms
            * (0.5 + rho_raw[self.serving])
            * (1.0 - 0.5 * self.cell_ho_smooth[self.serving])
        )
        lat_noise = self._rng_tel.normal(0.0, p.latency_noise_ms, size=self.n)
        latency = np.maximum(cell_lat[self.serving] + penalty * ho_recent + lat_noise, 0.2)

        dist = np.linalg.norm(self.pos - self._bs_pos[self.serving], axis=1)
        rel_dist = dist / self._bs_rad[self.serving]
        theta_noise = self._rng_tel.normal(0.0, p.theta_noise, size=self.n)
        theta_interf = (
            p.interference_theta_coef
            * mods["interference"]
            * (1.0 - self.cell_power_boost)
        )
        error = np.clip(
            p.theta_base + p.theta_dist_coef * rel_dist**2 + theta_interf[self.serving] + theta_noise,
            0.0,
            1.0,
        )

        share = np.minimum(1.0, 1.0 / np.maximum(rho_raw[self.serving], 1e-9))
        throughput = demand * share * (1.0 - error)

        denom = np.maximum(attached, 1.0)
        bs_latency = np.bincount(self.serving[self.active], weights=latency[self.active],
                                 minlength=self.topo.bs_count) / denom
        bs_error = np.bincount(self.serving[self.active], weights=error[self.active],
                               minlength=self.topo.bs_count) / denom
        bs_throughput = np.bincount(
            self.serving, weights=throughput, minlength=self.topo.bs_count
        )

        frame = TelemetryFrame(
            t=t,
            latency=latency,
            throughput=throughput,
            mobility=ue_ho.astype(float),
            util=rho[self.serving],
            error=error,
            serving=self.serving.copy(),
            active=self.active.copy(),
            bs_latency=bs_latency,
            bs_throughput=bs_throughput,
            bs_mobility=cell_ho_rate,
            bs_util=rho,
            bs_error=bs_error,
            attached=attached,
            link_load_frac=np.clip(link_util_raw, 0.0, 1.0),
            link_up=link_up,
            offered_load=ue_load,
            demand=demand,
        )
        self.last_frame = frame
        return frame

    def _advance_mobility(self, mods: dict) -> None:
        p = self.p.mobility
        n = self.n
        speed_factor = mods["speed_factor"][self.serving]
        mean_speed = self.base_mean_speed * speed_factor
        damp = math.sqrt(max(0.0, 1.0 - p.alpha**2))
        w_speed = self._rng_mob.standard_normal(n)
        w_head = self._rng_mob.standard_normal(n)
        self.speed = p.alpha * self.speed + (1 - p.alpha) * mean_speed + damp * p.sigma * w_speed

        # near the boundary, pull the heading mean toward the area center
        side = self.topo.side_m
        margin = 0.05 * side
        near_edge = (
            (self.pos[:, 0] < margin)
            | (self.pos[:, 0] > side - margin)
            | (self.pos[:, 1] < margin)
            | (self.pos[:, 1] > side - margin)
        )
        to_center = np.arctan2(side / 2 - self.pos[:, 1], side / 2 - self.pos[:, 0])
        mean_heading = np.where(near_edge, to_center, self.mean_heading)
        delta = np.arctan2(
            np.sin(self.heading - mean_heading), np.cos(self.heading - mean_heading)
        )
        delta = p.alpha * delta + damp * p.direction_sigma * w_head
        self.heading = mean_heading + delta

        self.speed = np.clip(self.speed, 0.0, p.v_max)
        vx = self.speed * np.cos(self.heading)
        vy = self.speed * np.sin(self.heading)
        x = self.pos[:, 0] + vx * self.dt
        y = self.pos[:, 1] + vy * self.dt
        flip_x = (x < 0) | (x > side)
        flip_y = (y < 0) | (y > side)
        x = np.clip(np.where(x < 0, -x, np.where(x > side, 2 * side - x, x)), 0, side)
        y = np.clip(np.where(y < 0, -y, np.where(y > side, 2 * side - y, y)), 0, side)
        self.heading = np.where(flip_x, math.pi - self.heading, self.heading)
        self.heading = np.where(flip_y, -self.heading, self.heading)
        self.pos[:, 0] = x
        self.pos[:, 1] = y
        self.steps_since_ho += 1

    def _update_serving(self) -> np.ndarray:
        p = self.p
        d = np.linalg.norm(self.pos[:, None, :] - self._bs_pos[None, :, :], axis=2)
        raw_margin = 1.0 - d / self._bs_rad[None, :]
        margin = raw_margin + self.steer + self._cell_bias[None, :]
        cand = np.argmax(margin, axis=1)
        rows = np.arange(self.n)
        cand_m = margin[rows, cand]
        serv_m = margin[rows, self.serving]
        need = cand_m > serv_m + p.hysteresis_margin + self.cell_hyst_bonus[self.serving]
        want = (cand != self.serving) & need
        same = self.pending_target == cand
        self.pending_count = np.where(want & same, self.pending_count + 1, np.where(want, 1, 0))
        self.pending_target = np.where(want, cand, -1)
        switch = want & (self.pending_count >= p.hysteresis_steps)
        # forced handover when the serving disk no longer covers the UE
        uncovered = raw_margin[rows, self.serving] < 0
        switch |= uncovered & (cand != self.serving)
        switch &= self.active
        self.serving = np.where(switch, cand, self.serving)
        self.steps_since_ho[switch] = 0
        self.pending_count[switch] = 0
        self.pending_target[switch] = -1
        return switch.astype(np.uint8)

    # -------------------------------------------------------------- enforcement

    def apply_action(self, instr: DeviceInstruction) -> None:
        """Apply one device instruction to the base configuration."""
        B, L = self.topo.bs_count, self.topo.link_count
        verb = instr.verb
        if verb not in INSTRUCTION_VERBS:
            raise EnforcementError(f"unknown verb {verb!r}")
        cell_verbs = {"set_capacity", "set_admission", "migrate", "set_priority", "set_power",
                      "switch_backhaul"}
        if verb in cell_verbs and not 0 <= instr.target < B:
            raise EnforcementError(f"{verb}: no base station {instr.target}")
        if verb == "isolate" and not 0 <= instr.target < L:
            raise EnforcementError(f"isolate: no link {instr.target}")

        if verb == "set_capacity":
            delta = float(instr.params.get("delta", 0.2))
            if not 0.0 < abs(delta) <= 0.5:
                raise EnforcementError(f"set_capacity delta {delta} outside (0, 0.5]")
            self.base_capacity[instr.target] *= 1.0 + delta
        elif verb == "shift_flows":
            domain = instr.params.get("domain", "cell")
            fraction = float(instr.params.get("fraction", 0.3))
            if domain == "link":
                if not 0 <= instr.target < L:
                    raise EnforcementError(f"shift_flows: no link {instr.target}")
                self.link_shift[instr.target] = min(0.95, self.link_shift[instr.target] + fraction)
            else:
                to = int(instr.params.get("to", -1))
                if not 0 <= instr.target < B or not 0 <= to < B:
                    raise EnforcementError(f"shift_flows: bad cell pair {instr.target}->{to}")
                self._steer_users(instr.target, to, fraction)
        elif verb == "set_admission":
            factor = float(instr.params.get("factor", 0.8))
            self.cell_admission[instr.target] = float(np.clip(factor, 0.3, 1.0))
        elif verb == "migrate":
            to = int(instr.params.get("to", -1))
            if not 0 <= to < B:
                raise EnforcementError(f"migrate: no destination cell {to}")
            self.fn_load[to] += self.fn_load[instr.target]
            self.fn_load[instr.target] = 0.0
        elif verb == "set_priority":
            aspect = instr.params.get("aspect", "latency")
            level = float(np.clip(instr.params.get("level", 0.5), 0.0, 1.0))
            if aspect == "latency":
                self.cell_priority_relief[instr.target] = max(
                    self.cell_priority_relief[instr.target], level
                )
            elif aspect == "handover":
                self.cell_hyst_bonus[instr.target] = max(
                    self.cell_hyst_bonus[instr.target], 0.08 * level
                )
                self.cell_ho_smooth[instr.target] = max(
                    self.cell_ho_smooth[instr.target], level
                )
            elif aspect == "cache":
                self.cell_demand_relief[instr.target] = min(
                    self.cell_demand_relief[instr.target], 1.0 - 0.05 * level
                )
            else:
                raise EnforcementError(f"set_priority: unknown aspect {aspect!r}")
        elif verb == "isolate":
            self.link_isolated[instr.target] = True
            self.link_shift[instr.target] = 1.0
        elif verb == "set_power":
            delta = float(np.clip(instr.params.get("delta", 0.5), 0.0, 1.0))
            self.cell_power_boost[instr.target] = min(
                0.85, self.cell_power_boost[instr.target] + 0.6 * delta
            )
        elif verb == "switch_backhaul":
            if self._home_link[instr.target] < 0:
                raise EnforcementError(f"switch_backhaul: cell {instr.target} has no backhaul link")
            self.cell_switched[instr.target] = True

    def _steer_users(self, src: int, dst: int, fraction: float) -> None:
        """Bias enough src-attached users toward dst to move ~fraction of the load."""
        attached = np.flatnonzero((self.serving == src) & self.active)
        if attached.size == 0:
            return
        d = np.linalg.norm(self.pos[attached] - self._bs_pos[dst], axis=1)
        covered = d <= self._bs_rad[dst]
        candidates = attached[covered]
        if candidates.size == 0:
            return
        order = candidates[np.argsort(d[covered], kind="stable")]
        want = fraction * self.base_demand[attached].sum()
        moved = np.cumsum(self.base_demand[order])
        take = order[: int(np.searchsorted(moved, want) + 1)]
        self.steer[take, dst] += 0.25

    # ------------------------------------------------------------------- views

    def aggregates(self) -> dict:
        """Current-step scalar aggregates for rule engines (no forecasts)."""
        f = self.last_frame
        if f is None:
            raise PreconditionError("world has not stepped yet")
        act = f.active
        return {
            "mean_latency": float(f.latency[act].mean()) if act.any() else 0.0,
            "p95_latency": float(np.percentile(f.latency[act], 95)) if act.any() else 0.0,
            "mean_util": float(f.bs_util.mean()),
            "max_cell_util": float(f.bs_util.max()),
            "mean_error": float(f.error[act].mean()) if act.any() else 0.0,
            "handover_rate": float(f.bs_mobility.max()),
            "min_link_up": float(f.link_up.min()) if len(f.link_up) else 1.0,
            "max_link_util": float(f.link_load_frac.max()) if len(f.link_load_frac) else 0.0,
        }

    def ue_snapshot(self, ue_id: int) -> UserEquipment:
        return UserEquipment(
            ue_id=ue_id,
            position=(float(self.pos[ue_id, 0]), float(self.pos[ue_id, 1])),
            velocity=(
                float(self.speed[ue_id] * math.cos(self.heading[ue_id])),
                float(self.speed[ue_id] * math.sin(self.heading[ue_id])),
            ),
            serving_bs=int(self.serving[ue_id]),
            session_active=bool(self.active[ue_id]),
            sla_class="latency_bound" if self.lat_bound[ue_id] else "throughput_bound",
        )


def generate_telemetry(world: World, t: int) -> list[TelemetryRecord]:
    """Telemetry batch for the step the world last advanced to."""
    if world.last_frame is None or world.t != t:
        raise PreconditionError(f"world is at step {world.t}, not {t}")
    return world.last_frame.to_records()
