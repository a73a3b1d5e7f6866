"""Correlated random mobility.

Speed and heading each follow the first-order recursion
    s_t = a * s_{t-1} + (1 - a) * mean + sqrt(1 - a^2) * sigma * w_t
with memory factor ``a``. Positions advance by velocity over one 100 ms step
and reflect off the area boundary, which preserves the speed statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError
from .topology import UserEquipment

STEP_SECONDS = 0.1


@dataclass
class MobilityParams:
    alpha: float = 0.85
    mean_speed: float = 1.2
    mean_direction: float = 0.0
    sigma: float = 0.35
    direction_sigma: float = 0.45
    v_max: float = 60.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise PreconditionError(f"alpha {self.alpha} outside [0, 1]")
        if self.sigma < 0 or self.direction_sigma < 0:
            raise PreconditionError("noise scales must be >= 0")
        if self.mean_speed < 0:
            raise PreconditionError("mean_speed must be >= 0")
        if self.v_max <= 0:
            raise PreconditionError("v_max must be > 0")


def gauss_markov_step(prev, alpha: float, mean, sigma: float, noise):
    """One unclamped step of the memory recursion; works on scalars or arrays."""
    damp = math.sqrt(max(0.0, 1.0 - alpha * alpha))
    return alpha * prev + (1.0 - alpha) * mean + damp * sigma * noise


def reflect(coord, velocity, side: float):
    """Reflect a coordinate (and flip its velocity component) into [0, side]."""
    coord = np.asarray(coord, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    low = coord < 0
    coord = np.where(low, -coord, coord)
    high = coord > side
    coord = np.where(high, 2 * side - coord, coord)
    velocity = np.where(low | high, -velocity, velocity)
    # extremely fast movers could still be outside after one fold; clip as a backstop
    coord = np.clip(coord, 0.0, side)
    return coord, velocity


def step_mobility(
    ue: UserEquipment,
    params: MobilityParams,
    noise: tuple[float, float],
    side: float = 2000.0,
) -> UserEquipment:
    """Advance one UE a single step; `noise` is the (speed, heading) gaussian pair."""
    vx, vy = ue.velocity
    speed = math.hypot(vx, vy)
    heading = math.atan2(vy, vx) if speed > 0 else params.mean_direction

    speed = gauss_markov_step(speed, params.alpha, params.mean_speed, params.sigma, noise[0])
    heading = gauss_markov_step(
        heading, params.alpha, params.mean_direction, params.direction_sigma, noise[1]
    )
    speed = min(max(speed, 0.0), params.v_max)

    vx, vy = speed * math.cos(heading), speed * math.sin(heading)
    x = ue.position[0] + vx * STEP_SECONDS
    y = ue.position[1] + vy * STEP_SECONDS
    x, vx = (float(a) for a in reflect(x, vx, side))
    y, vy = (float(a) for a in reflect(y, vy, side))
    return UserEquipment(
        ue_id=ue.ue_id,
        position=(x, y),
        velocity=(vx, vy),
        serving_bs=ue.serving_bs,
        session_active=ue.session_active,
        sla_class=ue.sla_class,
    )
