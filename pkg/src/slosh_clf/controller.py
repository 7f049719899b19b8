"""Output feedback for the tank acceleration.

The law reads four numbers only: tank position error and velocity, the total
liquid momentum, and the level difference between the two walls. The
surface-tension coefficient never enters.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .functionals import momentum
from .model import ControlGains, Grid, PhysicalParams, TankState


@dataclass(frozen=True)
class Measurements:
    momentum: float
    level_diff: float
    xi: float
    w: float


def measure(s: TankState, grid: Grid) -> Measurements:
    # wall levels read off the first/last cells: second order under the zero-slope BC
    return Measurements(momentum(s.h, s.v, grid), float(s.h[-1] - s.h[0]), s.xi, s.w)


def feedback_f(meas: Measurements, gains: ControlGains, p: PhysicalParams) -> float:
    return -gains.omega * (
        (gains.delta + 1.0) * meas.momentum
        + p.mu * meas.level_diff
        - gains.q * (meas.w + gains.k * meas.xi)
    )


Controller = Callable[[TankState], float]


def make_controller(p: PhysicalParams, gains: ControlGains, grid: Grid) -> Controller:
    def control(s: TankState) -> float:
        return feedback_f(measure(s, grid), gains, p)

    return control
