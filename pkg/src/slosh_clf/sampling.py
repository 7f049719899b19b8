"""Admissible states built from modal expansions.

Cosine modes for the level have zero cell-average and zero wall slope; sine
modes for the velocity vanish at both walls. A state assembled from them meets
the mass, contact-angle and wall-velocity constraints by construction.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .functionals import clf_V
from .model import ControlGains, Grid, PhysicalParams, TankState

SEED_ENV = "SLOSH_CLF_SEED"
DEFAULT_SEED = 20240917


def seed_from_env(default: int = DEFAULT_SEED) -> int:
    return int(os.environ.get(SEED_ENV, default))


def cosine_levels(grid: Grid, amplitudes: Sequence[float]) -> np.ndarray:
    x = grid.centers
    dev = np.zeros(grid.n_cells)
    for n, a in enumerate(amplitudes, start=1):
        dev += a * np.cos(n * np.pi * x / grid.L)
    # exact zero mean at the discrete level; the analytic sum is zero up to roundoff
    return dev - dev.mean()


def sine_velocity(grid: Grid, amplitudes: Sequence[float]) -> np.ndarray:
    x = grid.faces
    v = np.zeros(grid.n_cells + 1)
    for n, b in enumerate(amplitudes, start=1):
        v += b * np.sin(n * np.pi * x / grid.L)
    v[0] = v[-1] = 0.0
    return v


@dataclass(frozen=True)
class Deviation:
    """Unscaled direction away from equilibrium."""

    xi: float
    w: float
    h_dev: np.ndarray
    v: np.ndarray

    def max_scale(self, p: PhysicalParams) -> float:
        """Largest scale keeping min(h) > 0 (infinite for flat levels)."""
        neg = -float(np.min(self.h_dev))
        return np.inf if neg <= 0 else p.h_star / neg

    def at(self, scale: float, p: PhysicalParams) -> TankState:
        return TankState(scale * self.xi, scale * self.w, p.h_star + scale * self.h_dev, scale * self.v)


def random_deviation(rng: np.random.Generator, grid: Grid, n_modes: int = 6) -> Deviation:
    decay = 1.0 / np.arange(1, n_modes + 1) ** 2
    a = rng.uniform(-1, 1, n_modes) * decay
    b = rng.uniform(-1, 1, n_modes) * decay
    xi, w = rng.uniform(-1, 1, 2)
    return Deviation(float(xi), float(w), cosine_levels(grid, a), sine_velocity(grid, b))


def scale_to_level(
    dev: Deviation,
    target: float,
    p: PhysicalParams,
    gains: ControlGains,
    grid: Grid,
    rtol: float = 1e-3,
) -> tuple[TankState, float]:
    """Scale ``dev`` so that V lands in [(1 - rtol) * target, target].

    Returns the state and its V. Raises ValueError if positivity caps the scale
    before the target is reached.
    """
    if target <= 0:
        return dev.at(0.0, p), 0.0

    def V(s):
        return clf_V(dev.at(s, p), p, gains, grid).V

    cap = 0.999 * dev.max_scale(p)
    lo, hi = 0.0, min(1.0, cap)
    while V(hi) < target:
        if hi >= cap:
            raise ValueError(f"target V = {target:.4g} unreachable before the level hits zero")
        lo, hi = hi, min(2.0 * hi, cap)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        vm = V(mid)
        if vm > target:
            hi = mid
        else:
            lo = mid
            if vm >= (1.0 - rtol) * target:
                break
    s = dev.at(lo, p)
    return s, clf_V(s, p, gains, grid).V


def random_states(
    count: int,
    p: PhysicalParams,
    gains: ControlGains,
    grid: Grid,
    max_level: float,
    seed: int | None = None,
    n_modes: int = 6,
) -> Iterator[tuple[TankState, float]]:
    """Yield ``count`` admissible states with V drawn uniformly in (0, max_level)."""
    rng = np.random.default_rng(seed_from_env() if seed is None else seed)
    produced = 0
    while produced < count:
        dev = random_deviation(rng, grid, n_modes)
        target = rng.uniform(0.0, 1.0) * max_level
        try:
            yield scale_to_level(dev, target, p, gains, grid)
        except ValueError:
            continue
        produced += 1
