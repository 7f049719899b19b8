"""Physical parameters, gains, the staggered grid and the moving-frame tank state.

Levels ``h`` live at the N cell centres, relative velocities ``v`` at the N+1
faces. Wall velocities are pinned to zero, so the discrete mass ``dx * sum(h)``
is conserved exactly by any flux-form update.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

MASS_RTOL = 1e-12
MIN_CELLS = 8


class SloshError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(SloshError, ValueError):
    pass


class StateError(SloshError, ValueError):
    """Invalid tank state. ``code`` names the violated invariant."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class GainConditionError(SloshError, ValueError):
    pass


class BlowUpError(SloshError, RuntimeError):
    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


@dataclass(frozen=True)
class PhysicalParams:
    g: float = 9.81
    mu: float = 0.1
    sigma: float = 0.073
    L: float = 1.0
    m: float = 0.5
    H_max: float = 1.0

    @property
    def h_star(self) -> float:
        return self.m / self.L

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class ControlGains:
    omega: float = 1.0
    k: float = 0.05
    q: float = 1.0
    delta: float = 1.0

    def with_(self, **changes) -> "ControlGains":
        return replace(self, **changes)


@dataclass(frozen=True)
class Grid:
    n_cells: int
    L: float

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < MIN_CELLS:
            raise ParameterError(f"n_cells must be an integer >= {MIN_CELLS}, got {self.n_cells}")
        if not self.L > 0:
            raise ParameterError("L must be positive")

    @classmethod
    def for_params(cls, p: PhysicalParams, n_cells: int) -> "Grid":
        return cls(n_cells, p.L)

    @property
    def dx(self) -> float:
        return self.L / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def faces(self) -> np.ndarray:
        return np.arange(self.n_cells + 1) * self.dx

    @property
    def face_weights(self) -> np.ndarray:
        """Trapezoid weights on faces; they sum to L."""
        wts = np.full(self.n_cells + 1, self.dx)
        wts[0] = wts[-1] = 0.5 * self.dx
        return wts


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TankState:
    xi: float
    w: float
    h: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xi", float(self.xi))
        object.__setattr__(self, "w", float(self.w))
        object.__setattr__(self, "h", _frozen(self.h))
        object.__setattr__(self, "v", _frozen(self.v))


@dataclass(frozen=True)
class LabFrameView:
    """Lab-frame reading of a state; keeps the moving-frame fields it was built from."""

    a_star: float
    state: TankState

    @property
    def a(self) -> float:
        return self.state.xi + self.a_star

    @property
    def tank_velocity(self) -> float:
        return self.state.w

    @property
    def H(self) -> np.ndarray:
        return self.state.h

    @property
    def u(self) -> np.ndarray:
        return self.state.v + self.state.w


def validate_params(p: PhysicalParams) -> PhysicalParams:
    for name in ("g", "mu", "sigma", "L", "m", "H_max"):
        val = getattr(p, name)
        if not (np.isfinite(val) and val > 0):
            raise ParameterError(f"{name} must be positive, got {val}")
    if p.h_star >= p.H_max:
        raise ParameterError(
            f"h* >= H_max: rest level m/L = {p.h_star} must stay below the wall height {p.H_max}"
        )
    return p


def validate_gains(gains: ControlGains) -> ControlGains:
    for name in ("omega", "k", "q", "delta"):
        val = getattr(gains, name)
        if not (np.isfinite(val) and val > 0):
            raise ParameterError(f"{name} must be positive, got {val}")
    return gains


def equilibrium_state(p: PhysicalParams, grid: Grid) -> TankState:
    return TankState(0.0, 0.0, np.full(grid.n_cells, p.h_star), np.zeros(grid.n_cells + 1))


def mass(h: np.ndarray, grid: Grid) -> float:
    return grid.dx * float(np.sum(h))


def validate_state(s: TankState, p: PhysicalParams, grid: Grid) -> TankState:
    if s.h.shape != (grid.n_cells,) or s.v.shape != (grid.n_cells + 1,):
        raise StateError("shape", f"expected h[{grid.n_cells}] and v[{grid.n_cells + 1}]")
    if s.v[0] != 0.0 or s.v[-1] != 0.0:
        raise StateError("boundary_velocity", f"wall velocities must be 0, got {s.v[0]}, {s.v[-1]}")
    if not np.all(s.h > 0):
        raise StateError("nonpositive_level", f"min(h) = {s.h.min()}")
    err = abs(mass(s.h, grid) - p.m)
    if err > MASS_RTOL * p.m:
        raise StateError("mass_mismatch", f"|dx*sum(h) - m| = {err:.3e} exceeds {MASS_RTOL:g}*m")
    return s


def reconstruct_lab_frame(s: TankState, a_star: float) -> LabFrameView:
    return LabFrameView(float(a_star), s)


def from_lab_frame(view: LabFrameView) -> TankState:
    """Inverse of :func:`reconstruct_lab_frame` (exact)."""
    return TankState(view.state.xi, view.state.w, view.H, view.state.v)
