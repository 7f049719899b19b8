"""Staggered finite-volume semi-discretisation and RK4 time stepping.

Mass is advanced in flux form, so ``dx * sum(h)`` only changes by roundoff.
Velocity uses the non-conservative form

    v_t + v v_x + g h_x = sigma * kappa_x + mu / h * (h v_x)_x + f,
    kappa = h_xx / (1 + h_x^2)^(3/2),

which is the momentum balance divided by h. The contact-angle condition
h_x = 0 at the walls is imposed through mirror ghost cells.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .controller import Controller
from .functionals import center_slope_and_curvature, face_levels
from .model import BlowUpError, ControlGains, Grid, PhysicalParams, TankState


@dataclass(frozen=True)
class StateDerivative:
    d_xi: float
    d_w: float
    d_h: np.ndarray
    d_v: np.ndarray


@dataclass(frozen=True)
class StepControls:
    cfl_safety: float = 0.4
    dt_max: float = 1e-2
    t_end: float = 40.0
    output_stride: int = 100

    def __post_init__(self):
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.output_stride < 1:
            raise ValueError("output_stride must be >= 1")
        if not self.dt_max > 0 or not self.t_end >= 0:
            raise ValueError("dt_max must be positive and t_end nonnegative")


def center_curvature(h: np.ndarray, grid: Grid) -> np.ndarray:
    hx, hxx = center_slope_and_curvature(h, grid)
    return hxx / (1.0 + hx * hx) ** 1.5


def curvature(h: np.ndarray, grid: Grid) -> np.ndarray:
    """Face values of the x-derivative of the interface curvature.

    Interior faces difference the two neighbouring centre values; the wall faces
    use the second-order one-sided stencil on the first/last three centres.
    """
    kap = center_curvature(h, grid)
    dx = grid.dx
    out = np.empty(len(h) + 1)
    out[1:-1] = np.diff(kap) / dx
    out[0] = (-2.0 * kap[0] + 3.0 * kap[1] - kap[2]) / dx
    out[-1] = (2.0 * kap[-1] - 3.0 * kap[-2] + kap[-3]) / dx
    return out


def rhs(s: TankState, f: float, p: PhysicalParams, grid: Grid) -> StateDerivative:
    h, v, dx = s.h, s.v, grid.dx
    if not np.all(h > 0):
        raise BlowUpError(f"nonpositive level (min h = {h.min():.3e}): state left the physical domain")
    hf = face_levels(h)
    flux = hf * v
    d_h = -np.diff(flux) / dx

    kap = center_curvature(h, grid)
    hvx = h * np.diff(v) / dx
    d_v = np.zeros_like(v)
    vi = v[1:-1]
    adv = vi * (v[2:] - v[:-2]) / (2.0 * dx)
    grav = p.g * np.diff(h) / dx
    cap = p.sigma * np.diff(kap) / dx
    visc = p.mu * np.diff(hvx) / dx / hf[1:-1]
    d_v[1:-1] = -adv - grav + cap + visc + f
    return StateDerivative(s.w, -f, d_h, d_v)


def cfl_dt(s: TankState, p: PhysicalParams, grid: Grid, ctrl: StepControls) -> float:
    dx = grid.dx
    hmax = float(np.max(s.h))
    wave = dx / (float(np.max(np.abs(s.v))) + math.sqrt(p.g * hmax))
    visc = dx * dx / (4.0 * p.mu)
    cap = dx * dx / (math.pi * math.sqrt(p.sigma * hmax))
    return ctrl.cfl_safety * min(wave, visc, cap, ctrl.dt_max)


def _axpy(s: TankState, d: StateDerivative, c: float) -> TankState:
    return TankState(s.xi + c * d.d_xi, s.w + c * d.d_w, s.h + c * d.d_h, s.v + c * d.d_v)


def step_rk4(
    s: TankState,
    controller: Controller | None,
    p: PhysicalParams,
    grid: Grid,
    dt: float,
) -> TankState:
    """One classical RK4 step; the feedback is re-evaluated at every stage state.

    ``controller=None`` means open loop (f = 0). Wall velocities are never
    integrated: their derivative is identically zero.
    """
    ctl = controller or (lambda _s: 0.0)

    def stage(x: TankState) -> StateDerivative:
        return rhs(x, ctl(x), p, grid)

    k1 = stage(s)
    k2 = stage(_axpy(s, k1, 0.5 * dt))
    k3 = stage(_axpy(s, k2, 0.5 * dt))
    k4 = stage(_axpy(s, k3, dt))
    d6 = dt / 6.0
    new = TankState(
        s.xi + d6 * (k1.d_xi + 2 * k2.d_xi + 2 * k3.d_xi + k4.d_xi),
        s.w + d6 * (k1.d_w + 2 * k2.d_w + 2 * k3.d_w + k4.d_w),
        s.h + d6 * (k1.d_h + 2 * k2.d_h + 2 * k3.d_h + k4.d_h),
        s.v + d6 * (k1.d_v + 2 * k2.d_v + 2 * k3.d_v + k4.d_v),
    )
    if not np.all(new.h > 0):
        raise BlowUpError("nonpositive level after RK4 step; reduce cfl_safety")
    return new


def advance(
    s: TankState,
    n_steps: int,
    dt: float,
    p: PhysicalParams,
    grid: Grid,
    gains: ControlGains | None,
    t0: float = 0.0,
) -> TankState:
    """Compiled equivalent of ``n_steps`` calls to :func:`step_rk4`.

    ``gains=None`` runs open loop.
    """
    h = np.array(s.h, dtype=float)
    v = np.array(s.v, dtype=float)
    if gains is None:
        closed, om, k, q, d = False, 0.0, 0.0, 0.0, 0.0
    else:
        closed, om, k, q, d = True, gains.omega, gains.k, gains.q, gains.delta
    status, xi, w = _kernels.rk4_kernel(
        h, v, s.xi, s.w, int(n_steps), float(dt), p.g, p.mu, p.sigma, grid.dx,
        closed, 0.0, om, k, q, d,
    )
    if status >= 0:
        t_fail = t0 + (status + 1) * dt
        raise BlowUpError(
            f"nonpositive level at t ~ {t_fail:.6g} s (step {status}); "
            "the run left the physical domain, try a smaller cfl_safety",
            t=t_fail,
        )
    return TankState(xi, w, h, v)
