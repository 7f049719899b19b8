"""Discrete energy functionals on the staggered grid.

Quadrature conventions (shared by every module so identities stay consistent):

* cell quantities (``h``, ``v`` averaged to centres, ``v_x``, curvature) use the
  midpoint rule with weight ``dx``;
* face quantities (slopes, ``v``, the flux ``h v + mu h_x``) use trapezoid
  weights; both ``v`` and the slope are 0 on the wall faces.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import ControlGains, Grid, PhysicalParams, TankState, mass


@dataclass(frozen=True)
class FunctionalValues:
    E: float
    W: float
    V: float
    mass: float
    sup_dev: float


def gradient_h(h: np.ndarray, grid: Grid) -> np.ndarray:
    """Face slopes of ``h``; the wall faces are exactly 0 (reflection ghosts)."""
    s = np.zeros(len(h) + 1)
    s[1:-1] = np.diff(h) / grid.dx
    return s


def face_levels(h: np.ndarray) -> np.ndarray:
    hf = np.empty(len(h) + 1)
    hf[1:-1] = 0.5 * (h[:-1] + h[1:])
    hf[0], hf[-1] = h[0], h[-1]
    return hf


def center_velocity(v: np.ndarray) -> np.ndarray:
    return 0.5 * (v[:-1] + v[1:])


def center_slope_and_curvature(h: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Centred ``h_x`` and ``h_xx`` at cell centres with mirror ghosts h[-1]=h[0], h[N]=h[N-1]."""
    hp = np.concatenate(([h[0]], h, [h[-1]]))
    hx = (hp[2:] - hp[:-2]) / (2.0 * grid.dx)
    hxx = (hp[2:] - 2.0 * hp[1:-1] + hp[:-2]) / grid.dx**2
    return hx, hxx


def _arc_excess(s: np.ndarray) -> np.ndarray:
    # sqrt(1+s^2) - 1 without cancellation
    return s * s / (np.sqrt(1.0 + s * s) + 1.0)


def potential_terms(h: np.ndarray, p: PhysicalParams, grid: Grid) -> tuple[float, float]:
    """Gravity and capillary potential energies."""
    dx = grid.dx
    grav = 0.5 * p.g * dx * float(np.sum((h - p.h_star) ** 2))
    cap = p.sigma * float(np.dot(grid.face_weights, _arc_excess(gradient_h(h, grid))))
    return grav, cap


def kinetic_E(h: np.ndarray, v: np.ndarray, grid: Grid) -> float:
    return 0.5 * grid.dx * float(np.sum(h * center_velocity(v) ** 2))


def flux_term_W(h: np.ndarray, v: np.ndarray, p: PhysicalParams, grid: Grid) -> float:
    """First term of W: half the h-weighted square of ``h v + mu h_x`` over ``h``."""
    hf = face_levels(h)
    phi = hf * v + p.mu * gradient_h(h, grid)
    return 0.5 * float(np.dot(grid.face_weights, phi * phi / hf))


def energy_E(s: TankState, p: PhysicalParams, grid: Grid) -> float:
    grav, cap = potential_terms(s.h, p, grid)
    return kinetic_E(s.h, s.v, grid) + grav + cap


def energy_W(s: TankState, p: PhysicalParams, grid: Grid) -> float:
    grav, cap = potential_terms(s.h, p, grid)
    return flux_term_W(s.h, s.v, p, grid) + grav + cap


def tank_terms(xi: float, w: float, gains: ControlGains) -> float:
    q, k = gains.q, gains.k
    return 0.5 * q * k * k * xi * xi + 0.5 * q * (w + k * xi) ** 2


def clf_V(s: TankState, p: PhysicalParams, gains: ControlGains, grid: Grid) -> FunctionalValues:
    grav, cap = potential_terms(s.h, p, grid)
    E = kinetic_E(s.h, s.v, grid) + grav + cap
    W = flux_term_W(s.h, s.v, p, grid) + grav + cap
    V = gains.delta * E + W + tank_terms(s.xi, s.w, gains)
    return FunctionalValues(
        E=E, W=W, V=V, mass=mass(s.h, grid), sup_dev=float(np.max(np.abs(s.h - p.h_star)))
    )


def x_norm(s: TankState, p: PhysicalParams, grid: Grid) -> float:
    """Deviation norm of (xi, w, h - h*, v): tank scalars, level L2, slope L2, velocity L2."""
    wf = grid.face_weights
    dev = grid.dx * float(np.sum((s.h - p.h_star) ** 2))
    slope = float(np.dot(wf, gradient_h(s.h, grid) ** 2))
    vel = float(np.dot(wf, s.v**2))
    return float(np.sqrt(s.xi**2 + s.w**2 + dev + slope + vel))


# ---- integrals appearing in the dissipation identities ---------------------------


def momentum(h: np.ndarray, v: np.ndarray, grid: Grid) -> float:
    return grid.dx * float(np.sum(h * center_velocity(v)))


def slope_sq(h: np.ndarray, grid: Grid) -> float:
    """Squared L2 norm of h_x on faces."""
    return float(np.dot(grid.face_weights, gradient_h(h, grid) ** 2))


def viscous_dissipation(h: np.ndarray, v: np.ndarray, grid: Grid) -> float:
    """Integral of h v_x^2 with v_x taken at centres."""
    vx = np.diff(v) / grid.dx
    return grid.dx * float(np.sum(h * vx * vx))


def capillary_dissipation(h: np.ndarray, grid: Grid) -> float:
    """Integral of h_xx^2 / (1 + h_x^2)^(3/2) at centres."""
    hx, hxx = center_slope_and_curvature(h, grid)
    return grid.dx * float(np.sum(hxx * hxx / (1.0 + hx * hx) ** 1.5))


def energy_rates(s: TankState, f: float, p: PhysicalParams, grid: Grid) -> tuple[float, float]:
    """Exact continuous-time rates of E and W at a state under control ``f``."""
    mom = momentum(s.h, s.v, grid)
    dE = -p.mu * viscous_dissipation(s.h, s.v, grid) + f * mom
    dW = (
        -p.mu * p.g * slope_sq(s.h, grid)
        - p.mu * p.sigma * capillary_dissipation(s.h, grid)
        + f * (mom + p.mu * (s.h[-1] - s.h[0]))
    )
    return dE, dW


def clf_rate(s: TankState, f: float, p: PhysicalParams, gains: ControlGains, grid: Grid) -> float:
    """Rate of V implied by the E and W identities plus the tank equations."""
    dE, dW = energy_rates(s, f, p, grid)
    q, k = gains.q, gains.k
    z = s.w + k * s.xi
    return gains.delta * dE + dW + q * k * k * s.xi * s.w + q * z * (k * s.w - f)


def energy_identity_residuals(
    states: Sequence[TankState],
    dt: float | Sequence[float],
    f_mid: float,
    p: PhysicalParams,
    grid: Grid,
) -> tuple[float, float]:
    """|centred dE/dt - identity RHS| and the same for W, at the middle of three snapshots.

    ``dt`` may be given as the two spacings between snapshots; they must agree.
    """
    if len(states) != 3:
        raise ValueError("need exactly three consecutive snapshots")
    if np.ndim(dt) == 1:
        d1, d2 = dt
        if not np.isclose(d1, d2, rtol=1e-12, atol=0.0):
            raise ValueError(f"non-uniform snapshot spacing ({d1} vs {d2}): residual undefined")
        dt = 0.5 * (d1 + d2)
    E = [energy_E(s, p, grid) for s in states]
    W = [energy_W(s, p, grid) for s in states]
    dE_num = (E[2] - E[0]) / (2.0 * dt)
    dW_num = (W[2] - W[0]) / (2.0 * dt)
    dE, dW = energy_rates(states[1], f_mid, p, grid)
    return abs(dE_num - dE), abs(dW_num - dW)
