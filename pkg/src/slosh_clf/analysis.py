"""Closed-form certificate functions for the feedback law.

Everything here is a scalar function of the physical parameters, the gains and
a CLF level ``s`` (or radius ``r``). Functions that are only meaningful inside
the certified region ``0 <= s < R`` reject anything else instead of
extrapolating, because the lower level bound can cross zero outside it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import ControlGains, GainConditionError, ParameterError, PhysicalParams

_BISECT_ITERS = 200
_NEWTON_STEPS = 5


# ---- the level-bound generator G and its inverse -----------------------------------


def _G(h: np.ndarray, hs: float) -> np.ndarray:
    # factored form of 2/3 h^1.5 - 2 h* h^0.5 + 4/3 h*^1.5; the expanded sum
    # cancels catastrophically near h*, where G^-1 is most sensitive
    pos = np.sqrt(np.maximum(h, 0.0))
    rs = math.sqrt(hs)
    u = (h - hs) / (pos + rs)
    upper = np.sign(h - hs) * (2.0 / 3.0) * u * u * (pos + 2.0 * rs)
    return np.where(h > 0.0, upper, -4.0 / 3.0 * hs * rs + h)


def _scalar_or_array(x: np.ndarray, like) -> float | np.ndarray:
    return float(x) if np.ndim(like) == 0 else x


def G(h, p: PhysicalParams):
    """Increasing level map used to turn a CLF value into pointwise level bounds.

    Accepts scalars or arrays.
    """
    return _scalar_or_array(_G(np.asarray(h, dtype=float), p.h_star), h)


def G_prime(h, p: PhysicalParams):
    hh = np.asarray(h, dtype=float)
    safe = np.where(hh > 0.0, hh, 1.0)
    d = np.where(hh > 0.0, np.abs(hh - p.h_star) / np.sqrt(safe), 1.0)
    return _scalar_or_array(d, h)


def G_inverse(y, p: PhysicalParams):
    """Inverse of :func:`G` (scalars or arrays).

    Bisection on a geometrically grown bracket, then a few Newton steps that are
    only accepted while they stay inside the bracket and reduce the residual
    (G' vanishes at h* and blows up at 0).
    """
    hs = p.h_star
    yy = np.atleast_1d(np.asarray(y, dtype=float))
    g0 = -4.0 / 3.0 * hs * math.sqrt(hs)
    affine = yy <= g0
    lo = np.where(yy > 0.0, hs, 0.0)
    hi = np.where(yy > 0.0, 2.0 * hs, hs)
    while True:
        grow = (yy > 0.0) & (_G(hi, hs) < yy)
        if not grow.any():
            break
        lo = np.where(grow, hi, lo)
        hi = np.where(grow, 2.0 * hi, hi)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if not np.any((mid > lo) & (mid < hi)):
            break
        below = _G(mid, hs) < yy
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    h = 0.5 * (lo + hi)
    for _ in range(_NEWTON_STEPS):
        d = np.atleast_1d(G_prime(h, p))
        res = _G(h, hs) - yy
        cand = h - res / np.where(d > 0.0, d, np.inf)
        ok = (d > 0.0) & (cand >= lo) & (cand <= hi) & (np.abs(_G(cand, hs) - yy) < np.abs(res))
        h = np.where(ok, cand, h)
    h = np.where(affine, yy - g0, h)
    h = np.where(yy == 0.0, hs, h)
    return float(h[0]) if np.ndim(y) == 0 else h.reshape(np.shape(y))


# ---- level bounds from the CLF value -----------------------------------------------


def clf_constant_c(p: PhysicalParams, delta: float) -> float:
    return 1.0 / (p.mu * math.sqrt(delta * p.g))


def _sqrt_branch(s, p: PhysicalParams, delta: float):
    return np.sqrt(2.0 * p.m * (1.0 + delta) * s / (delta * p.mu**2))


def _capillary_branch(s, p: PhysicalParams, delta: float):
    a = s / (p.sigma * (delta + 1.0)) + p.L
    return np.sqrt(a * a - p.L * p.L)


@dataclass(frozen=True)
class LevelBounds:
    Q1: float
    Q2: float
    lower: dict = field(repr=False)
    upper: dict = field(repr=False)

    @property
    def lower_branch(self) -> str:
        return max(self.lower, key=self.lower.get)

    @property
    def upper_branch(self) -> str:
        return min(self.upper, key=self.upper.get)


def _branches(s, p: PhysicalParams, delta: float) -> tuple[dict, dict]:
    ss = np.asarray(s, dtype=float)
    if np.any(ss < 0):
        raise ParameterError(f"CLF level must be nonnegative, got {np.min(ss)}")
    c = clf_constant_c(p, delta)
    hs = p.h_star
    b1 = _sqrt_branch(ss, p, delta)
    b2 = _capillary_branch(ss, p, delta)
    lower = {"G_inverse": G_inverse(-c * ss, p), "N1": hs - b1, "N2": hs - b2}
    upper = {"G_inverse": G_inverse(c * ss, p), "P1": hs + b1, "P2": hs + b2}
    return lower, upper


def level_bounds_detail(s: float, p: PhysicalParams, delta: float) -> LevelBounds:
    lower, upper = _branches(float(s), p, delta)
    lower = {k: float(v) for k, v in lower.items()}
    upper = {k: float(v) for k, v in upper.items()}
    return LevelBounds(max(lower.values()), min(upper.values()), lower, upper)


def level_bounds(s, p: PhysicalParams, delta: float):
    """(Q1, Q2): pointwise lower/upper bounds on h for any state with V = s.

    Accepts a scalar level or an array of levels.
    """
    lower, upper = _branches(s, p, delta)
    q1 = np.maximum.reduce([np.asarray(v) for v in lower.values()])
    q2 = np.minimum.reduce([np.asarray(v) for v in upper.values()])
    if np.ndim(s) == 0:
        return float(q1), float(q2)
    return q1, q2


def Q1(s, p: PhysicalParams, delta: float):
    return level_bounds(s, p, delta)[0]


def Q2(s, p: PhysicalParams, delta: float):
    return level_bounds(s, p, delta)[1]


def positivity_thresholds(p: PhysicalParams, delta: float) -> tuple[float, float, float]:
    hs, L = p.h_star, p.L
    t1 = 4.0 / 3.0 * p.mu * hs * math.sqrt(delta * p.g * hs)
    t2 = p.mu**2 * hs * delta / (2.0 * L * (1.0 + delta))
    t3 = p.sigma * (delta + 1.0) * (math.hypot(hs, L) - L)
    return t1, t2, t3


def positivity_threshold(p: PhysicalParams, delta: float) -> float:
    """Below this CLF level the lower level bound Q1 is strictly positive."""
    return max(positivity_thresholds(p, delta))


# ---- spill radius --------------------------------------------------------------------


@dataclass(frozen=True)
class SpillRadius:
    R: float
    zeta1: float
    zeta2: float
    gammas: tuple[float, float, float]
    deltas: tuple[float, float]

    @property
    def zeta1_branch(self) -> str:
        return f"Gamma{int(np.argmax(self.gammas)) + 1}"

    @property
    def zeta2_branch(self) -> str:
        opts = (2.0,) + self.deltas
        return ("2", "Delta1", "Delta2")[int(np.argmax(opts))]

    @property
    def active(self) -> str:
        return "zeta1" if self.zeta1 <= self.zeta2 else "zeta2"


def spill_radius(p: PhysicalParams, delta: float) -> SpillRadius:
    hs, H, L, mu, g, sig = p.h_star, p.H_max, p.L, p.mu, p.g, p.sigma
    if not hs < H:
        raise ParameterError(f"h* >= H_max ({hs} >= {H}): no spill-free radius exists")
    gap = H - hs
    sq = math.sqrt(delta * g * hs)
    gam1 = math.sqrt(H / hs) - 2.0 * math.sqrt(hs) / (math.sqrt(H) + math.sqrt(hs))
    gam2 = 3.0 * mu * math.sqrt(delta) * gap / (4.0 * p.m * (1.0 + delta) * math.sqrt(g * hs))
    gam3 = 3.0 * sig * (delta + 1.0) * (math.hypot(L, gap) - L) / (2.0 * mu * sq * gap)
    del1 = 3.0 * mu * math.sqrt(delta) / (4.0 * L * math.sqrt(g * hs) * (1.0 + delta))
    del2 = 3.0 * sig * (delta + 1.0) * math.sqrt(hs) / (
        2.0 * mu * math.sqrt(delta * g) * (math.hypot(hs, L) + L)
    )
    zeta1 = max(gam1, gam2, gam3)
    zeta2 = hs / gap * max(2.0, del1, del2)
    R = 2.0 * mu * sq / 3.0 * gap * min(zeta1, zeta2)
    return SpillRadius(R, zeta1, zeta2, (gam1, gam2, gam3), (del1, del2))


def spill_radius_R(p: PhysicalParams, delta: float) -> float:
    return spill_radius(p, delta).R


def _check_level(s: float, p: PhysicalParams, delta: float, what: str) -> float:
    R = spill_radius_R(p, delta)
    if not 0.0 <= s < R:
        raise ParameterError(f"{what} needs 0 <= level < R = {R:.6g}, got {s:.6g}")
    return R


# ---- gain condition and decay certificate -------------------------------------------


def theta(r: float, p: PhysicalParams, gains: ControlGains) -> float:
    _check_level(r, p, gains.delta, "theta")
    om, d = gains.omega, gains.delta
    q1 = Q1(r, p, d)
    a = p.g * p.mu * d * math.pi**2 * q1
    bracket = p.m * p.g * p.L * p.H_max * (d + 1.0) ** 2 + 2.0 * p.mu**2 * d * math.pi**2 * q1
    return om * a / (a + 2.0 * om * p.L * bracket)


@dataclass(frozen=True)
class GainCheck:
    passed: bool
    margin: float
    theta: float


def check_gain_condition(p: PhysicalParams, gains: ControlGains, r: float) -> GainCheck:
    """Strict condition k < q * theta(r); ``margin`` is q * theta(r) - k."""
    th = theta(r, p, gains)
    margin = gains.q * th - gains.k
    return GainCheck(margin > 0.0, margin, th)


def Lambda(s: float, p: PhysicalParams, gains: ControlGains) -> float:
    d, q, k = gains.delta, gains.q, gains.k
    _check_level(s, p, d, "Lambda")
    q1, q2 = level_bounds(s, p, d)
    kap1 = (d + 1.0) * (p.g * p.L**2 + 2.0 * p.sigma)
    kap2 = p.L**2 * (d + 2.0) / math.pi**2
    kap3 = q * max(1.0, k * k)
    return 0.5 * max(kap1 + 2.0 * p.mu**2 / q1, kap2 * q2 / q1, kap3)


def g2(s: float, p: PhysicalParams, gains: ControlGains) -> float:
    d, q, k = gains.delta, gains.q, gains.k
    _check_level(s, p, d, "g2")
    q1 = Q1(s, p, d)
    return max(
        (d + 2.0) * p.H_max / 2.0,
        (d + 1.0) * p.g / 2.0,
        p.mu**2 / q1 + p.sigma * (d + 1.0),
        1.5 * q * k * k,
        q,
    )


def beta_branches(r: float, p: PhysicalParams, gains: ControlGains) -> dict[str, float]:
    d, q, k = gains.delta, gains.q, gains.k
    chk = check_gain_condition(p, gains, r)
    return {
        "gravity": 0.75 * p.mu * p.g,
        "viscous": p.mu * d * (2.0 * p.H_max - Q2(r, p, d)) / (2.0 * p.H_max),
        "position": q * k**3,
        "velocity": q * chk.margin,
        "capillary": p.mu * p.sigma,
    }


def beta(r: float, p: PhysicalParams, gains: ControlGains) -> float:
    br = beta_branches(r, p, gains)
    if br["velocity"] <= 0.0:
        raise GainConditionError(
            f"k = {gains.k:.6g} violates k < q*theta(r) at r = {r:.6g}; decay certificate void"
        )
    return min(br.values())


def decay_rates(r: float, p: PhysicalParams, gains: ControlGains) -> tuple[float, float]:
    """(rate for V, rate for the deviation norm)."""
    lam_v = beta(r, p, gains) / Lambda(r, p, gains)
    return lam_v, 0.5 * lam_v


@dataclass(frozen=True)
class CertificateConstants:
    c: float
    R: float
    theta_of_r: Callable[[float], float] = field(repr=False)
    lambda_V: float
    lambda_norm: float


def certificate_constants(p: PhysicalParams, gains: ControlGains, r: float) -> CertificateConstants:
    lam_v, lam_n = decay_rates(r, p, gains)
    return CertificateConstants(
        c=clf_constant_c(p, gains.delta),
        R=spill_radius_R(p, gains.delta),
        theta_of_r=lambda s: theta(s, p, gains),
        lambda_V=lam_v,
        lambda_norm=lam_n,
    )


# ---- static inequalities checked on arbitrary states --------------------------------


def sup_deviation_bound(V, p: PhysicalParams, delta: float):
    """Bound on max|h - h*| implied by the capillary part of V."""
    return _capillary_branch(V, p, delta)


def upper_bound_constants(p: PhysicalParams, gains: ControlGains, eps: float) -> tuple[float, float]:
    """(C1, C2) of the quadratic-plus-linear upper bound on V near equilibrium."""
    d, q, k = gains.delta, gains.q, gains.k
    limit = min(p.h_star, p.H_max - p.h_star) / math.sqrt(p.L)
    if not 0.0 < eps < limit:
        raise ParameterError(f"eps must lie in (0, {limit:.6g}), got {eps}")
    c1 = max(
        p.mu**2 / (p.h_star - eps * math.sqrt(p.L)),
        (d + 1.0) / 2.0 * p.g,
        (d + 2.0) * p.H_max / 2.0,
        q,
        1.5 * q * k * k,
    )
    c2 = p.sigma * (d + 1.0) * math.sqrt(p.L)
    return c1, c2


def dissipation_bound_rhs(
    V: float,
    r: float,
    p: PhysicalParams,
    gains: ControlGains,
    slope_sq: float,
    visc: float,
    cap: float,
    xi: float,
    w: float,
) -> float:
    """Upper bound on dV/dt at level V for trajectories started in the r-sublevel set.

    ``slope_sq``, ``visc`` and ``cap`` are the integrals of h_x^2, h v_x^2 and
    h_xx^2/(1+h_x^2)^(3/2).
    """
    d, q, k = gains.delta, gains.q, gains.k
    q1r = Q1(r, p, d)
    q1v, q2v = level_bounds(V, p, d)
    th = theta(r, p, gains)
    visc_coef = p.mu * d / (2.0 * p.H_max) * (2.0 * p.H_max - q1r * q2v / q1v)
    return (
        -0.75 * p.mu * p.g * slope_sq
        - q * k**3 * xi * xi
        - visc_coef * visc
        - p.mu * p.sigma * cap
        - q * (q * th - k) * (w + k * xi) ** 2
    )
