"""Closed-loop runs and trajectory certificates.

A run samples the state on a uniform time grid (the stepper may subdivide each
sample interval further if the CFL limit tightens) so that centred time
differences of the functionals are well defined.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import analysis as an
from .controller import feedback_f, measure
from .functionals import (
    capillary_dissipation,
    clf_V,
    slope_sq,
    viscous_dissipation,
    x_norm,
)
from .model import (
    ControlGains,
    GainConditionError,
    Grid,
    PhysicalParams,
    TankState,
    validate_state,
)
from .sampling import Deviation, cosine_levels, scale_to_level, sine_velocity
from .solver import StepControls, advance, cfl_dt

IC_MODES = ("cosine-levels", "sine-velocity", "combined", "offset-only")
BAND = 0.95  # generated V lands in [BAND, 1] * target

# certificate tolerances
EXACT_TOL = 1e-10
MASS_RTOL = 1e-12
MONO_RTOL = 1e-8
DECAY_TOL = 1e-10
DISSIPATION_FLOOR = 1e-6
DISSIPATION_C = 1.0
V_FLOOR = 1e-14

TRACE_COLUMNS = ("t", "xi", "w", "f", "V", "E", "W", "mass", "h_min", "h_max", "x_norm_dev")


@dataclass(frozen=True)
class InitialConditionSpec:
    mode: str = "combined"
    amplitudes: tuple[float, ...] = (1.0,)
    velocity_amplitudes: tuple[float, ...] = ()
    xi0: float = 1.0
    w0: float = 0.0
    target_r_fraction: float = 0.5

    def __post_init__(self):
        if self.mode not in IC_MODES:
            raise ValueError(f"unknown initial-condition mode {self.mode!r}; expected one of {IC_MODES}")
        if not 0.0 < self.target_r_fraction < 1.0:
            raise ValueError("target_r_fraction must lie in (0, 1)")


def make_initial_condition(
    spec: InitialConditionSpec, p: PhysicalParams, gains: ControlGains, grid: Grid
) -> tuple[TankState, float]:
    """Admissible state with V in [0.95, 1] * target_r_fraction * R, and its V.

    Tank offsets are kept as given; the field amplitudes are rescaled.
    """
    R = an.spill_radius_R(p, gains.delta)
    target = spec.target_r_fraction * R
    hs = sv = ()
    if spec.mode in ("cosine-levels", "combined"):
        hs = spec.amplitudes
    if spec.mode == "sine-velocity":
        sv = spec.amplitudes
    elif spec.mode == "combined":
        sv = spec.velocity_amplitudes
    dev = Deviation(0.0, 0.0, cosine_levels(grid, hs), sine_velocity(grid, sv))
    base = TankState(spec.xi0, spec.w0, dev.at(0.0, p).h, dev.at(0.0, p).v)
    V0 = clf_V(base, p, gains, grid).V
    if V0 > target:
        raise ValueError(
            f"infeasible initial condition: tank offset alone gives V = {V0:.4g} > target {target:.4g}"
        )
    fields_flat = not (np.any(dev.h_dev) or np.any(dev.v))
    if fields_flat:
        return validate_state(base, p, grid), V0

    def shifted(s: float) -> TankState:
        x = dev.at(s, p)
        return TankState(spec.xi0, spec.w0, x.h, x.v)

    # V is not linear in the field scale, so bisect on the full V
    cap = 0.999 * dev.max_scale(p)
    lo, hi = 0.0, min(1.0, cap)
    while clf_V(shifted(hi), p, gains, grid).V < BAND * target:
        if hi >= cap:
            raise ValueError(f"infeasible initial condition: target V = {target:.4g} not reachable")
        lo, hi = hi, min(2.0 * hi, cap)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        vm = clf_V(shifted(mid), p, gains, grid).V
        if vm > target:
            hi = mid
        elif vm >= BAND * target:
            lo = mid
            break
        else:
            lo = mid
    state = validate_state(shifted(lo), p, grid)
    return state, clf_V(state, p, gains, grid).V


def auto_gain_k(p: PhysicalParams, gains: ControlGains, r: float) -> float:
    """Position gain at half the admissible bound, k = q * theta(r) / 2."""
    return 0.5 * gains.q * an.theta(r, p, gains)


# ---- trace ---------------------------------------------------------------------------


@dataclass
class SimTrace:
    times: np.ndarray
    xi: np.ndarray
    w: np.ndarray
    f: np.ndarray
    V: np.ndarray
    E: np.ndarray
    W: np.ndarray
    mass: np.ndarray
    h_min: np.ndarray
    h_max: np.ndarray
    x_norm_dev: np.ndarray
    # integrals needed by the dissipation certificate
    slope_sq: np.ndarray
    visc: np.ndarray
    cap: np.ndarray
    params: PhysicalParams
    gains: ControlGains
    grid: Grid
    r: float
    R: float
    lambda_V: float
    profiles: list[tuple[np.ndarray, np.ndarray]] | None = field(default=None, repr=False)
    steps: int = 0

    @property
    def sample_dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def columns(self) -> dict[str, np.ndarray]:
        return {c: getattr(self, "times" if c == "t" else c) for c in TRACE_COLUMNS}

    def final_row(self) -> dict[str, float]:
        return {k: float(v[-1]) for k, v in self.columns().items()}


_SAMPLED = ("xi", "w", "f", "V", "E", "W", "mass", "h_min", "h_max", "x_norm_dev", "slope_sq", "visc", "cap")


def _sample(s: TankState, p: PhysicalParams, gains: ControlGains, grid: Grid, closed: bool) -> dict:
    fv = clf_V(s, p, gains, grid)
    f = feedback_f(measure(s, grid), gains, p) if closed else 0.0
    return {
        "xi": s.xi,
        "w": s.w,
        "f": f,
        "V": fv.V,
        "E": fv.E,
        "W": fv.W,
        "mass": fv.mass,
        "h_min": float(s.h.min()),
        "h_max": float(s.h.max()),
        "x_norm_dev": x_norm(s, p, grid),
        "slope_sq": slope_sq(s.h, grid),
        "visc": viscous_dissipation(s.h, s.v, grid),
        "cap": capillary_dissipation(s.h, grid),
    }


def run_simulation(
    ic: TankState,
    p: PhysicalParams,
    gains: ControlGains,
    grid: Grid,
    ctrl: StepControls,
    record_profiles: bool = False,
    closed_loop: bool = True,
) -> SimTrace:
    """Integrate from ``ic`` to ``ctrl.t_end``.

    The certificate radius is r = V(ic). Closed-loop runs refuse to start unless
    r < R and k < q * theta(r).
    """
    validate_state(ic, p, grid)
    R = an.spill_radius_R(p, gains.delta)
    r = clf_V(ic, p, gains, grid).V
    lam_v = float("nan")
    if closed_loop:
        if not r < R:
            raise GainConditionError(f"initial V = {r:.6g} is not below R = {R:.6g}; no certificate")
        chk = an.check_gain_condition(p, gains, r)
        if not chk.passed:
            raise GainConditionError(
                f"gain condition k < q*theta(r) fails: k = {gains.k:.6g}, "
                f"q*theta(r) = {gains.q * chk.theta:.6g} at r = {r:.6g}"
            )
        lam_v = an.decay_rates(r, p, gains)[0]

    dt0 = cfl_dt(ic, p, grid, ctrl)
    n_int = max(1, math.ceil(ctrl.t_end / (ctrl.output_stride * dt0) - 1e-12)) if ctrl.t_end > 0 else 0
    interval = ctrl.t_end / n_int if n_int else 0.0

    rows = [_sample(ic, p, gains, grid, closed_loop)]
    profiles = [(ic.h.copy(), ic.v.copy())] if record_profiles else None
    state, t, steps = ic, 0.0, 0
    for i in range(n_int):
        n_sub = max(ctrl.output_stride, math.ceil(interval / cfl_dt(state, p, grid, ctrl)))
        state = advance(state, n_sub, interval / n_sub, p, grid, gains if closed_loop else None, t0=t)
        steps += n_sub
        t = (i + 1) * interval
        rows.append(_sample(state, p, gains, grid, closed_loop))
        if record_profiles:
            profiles.append((state.h.copy(), state.v.copy()))
    cols = {k: np.array([row[k] for row in rows]) for k in _SAMPLED}
    return SimTrace(
        times=np.arange(n_int + 1) * interval,
        **cols,
        params=p,
        gains=gains,
        grid=grid,
        r=r,
        R=R,
        lambda_V=lam_v,
        profiles=profiles,
        steps=steps,
    )


# ---- certificates --------------------------------------------------------------------


@dataclass(frozen=True)
class CertificateEntry:
    name: str
    passed: bool
    worst_margin: float
    t_worst: float
    note: str = ""


@dataclass(frozen=True)
class DecayFit:
    lambda_emp: float | None
    window: tuple[float, float]

    @property
    def applicable(self) -> bool:
        return self.lambda_emp is not None


@dataclass(frozen=True)
class CertificateReport:
    entries: tuple[CertificateEntry, ...]
    decay: DecayFit
    lambda_V: float

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def __getitem__(self, name: str) -> CertificateEntry:
        for e in self.entries:
            if e.name == name or e.name.split()[0] == name:
                return e
        raise KeyError(name)

    @property
    def rate_ratio(self) -> float | None:
        if not self.decay.applicable or not self.lambda_V > 0:
            return None
        return self.decay.lambda_emp / self.lambda_V

    @property
    def worst_margin(self) -> float:
        return min(e.worst_margin for e in self.entries)

    def to_text(self) -> str:
        lines = [f"{'certificate':<24} {'status':<6} {'worst margin':>14} {'at t':>10}"]
        for e in self.entries:
            status = "PASS" if e.passed else "FAIL"
            lines.append(f"{e.name:<24} {status:<6} {e.worst_margin:>14.6e} {e.t_worst:>10.4f}  {e.note}")
        d = self.decay
        lam = "n/a" if not d.applicable else f"{d.lambda_emp:.6e}"
        lines.append(f"lambda_emp = {lam} over [{d.window[0]:g}, {d.window[1]:g}]")
        lines.append(f"lambda_V   = {self.lambda_V:.6e}")
        ratio = self.rate_ratio
        lines.append(f"empirical/theoretical = {'n/a' if ratio is None else f'{ratio:.6g}'}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _entry(name: str, margins: np.ndarray, times: np.ndarray, strict: bool = False, note: str = "") -> CertificateEntry:
    if len(margins) == 0:
        return CertificateEntry(name, True, math.inf, math.nan, note or "no samples")
    i = int(np.argmin(margins))
    m = float(margins[i])
    ok = m > 0.0 if strict else m >= 0.0
    return CertificateEntry(name, bool(ok), m, float(times[i]), note)


def dissipation_tolerance(trace: SimTrace) -> float:
    return max(DISSIPATION_FLOOR, DISSIPATION_C * (trace.sample_dt**2 + trace.grid.dx**2))


def dissipation_residuals(trace: SimTrace) -> tuple[np.ndarray, np.ndarray]:
    """Centred dV/dt minus the dissipation bound, at interior samples, and their times."""
    t = trace.times
    if len(t) < 3:
        return np.empty(0), np.empty(0)
    dts = np.diff(t)
    if not np.allclose(dts, dts[0], rtol=1e-9, atol=0.0):
        raise ValueError("dissipation residual needs uniformly spaced samples")
    p, gains = trace.params, trace.gains
    dVdt = (trace.V[2:] - trace.V[:-2]) / (t[2:] - t[:-2])
    mid = slice(1, -1)
    V, xi, w = trace.V[mid], trace.xi[mid], trace.w[mid]
    d, q, k = gains.delta, gains.q, gains.k
    q1r = an.Q1(trace.r, p, d)
    q1v, q2v = an.level_bounds(V, p, d)
    th = an.theta(trace.r, p, gains)
    visc_coef = p.mu * d / (2.0 * p.H_max) * (2.0 * p.H_max - q1r * q2v / q1v)
    bound = (
        -0.75 * p.mu * p.g * trace.slope_sq[mid]
        - q * k**3 * xi * xi
        - visc_coef * trace.visc[mid]
        - p.mu * p.sigma * trace.cap[mid]
        - q * (q * th - k) * (w + k * xi) ** 2
    )
    return dVdt - bound, t[mid]


def verify_dissipation(trace: SimTrace) -> CertificateEntry:
    tol = dissipation_tolerance(trace)
    res, times = dissipation_residuals(trace)
    raw = f" max raw residual={res.max():.3e}" if len(res) else ""
    return _entry("C7 dissipation", tol - res, times, note=f"tol={tol:.3e}{raw}")


def fit_decay(times: np.ndarray, V: np.ndarray, floor: float = V_FLOOR) -> DecayFit:
    """Least-squares decay rate of ln V over the tail half of the run."""
    t_end = float(times[-1])
    window = (0.5 * t_end, t_end)
    sel = (times >= window[0]) & (V >= floor)
    if V[np.searchsorted(times, window[0])] < floor or sel.sum() < 2:
        return DecayFit(None, window)
    slope = np.polyfit(times[sel], np.log(V[sel]), 1)[0]
    return DecayFit(float(-slope), window)


def certify(trace: SimTrace) -> CertificateReport:
    p, gains, t = trace.params, trace.gains, trace.times
    d = gains.delta
    V0 = float(trace.V[0])
    entries = []
    entries.append(_entry("C1 mass", MASS_RTOL * p.m - np.abs(trace.mass - p.m), t))
    tol_mono = MONO_RTOL * max(V0, 1.0)
    entries.append(_entry("C2 V-monotone", trace.V[:-1] + tol_mono - trace.V[1:], t[1:]))
    entries.append(_entry("C3 invariance", min(V0, trace.r) + EXACT_TOL - trace.V, t))
    q1, q2 = an.level_bounds(np.maximum(trace.V, 0.0), p, d)
    c4 = np.minimum(trace.h_min - q1, q2 - trace.h_max) + EXACT_TOL
    entries.append(_entry("C4 level bounds", c4, t))
    entries.append(_entry("C5 spill-free", p.H_max - trace.h_max, t, strict=True))
    lam = trace.lambda_V if np.isfinite(trace.lambda_V) else 0.0
    entries.append(_entry("C6 V-decay", V0 * np.exp(-lam * t) + DECAY_TOL - trace.V, t))
    entries.append(verify_dissipation(trace))
    entries.append(_entry("C8 positivity", trace.h_min, t, strict=True))
    return CertificateReport(tuple(entries), fit_decay(t, trace.V), lam)


def certificate_names() -> Sequence[str]:
    return ("C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8")
