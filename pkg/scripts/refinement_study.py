"""Grid/time-step refinement of the discrete energy and dissipation identities.

Prints, per resolution, the open-loop E-identity residual (dt proportional to
dx^2) and the closed-loop error of the V-rate identity against the C7 tolerance.
"""
import argparse
import pathlib

import numpy as np

from slosh_clf.config import build_scenario, load_config
from slosh_clf.controller import make_controller
from slosh_clf.functionals import clf_rate, energy_identity_residuals
from slosh_clf.harness import dissipation_tolerance, run_simulation
from slosh_clf.model import Grid, PhysicalParams, TankState
from slosh_clf.sampling import cosine_levels
from slosh_clf.solver import advance

ROOT = pathlib.Path(__file__).resolve().parents[1]


def open_loop(n, p, t_probe=0.05):
    g = Grid(n, p.L)
    dt = 2e-5 * (128 / n) ** 2
    s = TankState(0, 0, p.h_star + cosine_levels(g, [0.05]), np.zeros(n + 1))
    s = advance(s, int(round(t_probe / dt)), dt, p, g, None)
    a = advance(s, 1, dt, p, g, None)
    b = advance(a, 1, dt, p, g, None)
    return energy_identity_residuals([s, a, b], dt, 0.0, p, g)


def closed_loop(n, t_end):
    cfg = load_config(str(ROOT / "configs" / "canonical.cfg")).with_value("N", str(n)).with_value("t_end", str(t_end))
    ic, gains = build_scenario(cfg)
    p, grid = cfg.params, cfg.grid
    tr = run_simulation(ic, p, gains, grid, cfg.stepping, record_profiles=True)
    ctl = make_controller(p, gains, grid)
    rate = np.array([clf_rate(TankState(x, w, h, v), ctl(TankState(x, w, h, v)), p, gains, grid)
                     for (h, v), x, w in zip(tr.profiles, tr.xi, tr.w)])
    t = tr.times
    fd = (tr.V[2:] - tr.V[:-2]) / (t[2:] - t[:-2])
    return float(np.max(np.abs(fd - rate[1:-1]))), dissipation_tolerance(tr)


ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--t-end", type=float, default=5.0)
args = ap.parse_args()

p = PhysicalParams()
print(f"{'N':>5} {'res_E':>12} {'res_W':>12}")
prev = None
for n in (128, 256, 512):
    rE, rW = open_loop(n, p)
    ratio = "" if prev is None else f"  ratio {prev / rE:.3f}"
    print(f"{n:>5} {rE:>12.4e} {rW:>12.4e}{ratio}")
    prev = rE
print(f"\n{'N':>5} {'rate error':>12} {'tol':>12} {'error/tol':>10}")
for n in (128, 256):
    e, tol = closed_loop(n, args.t_end)
    print(f"{n:>5} {e:>12.4e} {tol:>12.4e} {e / tol:>10.4f}")
