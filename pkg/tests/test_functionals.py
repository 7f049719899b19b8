import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from slosh_clf.config import build_scenario, load_config
from slosh_clf.controller import make_controller
from slosh_clf.functionals import (
    clf_V,
    energy_E,
    energy_identity_residuals,
    energy_W,
    flux_term_W,
    gradient_h,
    momentum,
    potential_terms,
    tank_terms,
    x_norm,
)
from slosh_clf.model import ControlGains, Grid, PhysicalParams, TankState, equilibrium_state
from slosh_clf.sampling import cosine_levels, random_deviation, sine_velocity
from slosh_clf.solver import advance, cfl_dt

from conftest import CONFIGS


def cos_state(p, grid, a, v=None):
    h = p.h_star + a * np.cos(np.pi * grid.centers / p.L)
    return TankState(0.0, 0.0, h, np.zeros(grid.n_cells + 1) if v is None else v)


# ---- gradient ------------------------------------------------------------------------


def test_gradient_of_constant_is_zero(grid):
    assert np.all(gradient_h(np.full(grid.n_cells, 0.3), grid) == 0.0)


def test_gradient_of_linear_profile(grid):
    c = 0.2
    s = gradient_h(0.5 + c * grid.centers, grid)
    assert s[0] == 0.0 and s[-1] == 0.0
    np.testing.assert_allclose(s[1:-1], c, rtol=1e-12)


def test_gradient_of_cosine_converges_second_order(params):
    errs = []
    for n in (128, 256, 512):
        g = Grid(n, params.L)
        s = gradient_h(cos_state(params, g, 0.1).h, g)
        exact = -0.1 * np.pi * np.sin(np.pi * g.faces)
        errs.append(np.max(np.abs(s - exact)))
    assert errs[1] < 1e-4
    for coarse, fine in zip(errs, errs[1:]):
        assert 3.6 < coarse / fine < 4.4


# ---- E ------------------------------------------------------------------------------


def test_E_zero_at_equilibrium(params, grid):
    assert energy_E(equilibrium_state(params, grid), params, grid) == 0.0


@pytest.mark.parametrize("a", [0.01, 0.1])
def test_E_of_cosine_level_matches_quadrature(params, a):
    # continuous value: exact gravity part plus mpmath quadrature of the arc excess
    exact = params.g * a * a * params.L / 4 + params.sigma * float(
        mp.quad(lambda x: mp.sqrt(1 + (a * mp.pi * mp.sin(mp.pi * x)) ** 2) - 1, [0, 1])
    )
    fine = energy_E(cos_state(params, Grid(4096, 1.0), a), params, Grid(4096, 1.0))
    g512 = Grid(512, 1.0)
    e512 = energy_E(cos_state(params, g512, a), params, g512)
    assert abs(e512 / fine - 1) < 1e-6
    assert abs(e512 / exact - 1) < 1e-6


def test_E_of_sine_velocity_is_quarter_hstar_L(params):
    errs = []
    for n in (256, 512):
        g = Grid(n, params.L)
        s = TankState(0, 0, np.full(n, params.h_star), sine_velocity(g, [1.0]))
        errs.append(abs(energy_E(s, params, g) - params.h_star * params.L / 4))
    assert errs[1] < 1e-5 * params.h_star
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


# ---- W ------------------------------------------------------------------------------


def test_W_zero_at_equilibrium(params, grid):
    assert energy_W(equilibrium_state(params, grid), params, grid) == 0.0


def test_W_terms_positive_for_still_wavy_liquid(params, grid):
    s = cos_state(params, grid, 0.05)
    grav, cap = potential_terms(s.h, params, grid)
    flux = flux_term_W(s.h, s.v, params, grid)
    slope = gradient_h(s.h, grid)
    hf = np.r_[s.h[0], 0.5 * (s.h[1:] + s.h[:-1]), s.h[-1]]
    expect = 0.5 * params.mu**2 * np.dot(grid.face_weights, slope**2 / hf)
    assert grav > 0 and cap > 0 and flux > 0
    assert flux == pytest.approx(expect, rel=1e-12)


def test_W_flux_term_vanishes_when_flux_cancels(params, grid):
    s = cos_state(params, grid, 0.05)
    hf = np.r_[s.h[0], 0.5 * (s.h[1:] + s.h[:-1]), s.h[-1]]
    v = -params.mu * gradient_h(s.h, grid) / hf
    assert v[0] == 0.0 and v[-1] == 0.0
    s2 = TankState(0, 0, s.h, v)
    assert flux_term_W(s2.h, s2.v, params, grid) < 1e-14
    grav, cap = potential_terms(s.h, params, grid)
    assert energy_W(s2, params, grid) == pytest.approx(grav + cap, rel=1e-12)


# ---- V and the norm ----------------------------------------------------------------


def test_V_zero_at_equilibrium(params, grid, gains):
    assert clf_V(equilibrium_state(params, grid), params, gains, grid).V == 0.0


def test_V_tank_offset_only(params, grid):
    s = TankState(1.0, 0.0, np.full(grid.n_cells, params.h_star), np.zeros(grid.n_cells + 1))
    V = clf_V(s, params, ControlGains(q=1.0, k=0.1), grid).V
    assert V == pytest.approx(0.01, rel=1e-14)


@given(seed=st.integers(0, 2**32 - 1), delta=st.floats(0.1, 5.0))
def test_V_reassembles_from_parts(seed, delta):
    p, grid = PhysicalParams(), Grid(64, 1.0)
    gains = ControlGains(k=0.03, delta=delta)
    dev = random_deviation(np.random.default_rng(seed), grid)
    s = dev.at(0.5 * dev.max_scale(p), p)
    fv = clf_V(s, p, gains, grid)
    parts = delta * energy_E(s, p, grid) + energy_W(s, p, grid) + tank_terms(s.xi, s.w, gains)
    assert fv.V == pytest.approx(parts, rel=1e-14)
    assert fv.E == energy_E(s, p, grid) and fv.W == energy_W(s, p, grid)


def test_x_norm_examples(params, grid):
    eq = equilibrium_state(params, grid)
    assert x_norm(eq, params, grid) == 0.0
    s = TankState(3.0, 4.0, eq.h, eq.v)
    assert x_norm(s, params, grid) == pytest.approx(5.0, rel=1e-15)


@given(seed=st.integers(0, 2**32 - 1))
def test_x_norm_is_homogeneous(seed):
    p, grid = PhysicalParams(), Grid(64, 1.0)
    dev = random_deviation(np.random.default_rng(seed), grid)
    scale = 0.4 * dev.max_scale(p)
    n1 = x_norm(dev.at(scale, p), p, grid)
    n2 = x_norm(dev.at(2 * scale, p), p, grid)
    assert n2 == pytest.approx(2 * n1, rel=1e-12)


# ---- energy identities --------------------------------------------------------------


def test_identity_residuals_zero_at_equilibrium(params, grid):
    eq = equilibrium_state(params, grid)
    assert energy_identity_residuals([eq, eq, eq], 1e-3, 0.0, params, grid) == (0.0, 0.0)


def test_identity_residuals_reject_uneven_spacing(params, grid):
    eq = equilibrium_state(params, grid)
    with pytest.raises(ValueError, match="non-uniform"):
        energy_identity_residuals([eq, eq, eq], (1e-3, 2e-3), 0.0, params, grid)


def test_closed_loop_identity_residual_small():
    cfg = load_config(str(CONFIGS / "canonical.cfg"))
    ic, gains = build_scenario(cfg)
    p, grid = cfg.params, cfg.grid
    dt = cfl_dt(ic, p, grid, cfg.stepping)
    s1 = advance(ic, 1, dt, p, grid, gains)
    s2 = advance(s1, 1, dt, p, grid, gains)
    f_mid = make_controller(p, gains, grid)(s1)
    res_E, res_W = energy_identity_residuals([ic, s1, s2], dt, f_mid, p, grid)
    assert res_E / abs(energy_E(s1, p, grid)) < 1e-3
    assert res_W / abs(energy_W(s1, p, grid)) < 1e-3


def test_momentum_of_sine_velocity(params):
    errs = []
    for n in (128, 256, 512):
        g = Grid(n, params.L)
        s = TankState(0, 0, np.full(n, params.h_star), sine_velocity(g, [1.0]))
        errs.append(abs(momentum(s.h, s.v, g) - params.h_star * 2 * params.L / math.pi))
    for coarse, fine in zip(errs, errs[1:]):
        assert coarse / fine == pytest.approx(4.0, rel=0.05)
