import numpy as np
import pytest
from hypothesis import given, strategies as st

from slosh_clf.model import (
    Grid,
    ParameterError,
    PhysicalParams,
    StateError,
    TankState,
    equilibrium_state,
    from_lab_frame,
    mass,
    reconstruct_lab_frame,
    validate_params,
    validate_state,
)
from slosh_clf.sampling import cosine_levels, sine_velocity


def test_canonical_params_accepted():
    p = validate_params(PhysicalParams(g=9.81, mu=0.1, sigma=0.073, L=1, m=0.5, H_max=1))
    assert p.h_star == 0.5


def test_rest_level_above_wall_rejected():
    with pytest.raises(ParameterError, match="h\\* >= H_max"):
        validate_params(PhysicalParams(m=1.2, L=1, H_max=1))


def test_zero_surface_tension_rejected():
    with pytest.raises(ParameterError, match="sigma must be positive"):
        validate_params(PhysicalParams(sigma=0.0))


@pytest.mark.parametrize("name", ["g", "mu", "L", "m", "H_max"])
def test_nonpositive_parameters_rejected(name):
    with pytest.raises(ParameterError, match=name):
        validate_params(PhysicalParams().with_(**{name: -1.0}))


def test_grid_needs_eight_cells():
    with pytest.raises(ParameterError):
        Grid(7, 1.0)
    g = Grid(8, 2.0)
    assert g.dx == 0.25
    assert g.face_weights.sum() == pytest.approx(2.0, abs=1e-15)


def test_equilibrium_state_n16():
    p = PhysicalParams()
    grid = Grid(16, p.L)
    s = equilibrium_state(p, grid)
    assert np.array_equal(s.h, np.full(16, 0.5))
    assert np.array_equal(s.v, np.zeros(17))
    assert s.xi == 0.0 and s.w == 0.0
    assert mass(s.h, grid) == 0.5
    assert validate_state(s, p, grid) is s


def test_state_arrays_are_frozen():
    p = PhysicalParams()
    s = equilibrium_state(p, Grid(16, p.L))
    with pytest.raises(ValueError):
        s.h[0] = 1.0


def test_boundary_velocity_rejected():
    p = PhysicalParams()
    grid = Grid(16, p.L)
    s = equilibrium_state(p, grid)
    v = s.v.copy()
    v[0] = 0.1
    with pytest.raises(StateError, match="boundary_velocity") as exc:
        validate_state(TankState(0, 0, s.h, v), p, grid)
    assert exc.value.code == "boundary_velocity"


def test_mass_mismatch_rejected():
    p = PhysicalParams()
    grid = Grid(16, p.L)
    s = equilibrium_state(p, grid)
    with pytest.raises(StateError) as exc:
        validate_state(TankState(0, 0, 1.1 * s.h, s.v), p, grid)
    assert exc.value.code == "mass_mismatch"


def test_shape_and_positivity_rejected():
    p = PhysicalParams()
    grid = Grid(16, p.L)
    s = equilibrium_state(p, grid)
    with pytest.raises(StateError) as exc:
        validate_state(TankState(0, 0, s.h[:-1], s.v), p, grid)
    assert exc.value.code == "shape"
    h = s.h.copy()
    h[3] = -0.1
    h[4] += 0.6
    with pytest.raises(StateError) as exc:
        validate_state(TankState(0, 0, h, s.v), p, grid)
    assert exc.value.code == "nonpositive_level"


def test_lab_frame_of_equilibrium():
    p = PhysicalParams()
    s = equilibrium_state(p, Grid(16, p.L))
    lab = reconstruct_lab_frame(s, a_star=2.0)
    assert lab.a == 2.0
    assert np.all(lab.u == 0.0)


def test_lab_frame_shift():
    p = PhysicalParams()
    grid = Grid(16, p.L)
    s = TankState(0.3, 1.0, np.full(16, 0.5), np.zeros(17))
    lab = reconstruct_lab_frame(s, a_star=2.0)
    assert lab.a == 2.0 + 0.3
    assert np.all(lab.u == 1.0)
    assert lab.tank_velocity == 1.0


@given(
    xi=st.floats(-10, 10),
    w=st.floats(-10, 10),
    a_star=st.floats(-100, 100),
    b=st.floats(-1, 1),
    a=st.floats(-0.4, 0.4),
)
def test_lab_frame_round_trip_bit_exact(xi, w, a_star, b, a):
    p = PhysicalParams()
    grid = Grid(32, p.L)
    s = TankState(xi, w, p.h_star + cosine_levels(grid, [a]), sine_velocity(grid, [b]))
    back = from_lab_frame(reconstruct_lab_frame(s, a_star))
    assert back.xi == s.xi and back.w == s.w
    assert np.array_equal(back.h, s.h) and np.array_equal(back.v, s.v)
