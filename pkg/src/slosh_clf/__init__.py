"""Closed-loop simulation and certificate checks for a moving tank of viscous,
capillary shallow liquid under Lyapunov-based feedback."""
from .analysis import (
    G,
    G_inverse,
    Lambda,
    Q1,
    Q2,
    beta,
    check_gain_condition,
    decay_rates,
    g2,
    level_bounds,
    positivity_threshold,
    spill_radius,
    spill_radius_R,
    theta,
)
from .config import ConfigError, ScenarioConfig, build_scenario, load_config, parse_config
from .controller import feedback_f, make_controller, measure
from .functionals import clf_V, energy_E, energy_W, x_norm
from .harness import InitialConditionSpec, certify, make_initial_condition, run_simulation
from .model import (
    BlowUpError,
    ControlGains,
    GainConditionError,
    Grid,
    ParameterError,
    PhysicalParams,
    SloshError,
    StateError,
    TankState,
    equilibrium_state,
)
from .solver import StepControls, advance, rhs, step_rk4

__version__ = "0.1.0"
