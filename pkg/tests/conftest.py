import os
import pathlib
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from slosh_clf import ControlGains, Grid, PhysicalParams
from slosh_clf.config import build_scenario, load_config
from slosh_clf.harness import certify, run_simulation

ROOT = pathlib.Path(__file__).resolve().parents[1]
DATA = ROOT / "tests" / "data"
CONFIGS = ROOT / "configs"

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def params():
    return PhysicalParams()


@pytest.fixture
def gains():
    return ControlGains(omega=1.0, k=0.05, q=1.0, delta=1.0)


@pytest.fixture
def grid(params):
    return Grid(256, params.L)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def canonical_run():
    """The reference 40 s closed-loop run, shared by every module that needs it."""
    cfg = load_config(str(CONFIGS / "canonical.cfg"))
    ic, run_gains = build_scenario(cfg)
    t0 = time.perf_counter()
    trace = run_simulation(ic, cfg.params, run_gains, cfg.grid, cfg.stepping)
    elapsed = time.perf_counter() - t0
    return {"cfg": cfg, "ic": ic, "gains": run_gains, "trace": trace, "report": certify(trace), "elapsed": elapsed}


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
