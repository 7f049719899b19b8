import json
import platform

import numba
import numpy as np
import pytest

from slosh_clf.harness import TRACE_COLUMNS

from conftest import DATA


def test_golden_trace_same_platform(canonical_run):
    meta = json.loads((DATA / "golden_trace.json").read_text())
    here = {"machine": platform.machine(), "numpy": np.__version__, "numba": numba.__version__}
    if any(meta["platform"].get(k) != v for k, v in here.items()):
        pytest.skip("golden trace recorded on a different platform; the 1e-8 check still applies")
    golden = np.loadtxt(DATA / "golden_trace.csv", delimiter=",", skiprows=1)
    cols = canonical_run["trace"].columns()
    full = np.column_stack([cols[c] for c in TRACE_COLUMNS])
    idx = np.unique(np.r_[np.arange(0, len(full), meta["every"]), len(full) - 1])
    scale = np.max(np.abs(golden), axis=0)
    dev = np.abs(full[idx] - golden)
    assert np.all(dev <= 1e-12 * scale), f"max scaled deviation {np.max(dev / np.where(scale > 0, scale, 1.0)):.3e}"


def test_canonical_run_shape(canonical_run):
    tr = canonical_run["trace"]
    assert np.all(np.diff(tr.V) < 0), "V strictly decreasing along the canonical run"
    # the tank offset decays slowly (rate close to k); check the envelope, not a threshold
    t, xi = np.asarray(tr.times), np.abs(tr.xi)
    edges = np.arange(0.0, t[-1] + 1e-9, 4.0)
    env = np.array([xi[(t >= a) & (t < b)].max() for a, b in zip(edges[:-1], edges[1:])])
    assert np.all(np.diff(env) < 0), env
    rate = -np.polyfit(0.5 * (edges[:-1] + edges[1:])[1:], np.log(env[1:]), 1)[0]
    k = canonical_run["gains"].k
    assert 0.5 * k < rate < 2.0 * k, (rate, k)
    assert canonical_run["report"].passed, canonical_run["report"].to_text()
