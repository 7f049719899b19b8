"""Run the canonical scenario and store a thinned copy of its trace as the regression fixture."""
import json
import pathlib
import platform

import numba
import numpy as np

from slosh_clf.cli import FLOAT_FMT
from slosh_clf.config import build_scenario, load_config
from slosh_clf.harness import TRACE_COLUMNS, run_simulation

ROOT = pathlib.Path(__file__).resolve().parents[1]
EVERY = 100


def fingerprint() -> dict:
    return {
        "machine": platform.machine(),
        "processor": platform.processor(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "numba": numba.__version__,
    }


def main():
    cfg = load_config(str(ROOT / "configs" / "canonical.cfg"))
    ic, gains = build_scenario(cfg)
    trace = run_simulation(ic, cfg.params, gains, cfg.grid, cfg.stepping)
    cols = trace.columns()
    data = np.column_stack([cols[c] for c in TRACE_COLUMNS])
    idx = np.unique(np.r_[np.arange(0, len(data), EVERY), len(data) - 1])
    out = ROOT / "tests" / "data"
    np.savetxt(out / "golden_trace.csv", data[idx], fmt=FLOAT_FMT, delimiter=",",
               header=",".join(TRACE_COLUMNS), comments="")
    meta = {"every": EVERY, "rows_full": len(data), "platform": fingerprint()}
    (out / "golden_trace.json").write_text(json.dumps(meta, indent=2) + "\n")
    print(f"wrote {len(idx)} of {len(data)} rows")


if __name__ == "__main__":
    main()
