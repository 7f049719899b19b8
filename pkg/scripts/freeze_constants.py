"""Recompute the high-precision golden constants and write tests/data/golden_constants.json."""
import json
import pathlib
import sys

import mpmath as mp

ROOT = pathlib.Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))
from mp_oracle import canonical_constants  # noqa: E402

out = ROOT / "tests" / "data" / "golden_constants.json"
vals = {k: mp.nstr(v, 30) for k, v in canonical_constants().items()}
out.write_text(json.dumps(vals, indent=2) + "\n")
for k, v in vals.items():
    print(f"{k:>20} = {v}")
