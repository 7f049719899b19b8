"""Canonical closed-loop run: writes trace.csv and certificates.txt, prints the report."""
import argparse
import pathlib
import sys
import time

from slosh_clf.cli import run_scenario
from slosh_clf.config import load_config

ROOT = pathlib.Path(__file__).resolve().parents[1]

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--config", default=str(ROOT / "configs" / "canonical.cfg"))
ap.add_argument("--out", default="out/canonical")
ap.add_argument("--profiles", action="store_true")
args = ap.parse_args()

t0 = time.perf_counter()
res = run_scenario(load_config(args.config), args.out, args.profiles)
print(res.message)
print(f"exit {res.code}, wall time {time.perf_counter() - t0:.1f} s")
sys.exit(res.code)
