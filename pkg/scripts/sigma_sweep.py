"""Surface-tension robustness: same gains, sigma over five decades."""
import argparse
import pathlib
import sys

from slosh_clf.cli import cmd_sweep

ROOT = pathlib.Path(__file__).resolve().parents[1]

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--config", default=str(ROOT / "configs" / "sigma_sweep.cfg"))
ap.add_argument("--values", default="7.3e-5,7.3e-4,7.3e-3,7.3e-2,7.3e-1")
ap.add_argument("--jobs", type=int, default=1)
ap.add_argument("--out", default="out/sigma_sweep")
args = ap.parse_args()

code = cmd_sweep(args.config, "sigma", args.values, jobs=args.jobs, out=args.out)
print((pathlib.Path(args.out) / "sweep_summary.csv").read_text())
sys.exit(code)
