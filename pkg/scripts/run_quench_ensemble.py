"""Staggered-quench ensemble against the single-cluster time average.

Sweeps the cluster count at fixed window to show the two averaging errors:
the O(t_J/window) discretization floor of the staggered schedule and the
O(1/sqrt(N_CL)) statistical error of the random one.
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

from spinmaps.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="runs/quench")
    ap.add_argument("--window-tj", type=float, default=50.0)
    args = ap.parse_args()

    for schedule in ("staggered", "random"):
        for n_cl in (25, 100, 400):
            rc = cli_main([
                "quench", "--n-cl", str(n_cl), "--schedule", schedule,
                "--window-tj", str(args.window_tj), "--outdir", args.outdir,
            ])
            if rc != 0:
                return rc
            run = sorted(Path(args.outdir).glob("quench-*"))[-1]
            diag = json.loads((run / "diagnostics.json").read_text())
            print(f"{schedule:9s} N_CL={n_cl:4d}  "
                  f"max|cluster_avg - time_avg| = {diag['max_abs_diff']:.5f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
