"""Steady-channel survey: every family with an exact coefficient table.

For each supported (topology, N) the script compares the long-time numeric
average against the exact rational table and prints one line per family.
Exit status is nonzero if any family misses its tolerance.
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

from spinmaps.cli import main as cli_main

FAMILIES = [
    ("complete", 3), ("complete", 4), ("complete", 5), ("complete", 6),
    ("ring", 4), ("ring", 5),
]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="runs/steady_tables")
    ap.add_argument("--horizon-tj", type=float, default=200.0)
    args = ap.parse_args()

    failures = 0
    for topology, n in FAMILIES:
        rc = cli_main([
            "steady", "--topology", topology, "--n", str(n),
            "--j-par", "1.0", "--state", "hierarchy",
            "--horizon-tj", str(args.horizon_tj), "--outdir", args.outdir,
        ])
        run = sorted(Path(args.outdir).glob("steady-*"))[-1]
        diag = json.loads((run / "diagnostics.json").read_text())
        ok = diag["pass"] and rc == 0
        failures += 0 if ok else 1
        print(f"{topology:8s} N={n}  lambda3={diag['numeric']['lambda3']:+.6f} "
              f"(exact {diag['exact']['lambda3']:+.6f})  "
              f"tau3={diag['numeric']['tau3']:+.6f} "
              f"(exact {diag['exact']['tau3']:+.6f})  "
              f"{'ok' if ok else 'FAIL'}")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
