"""Reduced-map time series for the three solvable families.

Thin driver over the CLI: one run per family, shared output root. Produces
the per-site and network-averaged channel parameters as CSV plus the
analytic cross-check diagnostics.
"""
from __future__ import annotations

import argparse

from spinmaps.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="runs/map_families")
    ap.add_argument("--t-max-tj", type=float, default=10.0)
    args = ap.parse_args()

    common = ["--outdir", args.outdir, "--t-max-tj", str(args.t_max_tj)]
    runs = [
        # complete graph N=3, hierarchy state: the basic solvable family
        ["maps", "--topology", "complete", "--n", "3", "--j-par", "0.25",
         "--state", "hierarchy"],
        # isotropic ring N=4, Neel state: averaged map stays time-local while
        # individual site maps do not
        ["maps", "--topology", "ring", "--n", "4", "--j-par", "1.0",
         "--state", "neel"],
        # one detuned XX pair, partner tilted off the z axis: not
        # phase-covariant, full two-qubit closed form still applies
        ["maps", "--topology", "xx_pairs", "--h1", "1.0", "--h2", "0.5",
         "--j", "1.0", "--x2", "0.3"],
    ]
    for extra in runs:
        rc = cli_main(extra + common)
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
