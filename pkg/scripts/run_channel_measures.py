"""Measures on the phase-covariant channel body.

Three runs: the CP-volume Monte Carlo against the exact values, an
eigenvalue scatter of uniformly drawn channels (phase-covariant and
covariance-broken families), and a narrowing-measure trajectory overlaid on
the network time average it concentrates toward.
"""
from __future__ import annotations

import argparse

from spinmaps.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="runs/measures")
    ap.add_argument("--volume-samples", type=int, default=1000000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rc = cli_main(["volume", "--samples", str(args.volume_samples),
                   "--seed", str(args.seed), "--outdir", args.outdir])
    if rc != 0:
        return rc
    rc = cli_main(["measure", "--preset", "cc", "--n", "3",
                   "--state", "hierarchy", "--scatter-samples", "2000",
                   "--seed", str(args.seed), "--outdir", args.outdir])
    if rc != 0:
        return rc
    # narrowing trajectory around the ring table, biased tau3 sign
    return cli_main(["measure", "--preset", "ring", "--n", "4",
                     "--state", "uniform", "--z", "0.5",
                     "--tau3-rule", "signed", "--seed", str(args.seed),
                     "--outdir", args.outdir])


if __name__ == "__main__":
    raise SystemExit(main())
