"""Disorder-averaged XX-pair map: Monte Carlo against closed form.

Two runs: the Gaussian-angle ensemble (closed forms available, MC should sit
on top of them) and the truncated-tanh ensemble (MC only, plus the
analytical ceiling on the long-time polarization transfer).
"""
from __future__ import annotations

import argparse

from spinmaps.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="runs/disorder")
    ap.add_argument("--n-samples", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    common = ["--outdir", args.outdir, "--n-samples", str(args.n_samples),
              "--seed", str(args.seed)]
    rc = cli_main(["disorder", "--phi-dist", "gaussian", "--varphi", "3.0"]
                  + common)
    if rc != 0:
        return rc
    return cli_main(["disorder", "--phi-dist", "trunc_tanh", "--a-phi",
                     "0.001"] + common)


if __name__ == "__main__":
    raise SystemExit(main())
