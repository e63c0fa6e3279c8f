"""How fast do the boundary errors shrink with the sample size?

Runs the detector on the annulus for a ladder of sample sizes and fits
log-log slopes. For a surface the covering error should decay roughly like
(log n / n)^(1/3) and the distance of detected points to the boundary like
its square.

    python3 demos/rate_sweep.py [--n-list 500,1000,2000,4000] [--seeds 0,1,2]
"""
import argparse

import numpy as np

from boundarykit.pipeline import rates


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-list", default="500,1000,2000,4000")
    ap.add_argument("--seeds", default="0,1,2")
    args = ap.parse_args()
    n_list = [int(v) for v in args.n_list.split(",")]
    seeds = [int(v) for v in args.seeds.split(",")]

    rows, slopes = rates("annulus", n_list, seeds)
    print(f"{'n':>6} {'cover':>8} {'excess':>8} {'r_eff':>8}")
    for n in n_list:
        sel = [r for r in rows if r["n"] == n]
        cover = np.mean([r["dH_boundary_cover"] for r in sel])
        excess = np.mean([r["dH_boundary_excess"] for r in sel])
        print(f"{n:6d} {cover:8.4f} {excess:8.4f} {sel[0]['r_eff']:8.4f}")
    for k, v in slopes.items():
        print(f"slope of {k}: {'n/a' if v is None else f'{v:.3f}'}")


if __name__ == "__main__":
    main()
