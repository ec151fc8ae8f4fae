"""Write beta(x, xbar) for every Bethe state of a configuration to CSV files."""
import argparse
import os

import numpy as np

from operlab.bethe import solve_bae
from operlab.cli import write_grid
from operlab.hecke import beta_grid
from operlab.repspace import GaudinConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=float, nargs="+", default=[0, 1, 2])
    ap.add_argument("--weights", type=int, nargs="+", default=[1, 1, 1, 1])
    ap.add_argument("--n", type=int, default=60, help="grid points per axis")
    ap.add_argument("--out", default="beta_grids")
    args = ap.parse_args()
    cfg = GaudinConfig(tuple(args.points), tuple(args.weights))
    lo, hi = min(args.points) - 1, max(args.points) + 1
    re = np.linspace(lo, hi, args.n)
    im = np.linspace(0.05, 2.0, args.n // 2)
    for k, w in enumerate(solve_bae(cfg)):
        scan = beta_grid(w.q_coefficients(), cfg, re, im)
        path = write_grid(os.path.join(args.out, f"beta_{k}.csv"), scan.xs, scan.values)
        print(f"{path}: roots {np.round(w.roots, 6)}, path residual {scan.path_residual:.1e}")


if __name__ == "__main__":
    main()
