"""Write plot-ready grids of the normal-model rate function, its corner
infimum kappa and the spectral function psi for a few correlations."""
import argparse
from pathlib import Path

import numpy as np

from ldptail.cli import write_csv
from ldptail.ratefn import psi, rate_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rho", type=float, nargs="+", default=[-0.5, 0.2, 0.5, 0.8])
    ap.add_argument("--grid", type=int, default=200)
    ap.add_argument("--upper", type=float, default=3.0)
    ap.add_argument("--out", default="results/ratefn")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t = np.linspace(0.0, 1.0, 501)
    for rho in args.rho:
        write_csv(str(out / f"rate_rho{rho:g}.csv"), ("x1", "x2", "I", "kappa"),
                  rate_grid(rho, args.grid, args.upper))
        write_csv(str(out / f"psi_rho{rho:g}.csv"), ("t", "psi"), np.column_stack([t, psi(rho, t)]))
        print(f"rho={rho:g}: I(1,1)={2 / (1 + rho):.4f} psi(1/2)={float(psi(rho, 0.5)):.4f}")


if __name__ == "__main__":
    main()
