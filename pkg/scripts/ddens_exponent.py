"""Interval-sum growth for the alternating prime zeta, raw and with the
polylog factor removed, over a range of alpha.

    python scripts/ddens_exponent.py [--xmax 14]
"""

import argparse

import numpy as np

from dirichlet_lab.estimates import ddens_check
from dirichlet_lab.series import DirichletSeriesSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--xmin", type=float, default=8.0)
    ap.add_argument("--xmax", type=float, default=14.0)
    ap.add_argument("--beta", type=float, default=0.2)
    args = ap.parse_args()
    spec = DirichletSeriesSpec.alternating_prime_zeta()
    grid = np.arange(args.xmin, args.xmax + 1e-9, 0.25)
    print("alpha  fitted  adjusted  target  min count")
    for alpha in (0.5, 1.0, 2.0, 4.0):
        r = ddens_check(spec, alpha, args.beta, grid)
        print(f"{alpha:<6g} {r.fitted_exponent:<7.3f} {r.adjusted_exponent:<9.3f} {r.target_exponent:<7.2f} {min(r.counts)}")


if __name__ == "__main__":
    main()
