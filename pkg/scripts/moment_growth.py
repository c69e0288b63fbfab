"""Mean square (1/T) int_0^T |D(sigma + it)|^2 dt across T for several sigma.

    python scripts/moment_growth.py [--spec alternating-prime-zeta] [--T 100 300 1000 3000]
"""

import argparse

from dirichlet_lab.cli import PRESETS
from dirichlet_lab.estimates import moment_boundedness, moment_series
from dirichlet_lab.series import DirichletSeriesSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--spec", default="alternating-prime-zeta", choices=sorted(PRESETS))
    ap.add_argument("--sigma", type=float, nargs="+", default=[0.75, 0.85, 0.95])
    ap.add_argument("--T", type=float, nargs="+", default=[100.0, 300.0, 1000.0])
    args = ap.parse_args()
    spec = DirichletSeriesSpec.from_dict(PRESETS[args.spec])
    print("sigma  " + "  ".join(f"T={t:<8g}" for t in args.T) + "  factor  pass")
    for sigma in args.sigma:
        reps = moment_series(spec, sigma, args.T)
        b = moment_boundedness(reps)
        vals = "  ".join(f"{v:<10.5f}" for v in b["values"])
        print(f"{sigma:<6g} {vals}  {b['factor']:<6.3f}  {b['pass']}")


if __name__ == "__main__":
    main()
