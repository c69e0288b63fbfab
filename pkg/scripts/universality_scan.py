"""Scan vertical translates of the alternating prime zeta against a target
and print the density of good tau per window.

    python scripts/universality_scan.py [--target constant --value 0.2] [--T 200]
"""

import argparse

from dirichlet_lab.series import DirichletSeriesSpec
from dirichlet_lab.universality import CompactGrid, Evaluator, TargetFunction, tau_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--target", default="exp-polynomial", choices=["constant", "exp-polynomial", "translate"])
    ap.add_argument("--value", type=float, default=0.2)
    ap.add_argument("--epsilon", type=float, default=0.3)
    ap.add_argument("--T", type=float, default=200.0)
    ap.add_argument("--X", type=float, default=3000.0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    spec = DirichletSeriesSpec.alternating_prime_zeta()
    K = CompactGrid(0.78, 0.88, 0.0, 0.2, 0.05)
    params = {"constant": {"value": args.value}, "exp-polynomial": {"coeffs": [args.value]}, "translate": {"tau0": 37.0}}
    f = TargetFunction(args.target, params[args.target])
    r = tau_scan(spec, f, K, args.epsilon, args.T, 1 / 16, Evaluator(spec, X=args.X), threads=args.threads)
    print(f"good measure {r.good_measure:.4g} of {args.T:g}  (density {r.ldens_estimate:.4f})")
    print(f"best tau {r.best_tau:g}  error {r.best_error:.3e}  floor {r.error_floor:.2e}")
    for lo, hi, m in zip(r.window_edges, r.window_edges[1:], r.window_measure):
        print(f"  [{lo:7.1f}, {hi:7.1f})  {m:.4g}")


if __name__ == "__main__":
    main()
