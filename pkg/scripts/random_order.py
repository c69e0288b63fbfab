"""Growth of max |P_X(sigma + it)| against log log t for random and
deterministic signs, over several seeds.

    python scripts/random_order.py [--N 10000] [--sigma 0.75]
"""

import argparse

import numpy as np

from dirichlet_lab.randomized import RandomSeriesInstance, RandomSignModel, doubling_check, order_fit


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=10_000)
    ap.add_argument("--sigma", type=float, default=0.75)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3])
    args = ap.parse_args()
    t = np.geomspace(10, 1000, 8)
    print(f"target exponent 2 - 2 sigma = {2 - 2 * args.sigma:.3f}")
    print("kind          seed  exponent  doubling ratio")
    for kind in ("steinhaus", "rademacher"):
        for seed in args.seeds:
            inst = RandomSeriesInstance.create(RandomSignModel(kind, seed), 2 * args.N)
            fit = order_fit(RandomSeriesInstance(inst.model, args.N, inst.coefficients[: args.N], inst.primes[: args.N]), args.sigma, t)
            d = doubling_check(inst, complex(args.sigma, 5.0), args.N)
            print(f"{kind:<13} {seed:<5d} {fit.exponent:<9.3f} {d.ratio:.3f}")
    det = order_fit(RandomSeriesInstance.create(RandomSignModel("deterministic", 0), args.N), args.sigma, t)
    print(f"{'deterministic':<13} {'-':<5} {det.exponent:<9.3f}")


if __name__ == "__main__":
    main()
