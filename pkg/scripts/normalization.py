"""Monte Carlo total mass of the weighted measure on the bounded domain.

Prints the estimate, its standard error and the z-score against 1 for each
weight, using the uniform polydisc proposal.

    python3 scripts/normalization.py --n 2 --lambdas 3.5,4 --samples 1000000
"""

import argparse

from cartan3.core import integrate_mc, unpack
from cartan3.domains import PolydiscSampler, weight_density_batch


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--lambdas", default="3.5,4")
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print("lambda,value,std_error,z")
    for lam in (float(t) for t in args.lambdas.split(",")):
        est = integrate_mc(lambda P, lam=lam: weight_density_batch("bounded", lam, unpack(P, args.n)),
                           PolydiscSampler(args.n), args.samples, seed=args.seed)
        print(f"{lam},{est.value!r},{est.std_error!r},{(est.value - 1) / est.std_error:+.3f}")


if __name__ == "__main__":
    main()
