"""Commutator norms of same-class symbol pairs on the degree-2 monomial basis.

Prints one JSON result per pair plus a non-commuting control, optionally with
the extended-degree diagnostic that shows how the truncation floor shrinks.

    python3 scripts/commutativity.py --samples 1000000 --extended 4
"""

import argparse
import json

from cartan3.oracle import MCConfig, commutativity_check
from cartan3.symbols import parse_symbol

PAIRS = {
    "elliptic": ({"kind": "elliptic", "profile": "exp_neg"}, {"kind": "elliptic", "profile": "cauchy"}),
    "hyperbolic": ({"kind": "hyperbolic", "profile": "tanh"}, {"kind": "hyperbolic", "profile": "cauchy"}),
    "parabolic": ({"kind": "parabolic", "profile": "exp_neg", "of": "trace"},
                  {"kind": "parabolic", "profile": "inv1p", "of": "det"}),
}
CONTROL = ({"kind": "raw", "function": "elliptic_trace", "profile": "exp_neg"}, {"kind": "raw", "function": "re_z11"})


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lambda", dest="lam", type=float, default=4.0)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--extended", type=int, default=None, help="extended degree for the truncation diagnostic")
    args = ap.parse_args()
    mc = MCConfig(N=args.samples, seed=args.seed)
    for name, (a, b) in PAIRS.items():
        r = commutativity_check(parse_symbol(a, 2), parse_symbol(b, 2), args.lam, integrator=mc,
                                name=f"commutator_{name}", extended_degree=args.extended)
        print(json.dumps(r.to_json(), default=float))
    r = commutativity_check(parse_symbol(CONTROL[0], 2), parse_symbol(CONTROL[1], 2), args.lam, integrator=mc,
                            expect_commute=False, name="commutator_control")
    print(json.dumps(r.to_json(), default=float))


if __name__ == "__main__":
    main()
