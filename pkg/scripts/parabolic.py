"""Parabolic multiplier checks for n = 1: frame matrix and transform isometry.

Prints the frame matrix of a parabolic Toeplitz operator next to the
predicted multipliers, then the inner-product defect of the transform.

    python3 scripts/parabolic.py --lambda 2.5
"""

import argparse
import json

import numpy as np

from cartan3.oracle import frame_check, isometry_check


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lambda", dest="lam", type=float, default=2.5)
    args = ap.parse_args()
    r = frame_check(lambda Y: np.exp(-Y[..., 0, 0]), args.lam)
    d = r.details
    print(f"frame check: {r.verdict}")
    for j, (got, want) in enumerate(zip(d["diag"], d["expected_diag"])):
        print(f"  e_{j}: matrix {got:.12f}  multiplier average {want:.12f}")
    print(f"  off-diagonal mass {d['off_mass']:.2e} (noise {d['off_noise']:.2e})")
    f = lambda X: X[..., 0, 0] ** 2 * np.exp(-X[..., 0, 0])
    g = lambda X: (X[..., 0, 0] ** 3 - X[..., 0, 0] ** 2) * np.exp(-X[..., 0, 0])
    iso = isometry_check(f, g, args.lam, det_powers=(2, 2), exp_rate=1.0)
    print(json.dumps(iso.to_json(), default=float))


if __name__ == "__main__":
    main()
