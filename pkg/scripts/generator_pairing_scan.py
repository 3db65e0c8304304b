#!/usr/bin/env python3
"""Scan the generator pairing mu0 -> <(id, mu0), (S^n, bott, id)> over [0, 1).

The scan demonstrates non-degeneracy at the generator: the map is a bijection
onto R/Z (value 1/2 - mu0 mod 1), so sampled values are pairwise distinct up
to the sampling resolution.
"""

import argparse
from fractions import Fraction

from rz_pairing_lab.forms import BottBundle, K1Identity, Sphere, constant_form
from rz_pairing_lab.pairing import GeometricKCycle, IdentityMap, RZK0Cocycle, pair_k0


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=1000)
    parser.add_argument("--dim", type=int, default=2, help="even sphere dimension")
    args = parser.parse_args()

    sphere = Sphere(args.dim)
    cycle = GeometricKCycle(sphere, BottBundle(args.dim // 2), IdentityMap(sphere))
    values = []
    for i in range(args.samples):
        mu0 = Fraction(i, args.samples)
        x = RZK0Cocycle(K1Identity(1, sphere), constant_form(sphere, mu0), sphere)
        values.append(pair_k0(x, cycle).value.representative)

    ordered = sorted(values)
    gaps = [b - a for a, b in zip(ordered, ordered[1:])]
    gaps.append(1.0 - ordered[-1] + ordered[0])
    print(f"samples        : {args.samples}")
    print(f"distinct values: {len(set(values))}")
    print(f"min circle gap : {min(gaps):.6g} (uniform spacing would be {1.0 / args.samples:.6g})")
    for i in (0, 1, args.samples // 2, args.samples - 1):
        print(f"  mu0 = {i}/{args.samples:<5d} -> value {values[i]:.9f}")


if __name__ == "__main__":
    main()
