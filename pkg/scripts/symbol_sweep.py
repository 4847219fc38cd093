#!/usr/bin/env python3
"""Tabulate characteristic exponents over a frequency sweep.

Writes one CSV row per frequency with the real and imaginary parts of
psi for an isotropic, a two-atom, and an asymmetric measure family.
"""

import argparse
import csv

import numpy as np

from levylab import levy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--xi-max", type=float, default=20.0)
    ap.add_argument("--points", type=int, default=401)
    ap.add_argument("--out", default="symbol_sweep.csv")
    args = ap.parse_args()

    measures = {
        "isotropic": levy.StableSpectral(
            args.alpha, levy.SphericalMeasure.isotropic(1, 1.0)),
        "two_atom": levy.StableSpectral(
            args.alpha, levy.SphericalMeasure.discrete(
                [((1.0,), 0.5), ((-1.0,), 0.5)])),
    }
    if args.alpha != 1.0:
        measures["asymmetric"] = levy.StableSpectral(
            args.alpha, levy.SphericalMeasure.discrete(
                [((1.0,), 0.8), ((-1.0,), 0.2)]))

    xi = np.linspace(-args.xi_max, args.xi_max, args.points)
    xi = xi[xi != 0.0]
    columns = {}
    for name, m in measures.items():
        psi = levy.symbol_array(m, xi[:, None])
        columns[name + "_re"] = psi.real
        columns[name + "_im"] = psi.imag

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["xi"] + list(columns))
        for i, x in enumerate(xi):
            w.writerow([repr(float(x))]
                       + [repr(float(col[i])) for col in columns.values()])
    print(f"wrote {args.out} ({xi.size} rows, alpha={args.alpha})")


if __name__ == "__main__":
    main()
