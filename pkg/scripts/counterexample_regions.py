"""Region data for the qubit counterexample family.

Writes the full scan as CSV and prints, per ``p``, how many grid points
violate the unconditional bound together with the pure-state threshold.

    python3 scripts/counterexample_regions.py --out regions.csv
"""
import argparse
import math
from collections import Counter

from qchain.counterexample import (
    DEFAULT_P_VALUES,
    FamilyPoint,
    eps_star,
    region_scan,
    rhs_numeric_n,
    write_csv,
)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="regions.csv")
    parser.add_argument("--n-copies", type=int, default=4)
    args = parser.parse_args(argv)

    rows = region_scan(n_numeric=args.n_copies)
    write_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")

    total = Counter(r.p for r in rows)
    violated = Counter(r.p for r in rows if r.violated_analytic)
    mismatched = sum(r.violated_analytic != r.violated_numeric for r in rows)
    for p in DEFAULT_P_VALUES:
        print(f"p = {p:<5} violated at {violated[p]:4d} / {total[p]} grid points")
    print(f"analytic vs numeric flag mismatches: {mismatched}")

    print(f"eps_star(pi/2, 0)    = {eps_star(math.pi / 2, 0.0):.12f}")
    print(f"eps_star(pi/2, 0.49) = {eps_star(math.pi / 2, 0.49):.12f}")
    pt = FamilyPoint(0.0, math.pi / 2, 0.2)
    for n in range(1, 9):
        print(f"n = {n}: regularized bound {rhs_numeric_n(pt, n):+.15f}")


if __name__ == "__main__":
    main()
