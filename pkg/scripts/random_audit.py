"""Seeded random audit of every verifier, with a per-inequality summary.

    python3 scripts/random_audit.py --trials 300 --seed 0
"""
import argparse

from qchain import audit
from qchain.recovery import build_quadrature


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=300)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4])
    args = parser.parse_args(argv)

    q = build_quadrature()
    print(f"{'inequality':<20} {'passed':>7} {'failed':>7} {'skipped':>8} {'min slack':>12}")
    any_failed = False
    for ident in audit.INEQUALITY_IDS:
        s = audit.summarize(audit.run_audit([ident], args.trials, args.seed, args.dims, q))
        any_failed |= s["failed"] > 0
        print(f"{ident:<20} {s['passed']:>7} {s['failed']:>7} {s['not_asserted']:>8} {s['min_slack']:>12.3e}")
    return 1 if any_failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
