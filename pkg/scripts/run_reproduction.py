#!/usr/bin/env python3
"""Regenerate the full bench campaign and print the self-check manifest.

Equivalent to ``exosim reproduce``; kept as a script so the campaign can be
rerun straight from a checkout.
"""

import argparse
import sys

from exosim.reproduce import run_reproduction


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="exosim_out/reproduction")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--trials", type=int, default=1, help="trials per subject")
    args = parser.parse_args()

    checks, manifest = run_reproduction(
        args.out, base_seed=args.seed, trials_per_subject=args.trials
    )
    for check in checks:
        print(check.line())
    print(f"manifest: {manifest}")
    return 0 if all(c.passed for c in checks) else 2


if __name__ == "__main__":
    sys.exit(main())
