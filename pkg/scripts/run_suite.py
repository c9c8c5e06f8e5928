"""Run the acceptance battery and print one PASS/FAIL line per criterion."""

import argparse
import json
import sys

from postsel.acceptance import run_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="also write the per-criterion details here")
    args = ap.parse_args()
    results = run_suite(args.seed, log=print)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([r.as_dict() for r in results], fh, indent=2, default=str)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
