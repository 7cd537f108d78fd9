"""Build the (5,2,3) code over GF(2^1024) and verify it end to end.

    python scripts/reproduce_example.py [--out report.json]
"""
import argparse
import json
import sys

from superreg.cli import reproduce_example


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out")
    args = ap.parse_args()
    status, rep = reproduce_example()
    for name, ok in rep["checks"].items():
        print(f"{'ok  ' if ok else 'FAIL'} {name}")
    print(f"nontrivial minors checked: {rep['minors_checked']}, verdict: {rep['verdict']}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(rep, fh, indent=2)
    return status


if __name__ == "__main__":
    sys.exit(main())
