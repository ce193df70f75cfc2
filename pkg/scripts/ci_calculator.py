#!/usr/bin/env python3
"""Wilson 95% confidence intervals for annotated proportions.

Reads count pairs from the command line (label:successes/total ...) and
prints the interval in integer percents, the format used for reporting
manual-inspection results.
"""

import argparse

from refinery.analytics import proportion_ci


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "counts",
        nargs="+",
        metavar="label:k/n",
        help="e.g. porn:2/348 artifacts:51/348",
    )
    args = parser.parse_args()
    print(f"{'label':<20} {'k':>6} {'n':>6} {'95% CI':>10}")
    for item in args.counts:
        label, _, frac = item.partition(":")
        k_str, _, n_str = frac.partition("/")
        k, n = int(k_str), int(n_str)
        low, high = proportion_ci(k, n)
        print(f"{label:<20} {k:>6} {n:>6} {f'{low}-{high}':>10}")


if __name__ == "__main__":
    main()
