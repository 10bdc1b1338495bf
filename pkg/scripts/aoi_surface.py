"""Weighted AoI over the (P_A, P_B) power box, restricted to F_A, F_B > 0.5."""

import argparse

from twowayaoi.cli import main as cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/grid.csv")
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--min-success", type=float, default=0.5)
    args = ap.parse_args()
    raise SystemExit(cli(["grid", "--grid-step", str(args.step), "--min-success",
                          str(args.min_success), "--out", args.out]))


if __name__ == "__main__":
    main()
