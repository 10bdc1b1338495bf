"""Weighted AoI against P_B for a few fixed P_A values, asymptotic and Monte Carlo.

Writes one CSV per P_A into the output directory.
"""

import argparse
import os

from twowayaoi.cli import main as cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--fixed", type=float, nargs="+", default=[1.0, 1.5])
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--slots", type=int, default=1_000_000)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    for p_a in args.fixed:
        path = os.path.join(args.out_dir, f"sweep_pa{p_a:g}.csv")
        code = cli([
            "sweep", "--fixed-power", str(p_a), "--start", "0.75", "--stop", "2", "--step", "0.025",
            "--peak-b", "2", "--samples", str(args.samples), "--slots", str(args.slots),
            "--workers", str(args.workers), "--seed", str(args.seed), "--out", path,
        ])
        if code:
            raise SystemExit(code)


if __name__ == "__main__":
    main()
