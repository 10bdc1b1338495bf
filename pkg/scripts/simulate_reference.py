"""Slot simulation at the optimal allocation, compared with the renewal formula."""

import argparse

from twowayaoi.model import PowerProfile, SuccessPair, SystemParams, asymptotic_success, weighted_sum_aoi
from twowayaoi.optimizer import theorem1_optimize
from twowayaoi.simulator import SlotSimConfig, interdeparture_consistency, run_simulation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--slots", type=int, default=10_000_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    params = SystemParams.reference()
    res = theorem1_optimize(params)
    powers = PowerProfile(res.p_a_star, res.p_b_star, res.p_r_star)
    stats = run_simulation(SlotSimConfig(params, powers, args.slots, args.seed))
    emp = SuccessPair(stats.empirical_f_a, stats.empirical_f_b, kind="empirical")
    asym = asymptotic_success(params, powers)
    print(f"empirical F: A={emp.f_a:.5f} B={emp.f_b:.5f}  asymptotic F: A={asym.f_a:.5f} B={asym.f_b:.5f}")
    print(f"simulated weighted AoI      {stats.weighted_aoi(params):.5f}")
    print(f"renewal formula, empirical F {weighted_sum_aoi(params, emp).weighted:.5f}")
    print(f"asymptotic                  {weighted_sum_aoi(params, asym).weighted:.5f}")
    for check in interdeparture_consistency(stats).checks:
        print(f"  {'ok  ' if check.passed else 'FAIL'} {check.name}: {check.observed:.5f} vs {check.expected:.5f}")


if __name__ == "__main__":
    main()
