"""Optimal power allocation at the reference operating point, checked against the grid oracle."""

import argparse

from twowayaoi.model import SystemParams
from twowayaoi.optimizer import aoi_from_objective, conditional_optimum, grid_search_oracle, theorem1_optimize


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid-step", type=float, default=1e-3)
    args = ap.parse_args()

    params = SystemParams.reference()
    res = theorem1_optimize(params)
    print(f"optimum: P_A={res.p_a_star:.6g} P_B={res.p_b_star:.6g} P_r={res.p_r_star:.6g} "
          f"AoI={res.aoi_star:.6f}")
    for cand in res.candidates:
        print(f"  candidate {cand.provenance}: ({cand.p_a:.6g}, {cand.p_b:.6g}) "
              f"AoI={aoi_from_objective(cand.objective):.6f}")

    wide = params.replace(peak_b=3.0)
    for p_a in (1.0, 1.5):
        c = conditional_optimum(wide, p_a, "B")
        print(f"best P_B given P_A={p_a}: {c.p_b:.6f}")

    oracle = grid_search_oracle(params, args.grid_step)
    print(f"grid oracle (step {args.grid_step:g}): ({oracle.p_a:.6g}, {oracle.p_b:.6g}) "
          f"objective gap {oracle.objective - res.objective_star:.3e}")


if __name__ == "__main__":
    main()
