"""Acceptance criteria, one test per criterion.

Each test logs a PASS/FAIL line; the lines are repeated in the terminal
summary.  Run alone with ``python3 -m pytest tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest

from conftest import random_feasible_params, random_feasible_slice
from twowayaoi.cli import main, point_seed
from twowayaoi.fading import empirical_success_pair
from twowayaoi.model import (
    PowerProfile, SuccessPair, SystemParams, asymptotic_success, objective_f, weighted_sum_aoi,
)
from twowayaoi.optimizer import (
    conditional_optimum, feasible_interval, grid_search_oracle, lemma_coefficients,
    second_derivative_slice, theorem1_optimize,
)
from twowayaoi.simulator import SlotSimConfig, run_simulation


@pytest.fixture
def base():
    return SystemParams.reference()


def test_criterion_01_reference_optimum(verdict, base):
    with verdict(1, "optimum at reference point") as v:
        t0 = time.perf_counter()
        res = theorem1_optimize(base)
        elapsed = time.perf_counter() - t0
        v.detail = (f"P_A*={res.p_a_star:g} P_B*={res.p_b_star:.6f} AoI*={res.aoi_star:.6f} "
                    f"{elapsed * 1e3:.1f} ms")
        assert res.p_a_star == 1.0
        assert abs(res.p_b_star - 1.196) <= 1e-3
        assert abs(res.aoi_star - 3.636) <= 1e-3
        assert elapsed < 1.0


def test_criterion_02_conditional_optima(verdict, base):
    with verdict(2, "conditional optima for P_A = 1 and 1.5") as v:
        t0 = time.perf_counter()
        p1 = conditional_optimum(base, 1.0, "B").p_b
        p15 = conditional_optimum(base.replace(peak_b=3.0), 1.5, "B").p_b
        elapsed = time.perf_counter() - t0
        v.detail = f"P_B'(1)={p1:.6f} P_B'(1.5)={p15:.6f} {elapsed * 1e3:.1f} ms"
        assert abs(p1 - 1.196) <= 1e-3
        assert abs(p15 - 1.718) <= 1e-3
        assert elapsed < 1.0


def test_criterion_03_grid_oracle(verdict, base):
    with verdict(3, "grid oracle agrees with closed form") as v:
        res = theorem1_optimize(base)
        t0 = time.perf_counter()
        fine = grid_search_oracle(base, 1e-3)
        t_fine = time.perf_counter() - t0
        t0 = time.perf_counter()
        coarse = grid_search_oracle(base, 1e-2)
        t_coarse = time.perf_counter() - t0
        gap = fine.objective - res.objective_star
        v.detail = (f"grid=({fine.p_a:g}, {fine.p_b:g}) objective gap {gap:.2e}, "
                    f"1e-3 in {t_fine:.2f} s, 1e-2 in {t_coarse:.3f} s")
        assert abs(fine.p_a - res.p_a_star) <= 1e-3 + 1e-12
        assert abs(fine.p_b - res.p_b_star) <= 1e-3 + 1e-12
        assert abs(gap) <= 1e-4
        assert t_fine < 60.0 and t_coarse < 1.0
        assert abs(coarse.p_a - res.p_a_star) <= 1e-2 + 1e-12
        assert abs(coarse.p_b - res.p_b_star) <= 1e-2 + 1e-12


def test_criterion_04_boundary_property(verdict):
    with verdict(4, "grid argmin on a peak boundary (50 sets)") as v:
        rng = np.random.default_rng(2024)
        step = 1e-2
        misses = []
        for _ in range(50):
            params = random_feasible_params(rng, step)
            best = grid_search_oracle(params, step)
            on_a = abs(best.p_a - params.peak_a) <= step + 1e-12
            on_b = abs(best.p_b - params.peak_b) <= step + 1e-12
            if not (on_a or on_b):
                misses.append((best.p_a, best.p_b))
        v.detail = f"{50 - len(misses)}/50 on boundary"
        assert not misses


def test_criterion_05_convexity_certificates(verdict):
    with verdict(5, "second derivative vs finite differences (100 points)") as v:
        rng = np.random.default_rng(5)
        h = 1e-4
        worst = 0.0
        checked = 0
        while checked < 100:
            params, fixed, solve_for, iv = random_feasible_slice(rng)
            # powers stay within the sampled peak range, away from the interval edges
            hi = min(iv.upper, 3.0)
            if hi - iv.lower < 0.05:
                continue
            p = iv.lower + (hi - iv.lower) * rng.uniform(0.1, 0.9)
            checked += 1
            pa, pb = (fixed, p) if solve_for == "B" else (p, fixed)

            def f(x):
                return objective_f(params, *((pa, x) if solve_for == "B" else (x, pb)))

            fd = (f(p + h) - 2 * f(p) + f(p - h)) / (h * h)
            exact = second_derivative_slice(params, pa, pb, solve_for)
            assert exact > 0
            worst = max(worst, abs(fd - exact) / exact)
        v.detail = f"worst relative error {worst:.2e}"
        assert worst <= 1e-4


def test_criterion_06_root_rejection(verdict):
    with verdict(6, "rejected root outside, accepted root inside (100 sets)") as v:
        rng = np.random.default_rng(6)
        bad = 0
        for _ in range(100):
            params, fixed, solve_for, iv = random_feasible_slice(rng, min_width=0.0)
            lc = lemma_coefficients(params, fixed, solve_for)
            if iv.contains(lc.rejected_root()) or not iv.contains(lc.root()):
                bad += 1
        v.detail = f"{100 - bad}/100 correct"
        assert bad == 0


def test_criterion_07_simulation_renewal(verdict, base):
    with verdict(7, "simulated AoI vs renewal formula at run's own F") as v:
        powers = PowerProfile(1.0, 1.196, 0.75)
        parts = []
        for n_slots, rtol, budget in ((10_000_000, 0.005, 30.0), (100_000, 0.03, 1.0)):
            t0 = time.perf_counter()
            stats = run_simulation(SlotSimConfig(base, powers, n_slots, seed=7))
            elapsed = time.perf_counter() - t0
            emp = SuccessPair(stats.empirical_f_a, stats.empirical_f_b, kind="empirical")
            predicted = weighted_sum_aoi(base, emp).weighted
            rel = abs(stats.weighted_aoi(base) - predicted) / predicted
            parts.append(f"{n_slots:.0e} slots: rel {rel:.2e} in {elapsed:.2f} s")
            v.detail = "; ".join(parts)
            assert rel <= rtol
            assert elapsed < budget


def test_criterion_08_asymptotic_tightness(verdict, base):
    with verdict(8, "asymptotic vs Monte Carlo weighted AoI along P_B sweep") as v:
        worst, compared = 0.0, 0
        for i, p_b in enumerate(np.arange(0.75, 2.0 + 1e-9, 0.025)):
            powers = PowerProfile(1.0, float(p_b), 0.75)
            asym = asymptotic_success(base, powers)
            if not (asym.f_a > 0.5 and asym.f_b > 0.5):
                continue
            emp = empirical_success_pair(base, powers, 1_000_000, point_seed(8, i))
            a = weighted_sum_aoi(base, asym).weighted
            e = weighted_sum_aoi(base, emp).weighted
            worst = max(worst, abs(a - e) / e)
            compared += 1
        v.detail = f"{compared} points, worst relative gap {worst:.3%}"
        assert compared > 0
        assert worst <= 0.05


def test_criterion_09_anchors(verdict, base):
    with verdict(9, "zero-threshold anchor and label swap") as v:
        zero = base.replace(gamma_th=0.0)
        powers = PowerProfile(0.3, 1.7, 0.5)
        asym = asymptotic_success(zero, powers)
        assert asym.f_a == 1.0 and asym.f_b == 1.0
        assert weighted_sum_aoi(zero, asym).weighted == 2.5
        stats = run_simulation(SlotSimConfig(zero, powers, 100_000, seed=9))
        assert stats.empirical_f_a == 1.0 and stats.empirical_f_b == 1.0
        assert stats.weighted_aoi(zero) == 2.5

        rng = np.random.default_rng(9)
        for _ in range(50):
            params = random_feasible_params(rng)
            p = PowerProfile(*rng.uniform(0.2, 3.0, size=3))
            f = asymptotic_success(params, p)
            g = asymptotic_success(params.swapped(), p.swapped())
            assert (f.f_a, f.f_b) == (g.f_b, g.f_a)
            r1, r2 = theorem1_optimize(params), theorem1_optimize(params.swapped())
            assert r1.objective_star == pytest.approx(r2.objective_star, rel=1e-12)
            lo = feasible_interval(params, 1.0, "B")
            lo_s = feasible_interval(params.swapped(), 1.0, "A")
            assert (lo.lower, lo.upper) == (lo_s.lower, lo_s.upper)
        v.detail = "F=1, AoI=2.5 analytic and simulated; 50 swapped sets"


COMMANDS = [
    ["analyze", "--preset", "quick"],
    ["optimize", "--oracle", "0.01"],
    ["simulate", "--preset", "quick"],
    ["sweep", "--preset", "quick", "--workers", "4"],
    ["grid", "--format", "json"],
]


def test_criterion_10_determinism(verdict, tmp_path, capsys):
    with verdict(10, "byte-identical output on repeat runs") as v:
        for argv in COMMANDS:
            outs = []
            for k in range(2):
                path = tmp_path / f"{argv[0]}-{k}"
                assert main([*argv, "--seed", "11", "--out", str(path)]) == 0
                outs.append(path.read_bytes())
            assert outs[0] == outs[1], argv[0]
        v.detail = f"{len(COMMANDS)} commands"
