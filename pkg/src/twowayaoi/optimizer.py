"""Peak-power-constrained minimisation of the expected weighted sum AoI.

The relay always transmits at its peak.  With one source power fixed the
objective is convex in the other, so each slice has a closed-form minimiser;
the global optimum puts at least one source at its peak, which leaves two
boundary candidates to compare.

Every slice routine takes ``solve_for``: the node whose power is optimised
while the other node's power is held at ``fixed_power``.  The ``"A"``
direction is evaluated as the ``"B"`` direction of the label-swapped system.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import INFEASIBLE, DomainError, Node, SystemParams, asymptotic_f, objective_f

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
KAPPA_REL_TOL = 1e-9
TIE_TOL = 1e-12


class InfeasibleError(Exception):
    """No power allocation satisfies the peak and success-probability constraints."""

    def __init__(self, message: str, intervals: Optional[dict] = None):
        super().__init__(message)
        self.intervals = intervals or {}


@dataclass(frozen=True)
class LemmaCoefficients:
    beta: float
    theta: float
    phi: float
    kappa: float
    kappa_scale: float = field(default=0.0, compare=False)

    @property
    def degenerate(self) -> bool:
        return abs(self.kappa) <= KAPPA_REL_TOL * self.kappa_scale

    def root(self) -> float:
        return (self.beta * self.theta + self.phi) / self.kappa

    def rejected_root(self) -> float:
        return (-self.beta * self.theta + self.phi) / self.kappa


@dataclass(frozen=True)
class FeasibleInterval:
    lower: float
    upper: float

    @property
    def nonempty(self) -> bool:
        return self.lower < self.upper

    def contains(self, p: float) -> bool:
        return self.lower < p < self.upper


@dataclass(frozen=True)
class Candidate:
    p_a: float
    p_b: float
    objective: float
    provenance: str

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.objective)


@dataclass(frozen=True)
class Certificate:
    """Second derivative of the objective along the slice that was solved."""

    solve_for: Node
    p_a: float
    p_b: float
    value: float

    @property
    def positive(self) -> bool:
        return self.value > 0


@dataclass(frozen=True)
class OptimizerResult:
    p_a_star: float
    p_b_star: float
    p_r_star: float
    aoi_star: float
    objective_star: float
    candidates: tuple[Candidate, Candidate]
    certificates: tuple[Certificate, ...]
    intervals: dict
    selected: int


def aoi_from_objective(value: float) -> float:
    """Expected weighted sum AoI for an objective value ``w_A/F_A + w_B/F_B``."""
    return 0.5 + 2.0 * value


def _check_direction(solve_for: str) -> None:
    if solve_for not in ("A", "B"):
        raise DomainError(f"solve_for must be 'A' or 'B', got {solve_for!r}")


def _oriented(params: SystemParams, solve_for: Node) -> SystemParams:
    """Parameters relabelled so that the solved node is always B."""
    _check_direction(solve_for)
    if params.gamma_th <= 0:
        raise DomainError("the optimiser needs gamma_th > 0")
    return params if solve_for == "B" else params.swapped()


def _pair(solve_for: Node, fixed: float, solved: float) -> tuple[float, float]:
    return (fixed, solved) if solve_for == "B" else (solved, fixed)


def feasible_interval(params: SystemParams, fixed_power: float, solve_for: Node,
                      min_success: float = 0.0) -> FeasibleInterval:
    """Open interval of the solved power keeping both probabilities in (min_success, 1).

    When the relay peak cannot lift the destination probability above
    ``min_success`` at any power, the returned interval is empty with
    ``lower = inf``.
    """
    q = _oriented(params, solve_for)
    if fixed_power <= 0:
        raise DomainError("fixed_power must be positive")
    g, pr, pa = q.gamma_th, q.peak_r, fixed_power
    s = min_success
    denom = pr * (1.0 - s) - g * q.sigma2_a
    lower = g * (pr * q.sigma2_r + pa * q.sigma2_a) / denom if denom > 0 else math.inf
    upper = (pa * pr * (1.0 - s) - g * (pa * q.sigma2_b + pr * q.sigma2_r)) / (g * q.sigma2_b)
    return FeasibleInterval(lower, upper)


def lemma_coefficients(params: SystemParams, fixed_power: float, solve_for: Node) -> LemmaCoefficients:
    q = _oriented(params, solve_for)
    g, pr, pa = q.gamma_th, q.peak_r, fixed_power
    s2a, s2b, s2r = q.sigma2_a, q.sigma2_b, q.sigma2_r
    sb = math.sqrt(s2b)
    wa, wb = q.weight_a, q.weight_b
    load = pa * s2a + pr * s2r

    beta = pr * math.sqrt(pa * wa * wb * load)
    theta = pa * g * (s2a + s2b) + g * g * s2r * (s2b - s2a) + pr * g * s2r - pa * pr
    phi = (pa * pr * g * sb * (wa - wb) * (load - g * s2a * s2r)
           + g * g * sb * (wb * pa ** 2 * s2a ** 2 - wa * s2r ** 2 * pr ** 2 - wa * pa * s2b * load))
    kappa_1 = wb * pa * sb * (2 * pr * g * s2a - pr ** 2 - g * g * s2a ** 2)
    kappa_2 = wa * g * g * sb ** 3 * load
    return LemmaCoefficients(beta, theta, phi, kappa_1 + kappa_2,
                             kappa_scale=abs(kappa_1) + abs(kappa_2))


def rejected_root(params: SystemParams, fixed_power: float, solve_for: Node) -> float:
    return lemma_coefficients(params, fixed_power, solve_for).rejected_root()


def second_derivative_slice(params: SystemParams, p_a: float, p_b: float, solve_for: Node) -> float:
    """Closed-form d^2 f / dP^2 along the ``solve_for`` slice at ``(p_a, p_b)``."""
    q = _oriented(params, solve_for)
    fixed, solved = (p_a, p_b) if solve_for == "B" else (p_b, p_a)
    pr, g = q.peak_r, q.gamma_th
    f_dest, f_other = asymptotic_f(q, fixed, solved, pr)
    if not (0 < f_dest < 1 and 0 < f_other < 1):
        raise DomainError(f"({p_a}, {p_b}) lies outside the feasible region")
    term_dest = (2 * q.weight_a * g * (fixed * q.sigma2_a + pr * q.sigma2_r) * (pr - g * q.sigma2_a)
                 / (solved ** 3 * pr ** 2 * f_dest ** 3))
    term_other = 2 * q.weight_b * g * g * q.sigma2_b ** 2 / (fixed ** 2 * pr ** 2 * f_other ** 3)
    return term_dest + term_other


def golden_section(fn, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200) -> float:
    """Minimiser of a unimodal ``fn`` on ``[lo, hi]`` to within ``tol``."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
    # The bracket ends are candidates too: the minimum may sit on the peak.
    best = min((fn(x), x) for x in (a, 0.5 * (a + b), b))
    return best[1]


def _provenance(solve_for: Node) -> str:
    return "lemma1-at-peakA" if solve_for == "B" else "lemma2-at-peakB"


def _slice_objective(params: SystemParams, fixed_power: float, solve_for: Node, min_success: float):
    def fn(p):
        p_a, p_b = _pair(solve_for, fixed_power, p)
        return objective_f(params, p_a, p_b, min_success=min_success)
    return fn


def _require_interval(params, fixed_power, solve_for, min_success) -> FeasibleInterval:
    interval = feasible_interval(params, fixed_power, solve_for, min_success)
    peak = params.peak(solve_for)
    # A peak sitting on the lower edge (up to rounding) admits no feasible point.
    if not interval.nonempty or peak <= interval.lower * (1.0 + 1e-12):
        raise InfeasibleError(
            f"no feasible P_{solve_for} <= {peak} with the other power fixed at {fixed_power}",
            {solve_for: interval},
        )
    return interval


def numeric_fallback(params: SystemParams, fixed_power: float, solve_for: Node,
                     tol: float = 1e-10, max_iter: int = 200, min_success: float = 0.0) -> Candidate:
    interval = _require_interval(params, fixed_power, solve_for, min_success)
    eps = 1e-9 * (interval.upper - interval.lower)
    lo = interval.lower + eps
    hi = min(params.peak(solve_for), interval.upper - eps)
    fn = _slice_objective(params, fixed_power, solve_for, min_success)
    p = golden_section(fn, lo, hi, tol=tol, max_iter=max_iter)
    p_a, p_b = _pair(solve_for, fixed_power, p)
    return Candidate(p_a, p_b, fn(p), "numeric-fallback")


def conditional_optimum(params: SystemParams, fixed_power: float, solve_for: Node,
                        min_success: float = 0.0) -> Candidate:
    """Optimal power for ``solve_for`` with the other source at ``fixed_power``."""
    interval = _require_interval(params, fixed_power, solve_for, min_success)
    coef = lemma_coefficients(params, fixed_power, solve_for)
    if coef.degenerate:
        log.info("kappa ~ 0 at fixed power %g; using golden-section search", fixed_power)
        return numeric_fallback(params, fixed_power, solve_for, min_success=min_success)
    root = coef.root()
    if not interval.contains(root):
        log.info("closed-form root %g outside (%g, %g); using golden-section search",
                 root, interval.lower, interval.upper)
        return numeric_fallback(params, fixed_power, solve_for, min_success=min_success)

    peak = params.peak(solve_for)
    p = min(peak, root)
    p_a, p_b = _pair(solve_for, fixed_power, p)
    value = objective_f(params, p_a, p_b, min_success=min_success)
    if not math.isfinite(value):
        raise RuntimeError(f"conditional optimum ({p_a}, {p_b}) is infeasible")
    return Candidate(p_a, p_b, value, "clamped-to-peak" if root > peak else _provenance(solve_for))


def _try_candidate(params, solve_for, min_success):
    fixed_node: Node = "A" if solve_for == "B" else "B"
    fixed = params.peak(fixed_node)
    interval = feasible_interval(params, fixed, solve_for, min_success)
    try:
        cand = conditional_optimum(params, fixed, solve_for, min_success)
    except InfeasibleError:
        p_a, p_b = _pair(solve_for, fixed, math.nan)
        cand = Candidate(p_a, p_b, INFEASIBLE, _provenance(solve_for))
    return cand, interval


def theorem1_optimize(params: SystemParams, min_success: float = 0.0) -> OptimizerResult:
    """Globally optimal (P_A, P_B, P_r) under the peak constraints.

    Compares ``(peak_a, best P_B)`` with ``(best P_A, peak_b)``; on a tie the
    first is kept.
    """
    cand_b, interval_b = _try_candidate(params, "B", min_success)
    cand_a, interval_a = _try_candidate(params, "A", min_success)
    intervals = {"B": interval_b, "A": interval_a}
    if not (cand_b.feasible or cand_a.feasible):
        raise InfeasibleError("both boundary candidates are infeasible", intervals)

    tie = TIE_TOL * max(1.0, abs(cand_b.objective)) if cand_b.feasible else 0.0
    selected = 0 if cand_b.objective <= cand_a.objective + tie else 1
    best = (cand_b, cand_a)[selected]

    certificates = []
    for cand, direction in ((cand_b, "B"), (cand_a, "A")):
        if cand.feasible:
            value = second_derivative_slice(params, cand.p_a, cand.p_b, direction)
            certificates.append(Certificate(direction, cand.p_a, cand.p_b, value))

    return OptimizerResult(
        p_a_star=best.p_a,
        p_b_star=best.p_b,
        p_r_star=params.peak_r,
        aoi_star=aoi_from_objective(best.objective),
        objective_star=best.objective,
        candidates=(cand_b, cand_a),
        certificates=tuple(certificates),
        intervals=intervals,
        selected=selected,
    )


def grid_axis(step: float, peak: float) -> np.ndarray:
    """``step, 2*step, ...`` up to ``peak``, with ``peak`` itself appended if missed."""
    if step <= 0:
        raise DomainError("step must be positive")
    n = int(math.floor(peak / step + 1e-9))
    axis = step * np.arange(1, n + 1, dtype=float)
    if n == 0 or peak - axis[-1] > 1e-9 * step:
        axis = np.append(axis, peak)
    return axis


def grid_objective(params: SystemParams, axis_a: np.ndarray, axis_b: np.ndarray,
                   min_success: float = 0.0) -> np.ndarray:
    """Objective on the ``len(axis_a) x len(axis_b)`` grid, ``inf`` where infeasible."""
    return objective_f(params, axis_a[:, None], axis_b[None, :], min_success=min_success)


def grid_search_oracle(params: SystemParams, step: float = 1e-3, min_success: float = 0.0,
                       workers: int = 1, rows_per_chunk: int = 256) -> Candidate:
    """Brute-force argmin over the power grid; ties go to smaller P_A, then smaller P_B."""
    axis_a = grid_axis(step, params.peak_a)
    axis_b = grid_axis(step, params.peak_b)
    starts = range(0, len(axis_a), rows_per_chunk)

    def chunk_min(start):
        values = grid_objective(params, axis_a[start:start + rows_per_chunk], axis_b, min_success)
        i, j = np.unravel_index(np.argmin(values), values.shape)
        return float(values[i, j]), start + int(i), int(j)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk_min, starts))
    else:
        parts = [chunk_min(s) for s in starts]
    value, i, j = min(parts)
    if not math.isfinite(value):
        raise InfeasibleError(f"every grid point at step {step} is infeasible")
    return Candidate(float(axis_a[i]), float(axis_b[j]), value, "grid-oracle")
