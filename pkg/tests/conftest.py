import numpy as np
import pytest

from twowayaoi.model import SystemParams
from twowayaoi.optimizer import InfeasibleError, feasible_interval, grid_search_oracle, theorem1_optimize


@pytest.fixture
def base():
    return SystemParams.reference()


def random_params(rng, symmetric=False):
    """Draw from the randomized ranges: sigma^2 in [1e-4, 1e-2] (log-uniform),
    gamma_th in [10, 300], peaks in [0.5, 3], w_A in [0.2, 0.8]."""
    s2 = 10 ** rng.uniform(-4, -2, size=3)
    w = rng.uniform(0.2, 0.8)
    peaks = rng.uniform(0.5, 3.0, size=3)
    if symmetric:
        s2[1] = s2[0]
        w = 0.5
        peaks[1] = peaks[0]
    return SystemParams(
        sigma2_a=s2[0], sigma2_b=s2[1], sigma2_r=s2[2], gamma_th=rng.uniform(10, 300),
        weight_a=w, weight_b=1 - w, peak_a=peaks[0], peak_b=peaks[1], peak_r=peaks[2],
    )


def random_feasible_params(rng, grid_step=1e-2):
    """Rejection-sample parameters for which the optimiser and a grid both find a feasible point."""
    while True:
        params = random_params(rng)
        try:
            theorem1_optimize(params)
            grid_search_oracle(params, grid_step)
        except InfeasibleError:
            continue
        return params


def random_feasible_slice(rng, min_width=0.05):
    """(params, fixed_power, solve_for, interval) with a usable, nonempty feasible interval."""
    while True:
        params = random_params(rng)
        solve_for = "B" if rng.random() < 0.5 else "A"
        fixed = rng.uniform(0.5, 3.0)
        interval = feasible_interval(params, fixed, solve_for)
        if interval.nonempty and interval.upper - interval.lower > min_width:
            return params, fixed, solve_for, interval


VERDICTS = pytest.StashKey[list]()


class _Verdict:
    def __init__(self, lines, number, title):
        self.lines, self.number, self.title = lines, number, title
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        detail = self.detail if exc_type is None else f"{self.detail} {exc}".strip()
        line = f"{status} criterion {self.number:>2}: {self.title}"
        if detail:
            line += f" [{detail.splitlines()[0]}]"
        self.lines.append(line)
        print(line)
        return False


@pytest.fixture
def verdict(request):
    """``with verdict(n, title) as v:`` logs one PASS/FAIL line for criterion ``n``."""
    lines = request.config.stash.setdefault(VERDICTS, [])
    return lambda number, title: _Verdict(lines, number, title)


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
