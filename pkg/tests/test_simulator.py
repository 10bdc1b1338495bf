import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twowayaoi.fading import empirical_success_pair
from twowayaoi.model import PowerProfile
from twowayaoi.simulator import (
    SlotSimConfig, aoi_trajectory, destination_stats, interdeparture_consistency, round_outcomes,
    run_simulation, stats_from_outcomes,
)

REF_POINT = PowerProfile(1.0, 1.196, 0.75)


def reference_trajectory(success):
    """Slot-by-slot state machine, kept deliberately naive."""
    age, out = 2, []
    for ok in success:
        age += 1
        out.append(age)
        age = 2 if ok else age + 1
        out.append(age)
    return out


def test_config_validation(base):
    with pytest.raises(ValueError):
        SlotSimConfig(base, REF_POINT, n_slots=11)
    with pytest.raises(ValueError):
        SlotSimConfig(base, REF_POINT, n_slots=0)
    assert SlotSimConfig(base, REF_POINT, n_slots=10).n_rounds == 5


def test_always_successful(base):
    config = SlotSimConfig(base.replace(gamma_th=0.0), REF_POINT, n_slots=40_000, seed=1)
    ok_a, ok_b = round_outcomes(config)
    assert ok_a.all() and ok_b.all()
    assert list(aoi_trajectory(ok_a[:4])) == [3, 2, 3, 2, 3, 2, 3, 2]
    stats = run_simulation(config)
    assert stats.mean_aoi_a == 2.5 and stats.mean_aoi_b == 2.5
    assert stats.mean_interdep_a == 2.0 and stats.second_moment_interdep_a == 4.0
    assert stats.empirical_f_a == 1.0
    assert interdeparture_consistency(stats).passed


@settings(max_examples=200, deadline=None)
@given(st.lists(st.booleans(), min_size=1, max_size=60))
def test_trajectory_matches_state_machine(success):
    traj = aoi_trajectory(np.array(success))
    assert list(traj) == reference_trajectory(success)
    steps = np.diff(np.concatenate(([2], traj)))
    # +1 per slot, or a reset that lands exactly on 2
    assert np.all((steps == 1) | (traj == 2))
    assert traj.min() >= 2
    assert destination_stats(np.array(success)).mean_aoi == pytest.approx(traj.mean(), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.booleans(), min_size=1, max_size=60))
def test_interdepartures_are_even(success):
    d = destination_stats(np.array(success))
    assert d.n_intervals == sum(success)
    if d.n_intervals:
        assert d.mean_interdep * d.n_intervals == pytest.approx(2 * (np.flatnonzero(success)[-1] + 1))


def test_synthetic_geometric_moments():
    rng = np.random.default_rng(99)
    success = rng.random(400_000) < 0.5
    stats = stats_from_outcomes(success, success)
    d = stats.a
    se_t = np.sqrt(d.var_interdep / d.n_intervals)
    se_t2 = np.sqrt(d.var_sq_interdep / d.n_intervals)
    assert abs(d.mean_interdep - 4.0) < 3 * se_t
    assert abs(d.second_moment_interdep - 24.0) < 3 * se_t2
    assert interdeparture_consistency(stats).passed


def test_consistency_needs_enough_rounds(base):
    stats = run_simulation(SlotSimConfig(base, REF_POINT, n_slots=1_000))
    with pytest.raises(ValueError):
        interdeparture_consistency(stats)


def test_consistency_flags_mismatch():
    success = np.ones(20_000, dtype=bool)
    stats = stats_from_outcomes(success, success)
    tampered = type(stats)(type(stats.a)(**{**stats.a.__dict__, "mean_aoi": 2.7}), stats.b, stats.n_rounds)
    report = interdeparture_consistency(tampered)
    assert not report.passed
    assert [c.name for c in report.checks if not c.passed] == ["mean_aoi_A"]


def test_reference_point_renewal(base):
    stats = run_simulation(SlotSimConfig(base, REF_POINT, n_slots=2_000_000, seed=3))
    assert interdeparture_consistency(stats).passed
    for d in (stats.a, stats.b):
        assert d.mean_aoi >= 2
        assert abs(d.mean_aoi - (0.5 + 2 / d.empirical_f)) / d.mean_aoi < 0.005


def test_deterministic(base):
    config = SlotSimConfig(base, REF_POINT, n_slots=100_000, seed=8)
    assert run_simulation(config) == run_simulation(config)
    assert run_simulation(config) != run_simulation(SlotSimConfig(base, REF_POINT, 100_000, seed=9))


def test_agrees_with_fading_oracle(base):
    n_slots = 600_000
    stats = run_simulation(SlotSimConfig(base, REF_POINT, n_slots=n_slots, seed=12))
    pair = empirical_success_pair(base, REF_POINT, n_slots // 2, seed=12)
    assert abs(stats.empirical_f_a - pair.f_a) <= 3 * pair.ci_halfwidth_a
    assert abs(stats.empirical_f_b - pair.f_b) <= 3 * pair.ci_halfwidth_b
    # same seed discipline: in fact the very same draws
    assert (stats.empirical_f_a, stats.empirical_f_b) == (pair.f_a, pair.f_b)


def test_weighted_aoi(base):
    stats = run_simulation(SlotSimConfig(base.replace(weight_a=0.8, weight_b=0.2), REF_POINT, 20_000))
    assert stats.weighted_aoi(base.replace(weight_a=0.8, weight_b=0.2)) == pytest.approx(
        0.8 * stats.mean_aoi_a + 0.2 * stats.mean_aoi_b)
