import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from hetnet_uplink import (
    CellType,
    ExperimentPlan,
    NetworkConfig,
    PerformanceQuery,
    run_crossing,
    run_interference,
    run_occupancy,
    run_sinr,
)

T60 = 1e-6


def _plan(**kw):
    base = dict(
        scenario="crossing", replications=4, steps_per_replication=20_000,
        warmup_steps=100, seed=5,
    )
    base.update(kw)
    return ExperimentPlan(**base)


# ---------------------------------------------------------------- plans

def test_plan_validation():
    with pytest.raises(ValueError):
        ExperimentPlan("nope")
    with pytest.raises(ValueError):
        _plan(replications=0)
    with pytest.raises(ValueError):
        _plan(steps_per_replication=0, warmup_steps=0)     # degenerate plan
    with pytest.raises(ValueError):
        _plan(warmup_steps=20_000)


# ---------------------------------------------------------------- crossing

def test_crossing_certain_exit_for_giant_steps():
    cfg = NetworkConfig(L=600_000.0, R=60.0, R_I=120.0, delta=150.0, N=100)
    run = run_crossing(_plan(steps_per_replication=25_000, warmup_steps=0), cfg)
    assert run.p_out.value >= 1.0 - 1e-4
    assert run.p_out.sample_count == 100_000


def test_crossing_brackets_analytic_small_step():
    from hetnet_uplink import crossing_probabilities

    cfg = NetworkConfig(N=2000, delta=5.0)
    cp = crossing_probabilities(cfg)
    run = run_crossing(_plan(replications=8, steps_per_replication=125_000, seed=21), cfg)
    assert abs(run.p_out.value - cp.p_out) <= 3.0 * run.p_out.std_error
    assert (
        abs(run.p_in.value - cp.p_in) <= 3.0 * run.p_in.std_error
        or abs(run.p_in.value - cp.p_in) <= 0.05 * cp.p_in
    )


# ---------------------------------------------------------------- occupancy

def test_occupancy_mean_matches_area_ratio(desk_cfg):
    plan = _plan(scenario="occupancy", replications=4, steps_per_replication=3_000,
                 warmup_steps=200, seed=9)
    run = run_occupancy(plan, desk_cfg)
    target = desk_cfg.N * desk_cfg.R**2 / desk_cfg.L**2      # 28.8
    assert abs(run.mean.value - target) <= 3.0 * run.mean.std_error
    binom_var = desk_cfg.N * 0.0144 * (1 - 0.0144)
    assert abs(run.variance.value - binom_var) <= 4.0 * run.variance.std_error


def test_occupancy_histogram_matches_binomial(desk_cfg, probs_at_R):
    stride = math.ceil(5.0 / (probs_at_R.p_in + probs_at_R.p_out))
    plan = _plan(scenario="occupancy", replications=4, steps_per_replication=26_000,
                 warmup_steps=1_000, seed=12)
    run = run_occupancy(plan, desk_cfg, thin=stride)
    counts = run.histogram
    n_samples = counts.sum()
    pmf = stats.binom.pmf(np.arange(desk_cfg.N + 1), desk_cfg.N, 0.0144)
    # pool the support into cells with expected count >= 8
    order = np.arange(desk_cfg.N + 1)
    observed, expected = [], []
    acc_o = acc_e = 0.0
    for j in order:
        acc_o += counts[j]
        acc_e += pmf[j] * n_samples
        if acc_e >= 8.0:
            observed.append(acc_o)
            expected.append(acc_e)
            acc_o = acc_e = 0.0
    observed[-1] += acc_o
    expected[-1] += acc_e
    res = stats.chisquare(observed, expected)
    assert res.pvalue > 0.01


def test_occupancy_means_invariant_across_steps(desk_cfg):
    runs = [
        run_occupancy(
            _plan(scenario="occupancy", replications=4, steps_per_replication=2_200,
                  warmup_steps=200, seed=40),
            replace(desk_cfg, delta=delta),
        )
        for delta in (5.0, 30.0, 100.0)
    ]
    for a in runs:
        for b in runs:
            gap = abs(a.mean.value - b.mean.value)
            assert gap <= 3.0 * math.hypot(a.mean.std_error, b.mean.std_error)


def test_occupancy_trace_hook_sees_every_step(desk_cfg):
    seen = []
    plan = _plan(scenario="occupancy", replications=1, steps_per_replication=60,
                 warmup_steps=10, seed=1)
    cfg = replace(desk_cfg, N=20)
    run_occupancy(plan, cfg, trace_hook=lambda step, rho, theta: seen.append((step, rho.size)))
    assert len(seen) == 50
    assert all(n == 20 for _, n in seen)


# ---------------------------------------------------------------- interference

def test_interference_empty_population(channel):
    cfg = NetworkConfig(N=0)
    run = run_interference(
        _plan(scenario="interference", replications=2, steps_per_replication=200,
              warmup_steps=0),
        cfg, channel, p_in=0.0576, p_out=0.9424,
    )
    assert run.csg_mean.value == 0.0
    assert run.osg_mean.value == 0.0


def test_interference_live_mode_agrees_with_stationary(desk_cfg, channel, probs_at_RI):
    kw = dict(p_in=probs_at_RI.p_in, p_out=probs_at_RI.p_out)
    stationary = run_interference(
        _plan(scenario="interference", replications=4, steps_per_replication=6_000,
              warmup_steps=100, seed=61),
        desk_cfg, channel, mode="stationary", **kw,
    )
    live = run_interference(
        _plan(scenario="interference", replications=4, steps_per_replication=1_600,
              warmup_steps=100, seed=62),
        desk_cfg, channel, mode="live", **kw,
    )
    gap = abs(stationary.csg_mean.value - live.csg_mean.value)
    assert gap <= 3.0 * math.hypot(stationary.csg_mean.std_error, live.csg_mean.std_error)
    # open cells see strictly less interference, with clear significance
    for run in (stationary, live):
        margin = run.csg_mean.value - run.osg_mean.value
        assert margin > 3.0 * math.hypot(run.csg_mean.std_error, run.osg_mean.std_error)


def test_interference_rejects_unknown_mode(desk_cfg, channel):
    with pytest.raises(ValueError):
        run_interference(_plan(scenario="interference"), desk_cfg, channel, mode="woo")


# ---------------------------------------------------------------- SINR

def test_sinr_tiny_threshold_always_succeeds(desk_cfg, channel, probs_at_RI):
    q = PerformanceQuery(kappa=0.9, threshold=1e-300, cell_type=CellType.CSG)
    success, _ = run_sinr(
        _plan(scenario="success", replications=2, steps_per_replication=2_000,
              warmup_steps=0),
        desk_cfg, channel, q, p_in=probs_at_RI.p_in, p_out=probs_at_RI.p_out,
    )
    assert success.value == 1.0


def test_sinr_curve_tracks_analytic_over_kappa(desk_cfg, channel, probs_at_RI):
    from hetnet_uplink import success_probability

    plan = _plan(scenario="success", replications=4, steps_per_replication=25_000,
                 warmup_steps=0, seed=83)
    for kappa in (0.3, 0.9):
        q = PerformanceQuery(kappa=kappa, threshold=T60, cell_type=CellType.CSG)
        est, _ = run_sinr(plan, desk_cfg, channel, q,
                          p_in=probs_at_RI.p_in, p_out=probs_at_RI.p_out)
        analytic = success_probability(q, desk_cfg, channel,
                                       probs_at_RI.p_in, probs_at_RI.p_out)
        assert abs(est.value - analytic) <= 0.03


def test_sinr_density_sweep_monotone(desk_cfg, channel, probs_at_RI):
    plan = _plan(scenario="density_sweep", replications=4,
                 steps_per_replication=25_000, warmup_steps=0, seed=29)
    q = PerformanceQuery(kappa=0.9, threshold=T60, cell_type=CellType.CSG)
    successes, rates = [], []
    for n in (500, 1000, 2000, 4000):
        s, r = run_sinr(plan, replace(desk_cfg, N=n), channel, q,
                        p_in=probs_at_RI.p_in, p_out=probs_at_RI.p_out)
        successes.append(s.value)
        rates.append(r.value)
    assert all(a >= b for a, b in zip(successes, successes[1:]))
    assert all(a >= b for a, b in zip(rates, rates[1:]))


# ---------------------------------------------------------------- protocol

def test_bit_identical_reruns(desk_cfg, channel, probs_at_RI):
    cfg = NetworkConfig(N=500, delta=30.0)
    plan = _plan(steps_per_replication=5_000, warmup_steps=0, seed=123)
    a = run_crossing(plan, cfg)
    b = run_crossing(plan, cfg)
    assert a == b
    kw = dict(p_in=probs_at_RI.p_in, p_out=probs_at_RI.p_out)
    plan_i = _plan(scenario="interference", replications=2,
                   steps_per_replication=800, warmup_steps=0, seed=9)
    x = run_interference(plan_i, cfg, channel, **kw)
    y = run_interference(plan_i, cfg, channel, **kw)
    assert x.csg_mean == y.csg_mean and x.osg_mean == y.osg_mean


def test_seed_changes_the_draws(desk_cfg):
    plan_a = _plan(seed=1, steps_per_replication=2_000, warmup_steps=0)
    plan_b = _plan(seed=2, steps_per_replication=2_000, warmup_steps=0)
    assert run_crossing(plan_a, desk_cfg) != run_crossing(plan_b, desk_cfg)


def test_std_error_shrinks_with_replications(desk_cfg):
    small = _plan(replications=32, steps_per_replication=2_000, warmup_steps=0, seed=777)
    large = _plan(replications=128, steps_per_replication=2_000, warmup_steps=0, seed=777)
    se_small = run_crossing(small, desk_cfg).p_out.std_error
    se_large = run_crossing(large, desk_cfg).p_out.std_error
    ratio = se_large / se_small
    assert abs(ratio - 0.5) <= 0.2 * 0.5
