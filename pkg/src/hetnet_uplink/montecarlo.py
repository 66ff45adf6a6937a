"""Empirical estimators for everything the analytic modules predict.

Replications own independent RNG substreams spawned from one seed, so
results are bit-identical for a given (plan, seed) regardless of how the
replications are scheduled.  Standard errors always come from the spread
of replication means; per-step samples are autocorrelated and never feed
a standard error directly.

Interference and SINR runs exist in two modes.  ``stationary`` draws the
interferer count from the binomial stationary law and positions from the
analytic support densities, mirroring the independence assumptions of the
closed forms; ``live`` measures the same quantities on a mobile
population, which additionally captures whatever those assumptions miss.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import CellType, ChannelConfig, NetworkConfig
from .crossing import crossing_probabilities
from .mobility import advance, sample_direction, sample_flight_length
from .performance import PerformanceQuery

SCENARIOS = ("crossing", "occupancy", "interference", "success", "rate", "density_sweep")
MODES = ("stationary", "live")


@dataclass(frozen=True)
class ExperimentPlan:
    """Shape of one experiment: scenario, effort, seed, optional sweep."""

    scenario: str
    replications: int = 8
    steps_per_replication: int = 100_000
    warmup_steps: int = 1_000
    seed: int = 0
    sweep: tuple[str, tuple[float, ...]] | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(
                f"unknown scenario {self.scenario!r}; valid: {', '.join(SCENARIOS)}"
            )
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not 0 <= self.warmup_steps < self.steps_per_replication:
            raise ValueError("need 0 <= warmup_steps < steps_per_replication")


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    std_error: float
    sample_count: int


@dataclass(frozen=True)
class CrossingRun:
    p_in: EstimateWithError
    p_out: EstimateWithError


@dataclass(frozen=True)
class OccupancyRun:
    mean: EstimateWithError
    variance: EstimateWithError
    histogram: np.ndarray
    thin: int


@dataclass(frozen=True)
class InterferenceRun:
    csg_mean: EstimateWithError
    csg_variance: EstimateWithError
    osg_mean: EstimateWithError
    osg_variance: EstimateWithError
    resampled: int
    mode: str


def _substreams(seed: int, n: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _pool(rep_values, samples_per_rep) -> EstimateWithError:
    vals = np.asarray(rep_values, dtype=float)
    value = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else math.nan
    return EstimateWithError(value, se, int(samples_per_rep * vals.size))


def _uniform_annulus(rng, n, r_lo, r_hi):
    """Radii of points uniform on the annulus r_lo <= r <= r_hi."""
    return np.sqrt(r_lo**2 + rng.random(n) * (r_hi**2 - r_lo**2))


def _fly(rng, rho, theta, cfg):
    n = rho.size
    lengths = sample_flight_length(1.0 - rng.random(n), cfg.alpha, cfg.delta)
    directions = sample_direction(rng.random(n))
    return advance(rho, theta, lengths, directions, cfg.L)


def run_crossing(plan: ExperimentPlan, cfg: NetworkConfig, r_disk: float | None = None) -> CrossingRun:
    """Estimate both crossing probabilities from independent flights.

    Stationarity makes positions uniform, so each trial samples a fresh
    start (uniform inside the disk for p_out, uniform outside for p_in),
    one flight, and checks membership at the flight end.
    """
    r = cfg.R if r_disk is None else float(r_disk)
    n = plan.steps_per_replication
    outs, ins = [], []
    for rng in _substreams(plan.seed, plan.replications):
        rho = _uniform_annulus(rng, n, 0.0, r)
        theta = rng.random(n) * 2.0 * np.pi
        end_rho, _ = _fly(rng, rho, theta, cfg)
        outs.append(float(np.mean(end_rho >= r)))

        rho = _uniform_annulus(rng, n, r, cfg.L)
        theta = rng.random(n) * 2.0 * np.pi
        end_rho, _ = _fly(rng, rho, theta, cfg)
        ins.append(float(np.mean(end_rho < r)))
    return CrossingRun(p_in=_pool(ins, n), p_out=_pool(outs, n))


def run_occupancy(
    plan: ExperimentPlan,
    cfg: NetworkConfig,
    r_disk: float | None = None,
    thin: int = 1,
    trace_hook=None,
) -> OccupancyRun:
    """Time statistics of the in-cell count on a mobile population.

    Mean/variance use every post-warmup step; the histogram keeps every
    ``thin``-th step so chi-square consumers can decorrelate it.
    """
    r = cfg.R if r_disk is None else float(r_disk)
    post = plan.steps_per_replication - plan.warmup_steps
    means, variances = [], []
    histogram = np.zeros(cfg.N + 1, dtype=np.int64)
    for rng in _substreams(plan.seed, plan.replications):
        rho = _uniform_annulus(rng, cfg.N, 0.0, cfg.L)
        theta = rng.random(cfg.N) * 2.0 * np.pi
        for _ in range(plan.warmup_steps):
            rho, theta = _fly(rng, rho, theta, cfg)
        counts = np.empty(post, dtype=np.int64)
        for step in range(post):
            rho, theta = _fly(rng, rho, theta, cfg)
            counts[step] = int((rho < r).sum())
            if trace_hook is not None:
                trace_hook(step, rho, theta)
        means.append(counts.mean())
        variances.append(counts.var(ddof=1))
        histogram += np.bincount(counts[::thin], minlength=cfg.N + 1)
    return OccupancyRun(
        mean=_pool(means, post),
        variance=_pool(variances, post),
        histogram=histogram,
        thin=thin,
    )


def _stationary_interference(rng, n, count_n, count_p, lo, hi, ch):
    """n total-interference samples: counts are Binomial(count_n, count_p),
    distances follow the 2x/(hi**2-lo**2) support density on [lo, hi]."""
    if count_n == 0 or count_p <= 0.0:
        return np.zeros(n)
    xi = rng.binomial(count_n, count_p, n)
    total = int(xi.sum())
    d = _uniform_annulus(rng, total, lo, hi)
    g = rng.exponential(ch.P_gamma, total)
    contrib = g * ch.P_t_m / d**ch.beta
    owner = np.repeat(np.arange(n), xi)
    return np.bincount(owner, weights=contrib, minlength=n)


def _interference_eta(cfg, p_in, p_out):
    if p_in is None or p_out is None:
        probs = crossing_probabilities(cfg, cfg.R_I)
        p_in = probs.p_in if p_in is None else p_in
        p_out = probs.p_out if p_out is None else p_out
    return p_in / (p_in + p_out)


def run_interference(
    plan: ExperimentPlan,
    cfg: NetworkConfig,
    ch: ChannelConfig,
    mode: str = "stationary",
    p_in: float | None = None,
    p_out: float | None = None,
) -> InterferenceRun:
    """Empirical mean/variance of the total interference, both cell types.

    Closed-cell interferers live in the full R_I disk with the 1 m
    distance floor (closer live users are resampled onto the analytic
    support and counted); open-cell interferers live in the ring.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    n = plan.steps_per_replication - plan.warmup_steps
    q = 1.0 - cfg.R**2 / cfg.R_I**2
    c_means, c_vars, o_means, o_vars = [], [], [], []
    resampled = 0

    if mode == "stationary":
        eta = _interference_eta(cfg, p_in, p_out)
        for rng in _substreams(plan.seed, plan.replications):
            ic = _stationary_interference(rng, n, cfg.N, eta, 1.0, cfg.R_I, ch)
            io = _stationary_interference(rng, n, cfg.N, eta * q, cfg.R, cfg.R_I, ch)
            c_means.append(ic.mean())
            c_vars.append(ic.var(ddof=1))
            o_means.append(io.mean())
            o_vars.append(io.var(ddof=1))
    else:
        for rng in _substreams(plan.seed, plan.replications):
            rho = _uniform_annulus(rng, cfg.N, 0.0, cfg.L)
            theta = rng.random(cfg.N) * 2.0 * np.pi
            for _ in range(plan.warmup_steps):
                rho, theta = _fly(rng, rho, theta, cfg)
            ic = np.empty(n)
            io = np.empty(n)
            for step in range(n):
                rho, theta = _fly(rng, rho, theta, cfg)
                d_c = rho[rho < cfg.R_I]
                near = d_c < 1.0
                if near.any():
                    resampled += int(near.sum())
                    d_c = d_c.copy()
                    d_c[near] = _uniform_annulus(rng, int(near.sum()), 1.0, cfg.R_I)
                g = rng.exponential(ch.P_gamma, d_c.size)
                ic[step] = float((g * ch.P_t_m / d_c**ch.beta).sum())
                d_o = rho[(rho >= cfg.R) & (rho < cfg.R_I)]
                g = rng.exponential(ch.P_gamma, d_o.size)
                io[step] = float((g * ch.P_t_m / d_o**ch.beta).sum())
            c_means.append(ic.mean())
            c_vars.append(ic.var(ddof=1))
            o_means.append(io.mean())
            o_vars.append(io.var(ddof=1))

    return InterferenceRun(
        csg_mean=_pool(c_means, n),
        csg_variance=_pool(c_vars, n),
        osg_mean=_pool(o_means, n),
        osg_variance=_pool(o_vars, n),
        resampled=resampled,
        mode=mode,
    )


def run_sinr(
    plan: ExperimentPlan,
    cfg: NetworkConfig,
    ch: ChannelConfig,
    query: PerformanceQuery,
    mode: str = "stationary",
    p_in: float | None = None,
    p_out: float | None = None,
) -> tuple[EstimateWithError, EstimateWithError]:
    """Empirical success probability and average rate [nats/s] at kappa."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    n = plan.steps_per_replication - plan.warmup_steps
    q = 1.0 - cfg.R**2 / cfg.R_I**2
    attn = (query.kappa * cfg.R) ** ch.beta
    p_n = ch.noise_power
    open_cell = query.cell_type is CellType.OSG

    successes, rates = [], []
    if mode == "stationary":
        eta = _interference_eta(cfg, p_in, p_out)
        for rng in _substreams(plan.seed, plan.replications):
            if open_cell:
                interference = _stationary_interference(
                    rng, n, cfg.N, eta * q, cfg.R, cfg.R_I, ch
                )
            else:
                interference = _stationary_interference(
                    rng, n, cfg.N, eta, 1.0, cfg.R_I, ch
                )
            g = rng.exponential(ch.P_gamma, n)
            sinr = g * ch.P_t_h / attn / (interference + p_n)
            successes.append(float(np.mean(sinr >= query.threshold)))
            rates.append(float(ch.W * np.mean(np.log1p(sinr))))
    else:
        for rng in _substreams(plan.seed, plan.replications):
            rho = _uniform_annulus(rng, cfg.N, 0.0, cfg.L)
            theta = rng.random(cfg.N) * 2.0 * np.pi
            for _ in range(plan.warmup_steps):
                rho, theta = _fly(rng, rho, theta, cfg)
            ok = np.empty(n)
            ln_rates = np.empty(n)
            for step in range(n):
                rho, theta = _fly(rng, rho, theta, cfg)
                if open_cell:
                    d = rho[(rho >= cfg.R) & (rho < cfg.R_I)]
                else:
                    d = rho[rho < cfg.R_I]
                    near = d < 1.0
                    if near.any():
                        d = d.copy()
                        d[near] = _uniform_annulus(rng, int(near.sum()), 1.0, cfg.R_I)
                g_i = rng.exponential(ch.P_gamma, d.size)
                interference = float((g_i * ch.P_t_m / d**ch.beta).sum())
                g = rng.exponential(ch.P_gamma)
                sinr = g * ch.P_t_h / attn / (interference + p_n)
                ok[step] = sinr >= query.threshold
                ln_rates[step] = math.log1p(sinr)
            successes.append(float(ok.mean()))
            rates.append(float(ch.W * ln_rates.mean()))
    return _pool(successes, n), _pool(rates, n)
