"""Independent oracles used by the test suite.

These deliberately avoid the implementation paths they check: flights are
traced segment by segment, stationary vectors come from power iteration,
and expectations come from plain sampling.
"""
from __future__ import annotations

import math

import numpy as np


def trace_flight(rho, theta, length, direction, L):
    """Walk one flight; teleport to the antipodal boundary point at each
    exit.  Returns (rho', theta', macro_crossings)."""
    x = rho * math.cos(theta)
    y = rho * math.sin(theta)
    ux = math.cos(direction)
    uy = math.sin(direction)
    remaining = float(length)
    crossings = 0
    zero_jumps = 0
    for _ in range(10_000_000):
        b = x * ux + y * uy
        c = x * x + y * y - L * L
        d = -b + math.sqrt(max(b * b - c, 0.0))
        if remaining < d:
            x += remaining * ux
            y += remaining * uy
            break
        if d <= 0.0:
            zero_jumps += 1
            if zero_jumps > 1:     # tangent degenerate: going nowhere
                break
        x = -(x + d * ux)
        y = -(y + d * uy)
        remaining -= d
        crossings += 1
    else:
        raise RuntimeError("flight trace did not terminate")
    return math.hypot(x, y), math.atan2(y, x) % (2.0 * math.pi), crossings


def power_iteration(P, tol=1e-14, max_iter=200_000):
    """Stationary row vector of a row-stochastic matrix by repeated
    multiplication (with doubling of the matrix power for speed)."""
    pi = np.full(P.shape[0], 1.0 / P.shape[0])
    Q = P.copy()
    for _ in range(max_iter):
        new = pi @ Q
        new /= new.sum()
        if np.abs(new - pi).max() < tol:
            return new
        pi = new
        Q = Q @ Q       # squaring accelerates convergence geometrically
    raise RuntimeError("power iteration did not converge")


def sample_disk_radius(rng, n, r_lo, r_hi):
    """Radii with density 2x/(r_hi**2 - r_lo**2) on [r_lo, r_hi]."""
    return np.sqrt(r_lo**2 + rng.random(n) * (r_hi**2 - r_lo**2))


def interference_samples(rng, n, ch, lo, hi):
    """n draws of gain * P_t_m / d**beta with d on the [lo, hi] support."""
    d = sample_disk_radius(rng, n, lo, hi)
    g = rng.exponential(ch.P_gamma, n)
    return g * ch.P_t_m / d**ch.beta


def mean_with_se(x):
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))
