"""Levy-flight mobility inside a disk with antipodal boundary re-entry.

A flight is a straight move with power-law length (inverse-CDF sampled)
and uniform direction.  A user reaching the disk edge re-enters at the
diametrically opposite boundary point without changing heading, so the
disk population is conserved and the uniform law is preserved.

The end point of an arbitrarily long flight has a closed form.  Along the
movement line, let V be the foot of the perpendicular from the disk
center and l1 the half chord length; the start sits at along-track
coordinate t0 = rho*cos(direction - theta), the first exit at +l1.  Every
re-entry chord has the same half length l1 and its perpendicular foot
alternates between -V and +V, with the user entering each chord at
along-track -l1.  After m full chords and a residual l5, the end point is
(-1)**(m+1) * V + (l5 - l1) * u, with u the unit heading.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PolarPosition:
    """Location relative to the macro-cell center: radius [m], angle [rad)."""

    rho: float
    theta: float

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError(f"rho must be nonnegative, got {self.rho}")
        object.__setattr__(self, "theta", self.theta % TWO_PI)


@dataclass(frozen=True)
class Flight:
    """One move: length [m] (at least the basic step) and heading [rad)."""

    length: float
    direction: float

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError(f"flight length must be positive, got {self.length}")
        object.__setattr__(self, "direction", self.direction % TWO_PI)


@dataclass(frozen=True)
class FlightGeometry:
    """Chord decomposition of one flight.

    l1      half chord length through the disk [m]
    l3      distance from the start to the first exit [m]
    l4      residual length after the first exit [m] (negative: no exit)
    m       number of full re-crossings; -1 encodes no boundary crossing
    l5      residual after the last re-entry, in [0, 2*l1) [m]
    gamma1  auxiliary elevation angle of the end point over the chord foot
    """

    l1: float
    l3: float
    l4: float
    m: int
    l5: float
    gamma1: float


def sample_flight_length(u, alpha: float, delta: float):
    """Inverse-CDF power-law flight length: delta * u**(-1/alpha).

    The result has survival function (delta/x)**alpha on [delta, inf).
    Accepts scalars or arrays; u must lie in (0, 1].
    """
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0) or np.any(u > 1.0):
        raise ValueError("u must lie in (0, 1]")
    out = delta * u ** (-1.0 / alpha)
    return float(out) if out.ndim == 0 else out


def sample_direction(u):
    """Uniform heading 2*pi*u for u in [0, 1)."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0.0) or np.any(u >= 1.0):
        raise ValueError("u must lie in [0, 1)")
    out = TWO_PI * u
    return float(out) if out.ndim == 0 else out


def advance(rho, theta, length, direction, L: float):
    """Vectorized flight advance under the antipodal re-entry rule.

    All array arguments broadcast; returns (rho', theta') with
    rho' <= L and theta' in [0, 2*pi).  Tangent degenerate chords
    (l1 == 0, a probability-zero event) leave the user in place.
    """
    rho, theta, length, direction = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (rho, theta, length, direction))
    )
    if np.any(rho > L):
        raise ValueError("start position outside the disk")

    phi = direction - theta
    ux, uy = np.cos(direction), np.sin(direction)
    x0, y0 = rho * np.cos(theta), rho * np.sin(theta)

    w = rho * np.sin(phi)                      # signed offset of the line
    l1 = np.sqrt(np.maximum(L * L - w * w, 0.0))
    t0 = rho * np.cos(phi)                     # along-track start coordinate
    l3 = l1 - t0                               # distance to first exit
    vx, vy = x0 - t0 * ux, y0 - t0 * uy        # perpendicular foot

    crosses = length >= l3

    # no boundary crossing: plain straight move
    ex = x0 + length * ux
    ey = y0 + length * uy

    # crossing: m full chords, then l5 from the (m+1)-th entry point
    l4 = length - l3
    period = 2.0 * l1
    safe = np.where(period > 0.0, period, 1.0)
    m = np.floor(l4 / safe)
    l5 = l4 - m * safe
    # keep (m, l5) consistent: 0 <= l5 < period
    low = l5 < 0.0
    m = np.where(low, m - 1.0, m)
    l5 = np.where(low, l5 + safe, l5)
    high = l5 >= safe
    m = np.where(high, m + 1.0, m)
    l5 = np.where(high, l5 - safe, l5)

    flip = np.where(np.mod(m, 2.0) == 0.0, -1.0, 1.0)   # (-1)**(m+1)
    cx = flip * vx + (l5 - l1) * ux
    cy = flip * vy + (l5 - l1) * uy

    degenerate = crosses & (period <= 0.0)
    ex = np.where(crosses, np.where(degenerate, x0, cx), ex)
    ey = np.where(crosses, np.where(degenerate, y0, cy), ey)

    rho_out = np.minimum(np.hypot(ex, ey), L)
    theta_out = np.mod(np.arctan2(ey, ex), TWO_PI)
    if rho_out.ndim == 0:
        return float(rho_out), float(theta_out)
    return rho_out, theta_out


def flight_geometry(start: PolarPosition, flight: Flight, L: float) -> FlightGeometry:
    """Chord decomposition of one flight (see module docstring)."""
    if start.rho > L:
        raise ValueError("start position outside the disk")
    phi = flight.direction - start.theta
    w = start.rho * math.sin(phi)
    l1 = math.sqrt(max(L * L - w * w, 0.0))
    l3 = l1 - start.rho * math.cos(phi)
    l4 = flight.length - l3
    if flight.length < l3:
        m = -1
        l5 = l4 % (2.0 * l1) if l1 > 0.0 else 0.0
    elif l1 > 0.0:
        m = int(l4 // (2.0 * l1))
        l5 = l4 - m * 2.0 * l1
        if l5 < 0.0:
            m, l5 = m - 1, l5 + 2.0 * l1
        elif l5 >= 2.0 * l1:
            m, l5 = m + 1, l5 - 2.0 * l1
    else:
        m, l5 = 0, 0.0
    gamma1 = math.atan2(l1 - l5, math.sqrt(max(L * L - l1 * l1, 0.0)))
    return FlightGeometry(l1=l1, l3=l3, l4=l4, m=m, l5=l5, gamma1=gamma1)


def apply_flight(start: PolarPosition, flight: Flight, L: float) -> PolarPosition:
    """End position of one flight from ``start`` inside the disk of radius L."""
    rho, theta = advance(start.rho, start.theta, flight.length, flight.direction, L)
    return PolarPosition(rho, theta)


def step_population(states, cfg, rng) -> list:
    """Advance every user by one independently sampled flight.

    ``states`` is a sequence of PolarPosition; returns a list of the same
    length (the re-entry rule conserves the population).  ``rng`` is a
    numpy Generator; results are reproducible given the generator state.
    """
    if len(states) == 0:
        return []
    rho = np.array([p.rho for p in states])
    theta = np.array([p.theta for p in states])
    n = len(states)
    lengths = sample_flight_length(1.0 - rng.random(n), cfg.alpha, cfg.delta)
    directions = sample_direction(rng.random(n))
    rho, theta = advance(rho, theta, lengths, directions, cfg.L)
    return [PolarPosition(r, t) for r, t in zip(rho, theta)]


def equal_area_bins(bins: int, L: float):
    """Partition the disk into ``bins`` equal-area regions.

    Rings are cut so that ring i carries s_i sectors with
    sum(s_i) == bins and every region has area pi*L**2/bins exactly.
    Returns (ring_radii, sectors_per_ring, cumulative_counts).
    """
    if bins < 2:
        raise ValueError("bins must be at least 2")
    n_rings = max(1, round(math.sqrt(bins)))
    raw = [bins * (2 * i - 1) / n_rings**2 for i in range(1, n_rings + 1)]
    sectors = [max(1, math.floor(r)) for r in raw]
    # largest-remainder rounding to hit the exact total
    while sum(sectors) < bins:
        frac = [r - s for r, s in zip(raw, sectors)]
        sectors[frac.index(max(frac))] += 1
    while sum(sectors) > bins:
        frac = [r - s for r, s in zip(raw, sectors)]
        candidates = [i for i, s in enumerate(sectors) if s > 1]
        sectors[min(candidates, key=lambda i: frac[i])] -= 1
    cumulative = np.cumsum([0] + sectors)
    radii = L * np.sqrt(cumulative[1:] / bins)
    return radii, np.array(sectors), cumulative


def _positions_to_arrays(positions):
    if isinstance(positions, np.ndarray):
        arr = np.asarray(positions, dtype=float)
        return arr[:, 0], arr[:, 1]
    return (
        np.array([p.rho for p in positions], dtype=float),
        np.array([p.theta for p in positions], dtype=float),
    )


@dataclass(frozen=True)
class UniformityResult:
    statistic: float
    p_value: float
    dof: int


def uniformity_test(positions, bins: int, L: float) -> UniformityResult:
    """Pearson chi-square of positions against the uniform disk law.

    The disk is split into ``bins`` equal-area regions (annuli subdivided
    into sectors).  ``positions`` is a sequence of PolarPosition or an
    (n, 2) array of (rho, theta) rows.
    """
    rho, theta = _positions_to_arrays(positions)
    if rho.size == 0:
        raise ValueError("positions must be non-empty")
    if np.any(rho > L):
        raise ValueError("position outside the disk")
    radii, sectors, cumulative = equal_area_bins(bins, L)

    ring = np.searchsorted(radii, rho, side="left")
    ring = np.minimum(ring, len(sectors) - 1)   # rho == L joins the last ring
    width = TWO_PI / sectors[ring]
    sector = np.minimum((theta % TWO_PI) // width, sectors[ring] - 1)
    region = cumulative[ring] + sector.astype(int)

    observed = np.bincount(region, minlength=bins)
    expected = rho.size / bins
    statistic = float(((observed - expected) ** 2 / expected).sum())
    dof = bins - 1
    return UniformityResult(statistic, float(stats.chi2.sf(statistic, dof)), dof)
