"""Age densities of a scalar system along characteristics, and their moments."""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from transit_ages.config.settings import DEFAULT_AGE_STEP_FRACTION
from transit_ages.core.errors import ArgumentError, ZeroMassError
from transit_ages.oracles.scalar import integrate

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AgeDensityGrid:
    """p(a, t) on ages x times; ``values[k, n]`` is p(ages[k], times[n]).

    The density jumps at a = t whenever p0(0) != s(0), so the two one-sided
    limits there are kept for the moment quadrature.
    """

    ages: np.ndarray
    times: np.ndarray
    values: np.ndarray
    edge_from_input: np.ndarray
    edge_from_initial: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.ages.size, self.times.size):
            raise ArgumentError("density values must have shape (ages, times)")
        if np.any(np.diff(self.ages) <= 0) or np.any(np.diff(self.times) <= 0):
            raise ArgumentError("age and time grids must be strictly increasing")

    def column(self, t: float) -> int:
        hits = np.flatnonzero(np.isclose(self.times, t, rtol=0.0, atol=1e-12 * max(1.0, abs(t))))
        if hits.size == 0:
            raise ArgumentError(f"Time {t} is not on the density grid")
        return int(hits[0])


def default_age_grid(horizon: float, step: Optional[float] = None) -> np.ndarray:
    if not horizon > 0:
        raise ArgumentError(f"Age horizon must be positive, got {horizon}")
    step = step or DEFAULT_AGE_STEP_FRACTION * horizon
    n = int(math.ceil(horizon / step - 1e-9))
    return np.linspace(0.0, n * step, n + 1)


def _primitive(b, points: np.ndarray, antiderivative) -> np.ndarray:
    """F(u) = int_0^u b at the sorted points, built from interval-by-interval quadrature."""
    if antiderivative is not None:
        base = antiderivative(0.0)
        return np.array([antiderivative(float(u)) - base for u in points])
    out = np.empty(points.size)
    acc, prev = 0.0, 0.0
    for k, u in enumerate(points):
        acc += integrate(b, prev, float(u))
        out[k] = acc
        prev = float(u)
    return out


def age_density_grid(b: Callable[[float], float], s: Callable[[float], float],
                     p0: Callable[[float], float], times: Sequence[float], age_grid: Sequence[float],
                     antiderivative: Optional[Callable[[float], float]] = None) -> AgeDensityGrid:
    """Solve p_t + p_a = b(t) p, p(0, t) = s(t), p(a, 0) = p0(a) along characteristics.

    a < t: p(a, t) = s(t - a) exp(int_{t-a}^t b)  (mass that entered after time 0)
    a >= t: p(a, t) = p0(a - t) exp(int_0^t b)     (initial mass)
    """
    ages = np.asarray(list(age_grid), dtype=float)
    times = np.asarray(list(times), dtype=float)
    if ages.size == 0 or times.size == 0:
        raise ArgumentError("age and time grids must be non-empty")
    if ages[0] != 0.0:
        raise ArgumentError("age grid must start at 0")
    if np.any(times < 0):
        raise ArgumentError("density times are measured from 0 and must be nonnegative")

    # every entry time t - a in [0, t], plus the times themselves
    entries = [t - ages[ages < t] for t in times]
    nodes = np.unique(np.concatenate([times] + entries + [np.zeros(1)]))
    F = dict(zip(nodes.tolist(), _primitive(b, nodes, antiderivative).tolist()))

    values = np.empty((ages.size, times.size))
    edge_in = np.empty(times.size)
    edge_init = np.empty(times.size)
    for n, t in enumerate(times):
        Ft = F[float(t)]
        young = ages < t
        entry = entries[n]
        values[young, n] = [s(u) * math.exp(Ft - F[float(u)]) for u in entry]
        values[~young, n] = [p0(a - t) * math.exp(Ft) for a in ages[~young]]
        edge_in[n] = s(0.0) * math.exp(Ft)
        edge_init[n] = p0(0.0) * math.exp(Ft)
    return AgeDensityGrid(ages, times, values, edge_in, edge_init)


def age_density_1d(b, s, p0, t: float, age_grid: Optional[Sequence[float]] = None,
                   antiderivative=None) -> AgeDensityGrid:
    """The density at a single time t; the age grid defaults to [0, 2t] with step 1e-3 of that range."""
    if age_grid is None:
        age_grid = default_age_grid(2.0 * t if t > 0 else 1.0)
    return age_density_grid(b, s, p0, [t], age_grid, antiderivative)


def density_moments(grid: AgeDensityGrid, t: float) -> Tuple[float, float]:
    """(mass, mean age) at t by trapezoid quadrature, split at the jump a = t."""
    n = grid.column(t)
    t = float(grid.times[n])
    ages, p = grid.ages, grid.values[:, n]

    young = ages < t
    if t <= ages[-1]:
        a_lo = np.append(ages[young], t)
        p_lo = np.append(p[young], grid.edge_from_input[n])
        a_hi = np.insert(ages[~young], 0, t) if ages[~young].size and ages[~young][0] > t else ages[~young]
        p_hi = np.insert(p[~young], 0, grid.edge_from_initial[n]) if a_hi.size > ages[~young].size else p[~young]
    else:
        log.warning("age grid ends at %.6g below t=%.6g; density beyond it is dropped", ages[-1], t)
        a_lo, p_lo = ages, p
        a_hi, p_hi = np.empty(0), np.empty(0)

    mass = 0.0
    first = 0.0
    for a, v in ((a_lo, p_lo), (a_hi, p_hi)):
        if a.size > 1:
            mass += float(np.trapezoid(v, a))
            first += float(np.trapezoid(a * v, a))
    if not mass > 0.0:
        raise ZeroMassError(f"Density has no mass at t={t:.6g}")
    return mass, first / mass
