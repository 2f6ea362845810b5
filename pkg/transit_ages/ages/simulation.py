"""Skew-product simulation of masses and mean ages with per-sample diagnostics."""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from transit_ages.core.errors import ArgumentError, NumericalError
from transit_ages.core.system import CompartmentalSystem
from transit_ages.ages.mean_age import AgeState, _require_mass, age_field
from transit_ages.ages.transit import (
    equilibrium_mean_ages,
    frozen_summary,
    mean_age_at,
    transit_time_at,
)
from transit_ages.numerics.integrators import SolverConfig, integrate_ivp

log = logging.getLogger(__name__)

DEFAULT_OUTPUT_SAMPLES = 101


def csv_columns(d: int, with_ages: bool = True) -> List[str]:
    cols = ["t"] + [f"x_{i + 1}" for i in range(d)]
    if with_ages:
        cols += [f"abar_{i + 1}" for i in range(d)]
    cols.append("total_x")
    if with_ages:
        cols += ["R_t", "M_t", "R_frozen", "M_frozen"]
    return cols


@dataclass(frozen=True, eq=False)
class AgeTimeSeries:
    times: np.ndarray
    x: np.ndarray
    abar: np.ndarray
    R_t: np.ndarray
    M_t: np.ndarray
    R_frozen: np.ndarray
    M_frozen: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ArgumentError("AgeTimeSeries times must be strictly increasing")

    @property
    def dimension(self) -> int:
        return self.x.shape[1]

    @property
    def total_x(self) -> np.ndarray:
        return self.x.sum(axis=1)

    def state(self, k: int) -> AgeState:
        return AgeState(float(self.times[k]), self.x[k], self.abar[k])

    @property
    def samples(self):
        return [
            (float(self.times[k]), self.x[k], self.abar[k], float(self.R_t[k]), float(self.M_t[k]),
             float(self.R_frozen[k]), float(self.M_frozen[k]))
            for k in range(self.times.size)
        ]

    def to_frame(self) -> pd.DataFrame:
        d = self.dimension
        data = {"t": self.times}
        for i in range(d):
            data[f"x_{i + 1}"] = self.x[:, i]
        for i in range(d):
            data[f"abar_{i + 1}"] = self.abar[:, i]
        data["total_x"] = self.total_x
        data["R_t"] = self.R_t
        data["M_t"] = self.M_t
        data["R_frozen"] = self.R_frozen
        data["M_frozen"] = self.M_frozen
        return pd.DataFrame(data, columns=csv_columns(d))


def _frozen_quantities(system, t):
    try:
        summary = frozen_summary(system, t)
    except NumericalError as exc:
        log.warning("frozen R, M undefined at t=%.6g: %s", t, exc.detail)
        return np.nan, np.nan
    return summary.R, summary.M


def simulate_with_ages(system: CompartmentalSystem, t0: float, x0, t1: float,
                       abar0=None, cfg: Optional[SolverConfig] = None,
                       t_eval: Optional[Sequence[float]] = None) -> AgeTimeSeries:
    """Integrate x' = B(t)x + s(t) together with the mean-age system.

    ``abar0`` defaults to the equilibrium mean ages of the system frozen at t0.
    Frozen R and M at each sample apply the autonomous equilibrium formulas to
    (B(t), s(t)); for a nonautonomous system that comparator has no
    theoretical backing.
    """
    system.domain.require(t0)
    d = system.dimension
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape != (d,):
        raise ArgumentError(f"x0 must have {d} entries")
    _require_mass(x0, t0)
    if abar0 is None:
        B0, s0 = system.evaluate(t0)
        abar0 = equilibrium_mean_ages(B0, s0)
    abar0 = np.asarray(abar0, dtype=float).reshape(-1)
    if abar0.shape != (d,):
        raise ArgumentError(f"abar0 must have {d} entries")
    if t_eval is None:
        t_eval = np.linspace(t0, t1, DEFAULT_OUTPUT_SAMPLES) if t1 > t0 else [t0]

    def field(t, y):
        x, abar = y[:d], y[d:]
        _require_mass(x, t)
        B, s = system.evaluate(t)
        return np.concatenate([B @ x + s, age_field(B, s, x, abar)])

    traj = integrate_ivp(field, t0, np.concatenate([x0, abar0]), t1, cfg, t_eval)
    n = len(traj)
    R_t = np.empty(n)
    M_t = np.empty(n)
    R_fr = np.empty(n)
    M_fr = np.empty(n)
    for k in range(n):
        t = float(traj.times[k])
        state = AgeState(t, traj.states[k, :d], traj.states[k, d:])
        R_t[k] = transit_time_at(system, state)
        M_t[k] = mean_age_at(state)
        R_fr[k], M_fr[k] = _frozen_quantities(system, t)

    log.info("simulated %d pools over [%g, %g]: %d samples, %d steps", d, t0, t1, n, traj.steps)
    return AgeTimeSeries(traj.times.copy(), traj.states[:, :d].copy(), traj.states[:, d:].copy(),
                         R_t, M_t, R_fr, M_fr)
