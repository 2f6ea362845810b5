"""Deterministic explicit Runge-Kutta integration.

Two methods: classical RK4 on a fixed step (bit-reproducible across runs and
platforms with the same numpy), and the Fehlberg 4(5) embedded pair with
step-size control. The adaptive method propagates the 5th order solution.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from transit_ages.config.settings import (
    DEFAULT_ATOL,
    DEFAULT_H_MAX_FRACTION,
    DEFAULT_H_MIN,
    DEFAULT_MAX_STEPS,
    DEFAULT_METHOD,
    DEFAULT_RTOL,
)
from transit_ages.core.errors import ArgumentError, StepBudgetError, StiffnessError

log = logging.getLogger(__name__)

RK4_FIXED = "rk4-fixed"
RK45_ADAPTIVE = "rk45-adaptive"

FieldFn = Callable[[float, np.ndarray], np.ndarray]

# fraction of the fixed step within which an output time counts as a node
NODE_SNAP = 1e-9


# ============================================================
# Configuration
# ============================================================
class SolverConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: Literal["rk4-fixed", "rk45-adaptive"] = DEFAULT_METHOD
    rtol: float = Field(DEFAULT_RTOL, gt=0)
    atol: float = Field(DEFAULT_ATOL, gt=0)
    h_init: Optional[float] = Field(None, gt=0)
    h_min: float = Field(DEFAULT_H_MIN, gt=0)
    h_max: Optional[float] = Field(None, gt=0)
    max_steps: int = Field(DEFAULT_MAX_STEPS, gt=0)

    @model_validator(mode="after")
    def _check_steps(self):
        if self.h_init is not None and self.h_init < self.h_min:
            raise ValueError(f"h_init {self.h_init} is below h_min {self.h_min}")
        if self.h_max is not None:
            if self.h_max < self.h_min:
                raise ValueError(f"h_max {self.h_max} is below h_min {self.h_min}")
            if self.h_init is not None and self.h_init > self.h_max:
                raise ValueError(f"h_init {self.h_init} exceeds h_max {self.h_max}")
        return self

    def resolved(self, t0: float, t1: float) -> "SolverConfig":
        """Fill step sizes left open from the horizon [t0, t1]."""
        horizon = float(t1 - t0)
        if horizon <= 0:
            return self
        h_max = self.h_max if self.h_max is not None else DEFAULT_H_MAX_FRACTION * horizon
        # for rk4-fixed h_init is the step itself
        h_init = min(self.h_init, h_max) if self.h_init is not None else h_max / 100.0
        h_min = min(self.h_min, h_init)
        return self.model_copy(update={"h_max": h_max, "h_init": h_init, "h_min": h_min})


# ============================================================
# Trajectory
# ============================================================
@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    dense: bool = False
    steps: int = 0
    rejected: int = 0

    def __post_init__(self):
        if self.times.shape[0] != self.states.shape[0]:
            raise ArgumentError("Trajectory times and states differ in length")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self):
        return self.times.shape[0]


# ============================================================
# Steppers
# ============================================================
def _rk4_step(f: FieldFn, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# Fehlberg 4(5)
_C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_B5 = np.array([16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55])
_B4 = np.array([25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0])
_E = _B5 - _B4


def _rkf45_step(f: FieldFn, t: float, y: np.ndarray, h: float):
    k = np.empty((6, y.shape[0]))
    for i in range(6):
        yi = y.copy()
        for j, a in enumerate(_A[i]):
            yi += h * a * k[j]
        k[i] = f(t + _C[i] * h, yi)
    y5 = y + h * (_B5 @ k)
    err = h * (_E @ k)
    return y5, err


class _Integrator:
    """Advances one state through a sequence of output times."""

    def __init__(self, f: FieldFn, cfg: SolverConfig):
        self.f = f
        self.cfg = cfg
        self.h = cfg.h_init
        self.origin: Optional[float] = None
        self.node = 0
        self.steps = 0
        self.rejected = 0

    def _count(self):
        self.steps += 1
        if self.steps > self.cfg.max_steps:
            raise StepBudgetError(f"Exceeded max_steps={self.cfg.max_steps}")

    def advance(self, t: float, y: np.ndarray, t_end: float, record=None):
        if self.cfg.method == RK4_FIXED:
            return self._advance_fixed(t, y, t_end, record)
        return self._advance_adaptive(t, y, t_end, record)

    def _advance_fixed(self, t, y, t_end, record):
        # step nodes sit at origin + k * h for the whole run; a step is cut
        # short only when an output time falls between two nodes
        h = self.cfg.h_init
        if self.origin is None:
            self.origin = t
        snap = NODE_SNAP * h
        while t < t_end:
            node = self.origin + (self.node + 1) * h
            if node >= t_end - snap:
                if abs(node - t_end) <= snap:
                    self.node += 1
                t_next = t_end
            else:
                self.node += 1
                t_next = node
            self._count()
            y = _rk4_step(self.f, t, y, t_next - t)
            t = t_next
            if record is not None:
                record(t, y)
        return t_end, y

    def _advance_adaptive(self, t, y, t_end, record):
        cfg = self.cfg
        while t < t_end:
            h = min(self.h, cfg.h_max, t_end - t)
            last = h >= t_end - t
            if h < cfg.h_min and not last:
                raise StiffnessError(f"Step size {h:.3g} fell below h_min={cfg.h_min:.3g} at t={t:.17g}")
            self._count()
            y_new, err = _rkf45_step(self.f, t, y, h)
            scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
            ratio = float(np.max(np.abs(err) / scale)) if err.size else 0.0
            if not np.isfinite(ratio):
                ratio = math.inf
            if ratio <= 1.0:
                t = t_end if last else t + h
                y = y_new
                if record is not None:
                    record(t, y)
                growth = 5.0 if ratio == 0.0 else min(5.0, max(0.2, 0.9 * ratio ** -0.2))
                # keep the controller's proposal when the step was cut to hit t_end
                if not (last and h < self.h):
                    self.h = min(cfg.h_max, h * growth)
            else:
                self.rejected += 1
                self.h = h * max(0.1, 0.9 * ratio ** -0.25)
                if self.h < cfg.h_min:
                    raise StiffnessError(
                        f"Step size {self.h:.3g} fell below h_min={cfg.h_min:.3g} at t={t:.17g}")
        return t, y


def integrate_ivp(field: FieldFn, t0: float, x0, t1: float, cfg: Optional[SolverConfig] = None,
                  t_eval: Optional[Sequence[float]] = None) -> Trajectory:
    """Integrate x' = field(t, x) from (t0, x0) to t1.

    Without ``t_eval`` every accepted step is recorded. With ``t_eval`` the
    trajectory holds exactly those times; internal steps are shortened only to
    land on them.
    """
    if t1 < t0:
        raise ArgumentError(f"Integration end {t1} precedes start {t0}")
    cfg = (cfg or SolverConfig()).resolved(t0, t1)
    y = np.array(x0, dtype=float).reshape(-1)

    if t_eval is None:
        times = [float(t0)]
        states = [y.copy()]
        if t1 > t0:
            runner = _Integrator(field, cfg)
            runner.advance(float(t0), y, float(t1), record=lambda t, s: (times.append(t), states.append(s)))
            log.debug("integrated [%g, %g]: %d steps, %d rejected", t0, t1, runner.steps, runner.rejected)
            return Trajectory(np.array(times), np.array(states), False, runner.steps, runner.rejected)
        return Trajectory(np.array(times), np.array(states))

    grid = np.asarray(list(t_eval), dtype=float)
    if grid.size == 0:
        raise ArgumentError("t_eval is empty")
    if np.any(np.diff(grid) <= 0):
        raise ArgumentError("t_eval must be strictly increasing")
    if grid[0] < t0 or grid[-1] > t1:
        raise ArgumentError(f"t_eval must lie within [{t0}, {t1}]")

    runner = _Integrator(field, cfg)
    out = np.empty((grid.size, y.size))
    t = float(t0)
    for k, target in enumerate(grid):
        if target > t:
            t, y = runner.advance(t, y, float(target))
        out[k] = y
    log.debug("integrated [%g, %g]: %d steps, %d rejected", t0, t1, runner.steps, runner.rejected)
    return Trajectory(grid, out, True, runner.steps, runner.rejected)


def uniform_grid(t0: float, t1: float, dt: float) -> np.ndarray:
    """Output times t0, t0 + dt, ..., ending exactly at t1."""
    if dt <= 0:
        raise ArgumentError(f"Output spacing must be positive, got {dt}")
    n = int(math.floor((t1 - t0) / dt + 1e-9))
    grid = t0 + dt * np.arange(n + 1)
    if t1 - grid[-1] > 1e-9 * max(1.0, abs(t1)):
        grid = np.append(grid, t1)
    else:
        grid[-1] = t1
    return grid
