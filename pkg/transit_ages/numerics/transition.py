"""Transition operators, the pullback attracting solution and solution gaps."""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from transit_ages.config.settings import DEFAULT_PULLBACK_HORIZON, DEFAULT_SAMPLE_COUNT
from transit_ages.core.errors import ArgumentError, DomainError
from transit_ages.core.system import CompartmentalSystem
from transit_ages.core.validation import StabilityCertificate
from transit_ages.numerics.integrators import SolverConfig, integrate_ivp

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    t0: float
    t1: float
    Phi: np.ndarray


def transition_operator(system: CompartmentalSystem, t0: float, t1: float,
                        cfg: Optional[SolverConfig] = None) -> TransitionMatrix:
    """Phi(t1, t0): integrate X' = B(t) X from the identity."""
    if t1 < t0:
        raise ArgumentError(f"Transition end {t1} precedes start {t0}")
    system.domain.require(t0)
    d = system.dimension
    if t1 == t0:
        return TransitionMatrix(t0, t1, np.eye(d))

    def field(t, y):
        return (system.matrix_at(t) @ y.reshape(d, d)).reshape(-1)

    traj = integrate_ivp(field, t0, np.eye(d).reshape(-1), t1, cfg)
    return TransitionMatrix(t0, t1, traj.final.reshape(d, d))


@dataclass(frozen=True, eq=False)
class PullbackResult:
    t: float
    value: np.ndarray
    horizon: float
    truncation_bound: Optional[float] = None


def _sup_input(system, t_start, t_end, count=DEFAULT_SAMPLE_COUNT):
    return max(float(np.max(np.abs(system.input_at(float(u)))))
               for u in np.linspace(t_start, t_end, count))


def pullback_solution(system: CompartmentalSystem, t: float, horizon: Optional[float] = None,
                      cfg: Optional[SolverConfig] = None,
                      certificate: Optional[StabilityCertificate] = None) -> PullbackResult:
    """Approximate nu(t) = int_{-inf}^t Phi(t, u) s(u) du from a zero state at t - H."""
    if horizon is None:
        horizon = DEFAULT_PULLBACK_HORIZON
        if certificate is None or not certificate.granted:
            log.warning("pullback horizon defaulted to %g without a stability certificate; "
                        "truncation error is not quantified", horizon)
    if not horizon > 0:
        raise ArgumentError(f"Pullback horizon must be positive, got {horizon}")
    start = t - horizon
    if not math.isinf(system.domain.tau) and not system.domain.contains(start):
        raise DomainError(f"Pullback start {start} is outside the domain {system.domain.describe()}")

    traj = integrate_ivp(system.rhs, start, np.zeros(system.dimension), t, cfg)
    bound = None
    if certificate is not None and certificate.granted:
        gamma = certificate.gamma
        bound = math.exp(-gamma * horizon) * _sup_input(system, start, t) / gamma
    return PullbackResult(t, traj.final, horizon, bound)


def pullback_convergence(system: CompartmentalSystem, t: float, horizons: Sequence[float],
                         cfg: Optional[SolverConfig] = None, certificate=None):
    """Pullback solutions for increasing horizons and the successive sup-norm changes."""
    results = [pullback_solution(system, t, h, cfg, certificate) for h in horizons]
    changes = [float(np.max(np.abs(b.value - a.value))) for a, b in zip(results, results[1:])]
    return results, changes


@dataclass(frozen=True, eq=False)
class GapSeries:
    times: np.ndarray
    gaps: np.ndarray


def solution_gap(system: CompartmentalSystem, t0: float, xa, xb, t1: float,
                 cfg: Optional[SolverConfig] = None, t_eval: Optional[Sequence[float]] = None) -> GapSeries:
    """Sup-norm distance between the solutions started at xa and xb."""
    system.domain.require(t0)
    if t_eval is None:
        t_eval = np.linspace(t0, t1, 101)
    a = integrate_ivp(system.rhs, t0, xa, t1, cfg, t_eval)
    b = integrate_ivp(system.rhs, t0, xb, t1, cfg, t_eval)
    return GapSeries(a.times, np.max(np.abs(a.states - b.states), axis=1))
