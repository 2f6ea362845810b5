"""Transit time and mean age: along a solution, and for the autonomous equilibrium."""
import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from transit_ages.core.errors import (
    ArgumentError,
    NoOutflowError,
    NonPositiveEquilibriumError,
    ZeroMassError,
)
from transit_ages.core.system import CompartmentalSystem
from transit_ages.ages.mean_age import AgeState, age_matrix
from transit_ages.numerics.linalg import equilibrium, invert, solve_linear

log = logging.getLogger(__name__)

# relative slack for zero column sums and internal consistency checks
ZERO_RTOL = 1e-12
CHECK_RTOL = 1e-8
IDENTITY_RTOL = 1e-6


def _outflow_rates(B: np.ndarray) -> np.ndarray:
    """Column sums of B with exact-on-paper zeros snapped to zero."""
    col = B.sum(axis=0)
    col[np.abs(col) <= ZERO_RTOL * np.abs(B).sum(axis=0)] = 0.0
    return col


def transit_time_at(system: CompartmentalSystem, state: AgeState) -> float:
    """R_t: mean age of the mass leaving the system at state.t."""
    B = system.matrix_at(state.t)
    out = _outflow_rates(B) * state.x
    den = float(out.sum())
    if den == 0.0:
        raise NoOutflowError(f"No outflow from the system at t={state.t:.17g}")
    return float((state.abar * out).sum()) / den


def mean_age_at(state: AgeState) -> float:
    """M_t: mass-weighted mean age of the mass in the system."""
    total = float(state.x.sum())
    if not total > 0.0:
        raise ZeroMassError(f"Total mass {total:.3g} is not positive at t={state.t:.17g}")
    return float((state.abar * state.x).sum()) / total


def equilibrium_mean_ages(B, s) -> np.ndarray:
    """abar* = -(X*)^{-1} B^{-1} X* (1, ..., 1)^T."""
    B = np.asarray(B, dtype=float)
    s = np.asarray(s, dtype=float)
    x_star = equilibrium(B, s)
    if np.any(x_star <= 0.0):
        raise NonPositiveEquilibriumError(
            f"Equilibrium {np.array2string(x_star, precision=6)} has non-positive pools; mean ages undefined")
    abar = -solve_linear(B, x_star) / x_star
    residual = age_matrix(B, s, x_star) @ abar + 1.0
    if np.max(np.abs(residual)) > CHECK_RTOL * (1.0 + np.max(np.abs(abar))):
        log.warning("mean-age fixed point residual %.3g", float(np.max(np.abs(residual))))
    return abar


# ============================================================
# Autonomous summary
# ============================================================
@dataclass(frozen=True, eq=False)
class AutonomousSummary:
    x_star: np.ndarray
    abar_star: np.ndarray
    r: np.ndarray
    p: np.ndarray
    beta: np.ndarray
    eta: np.ndarray
    R: float
    M: float
    U: float

    def as_lines(self) -> List[str]:
        def vec(v):
            return "(" + ",".join(f"{float(a):.17g}" for a in v) + ")"

        lines = [
            f"R={self.R:.17g}",
            f"M={self.M:.17g}",
            f"U={self.U:.17g}",
            f"r={vec(self.r)}",
            f"beta={vec(self.beta)}",
            f"eta={vec(self.eta)}",
            f"x_star={vec(self.x_star)}",
            f"abar_star={vec(self.abar_star)}",
        ]
        lines += [f"p_{i + 1}={vec(row)}" for i, row in enumerate(self.p)]
        return lines


def transfer_probabilities(B) -> np.ndarray:
    """p_ij = -b_ji / b_ii for i != j; zero diagonal."""
    B = np.asarray(B, dtype=float)
    p = -B.T / np.diag(B)[:, None]
    np.fill_diagonal(p, 0.0)
    return p


def per_pool_recursion_residual(B, r) -> np.ndarray:
    """r_i - (-1/b_ii + sum_{j != i} p_ij r_j); zero for the true remaining transit times."""
    B = np.asarray(B, dtype=float)
    r = np.asarray(r, dtype=float)
    return r - (-1.0 / np.diag(B) + transfer_probabilities(B) @ r)


def _occupied_pool_ages(B_inv: np.ndarray, x_star: np.ndarray) -> np.ndarray:
    """Equilibrium mean ages on pools holding mass; NaN on pools the input never reaches."""
    occupied = x_star > ZERO_RTOL * float(np.abs(x_star).sum())
    abar = np.full(x_star.shape, np.nan)
    abar[occupied] = -(B_inv @ x_star)[occupied] / x_star[occupied]
    if not occupied.all():
        log.info("equilibrium pools %s hold no mass; their mean ages are undefined",
                 [int(i) + 1 for i in np.flatnonzero(~occupied)])
    return abar


def autonomous_summary(B, s) -> AutonomousSummary:
    """Transit time, mean age and turnover time of the equilibrium of x' = Bx + s."""
    B = np.asarray(B, dtype=float)
    s = np.asarray(s, dtype=float).reshape(-1)
    total_in = float(s.sum())
    if not total_in > 0.0:
        raise ArgumentError("Autonomous summary needs a nonzero input vector")

    B_inv = invert(B)
    ones = np.ones(B.shape[0])
    r = -ones @ B_inv
    x_star = -B_inv @ s
    beta = s / total_in
    eta = x_star / x_star.sum()
    abar_star = _occupied_pool_ages(B_inv, x_star)
    occupied = np.isfinite(abar_star)

    R = float(-ones @ (B_inv @ beta))
    M = float(-ones @ (B_inv @ eta))
    U = float(x_star.sum()) / total_in

    scale = 1.0 + abs(R)
    for label, value in (("R = U", R - U), ("R = r.beta", R - float(r @ beta)),
                         ("M = eta.abar*", M - float(eta[occupied] @ abar_star[occupied]))):
        if abs(value) > IDENTITY_RTOL * scale:
            log.warning("autonomous summary identity %s off by %.3g", label, value)
    recursion = per_pool_recursion_residual(B, r)
    if np.max(np.abs(recursion)) > IDENTITY_RTOL * (1.0 + np.max(np.abs(r))):
        log.warning("per-pool transit time recursion residual %.3g", float(np.max(np.abs(recursion))))

    return AutonomousSummary(x_star, abar_star, r, transfer_probabilities(B), beta, eta, R, M, U)


def frozen_summary(system: CompartmentalSystem, t: float) -> AutonomousSummary:
    """The instantaneous comparator: treat (B(t), s(t)) as autonomous and at equilibrium."""
    B, s = system.evaluate(t)
    return autonomous_summary(B, s)
