"""The mean-age field g(t, x, abar) and its matrix form A(t, x)."""
from dataclasses import dataclass

import numpy as np

from transit_ages.config.settings import EPS_MASS_FLOOR
from transit_ages.core.errors import DegenerateMassError
from transit_ages.core.system import CompartmentalSystem


@dataclass(frozen=True, eq=False)
class AgeState:
    t: float
    x: np.ndarray
    abar: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).reshape(-1))
        object.__setattr__(self, "abar", np.asarray(self.abar, dtype=float).reshape(-1))


def _require_mass(x: np.ndarray, t: float) -> None:
    low = np.flatnonzero(x <= EPS_MASS_FLOOR)
    if low.size:
        i = int(low[0])
        raise DegenerateMassError(
            f"Pool {i + 1} mass {x[i]:.3g} is at or below the floor {EPS_MASS_FLOOR:g} at t={t:.17g}")


def age_field(B: np.ndarray, s: np.ndarray, x: np.ndarray, abar: np.ndarray) -> np.ndarray:
    """g_i = 1 + [sum_j (abar_j - abar_i) b_ij x_j - abar_i s_i] / x_i, no mass check."""
    W = B * x[None, :]
    # the j = i term vanishes, so full row sums are safe
    return 1.0 + (W @ abar - abar * W.sum(axis=1) - abar * s) / x


def mean_age_rhs(system: CompartmentalSystem, t: float, state: AgeState) -> np.ndarray:
    _require_mass(state.x, t)
    B, s = system.evaluate(t)
    return age_field(B, s, state.x, state.abar)


def age_matrix(B: np.ndarray, s: np.ndarray, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    W = B * x[None, :]
    A = W / x[:, None]
    off_sum = W.sum(axis=1) - np.diag(W)
    np.fill_diagonal(A, (-s - off_sum) / x)
    return A


def mean_age_matrix(system: CompartmentalSystem, t: float, x) -> np.ndarray:
    """A(t, x) with g(t, x, abar) = A abar + 1."""
    x = np.asarray(x, dtype=float).reshape(-1)
    _require_mass(x, t)
    B, s = system.evaluate(t)
    return age_matrix(B, s, x)
