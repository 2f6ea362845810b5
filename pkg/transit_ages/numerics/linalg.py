"""Dense LU-based solves for small systems (up to a few hundred pools)."""
import logging

import numpy as np
import scipy.linalg

from transit_ages.config.settings import SINGULAR_PIVOT_RTOL, SOLVE_RESIDUAL_RTOL
from transit_ages.core.errors import ArgumentError, SingularMatrixError

log = logging.getLogger(__name__)


def _factor(A: np.ndarray):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ArgumentError(f"Expected a square matrix, got shape {A.shape}")
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    if scale == 0.0:
        raise SingularMatrixError("Matrix is zero")
    lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    pivot = float(np.min(np.abs(np.diag(lu))))
    if pivot < SINGULAR_PIVOT_RTOL * scale:
        raise SingularMatrixError(f"Matrix is numerically singular (pivot {pivot:.3g}, scale {scale:.3g})")
    return A, lu, piv


def _check_residual(A, x, b):
    residual = float(np.max(np.abs(A @ x - b)))
    bound = SOLVE_RESIDUAL_RTOL * (1.0 + float(np.max(np.abs(b))))
    if residual > bound * max(1.0, float(np.max(np.abs(x)))):
        raise SingularMatrixError(f"Solve residual {residual:.3g} exceeds {bound:.3g}; matrix is ill-conditioned")


def solve_linear(A, b) -> np.ndarray:
    """Solve A x = b with partial pivoting."""
    A, lu, piv = _factor(A)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != A.shape[0]:
        raise ArgumentError(f"Right-hand side has {b.shape[0]} rows, matrix has {A.shape[0]}")
    x = scipy.linalg.lu_solve((lu, piv), b)
    _check_residual(A, x, b)
    return x


def invert(A) -> np.ndarray:
    A, lu, piv = _factor(A)
    eye = np.eye(A.shape[0])
    inv = scipy.linalg.lu_solve((lu, piv), eye)
    _check_residual(A, inv, eye)
    return inv


def equilibrium(B, s) -> np.ndarray:
    """x* = -B^{-1} s."""
    x = -solve_linear(B, np.asarray(s, dtype=float))
    if np.any(x <= 0.0):
        log.warning("equilibrium has non-positive components: %s", np.array2string(x, precision=6))
    return x
