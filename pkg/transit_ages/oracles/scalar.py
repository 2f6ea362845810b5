"""Closed-form reference solutions: scalar equations and feedback-free two-pool cascades."""
import math
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from transit_ages.config.settings import QUAD_LIMIT, QUAD_TOL
from transit_ages.core.errors import ArgumentError, QuadratureError

ScalarFn = Callable[[float], float]


def integrate(fn: ScalarFn, a: float, b: float, breakpoints: Optional[Sequence[float]] = None) -> float:
    """Adaptive quadrature of fn over [a, b]; a > b gives the negated integral."""
    if a == b:
        return 0.0
    lo, hi = min(a, b), max(a, b)
    points = None
    if breakpoints:
        points = [p for p in breakpoints if lo < p < hi] or None
    res = quad(lambda u: float(fn(u)), a, b, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=QUAD_LIMIT,
               points=points, full_output=1)
    # a fourth element is only returned on a QUADPACK warning
    if len(res) > 3:
        raise QuadratureError(f"Quadrature over [{a:.6g}, {b:.6g}] did not converge: {res[3]}")
    value = float(res[0])
    if not math.isfinite(value):
        raise QuadratureError(f"Quadrature over [{a:.6g}, {b:.6g}] returned {value}")
    return value


def _exp_integral(b: ScalarFn, antiderivative: Optional[ScalarFn], breakpoints):
    """u, t -> exp(int_u^t b)."""
    if antiderivative is not None:
        return lambda u, t: math.exp(antiderivative(t) - antiderivative(u))
    return lambda u, t: math.exp(integrate(b, u, t, breakpoints))


def scalar_solution(b: ScalarFn, s: ScalarFn, t0: float, x0: float, t: float,
                    antiderivative: Optional[ScalarFn] = None,
                    breakpoints: Optional[Sequence[float]] = None) -> float:
    """x(t) = x0 exp(int_t0^t b) + int_t0^t exp(int_u^t b) s(u) du.

    ``antiderivative`` (any primitive of b) replaces the inner quadrature;
    ``breakpoints`` lists kinks of piecewise-linear coefficients.
    """
    if t < t0:
        raise ArgumentError(f"Oracle time {t} precedes start {t0}")
    flow = _exp_integral(b, antiderivative, breakpoints)
    decay = float(x0) * flow(t0, t)
    forced = integrate(lambda u: flow(u, t) * s(u), t0, t, breakpoints)
    return decay + forced


def cascade_solution(b11: ScalarFn, b21: ScalarFn, b22: ScalarFn, s2: ScalarFn, t0: float, x0,
                     t: float, breakpoints: Optional[Sequence[float]] = None) -> np.ndarray:
    """Two pools, 1 -> 2 without feedback and with input only into pool 2.

    Pool 1 decays on its own; pool 2 is the scalar variation-of-constants
    solution with inhomogeneity b21(u) x1(u) + s2(u).
    """
    if t < t0:
        raise ArgumentError(f"Oracle time {t} precedes start {t0}")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape != (2,):
        raise ArgumentError("cascade_solution needs a 2-vector initial state")

    def x1(u):
        return x0[0] * math.exp(integrate(b11, t0, u, breakpoints))

    x2 = scalar_solution(b22, lambda u: b21(u) * x1(u) + s2(u), t0, x0[1], t, breakpoints=breakpoints)
    return np.array([x1(t), x2])
