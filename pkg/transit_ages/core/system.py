"""Linear nonautonomous compartmental systems x' = B(t) x + s(t)."""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np

from transit_ages.config.settings import DEFAULT_SAMPLE_COUNT
from transit_ages.core.errors import ArgumentError, ConfigurationError, DomainError
from transit_ages.core.forcing import ONE, ScalarForcing

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeDomain:
    """The open interval (tau, inf); tau may be -inf."""

    tau: float = -math.inf

    def contains(self, t: float) -> bool:
        return t > self.tau

    def require(self, t: float) -> None:
        if not self.contains(t):
            raise DomainError(f"Time {t!r} is outside the domain ({self.tau}, inf)")

    def describe(self) -> str:
        left = "-inf" if math.isinf(self.tau) else repr(self.tau)
        return f"({left}, inf)"


@dataclass(frozen=True, eq=False)
class CompartmentalSystem:
    base_matrix: np.ndarray
    base_input: np.ndarray
    matrix_forcing: Tuple[Tuple[ScalarForcing, ...], ...] = ()
    input_forcing: Tuple[ScalarForcing, ...] = ()
    domain: TimeDomain = field(default_factory=TimeDomain)
    name: Optional[str] = None

    def __post_init__(self):
        B = np.array(self.base_matrix, dtype=float)
        s = np.array(self.base_input, dtype=float).reshape(-1)
        if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape[0] == 0:
            raise ConfigurationError(f"base_matrix must be a non-empty square matrix, got shape {B.shape}")
        d = B.shape[0]
        if s.shape != (d,):
            raise ConfigurationError(f"base_input must have {d} entries, got {s.size}")
        if not (np.all(np.isfinite(B)) and np.all(np.isfinite(s))):
            raise ConfigurationError("base_matrix and base_input must be finite")
        B.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "base_matrix", B)
        object.__setattr__(self, "base_input", s)

        mf = self.matrix_forcing or tuple(tuple(ONE for _ in range(d)) for _ in range(d))
        mf = tuple(tuple(row) for row in mf)
        if len(mf) != d or any(len(row) != d for row in mf):
            raise ConfigurationError(f"matrix_forcing must be {d}x{d}")
        sf = tuple(self.input_forcing) or tuple(ONE for _ in range(d))
        if len(sf) != d:
            raise ConfigurationError(f"input_forcing must have {d} entries")
        object.__setattr__(self, "matrix_forcing", mf)
        object.__setattr__(self, "input_forcing", sf)

    @property
    def dimension(self) -> int:
        return self.base_matrix.shape[0]

    @classmethod
    def constant(cls, B, s, tau: float = -math.inf, name: Optional[str] = None) -> "CompartmentalSystem":
        return cls(base_matrix=B, base_input=s, domain=TimeDomain(tau), name=name)

    # ------------------------------------------------------------
    # Forcing bookkeeping: every distinct forcing is evaluated once per t
    # ------------------------------------------------------------
    @cached_property
    def _forcing_index(self):
        unique = []
        lookup = {}

        def code(f):
            if f not in lookup:
                lookup[f] = len(unique)
                unique.append(f)
            return lookup[f]

        d = self.dimension
        m_codes = np.array([[code(self.matrix_forcing[i][j]) for j in range(d)] for i in range(d)], dtype=int)
        s_codes = np.array([code(f) for f in self.input_forcing], dtype=int)
        return tuple(unique), m_codes, s_codes

    @cached_property
    def is_autonomous(self) -> bool:
        unique, _, _ = self._forcing_index
        return all(f.is_constant for f in unique)

    def _forcing_values(self, t: float) -> np.ndarray:
        unique, _, _ = self._forcing_index
        return np.array([f(t) for f in unique], dtype=float)

    # ------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------
    def evaluate(self, t: float) -> Tuple[np.ndarray, np.ndarray]:
        """Return (B(t), s(t)) as entrywise products of amplitudes and forcings."""
        self.domain.require(t)
        _, m_codes, s_codes = self._forcing_index
        vals = self._forcing_values(t)
        return self.base_matrix * vals[m_codes], self.base_input * vals[s_codes]

    def matrix_at(self, t: float) -> np.ndarray:
        return self.evaluate(t)[0]

    def input_at(self, t: float) -> np.ndarray:
        return self.evaluate(t)[1]

    def frozen(self, t: float) -> "CompartmentalSystem":
        """The autonomous system with B and s fixed at their values at t."""
        B, s = self.evaluate(t)
        return CompartmentalSystem.constant(B, s, tau=-math.inf, name=f"{self.name or 'system'}@{t}")

    def rhs(self, t: float, x: np.ndarray) -> np.ndarray:
        B, s = self.evaluate(t)
        return B @ x + s


def evaluate(system: CompartmentalSystem, t: float) -> Tuple[np.ndarray, np.ndarray]:
    return system.evaluate(t)


def default_sample_times(t0: float, t1: float, count: int = DEFAULT_SAMPLE_COUNT) -> np.ndarray:
    if count < 1:
        raise ArgumentError("Sample count must be positive")
    if t1 < t0:
        raise ArgumentError(f"Sample horizon end {t1} precedes start {t0}")
    if count == 1 or t1 == t0:
        return np.array([float(t0)])
    return np.linspace(t0, t1, count)


def require_samples(system: CompartmentalSystem, sample_times: Sequence[float]) -> np.ndarray:
    times = np.asarray(list(sample_times), dtype=float).reshape(-1)
    if times.size == 0:
        raise ArgumentError("At least one sample time is required")
    for t in times:
        system.domain.require(float(t))
    return times
