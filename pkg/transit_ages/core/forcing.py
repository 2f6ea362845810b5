"""Scalar forcings: the only carrier of time dependence in a compartmental system.

A forcing is a dimensionless multiplier applied entrywise to a base amplitude.
Three kinds exist: a constant, a piecewise-linear table clamped at its ends, and
a named builtin looked up in a process-wide registry.
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from transit_ages.core.errors import ConfigurationError

CONSTANT = "constant"
TABLE = "table"
BUILTIN = "builtin"

# name -> factory(**options) -> (t -> float)
_BUILTINS: Dict[str, Callable[..., Callable[[float], float]]] = {}


def register_builtin(name: str, fn: Callable, factory: bool = False) -> None:
    """Register a builtin forcing.

    With ``factory=False`` ``fn`` is the forcing itself (t -> value). With
    ``factory=True`` it is called once per distinct option set and must return
    the forcing.
    """
    _BUILTINS[name] = fn if factory else (lambda _fn=fn: _fn)
    _resolve.cache_clear()


def registered_builtins():
    return sorted(_BUILTINS)


@lru_cache(maxsize=None)
def _resolve(name: str, options: Tuple[Tuple[str, object], ...]) -> Callable[[float], float]:
    factory = _BUILTINS.get(name)
    if factory is None:
        raise ConfigurationError(f"Unregistered builtin forcing '{name}'")
    return factory(**dict(options))


@dataclass(frozen=True)
class ScalarForcing:
    kind: str = CONSTANT
    value: float = 1.0
    times: Tuple[float, ...] = ()
    values: Tuple[float, ...] = ()
    name: Optional[str] = None
    options: Tuple[Tuple[str, object], ...] = ()

    def __post_init__(self):
        if self.kind == TABLE:
            if len(self.times) == 0 or len(self.times) != len(self.values):
                raise ConfigurationError("Forcing table needs matching, non-empty 't' and 'v' arrays")
            if any(b <= a for a, b in zip(self.times, self.times[1:])):
                raise ConfigurationError("Forcing table times must be strictly increasing")
        elif self.kind == BUILTIN:
            if not self.name:
                raise ConfigurationError("Builtin forcing needs a name")
        elif self.kind != CONSTANT:
            raise ConfigurationError(f"Unknown forcing kind '{self.kind}'")

    # ------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------
    @classmethod
    def constant(cls, value: float = 1.0) -> "ScalarForcing":
        return cls(kind=CONSTANT, value=float(value))

    @classmethod
    def table(cls, times, values) -> "ScalarForcing":
        return cls(kind=TABLE, times=tuple(float(t) for t in times), values=tuple(float(v) for v in values))

    @classmethod
    def builtin(cls, name: str, **options) -> "ScalarForcing":
        return cls(kind=BUILTIN, name=name, options=tuple(sorted(options.items())))

    @property
    def is_constant(self) -> bool:
        return self.kind == CONSTANT

    def __call__(self, t: float) -> float:
        if self.kind == CONSTANT:
            return self.value
        if self.kind == TABLE:
            # np.interp clamps to the endpoint values outside the table
            return float(np.interp(t, self.times, self.values))
        return float(_resolve(self.name, self.options)(t))

    def to_json(self):
        if self.kind == CONSTANT:
            return None if self.value == 1.0 else {"constant": self.value}
        if self.kind == TABLE:
            return {"table": {"t": list(self.times), "v": list(self.values)}}
        out = {"builtin": self.name}
        if self.options:
            out["options"] = dict(self.options)
        return out


ONE = ScalarForcing.constant(1.0)


# ------------------------------------------------------------
# Generic builtins
# ------------------------------------------------------------
register_builtin("one", lambda t: 1.0)
register_builtin("two_plus_sin", lambda t: 2.0 + math.sin(t))
register_builtin("two_plus_cos", lambda t: 2.0 + math.cos(t))
