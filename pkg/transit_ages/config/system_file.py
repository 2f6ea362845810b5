"""System-definition JSON files -> CompartmentalSystem."""
import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from transit_ages.core.errors import ConfigurationError
from transit_ages.core.forcing import ONE, ScalarForcing, registered_builtins
from transit_ages.core.system import CompartmentalSystem, TimeDomain

log = logging.getLogger(__name__)


# ============================================================
# Schemas
# ============================================================
class TableSpec(BaseModel):
    t: List[float]
    v: List[float]


class ForcingSpec(BaseModel):
    """One cell of a forcing array; exactly one kind is given. ``null`` cells mean constant 1."""

    model_config = ConfigDict(extra="forbid")

    constant: Optional[float] = None
    table: Optional[TableSpec] = None
    builtin: Optional[str] = None
    options: Dict[str, float | str] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _one_kind(self):
        given = [k for k in ("constant", "table", "builtin") if getattr(self, k) is not None]
        if len(given) != 1:
            raise ValueError(f"a forcing needs exactly one of constant/table/builtin, got {given or 'none'}")
        if self.options and self.builtin is None:
            raise ValueError("options are only allowed on builtin forcings")
        return self

    def to_forcing(self) -> ScalarForcing:
        if self.constant is not None:
            return ScalarForcing.constant(self.constant)
        if self.table is not None:
            return ScalarForcing.table(self.table.t, self.table.v)
        return ScalarForcing.builtin(self.builtin, **self.options)


class SystemFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dimension: Optional[int] = Field(None, gt=0)
    base_matrix: Optional[List[List[float]]] = None
    matrix_forcing: Optional[List[List[Optional[ForcingSpec]]]] = None
    base_input: Optional[List[float]] = None
    input_forcing: Optional[List[Optional[ForcingSpec]]] = None
    t_min: Optional[float] = None
    name: Optional[str] = None
    scenario: Optional[Literal["casa"]] = None
    casa_overrides: Optional[Dict[str, object]] = None

    @property
    def is_casa(self) -> bool:
        return self.scenario == "casa" or self.casa_overrides is not None

    @model_validator(mode="after")
    def _check_shapes(self):
        if self.is_casa:
            return self
        if self.base_matrix is None or self.base_input is None:
            raise ValueError("base_matrix and base_input are required unless scenario is 'casa'")
        d = len(self.base_matrix)
        if self.dimension is not None and self.dimension != d:
            raise ValueError(f"dimension {self.dimension} does not match base_matrix with {d} rows")
        if any(len(row) != d for row in self.base_matrix):
            raise ValueError("base_matrix must be square")
        if len(self.base_input) != d:
            raise ValueError(f"base_input must have {d} entries")
        if self.matrix_forcing is not None and (
                len(self.matrix_forcing) != d or any(len(row) != d for row in self.matrix_forcing)):
            raise ValueError(f"matrix_forcing must be {d}x{d}")
        if self.input_forcing is not None and len(self.input_forcing) != d:
            raise ValueError(f"input_forcing must have {d} entries")
        return self


def _cell(spec: Optional[ForcingSpec]) -> ScalarForcing:
    return ONE if spec is None else spec.to_forcing()


# ============================================================
# Loader
# ============================================================
class SystemFileLoader:

    def __init__(self, path):
        self.path = Path(path)
        self.raw = self._load_raw()
        try:
            self.spec = SystemFile.model_validate(self.raw)
        except ValidationError as exc:
            raise ConfigurationError(f"Invalid system file {self.path}: {exc}") from exc

    def _load_raw(self) -> dict:
        if not self.path.exists():
            raise ConfigurationError(f"System file {self.path} does not exist")
        try:
            with open(self.path, "r") as f:
                raw = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"System file {self.path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigurationError(f"System file {self.path} must hold a JSON object")

        if raw.get("scenario") == "casa" or "casa_overrides" in raw:
            return raw
        d = len(raw.get("base_matrix") or [])
        raw.setdefault("matrix_forcing", [[None] * d for _ in range(d)])
        raw.setdefault("input_forcing", [None] * d)
        raw.setdefault("t_min", None)
        raw.setdefault("name", self.path.stem)
        return raw

    def is_casa(self) -> bool:
        return self.spec.is_casa

    def casa_params(self):
        from transit_ages.casa.params import CasaParams

        try:
            return CasaParams().with_overrides(**(self.spec.casa_overrides or {}))
        except (ValidationError, TypeError) as exc:
            raise ConfigurationError(f"Invalid casa_overrides in {self.path}: {exc}") from exc

    def time_domain(self) -> TimeDomain:
        tau = self.spec.t_min
        return TimeDomain(-math.inf if tau is None else tau)

    def build(self) -> CompartmentalSystem:
        # registers the casa.* builtins, which explicit systems may also use
        import transit_ages.casa.forcing  # noqa: F401

        if self.is_casa():
            from transit_ages.casa.scenario import build_casa_system

            log.info("%s selects the CASA scenario", self.path)
            return build_casa_system(self.casa_params())
        spec = self.spec
        cells = [c for row in spec.matrix_forcing for c in row] + list(spec.input_forcing)
        known = set(registered_builtins())
        for c in cells:
            if c is not None and c.builtin is not None and c.builtin not in known:
                raise ConfigurationError(f"Unregistered builtin forcing '{c.builtin}' in {self.path}")
        return CompartmentalSystem(
            base_matrix=spec.base_matrix,
            base_input=spec.base_input,
            matrix_forcing=tuple(tuple(_cell(c) for c in row) for row in spec.matrix_forcing),
            input_forcing=tuple(_cell(c) for c in spec.input_forcing),
            domain=self.time_domain(),
            name=spec.name,
        )


def load_system(path) -> CompartmentalSystem:
    return SystemFileLoader(path).build()


def system_to_json(system: CompartmentalSystem) -> dict:
    """Inverse of the loader for systems whose forcings are all serializable."""
    d = system.dimension
    return {
        "dimension": d,
        "base_matrix": system.base_matrix.tolist(),
        "matrix_forcing": [[f.to_json() for f in row] for row in system.matrix_forcing],
        "base_input": system.base_input.tolist(),
        "input_forcing": [f.to_json() for f in system.input_forcing],
        "t_min": None if math.isinf(system.domain.tau) else system.domain.tau,
    }
