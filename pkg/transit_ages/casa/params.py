"""Parameters of the nine-pool terrestrial carbon model (plant, litter, soil)."""
from typing import Dict, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

POOL_NAMES = (
    "leaves", "roots", "wood",
    "metabolic_litter", "structural_litter", "woody_litter",
    "microbial_soil", "slow_soil", "passive_soil",
)
POOL_GROUPS = {"plant": (0, 1, 2), "litter": (3, 4, 5), "soil": (6, 7, 8)}

# 1/yr; key "bij" is the rate from pool j into pool i (1-based)
DEFAULT_RATES: Dict[str, float] = {
    "b11": -0.67, "b22": -0.2, "b33": -0.04,
    "b41": 0.5092, "b42": 0.0260, "b44": -2.5,
    "b51": 0.1608, "b52": 0.1740, "b55": -0.4,
    "b63": 0.04, "b66": -0.25,
    "b74": 1.1250, "b75": 0.1530, "b76": 0.06, "b77": -0.7, "b78": 0.0103, "b79": 0.0002,
    "b85": 0.042, "b86": 0.07, "b87": 0.3525, "b88": -0.023,
    "b97": 0.0045, "b98": 0.0001, "b99": -0.0004,
}

REFERENCE_CO2 = 285.0
CO2_CEILING = 1715.0
CO2_GROWTH = 0.0305


def rate_index(key: str) -> Tuple[int, int]:
    """'b74' -> (6, 3), zero-based."""
    if len(key) != 3 or key[0] != "b" or not key[1:].isdigit() or "0" in key[1:]:
        raise ValueError(f"Rate key '{key}' is not of the form b<i><j> with 1 <= i, j <= 9")
    return int(key[1]) - 1, int(key[2]) - 1


# ============================================================
# Schema
# ============================================================
class CasaParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    b: Dict[str, float] = Field(default_factory=lambda: dict(DEFAULT_RATES))
    sigma: float = Field(4.5, ge=0)
    T_s0: float = 15.0
    alpha: float = Field(0.5, gt=0)
    f: Tuple[float, float, float] = (0.33, 0.33, 0.33)
    rho: float = Field(0.65, gt=0)
    xi_b: float = Field(2.0, gt=0)
    s0: float = Field(120.0, gt=0)
    co2_model: Literal["verbatim", "logistic"] = "logistic"
    b89: float = Field(0.0, ge=0)

    @field_validator("b")
    @classmethod
    def _check_rates(cls, rates):
        merged = dict(DEFAULT_RATES)
        merged.update(rates)
        for key, value in merged.items():
            i, j = rate_index(key)
            if i == j and not value < 0:
                raise ValueError(f"{key} must be negative, got {value}")
            if i != j and value < 0:
                raise ValueError(f"{key} must be nonnegative, got {value}")
        return merged

    @field_validator("f")
    @classmethod
    def _check_fractions(cls, f):
        if any(v < 0 for v in f) or sum(f) > 1.0 + 1e-12:
            raise ValueError(f"allocation fractions must be nonnegative and sum to at most 1, got {f}")
        return f

    @model_validator(mode="after")
    def _check_b89(self):
        if "b89" in self.b:
            raise ValueError("b89 is set through its own field, not the rate table")
        return self

    def with_overrides(self, **overrides) -> "CasaParams":
        """Validated copy; a partial ``b`` mapping updates individual rates."""
        data = self.model_dump()
        if "b" in overrides:
            rates = dict(self.b)
            rates.update(overrides.pop("b") or {})
            data["b"] = rates
        data.update(overrides)
        return CasaParams.model_validate(data)

    def forcing_options(self) -> Dict[str, object]:
        """The parameters the CO2 -> temperature -> forcing chain depends on."""
        return {"sigma": self.sigma, "T_s0": self.T_s0, "xi_b": self.xi_b, "rho": self.rho,
                "co2_model": self.co2_model}
