"""The nine-pool carbon model as a CompartmentalSystem, and the spin-up-then-run scenario."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from transit_ages.ages.simulation import AgeTimeSeries, simulate_with_ages
from transit_ages.ages.transit import equilibrium_mean_ages
from transit_ages.casa.forcing import fertilization_forcing, forcing_table, xi_forcing
from transit_ages.casa.params import POOL_GROUPS, POOL_NAMES, CasaParams, rate_index
from transit_ages.config.settings import DEFAULT_SAMPLE_COUNT
from transit_ages.core.errors import ArgumentError, ConfigurationError, NonPositiveEquilibriumError, ValidationFailure
from transit_ages.core.forcing import ONE
from transit_ages.core.system import CompartmentalSystem, default_sample_times
from transit_ages.core.validation import check_compartmental
from transit_ages.numerics.integrators import SolverConfig, uniform_grid
from transit_ages.numerics.linalg import equilibrium

log = logging.getLogger(__name__)

# compliance of a built system is checked over the standard scenario horizon
CHECK_HORIZON = 650.0
DEFAULT_DT_OUT = 1.0

# rows 4-6: only the loss rate is temperature dependent; rows 7-9: every soil entry
XI_DIAGONAL = (3, 4, 5)
XI_ROWS = (6, 7, 8)


def base_rates(params: CasaParams) -> np.ndarray:
    B = np.zeros((9, 9))
    for key, value in params.b.items():
        B[rate_index(key)] = value
    B[7, 8] = params.b89
    return B


def build_casa_system(params: Optional[CasaParams] = None) -> CompartmentalSystem:
    params = params or CasaParams()
    xi = xi_forcing(params)
    forcing = [[ONE] * 9 for _ in range(9)]
    for i in XI_DIAGONAL:
        forcing[i][i] = xi
    for i in XI_ROWS:
        for j in range(3, 9):
            forcing[i][j] = xi

    base_input = np.zeros(9)
    base_input[:3] = np.asarray(params.f) * params.alpha * params.s0
    fert = fertilization_forcing(params)
    input_forcing = (fert, fert, fert) + (ONE,) * 6

    system = CompartmentalSystem(
        base_matrix=base_rates(params),
        base_input=base_input,
        matrix_forcing=tuple(tuple(row) for row in forcing),
        input_forcing=input_forcing,
        name="casa",
    )
    report = check_compartmental(system, default_sample_times(0.0, CHECK_HORIZON, DEFAULT_SAMPLE_COUNT))
    if not report.compliant:
        raise ValidationFailure("CASA parameters give a non-compartmental system:\n" + report.describe(), report)
    return system


# ============================================================
# Scenario
# ============================================================
@dataclass(frozen=True, eq=False)
class ScenarioResult:
    params: CasaParams
    series: AgeTimeSeries
    forcing: pd.DataFrame
    breakdown: pd.DataFrame

    def to_frame(self) -> pd.DataFrame:
        return self.series.to_frame()


def pool_breakdown(series: AgeTimeSeries) -> pd.DataFrame:
    """Change of every pool, and of the plant/litter/soil groups, since the first sample."""
    delta = series.x - series.x[0]
    data = {"t": series.times}
    for i, name in enumerate(POOL_NAMES):
        data[name] = delta[:, i]
    for group, idx in POOL_GROUPS.items():
        data[group] = delta[:, list(idx)].sum(axis=1)
    data["total"] = delta.sum(axis=1)
    return pd.DataFrame(data)


def run_scenario(params: Optional[CasaParams] = None, t_end: float = CHECK_HORIZON,
                 cfg: Optional[SolverConfig] = None, dt_out: float = DEFAULT_DT_OUT) -> ScenarioResult:
    """Spin up to the equilibrium of the t = 0 system, then run the forced system to t_end."""
    params = params or CasaParams()
    if not t_end > 0:
        raise ArgumentError(f"t_end must be positive, got {t_end}")
    system = build_casa_system(params)

    B0, s0 = system.evaluate(0.0)
    x0 = equilibrium(B0, s0)
    if np.any(x0 <= 0.0):
        raise ConfigurationError(
            f"Spin-up equilibrium {np.array2string(x0, precision=6)} has non-positive pools")
    try:
        abar0 = equilibrium_mean_ages(B0, s0)
    except NonPositiveEquilibriumError as exc:
        raise ConfigurationError(exc.detail) from exc
    log.info("spin-up: total carbon %.6g PgC, mean age %.6g yr",
             float(x0.sum()), float(abar0 @ x0) / float(x0.sum()))

    times = uniform_grid(0.0, t_end, dt_out)
    series = simulate_with_ages(system, 0.0, x0, t_end, abar0, cfg, times)
    return ScenarioResult(params, series, forcing_table(params, times), pool_breakdown(series))
