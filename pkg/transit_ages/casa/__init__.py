from transit_ages.casa.forcing import (
    beta_sens,
    co2,
    forcing_table,
    gamma_star,
    input_vector,
    temperature,
    xi_scale,
)
from transit_ages.casa.params import DEFAULT_RATES, POOL_GROUPS, POOL_NAMES, CasaParams
from transit_ages.casa.scenario import ScenarioResult, base_rates, build_casa_system, pool_breakdown, run_scenario
