from transit_ages.oracles.density import (
    AgeDensityGrid,
    age_density_1d,
    age_density_grid,
    default_age_grid,
    density_moments,
)
from transit_ages.oracles.scalar import cascade_solution, integrate, scalar_solution
