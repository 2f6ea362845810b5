from transit_ages.ages.mean_age import AgeState, age_field, age_matrix, mean_age_matrix, mean_age_rhs
from transit_ages.ages.simulation import AgeTimeSeries, csv_columns, simulate_with_ages
from transit_ages.ages.transit import (
    AutonomousSummary,
    autonomous_summary,
    equilibrium_mean_ages,
    frozen_summary,
    mean_age_at,
    per_pool_recursion_residual,
    transfer_probabilities,
    transit_time_at,
)
