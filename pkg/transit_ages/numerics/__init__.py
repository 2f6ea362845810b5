from transit_ages.numerics.batch import run_batch
from transit_ages.numerics.integrators import (
    RK4_FIXED,
    RK45_ADAPTIVE,
    SolverConfig,
    Trajectory,
    integrate_ivp,
    uniform_grid,
)
from transit_ages.numerics.linalg import equilibrium, invert, solve_linear
from transit_ages.numerics.transition import (
    GapSeries,
    PullbackResult,
    TransitionMatrix,
    pullback_convergence,
    pullback_solution,
    solution_gap,
    transition_operator,
)
