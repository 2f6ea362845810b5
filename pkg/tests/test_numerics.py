"""Linear solves, Runge-Kutta integration, transition operators and the pullback solution."""
import math

import numpy as np
import pytest

from conftest import random_compliant
from transit_ages.core.errors import ArgumentError, DomainError, SingularMatrixError, StepBudgetError, StiffnessError
from transit_ages.core.forcing import ScalarForcing
from transit_ages.core.system import CompartmentalSystem
from transit_ages.core.validation import BlockStructure, certify_stability
from transit_ages.numerics import (
    RK4_FIXED,
    SolverConfig,
    equilibrium,
    integrate_ivp,
    invert,
    pullback_convergence,
    pullback_solution,
    run_batch,
    solution_gap,
    solve_linear,
    transition_operator,
    uniform_grid,
)


# ── Linear algebra ───────────────────────────────────────────────────────────

def test_solve_linear_small_example():
    np.testing.assert_allclose(solve_linear([[2.0, 1.0], [1.0, 3.0]], [3.0, 5.0]), [0.8, 1.4], rtol=1e-12)


def test_invert_matches_closed_form():
    np.testing.assert_allclose(invert([[-1.0, 2.0], [0.5, -2.0]]), [[-2.0, -2.0], [-0.5, -1.0]], rtol=1e-12)


def test_invert_round_trip(rng):
    for _ in range(50):
        B, _ = random_compliant(rng, int(rng.integers(2, 9)))
        np.testing.assert_allclose(B @ invert(B), np.eye(B.shape[0]), atol=1e-10)


def test_singular_matrix_is_reported():
    with pytest.raises(SingularMatrixError):
        solve_linear([[1.0, 1.0], [1.0, 1.0]], [1.0, 2.0])
    with pytest.raises(SingularMatrixError):
        invert(np.zeros((3, 3)))


def test_non_square_matrix_rejected():
    with pytest.raises(ArgumentError):
        solve_linear([[1.0, 2.0]], [1.0])


def test_equilibrium_of_recycling():
    np.testing.assert_allclose(equilibrium([[-1.0, 2.0], [0.5, -2.0]], [1.0, 0.0]), [2.0, 0.5], rtol=1e-12)


# ── Integration ──────────────────────────────────────────────────────────────

def test_exponential_decay(tight):
    traj = integrate_ivp(lambda t, x: -x, 0.0, [1.0], 1.0, tight)
    assert traj.final[0] == pytest.approx(math.exp(-1.0), abs=1e-10)


def test_relaxation_to_input(decay, tight):
    traj = integrate_ivp(decay.rhs, 0.0, [0.0], 2.0, tight)
    assert traj.final[0] == pytest.approx(1.0 - math.exp(-2.0), abs=1e-10)


@pytest.mark.parametrize("method", ["rk4-fixed", "rk45-adaptive"])
def test_equilibrium_is_held(recycling, method):
    traj = integrate_ivp(recycling.rhs, 0.0, [2.0, 0.5], 50.0, SolverConfig(method=method))
    np.testing.assert_allclose(traj.states, np.tile([2.0, 0.5], (len(traj), 1)), atol=1e-10)


def test_t_eval_is_returned_exactly(decay):
    grid = [0.0, 0.25, 0.5, 1.0]
    traj = integrate_ivp(decay.rhs, 0.0, [0.0], 1.0, SolverConfig(), grid)
    np.testing.assert_array_equal(traj.times, grid)
    assert traj.dense
    np.testing.assert_allclose(traj.states[:, 0], 1.0 - np.exp(-np.array(grid)), atol=1e-7)


def test_t_eval_must_be_increasing_and_inside(decay):
    with pytest.raises(ArgumentError):
        integrate_ivp(decay.rhs, 0.0, [0.0], 1.0, None, [0.5, 0.2])
    with pytest.raises(ArgumentError):
        integrate_ivp(decay.rhs, 0.0, [0.0], 1.0, None, [0.5, 2.0])


def test_backwards_horizon_rejected(decay):
    with pytest.raises(ArgumentError):
        integrate_ivp(decay.rhs, 1.0, [0.0], 0.0)


def test_zero_horizon_returns_initial_state(decay):
    traj = integrate_ivp(decay.rhs, 3.0, [0.7], 3.0)
    assert len(traj) == 1
    assert traj.final[0] == 0.7


def test_states_stay_nonnegative(rng):
    cfg = SolverConfig()
    for _ in range(20):
        d = int(rng.integers(2, 7))
        B, s = random_compliant(rng, d, with_input=bool(rng.integers(0, 2)))
        x0 = rng.uniform(0.0, 3.0, size=d) * (rng.uniform(size=d) < 0.5)
        traj = integrate_ivp(lambda t, x: B @ x + s, 0.0, x0, 20.0, cfg)
        assert traj.states.min() >= -10.0 * cfg.atol


def test_stiff_problem_hits_minimum_step():
    with pytest.raises(StiffnessError):
        integrate_ivp(lambda t, x: -1e6 * x, 0.0, [1.0], 1.0, SolverConfig(h_min=1e-4))


def test_step_budget_is_enforced(decay):
    with pytest.raises(StepBudgetError):
        integrate_ivp(decay.rhs, 0.0, [0.0], 1.0, SolverConfig(method=RK4_FIXED, max_steps=10))


def test_fixed_step_is_deterministic(periodic_scalar):
    cfg = SolverConfig(method=RK4_FIXED, h_init=0.01)
    a = integrate_ivp(periodic_scalar.rhs, 0.0, [0.3], 5.0, cfg)
    b = integrate_ivp(periodic_scalar.rhs, 0.0, [0.3], 5.0, cfg)
    np.testing.assert_array_equal(a.states, b.states)
    assert a.steps == 500


def test_fixed_steps_do_not_depend_on_output_spacing(periodic_scalar):
    cfg = SolverConfig(method=RK4_FIXED, h_init=0.01)
    free = integrate_ivp(periodic_scalar.rhs, 0.0, [0.3], 5.0, cfg)
    coarse = integrate_ivp(periodic_scalar.rhs, 0.0, [0.3], 5.0, cfg, uniform_grid(0.0, 5.0, 1.0))
    fine = integrate_ivp(periodic_scalar.rhs, 0.0, [0.3], 5.0, cfg, uniform_grid(0.0, 5.0, 0.5))
    assert free.steps == coarse.steps == fine.steps == 500
    np.testing.assert_allclose(coarse.states, fine.states[::2], rtol=1e-13)
    assert coarse.final[0] == pytest.approx(free.final[0], rel=1e-13)


def test_off_node_output_cuts_a_single_step(periodic_scalar):
    cfg = SolverConfig(method=RK4_FIXED, h_init=0.01)
    free = integrate_ivp(periodic_scalar.rhs, 0.0, [0.3], 5.0, cfg)
    cut = integrate_ivp(periodic_scalar.rhs, 0.0, [0.3], 5.0, cfg, [0.0, 1.2345, 5.0])
    assert cut.steps == 501
    assert cut.final[0] == pytest.approx(free.final[0], abs=1e-10)


def test_resolved_step_sizes():
    cfg = SolverConfig().resolved(0.0, 200.0)
    assert cfg.h_max == pytest.approx(2.0)
    assert cfg.h_init == pytest.approx(0.02)


def test_inconsistent_step_sizes_rejected():
    with pytest.raises(ValueError):
        SolverConfig(h_min=1.0, h_init=0.1)
    with pytest.raises(ValueError):
        SolverConfig(h_max=0.1, h_init=1.0)


def test_uniform_grid_ends_on_horizon():
    np.testing.assert_allclose(uniform_grid(0.0, 1.0, 0.25), [0.0, 0.25, 0.5, 0.75, 1.0])
    grid = uniform_grid(0.0, 1.0, 0.3)
    np.testing.assert_allclose(grid, [0.0, 0.3, 0.6, 0.9, 1.0])
    assert grid[-1] == 1.0
    with pytest.raises(ArgumentError):
        uniform_grid(0.0, 1.0, 0.0)


# ── Transition operator ──────────────────────────────────────────────────────

def test_transition_over_empty_interval_is_identity(recycling):
    np.testing.assert_array_equal(transition_operator(recycling, 2.0, 2.0).Phi, np.eye(2))


def test_scalar_transition(decay, tight):
    assert transition_operator(decay, 0.0, 1.0, tight).Phi[0, 0] == pytest.approx(math.exp(-1.0), abs=1e-10)


def test_transition_cocycle(tight):
    system = CompartmentalSystem(
        base_matrix=[[-1.0, 0.2], [0.3, -0.8]],
        base_input=[1.0, 0.0],
        matrix_forcing=((ScalarForcing.builtin("two_plus_sin"), ScalarForcing.constant(1.0)),
                        (ScalarForcing.constant(1.0), ScalarForcing.builtin("two_plus_cos"))),
    )
    first = transition_operator(system, 0.0, 1.0, tight).Phi
    second = transition_operator(system, 1.0, 2.5, tight).Phi
    whole = transition_operator(system, 0.0, 2.5, tight).Phi
    np.testing.assert_allclose(second @ first, whole, atol=1e-9)


def test_transition_of_constant_system_matches_expm(recycling, tight):
    import scipy.linalg

    Phi = transition_operator(recycling, 0.0, 1.5, tight).Phi
    np.testing.assert_allclose(Phi, scipy.linalg.expm(1.5 * np.array([[-1.0, 2.0], [0.5, -2.0]])), atol=1e-9)


# ── Pullback solution ────────────────────────────────────────────────────────

def test_pullback_of_autonomous_system_is_equilibrium(recycling):
    result = pullback_solution(recycling, 0.0, 60.0)
    np.testing.assert_allclose(result.value, [2.0, 0.5], atol=1e-6)
    assert result.truncation_bound is None


def test_pullback_of_periodic_input(tight):
    # x' = -x + 2 + sin t has nu(t) = 2 + (sin t - cos t) / 2
    system = CompartmentalSystem([[-1.0]], [1.0], input_forcing=(ScalarForcing.builtin("two_plus_sin"),))
    result = pullback_solution(system, 0.0, 60.0, tight)
    assert result.value[0] == pytest.approx(1.5, abs=1e-8)


def test_pullback_with_certificate_reports_bound():
    system = CompartmentalSystem.constant(np.diag([-1.0, -2.0]), [1.0, 1.0])
    cert = certify_stability(system, BlockStructure((1, 1)), [0.0])
    result = pullback_solution(system, 0.0, 30.0, certificate=cert)
    np.testing.assert_allclose(result.value, [1.0, 0.5], atol=1e-6)
    assert result.truncation_bound == pytest.approx(math.exp(-30.0))


def test_pullback_respects_domain():
    system = CompartmentalSystem.constant([[-1.0]], [1.0], tau=0.0)
    with pytest.raises(DomainError):
        pullback_solution(system, 5.0, 10.0)


def test_pullback_convergence_shrinks(recycling):
    results, changes = pullback_convergence(recycling, 0.0, [10.0, 20.0, 40.0])
    assert len(results) == 3
    assert changes[1] < changes[0]


# ── Solution gaps and batches ────────────────────────────────────────────────

def test_solution_gap_decays(recycling):
    gaps = solution_gap(recycling, 0.0, [2.0, 0.5], [5.0, 5.0], 40.0).gaps
    assert gaps[0] == pytest.approx(4.5)
    assert gaps[-1] < 1e-5 * gaps[0]


def test_batch_keeps_input_order(rng):
    systems = [CompartmentalSystem.constant(*random_compliant(rng, 3)) for _ in range(6)]
    serial = run_batch(lambda s: equilibrium(*s.evaluate(0.0)), systems, n_jobs=1)
    threaded = run_batch(lambda s: equilibrium(*s.evaluate(0.0)), systems, n_jobs=2)
    for a, b in zip(serial, threaded):
        np.testing.assert_array_equal(a, b)
    assert run_batch(abs, [-3, 1, -2], n_jobs=2) == [3, 1, 2]
