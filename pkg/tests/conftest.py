"""Shared fixtures: the two-pool textbook systems, scalar systems and the carbon scenario."""
import json
import os
import sys

_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, _ROOT)

import numpy as np
import pytest

from transit_ages.casa.params import CasaParams
from transit_ages.casa.scenario import build_casa_system, run_scenario
from transit_ages.core.forcing import ScalarForcing
from transit_ages.core.system import CompartmentalSystem
from transit_ages.numerics.integrators import SolverConfig

# ── Two-pool systems ─────────────────────────────────────────────────────────

RECYCLING_B = [[-1.0, 2.0], [0.5, -2.0]]
RECYCLING_S = [1.0, 0.0]
EXCHANGE_B = [[-1.0, 1.0], [1.0, -2.0]]
EXCHANGE_S = [1.0, 0.0]


@pytest.fixture
def recycling():
    return CompartmentalSystem.constant(RECYCLING_B, RECYCLING_S, name="recycling")


@pytest.fixture
def exchange():
    return CompartmentalSystem.constant(EXCHANGE_B, EXCHANGE_S, name="exchange")


@pytest.fixture
def decay():
    """x' = -x + 1."""
    return CompartmentalSystem.constant([[-1.0]], [1.0], name="decay")


@pytest.fixture
def periodic_scalar():
    """x' = -(2 + sin t) x + 1."""
    return CompartmentalSystem(
        base_matrix=[[-1.0]],
        base_input=[1.0],
        matrix_forcing=((ScalarForcing.builtin("two_plus_sin"),),),
    )


@pytest.fixture
def tight():
    return SolverConfig(rtol=1e-11, atol=1e-13)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_compliant(rng, d, density=0.6, with_input=True):
    """A constant compliant matrix with strictly negative column sums, and a positive input."""
    B = rng.uniform(0.0, 1.0, size=(d, d)) * (rng.uniform(size=(d, d)) < density)
    np.fill_diagonal(B, 0.0)
    loss = rng.uniform(0.1, 1.0, size=d)
    np.fill_diagonal(B, -(B.sum(axis=0) + loss))
    s = rng.uniform(0.1, 2.0, size=d) if with_input else np.zeros(d)
    return B, s


def write_system(path, B, s, **extra):
    data = {"dimension": len(B), "base_matrix": [list(map(float, r)) for r in B],
            "base_input": list(map(float, s))}
    data.update(extra)
    path.write_text(json.dumps(data))
    return path


@pytest.fixture
def recycling_file(tmp_path):
    return write_system(tmp_path / "recycling.json", RECYCLING_B, RECYCLING_S)


# ── Carbon scenario (computed once per session) ──────────────────────────────

@pytest.fixture(scope="session")
def casa_system():
    return build_casa_system(CasaParams())


@pytest.fixture(scope="session")
def casa_run():
    """Default parameters, 650 years, yearly output."""
    return run_scenario(CasaParams(), 650.0, SolverConfig(), dt_out=1.0)


@pytest.fixture(scope="session")
def casa_run_low_q10():
    """xi_b = 1.5: decomposition responds less to warming than input does to CO2."""
    return run_scenario(CasaParams(xi_b=1.5), 650.0, SolverConfig(), dt_out=5.0)
