import os

from dotenv import load_dotenv

load_dotenv()


def _env_float(name, default):
    return float(os.getenv(f"TRANSIT_AGES_{name}", default))


def _env_int(name, default):
    return int(os.getenv(f"TRANSIT_AGES_{name}", default))


# Pool masses below this make the mean-age field undefined
EPS_MASS_FLOOR = _env_float("EPS_MASS_FLOOR", 1e-12)

DEFAULT_SAMPLE_COUNT = _env_int("SAMPLE_COUNT", 512)
DELTA_GRANT_FLOOR = _env_float("DELTA_GRANT_FLOOR", 1e-12)

DEFAULT_METHOD = os.getenv("TRANSIT_AGES_METHOD", "rk45-adaptive")
DEFAULT_RTOL = _env_float("RTOL", 1e-8)
DEFAULT_ATOL = _env_float("ATOL", 1e-10)
DEFAULT_H_MIN = _env_float("H_MIN", 1e-12)
DEFAULT_MAX_STEPS = _env_int("MAX_STEPS", 2_000_000)
# fraction of the horizon used as h_max when none is given
DEFAULT_H_MAX_FRACTION = _env_float("H_MAX_FRACTION", 0.01)

DEFAULT_PULLBACK_HORIZON = _env_float("PULLBACK_HORIZON", 200.0)

SINGULAR_PIVOT_RTOL = _env_float("SINGULAR_PIVOT_RTOL", 1e-13)
SOLVE_RESIDUAL_RTOL = _env_float("SOLVE_RESIDUAL_RTOL", 1e-10)
QUAD_TOL = _env_float("QUAD_TOL", 1e-10)
QUAD_LIMIT = _env_int("QUAD_LIMIT", 200)

# uniform age grid spacing as a fraction of the horizon
DEFAULT_AGE_STEP_FRACTION = _env_float("AGE_STEP_FRACTION", 1e-3)

CSV_SIGNIFICANT_DIGITS = 17
CSV_SCHEMA_VERSION = "1"

BATCH_JOBS = _env_int("BATCH_JOBS", 1)
LOG_LEVEL = os.getenv("TRANSIT_AGES_LOG_LEVEL", "WARNING")
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
