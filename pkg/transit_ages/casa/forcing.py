"""The CO2 -> temperature -> (input, decomposition) forcing chain."""
import math

import numpy as np
import pandas as pd

from transit_ages.casa.params import CO2_CEILING, CO2_GROWTH, REFERENCE_CO2, CasaParams
from transit_ages.core.errors import ArgumentError, NumericalError
from transit_ages.core.forcing import ScalarForcing, register_builtin

XI_FORCING = "casa.xi"
FERTILIZATION_FORCING = "casa.fertilization"

POLE_RTOL = 1e-9


def _co2(t: float, co2_model: str) -> float:
    # concentrations before 1850 are held at their 1850 value
    z = CO2_GROWTH * max(float(t), 0.0)
    if z > 700.0:
        # both forms have reached the ceiling to double precision
        return CO2_CEILING
    e = math.exp(z)
    if co2_model == "verbatim":
        return CO2_CEILING * math.exp(z / (CO2_CEILING + e - 1.0))
    return REFERENCE_CO2 * CO2_CEILING * e / (CO2_CEILING + REFERENCE_CO2 * (e - 1.0))


def co2(params: CasaParams, t: float) -> float:
    """Atmospheric CO2 (ppm), t in years since 1850."""
    return _co2(t, params.co2_model)


def _temperature(x_a: float, sigma: float, T_s0: float) -> float:
    if not x_a > 0:
        raise ArgumentError(f"CO2 concentration must be positive, got {x_a}")
    return T_s0 + sigma / math.log(2.0) * math.log(x_a / REFERENCE_CO2)


def temperature(params: CasaParams, x_a: float) -> float:
    """Mean land surface temperature (deg C)."""
    return _temperature(x_a, params.sigma, params.T_s0)


def gamma_star(T: float) -> float:
    """CO2 compensation point (ppm)."""
    dT = T - 25.0
    return 42.7 + 1.68 * dT + 0.012 * dT * dT


def _beta(x_a: float, T: float, rho: float) -> float:
    g = gamma_star(T)
    c = rho * x_a
    den = (c - g) * (c + 2.0 * g)
    if abs(den) < POLE_RTOL * max(c * c, g * g, 1.0):
        raise NumericalError(f"Input sensitivity has a pole at x_a={x_a:.6g}, T={T:.6g} (rho x_a = {c:.6g})")
    return 3.0 * c * g / den


def beta_sens(params: CasaParams, x_a: float, T: float) -> float:
    """Sensitivity of carbon input to CO2 and temperature."""
    return _beta(x_a, T, params.rho)


def _xi(T: float, xi_b: float) -> float:
    return xi_b ** (0.1 * T - 2.0)


def xi_scale(params: CasaParams, T: float) -> float:
    """Decomposition-rate scaling, exactly 1 at 20 deg C."""
    return _xi(T, params.xi_b)


def _fertilization(x_a: float, T: float, rho: float) -> float:
    return 1.0 + _beta(x_a, T, rho) * math.log(x_a / REFERENCE_CO2)


def input_vector(params: CasaParams, t: float) -> np.ndarray:
    """s(t) (PgC/yr); only the three plant pools receive input."""
    x_a = co2(params, t)
    T = temperature(params, x_a)
    s = np.zeros(9)
    s[:3] = np.asarray(params.f) * params.alpha * params.s0 * _fertilization(x_a, T, params.rho)
    return s


# ============================================================
# Builtin forcings keyed on the chain parameters
# ============================================================
def _xi_factory(sigma, T_s0, xi_b, co2_model, **_):
    def xi_at(t):
        return _xi(_temperature(_co2(t, co2_model), sigma, T_s0), xi_b)

    return xi_at


def _fertilization_factory(sigma, T_s0, rho, co2_model, **_):
    def fertilization_at(t):
        x_a = _co2(t, co2_model)
        return _fertilization(x_a, _temperature(x_a, sigma, T_s0), rho)

    return fertilization_at


register_builtin(XI_FORCING, _xi_factory, factory=True)
register_builtin(FERTILIZATION_FORCING, _fertilization_factory, factory=True)


def xi_forcing(params: CasaParams) -> ScalarForcing:
    return ScalarForcing.builtin(XI_FORCING, **params.forcing_options())


def fertilization_forcing(params: CasaParams) -> ScalarForcing:
    return ScalarForcing.builtin(FERTILIZATION_FORCING, **params.forcing_options())


def forcing_table(params: CasaParams, times) -> pd.DataFrame:
    """CO2, temperature, decomposition scaling and total input at each time."""
    rows = []
    for t in np.asarray(list(times), dtype=float):
        x_a = co2(params, t)
        T = temperature(params, x_a)
        rows.append({"t": t, "x_a": x_a, "T_s": T, "xi": xi_scale(params, T),
                     "total_input": float(input_vector(params, t).sum())})
    return pd.DataFrame(rows, columns=["t", "x_a", "T_s", "xi", "total_input"])
