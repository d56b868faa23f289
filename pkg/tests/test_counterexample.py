import numpy as np
import pytest

from zfcert.counterexample import (
    GAP_VERDICT,
    oshea_monotone_plant,
    oshea_slope_plant,
    run_counterexample,
    slope_identity_residual,
)
from zfcert.errors import ParameterOutOfRange
from zfcert.lti import FrequencyGrid, in_rh_inf, is_hurwitz
from zfcert.search import loop_characteristic


def test_monotone_plant_coefficients():
    g = oshea_monotone_plant(0.25, 1e-3)
    # -s^2/(s^2 + 0.5 s + 1)^2 - 1e-3 over the expanded quartic
    assert np.allclose(g.den.tolist(), [1.0, 1.0, 2.25, 1.0, 1.0])
    assert np.allclose(g.num.tolist(), [-1e-3, -1e-3, -1.00225, -1e-3, -1e-3])
    assert in_rh_inf(g)


def test_parameter_checks():
    with pytest.raises(ParameterOutOfRange):
        oshea_monotone_plant(0.5, 1e-3)
    with pytest.raises(ParameterOutOfRange):
        oshea_monotone_plant(0.25, 0.0)
    with pytest.raises(ParameterOutOfRange):
        oshea_slope_plant(0.25, 1e-3, 2.0, 1.0)
    with pytest.raises(ParameterOutOfRange):
        run_counterexample("oshea-slope", xi=0.5)


@pytest.mark.parametrize("xi", [0.1, 0.25])
def test_slope_identity(xi):
    a, b, eps = 0.5, 2.0, 1e-3
    g = oshea_slope_plant(xi, eps, a, b)
    assert in_rh_inf(g)
    assert is_hurwitz(loop_characteristic(g, a))
    assert slope_identity_residual(g, xi, eps, a, b, FrequencyGrid.default()) <= 1e-9


def test_slope_plant_with_zero_a_reduces_to_shifted_monotone():
    g = oshea_slope_plant(0.25, 1e-3, 0.0, 2.0)
    h = oshea_monotone_plant(0.25, 1e-3) + 0.5
    w = np.linspace(0.0, 5.0, 11)
    assert np.allclose(g(1j * w), h(1j * w))


def test_monotone_gap_small_ladder():
    rep = run_counterexample("oshea-monotone", max_basis=8, grid=FrequencyGrid.logspace(600))
    assert rep["in_rh_inf"] and rep["den_hurwitz_routh"]
    assert rep["clearance"] > 0
    assert all(r["optimal_margin"] <= 0 for r in rep["ladder"])
    assert rep["verdict"] == GAP_VERDICT
    assert "not proved" in rep["caveat"]


def test_unknown_name():
    with pytest.raises(ValueError):
        run_counterexample("nope")
