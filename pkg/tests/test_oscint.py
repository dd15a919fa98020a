"""Oscillatory surface integrals against Bessel oracles; slope fits."""

import numpy as np
import pytest
from scipy.special import j0

from homolab.fields import cosine_field, sine_field, PeriodicField
from homolab.oscint import (
    EXACT_SLOPE,
    OscillationBudgetError,
    OscillatorySeries,
    boundary_average,
    fit_decay_slope,
    m_epsilon,
    oscillatory_integral,
    surface_integral,
    weyl_defect_series,
)
from homolab.geometry import SurfaceChart


CIRCLE = SurfaceChart.circle()


@pytest.mark.parametrize("k", [(1, 0), (1, 1), (2, 1)])
@pytest.mark.parametrize("eps", [1 / 8, 1 / 32])
def test_bessel_oracle_on_circle(k, eps):
    # int_{S^1} cos(2 pi k . x / eps) dsigma = 2 pi J0(2 pi |k| / eps)
    f = cosine_field(k)
    val = oscillatory_integral(CIRCLE, f, None, eps).value
    exact = 2 * np.pi * j0(2 * np.pi * np.hypot(*k) / eps)
    assert abs(val - exact) <= 1e-6


def test_weyl_series_slope_cos_axis_mode():
    f = cosine_field((1, 0))
    eps = [2.0**-k for k in range(5, 10)]
    series = weyl_defect_series(CIRCLE, f, None, eps)
    slope, _, _ = fit_decay_slope(series)
    assert abs(slope - 0.5) <= 0.05


def test_sine_mode_is_exactly_zero():
    # odd symmetry: the integral vanishes for every eps
    f = sine_field((0, 1))
    eps = [2.0**-k for k in range(5, 8)]
    series = weyl_defect_series(CIRCLE, f, None, eps)
    assert np.all(series.defects <= 1e-10)
    slope, _, _ = fit_decay_slope(series)
    assert slope == EXACT_SLOPE


def test_square_resonant_exact_value():
    # both vertical sides hit the crest exactly when eps = 1/n
    square = SurfaceChart.square()
    f = cosine_field((1, 0))
    for n in (8, 16, 64):
        val = oscillatory_integral(square, f, None, 1.0 / n).value
        assert abs(val - 2.0) <= 1e-8


def test_m_epsilon_matches_bessel():
    b = cosine_field((1, 0))
    for eps in (1 / 8, 1 / 16, 1 / 64):
        M = m_epsilon(CIRCLE, b, eps)
        assert abs(M - (-j0(2 * np.pi / eps))) <= 1e-6


def test_m_epsilon_constant_field_is_zero():
    b = PeriodicField("scalar", 2, modes={(0, 0): 3.0})
    assert abs(m_epsilon(CIRCLE, b, 1 / 8)) <= 1e-12


def test_m_epsilon_matrix_field():
    b = PeriodicField(
        "matrix", 2, modes={(0, 0): 2.0 * np.eye(1), (1, 0): 0.5 * np.eye(1)}, m=1
    )
    M = m_epsilon(CIRCLE, b, 1 / 8)
    assert M.shape == (1, 1)
    assert abs(M[0, 0] - (-j0(16 * np.pi))) <= 1e-6


def test_boundary_average_of_constant():
    f = PeriodicField("scalar", 2, modes={(0, 0): 2.5})
    assert abs(boundary_average(CIRCLE, f, 1 / 8) - 2.5) <= 1e-12


def test_surface_integral_weighted():
    val = surface_integral(CIRCLE, lambda x: x[:, 0] ** 2)
    assert abs(val - np.pi) <= 1e-10


def test_series_requires_decreasing_eps():
    with pytest.raises(ValueError):
        OscillatorySeries(entries=[(0.1, 0, 0, 0), (0.2, 0, 0, 0)], limit=0.0)


def test_fit_decay_slope_two_entries_allowed():
    slope, _, resid = fit_decay_slope([(0.5, 1.0), (0.25, 0.5)])
    assert slope == pytest.approx(1.0)
    assert resid == pytest.approx(0.0, abs=1e-12)


def test_fit_decay_slope_needs_two_after_drop():
    with pytest.raises(ValueError):
        fit_decay_slope([(0.5, 1.0), (0.25, 0.5)], drop_first=1)


def test_budget_error():
    f = cosine_field((1, 0))
    with pytest.raises(OscillationBudgetError):
        oscillatory_integral(CIRCLE, f, None, 1e-7, node_budget=10**5)


def test_quadrature_error_estimate_is_honest():
    f = cosine_field((1, 0))
    r = oscillatory_integral(CIRCLE, f, None, 1 / 8)
    exact = 2 * np.pi * j0(16 * np.pi)
    assert abs(r.value - exact) <= max(10 * r.est_error, 1e-9)
