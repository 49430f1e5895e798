import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gradstorm.closedform import (burgers_linear, burgers_linear_slope, gaussian_gap,
                                  gaussian_mean, gaussian_slope, uniform_mean)
from gradstorm.errors import SingularTime


def test_burgers_linear_examples():
    assert burgers_linear(-1.0, 0.5, 1.0) == -2.0
    assert burgers_linear(0.0, 3.0, 7.0) == 0.0
    with pytest.raises(SingularTime):
        burgers_linear(-1.0, 1.0, 1.0)


def test_burgers_slope_blows_up_towards_critical_time():
    slopes = [abs(burgers_linear_slope(-2.0, 0.5 - d)) for d in (1e-2, 1e-4, 1e-6)]
    assert slopes[0] < slopes[1] < slopes[2]
    assert slopes[2] > 1e5


@given(st.floats(-5, 5), st.floats(0, 0.99), st.floats(-10, 10))
def test_uniform_equals_burgers(alpha, frac, x):
    t = frac / abs(alpha) if alpha < 0 else frac * 3
    assert uniform_mean(alpha, t, x, sigma=3.0) == burgers_linear(alpha, t, x)


def test_gaussian_examples():
    assert gaussian_mean(-1.0, 1.0, 1.0, 1.0, 2.0) == pytest.approx(3.0, rel=1e-15)
    assert gaussian_mean(-1.3, 0.7, 2.0, 0.0, 1.1) == pytest.approx(-1.3 * 1.1, rel=1e-15)
    assert abs(gaussian_slope(-1.0, 1.0, 1.0, 1e3)) < 1e-2


@given(st.floats(-3, 3), st.floats(0.01, 5), st.floats(0.01, 5), st.floats(0, 20))
def test_gaussian_denominator_positive(alpha, r, sigma, t):
    rs2 = (r * sigma) ** 2
    assert 3 * (alpha * t + 1) ** 2 + 2 * rs2 * t**3 > 0 or t == 0
    assert np.isfinite(gaussian_slope(alpha, r, sigma, t))


@pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
def test_gaussian_flattens_to_uniform(t):
    assert gaussian_mean(-1.0, 1e-4, 1.0, t, 1.3) == pytest.approx(uniform_mean(-1.0, t, 1.3),
                                                                   rel=1e-4)


@given(st.floats(-3, -0.1), st.floats(0.2, 3), st.floats(0.05, 3), st.floats(0.01, 0.95),
       st.floats(-5, 5))
def test_gap_is_difference(alpha, r, sigma, frac, x):
    t = frac / abs(alpha)
    direct = gaussian_mean(alpha, r, sigma, t, x) - burgers_linear(alpha, t, x)
    assert gaussian_gap(alpha, r, sigma, t, x) == pytest.approx(direct, rel=1e-9, abs=1e-12)


def test_gap_is_second_order_in_sigma():
    g1 = gaussian_gap(-1.0, 1.0, 1e-2, 0.5, 1.0)
    g2 = gaussian_gap(-1.0, 1.0, 5e-3, 0.5, 1.0)
    assert g1 / g2 == pytest.approx(4.0, rel=1e-3)
