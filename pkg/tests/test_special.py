import json
import math
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gradstorm.errors import PoleError
from gradstorm.special import digamma, gamma, laguerre_at_zero, lgamma

# High-precision values written by scripts/make_special_fixtures.py (mpmath, 50 digits).
REF = json.loads((Path(__file__).parent / "data" / "special_reference.json").read_text())


@pytest.mark.parametrize("x,value", [(float(a), float(b)) for a, b in REF["gamma"]])
def test_gamma_reference(x, value):
    assert gamma(x) == pytest.approx(value, rel=1e-12)


@pytest.mark.parametrize("x,value", [(float(a), float(b)) for a, b in REF["digamma"]])
def test_digamma_reference(x, value):
    assert digamma(x) == pytest.approx(value, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("nu,beta,value",
                         [(float(a), float(b), float(c)) for a, b, c in REF["laguerre_at_zero"]])
def test_laguerre_reference(nu, beta, value):
    assert laguerre_at_zero(nu, beta) == pytest.approx(value, rel=1e-12)


def test_laguerre_examples():
    assert laguerre_at_zero(1.0, 0.5) == pytest.approx(1.5, rel=1e-14)
    assert math.isfinite(laguerre_at_zero(0.3, -0.3 + 0.5))


@given(st.floats(-0.95, 30).filter(lambda b: abs(b + 1) > 1e-3))
def test_degree_zero_laguerre_is_one(beta):
    assert laguerre_at_zero(0.0, beta) == pytest.approx(1.0, rel=1e-12)


@given(st.floats(0.01, 60))
def test_gamma_recurrence(x):
    assert gamma(x + 1) == pytest.approx(x * gamma(x), rel=1e-12)


@given(st.floats(0.01, 100))
def test_lgamma_matches_log_gamma(x):
    assert lgamma(x) == pytest.approx(math.lgamma(x), rel=1e-12, abs=1e-13)


@given(st.floats(0.05, 50))
def test_digamma_recurrence(x):
    assert digamma(x + 1) == pytest.approx(digamma(x) + 1 / x, rel=1e-12, abs=1e-13)


def test_poles():
    for x in (0.0, -1.0, -7.0):
        with pytest.raises(PoleError):
            gamma(x)
        with pytest.raises(PoleError):
            digamma(x)
    with pytest.raises(PoleError) as exc:
        laguerre_at_zero(-1.0, 0.5)
    assert "nu+1" in exc.value.factor
