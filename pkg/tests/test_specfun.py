import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import romberg
from secrecy_rfuowc.errors import DomainError, PoleError
from secrecy_rfuowc.specfun import (
    DeltaSeq, beta_fn, lower_incomplete_gamma, meijer_g_1012, meijer_g_1112, quad_interval,
    quad_semi_infinite,
)


def test_gamma_a_one():
    assert lower_incomplete_gamma(1.0, math.log(2)) == pytest.approx(0.5, rel=1e-15)
    assert lower_incomplete_gamma(2.3, 0.0) == 0.0


def test_gamma_brute_force(frozen):
    assert lower_incomplete_gamma(2.5, 3.2) == pytest.approx(frozen["lower_gamma_2.5_3.2"], rel=1e-12)


@given(st.floats(0.05, 40), st.floats(0, 120))
@settings(max_examples=200)
def test_gamma_relative_accuracy(a, x):
    ref = float(mpmath.gammainc(a, 0, x))
    got = lower_incomplete_gamma(a, x)
    assert got == pytest.approx(ref, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("a", [0.5, 1, 1.43, 2, 5])
def test_gamma_is_a_cdf(a):
    xs = np.linspace(0, 60, 50)
    p = lower_incomplete_gamma(a, xs) / math.gamma(a)
    assert p[0] == 0.0 and abs(p[-1] - 1) < 1e-12
    assert np.all(np.diff(p) >= 0) and np.all(p <= 1 + 4 * np.finfo(float).eps)


def test_gamma_domain():
    with pytest.raises(DomainError):
        lower_incomplete_gamma(0.0, 1.0)
    with pytest.raises(DomainError):
        lower_incomplete_gamma(1.0, -1.0)
    with pytest.raises(DomainError):
        lower_incomplete_gamma(1.0, np.nan)


def test_g1012_closed_forms():
    assert meijer_g_1012(2.0, 0.0) == pytest.approx(math.exp(-2.0))
    assert meijer_g_1012(0.0, 1.0) == 0.0
    assert meijer_g_1012(1.7, 1.43) == pytest.approx(1.7 ** 1.43 * math.exp(-1.7), rel=1e-14)


def test_g1112_closed_forms(frozen):
    assert meijer_g_1112(0.8, 1.0) == pytest.approx(1 - math.exp(-0.8), rel=1e-15)
    assert meijer_g_1112(0.0, 2.0) == 0.0
    assert meijer_g_1112(2.0, 1.43) == pytest.approx(frozen["lower_gamma_1.43_2.0"], rel=1e-12)


def test_g1112_is_integral_of_g1012():
    g = np.random.default_rng(7)
    for z, u in zip(g.uniform(0.05, 12, 20), g.uniform(0.3, 6, 20)):
        res = quad_interval(lambda t: meijer_g_1012(t, u - 1), 0.0, z, tol_abs=1e-13, tol_rel=1e-12)
        assert res.value == pytest.approx(meijer_g_1112(z, u), rel=1e-9)


def test_quad_trivial():
    assert quad_semi_infinite(lambda x: np.exp(-x)).value == pytest.approx(1.0, abs=1e-10)
    assert quad_semi_infinite(lambda x: 1 / (1 + x) ** 2).value == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("k", range(7))
def test_quad_factorials(k):
    res = quad_semi_infinite(lambda x: x ** k * np.exp(-x), tol_abs=1e-12, tol_rel=1e-12)
    assert abs(res.value - math.factorial(k)) <= max(res.abs_error_estimate, 1e-12 * math.factorial(k))


def test_quad_romberg_oracle(frozen):
    ref = frozen["int_x_exp2x_over_1px"]
    # Romberg on the mapped integrand t = x / (1 + x), as an independent check of the frozen value
    def f(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros_like(t)
        ok = t < 1
        x = t[ok] / (1 - t[ok])
        out[ok] = x * np.exp(-2 * x) / (1 + x) / (1 - t[ok]) ** 2
        return out
    assert romberg(f, 0.0, 1.0) == pytest.approx(ref, rel=1e-11)
    res = quad_semi_infinite(lambda x: x * np.exp(-2 * x) / (1 + x), tol_abs=1e-13, tol_rel=1e-12)
    assert res.value == pytest.approx(ref, rel=1e-12)
    assert res.abs_error_estimate <= 1e-12


def test_quad_error_contract_and_cap():
    res = quad_semi_infinite(lambda x: np.exp(-x), upper=3.0, tol_abs=1e-13, tol_rel=1e-13)
    assert abs(res.value - (1 - math.exp(-3.0))) <= 1e-13
    assert res.evaluations > 0


def test_quad_vector_integrand():
    res = quad_semi_infinite(lambda x: np.stack([np.exp(-x), np.exp(-2 * x)]),
                             tol_abs=np.array([1e-12, 1e-12]))
    assert res.value == pytest.approx([1.0, 0.5], rel=1e-10)


def test_beta():
    assert beta_fn(1, 1) == 1.0
    assert beta_fn(2.5, 0.5) == pytest.approx(float(mpmath.beta(2.5, 0.5)), rel=1e-14)
    with pytest.raises(PoleError):
        beta_fn(3, -2)


def test_beta_negative_noninteger_sign():
    assert beta_fn(2.5, -0.5) == pytest.approx(float(mpmath.beta(2.5, -0.5)), rel=1e-13)


def test_delta_seq():
    d = DeltaSeq(4, 1.0)
    vals = d.values()
    assert len(d) == 4 and vals[0] == 0.25
    assert np.allclose(np.diff(vals), 0.25)
    with pytest.raises(DomainError):
        DeltaSeq(0, 1.0)
