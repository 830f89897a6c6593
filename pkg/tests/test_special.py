"""Unit and property tests for cachenet.special."""

import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy import special as sp

from cachenet.special import (
    harmonic_sum,
    lambert_w0,
    lambert_w0_log,
    lower_reg_gamma_int,
    upper_reg_gamma_int,
)

EULER_GAMMA = 0.5772156649015329


# ---------------------------------------------------------------- examples

def test_lambert_known_points():
    assert lambert_w0(0.0) == 0.0
    assert lambert_w0(math.e) == pytest.approx(1.0, abs=1e-12)
    # omega constant
    assert lambert_w0(1.0) == pytest.approx(0.5671432904, abs=1e-9)
    assert lambert_w0(-1.0 / math.e) == -1.0


def test_lambert_domain_error():
    with pytest.raises(ValueError):
        lambert_w0(-0.5)


def test_upper_gamma_known_points():
    assert upper_reg_gamma_int(3, 0.0) == 1.0
    assert upper_reg_gamma_int(1, 1.0) == pytest.approx(0.3678794412, abs=1e-9)
    assert upper_reg_gamma_int(3, 2.0) == pytest.approx(0.6766764162, abs=1e-9)


def test_lower_gamma_known_points():
    assert lower_reg_gamma_int(2, 0.0) == 0.0
    assert lower_reg_gamma_int(1, 1.0) == pytest.approx(0.6321205588, abs=1e-9)
    assert lower_reg_gamma_int(3, 2.0) == pytest.approx(0.3233235838, abs=1e-9)


def test_gamma_shape_validation():
    with pytest.raises(ValueError):
        upper_reg_gamma_int(0, 1.0)
    with pytest.raises(ValueError):
        upper_reg_gamma_int(2.5, 1.0)
    with pytest.raises(ValueError):
        upper_reg_gamma_int(3, -0.1)


def test_harmonic_known_points():
    assert harmonic_sum(4, 1.0) == pytest.approx(2.0833333333, abs=1e-9)
    assert harmonic_sum(10, 0.0) == 10.0
    with pytest.raises(ValueError):
        harmonic_sum(0, 1.0)


# ---------------------------------------------------------------- properties

@given(st.floats(min_value=-13.8, max_value=13.8))
@settings(max_examples=300, deadline=None)
def test_lambert_residual(log_x):
    # log-uniform over [1e-6, 1e6]
    x = math.exp(log_x)
    w = lambert_w0(x)
    assert abs(w * math.exp(w) - x) <= 1e-12 * max(x, 1.0)


@given(st.floats(min_value=-math.exp(-1.0), max_value=0.0))
@settings(max_examples=200, deadline=None)
def test_lambert_residual_negative_branch(x):
    w = lambert_w0(x)
    assert -1.0 <= w <= 0.0
    assert abs(w * math.exp(w) - x) <= 1e-10


@given(st.floats(min_value=1e-6, max_value=1e6))
@settings(max_examples=200, deadline=None)
def test_lambert_matches_scipy(x):
    assert lambert_w0(x) == pytest.approx(float(sp.lambertw(x).real), rel=1e-10)


@given(st.floats(min_value=1.0, max_value=2000.0))
@settings(max_examples=100, deadline=None)
def test_lambert_log_form_consistent(t):
    w = lambert_w0_log(t)
    # residual of w + log w = t
    assert abs(w + math.log(w) - t) <= 1e-12 * max(t, 1.0)
    if t <= 25.0:
        assert w == pytest.approx(lambert_w0(math.exp(t)), rel=1e-12)


@given(st.integers(min_value=1, max_value=64), st.floats(min_value=0.0, max_value=50.0))
@settings(max_examples=300, deadline=None)
def test_gamma_complementarity_exact(k, x):
    assert upper_reg_gamma_int(k, x) + lower_reg_gamma_int(k, x) == 1.0


@given(st.integers(min_value=1, max_value=64), st.floats(min_value=0.0, max_value=50.0))
@settings(max_examples=200, deadline=None)
def test_gamma_matches_scipy(k, x):
    assert upper_reg_gamma_int(k, x) == pytest.approx(float(sp.gammaincc(k, x)), abs=1e-12)


@given(
    st.integers(min_value=1, max_value=64),
    st.floats(min_value=0.0, max_value=49.0),
    st.floats(min_value=1e-6, max_value=1.0),
)
@settings(max_examples=200, deadline=None)
def test_gamma_monotone_in_x(k, x, dx):
    assert upper_reg_gamma_int(k, x + dx) <= upper_reg_gamma_int(k, x) + 5e-15


@given(st.integers(min_value=1, max_value=63), st.floats(min_value=0.0, max_value=50.0))
@settings(max_examples=200, deadline=None)
def test_gamma_monotone_in_k(k, x):
    assert upper_reg_gamma_int(k + 1, x) >= upper_reg_gamma_int(k, x) - 5e-15


def test_gamma_large_x_no_overflow():
    # log-space path: values are tiny but finite and ordered
    q = upper_reg_gamma_int(64, 600.0)
    assert 0.0 <= q < 1e-100
    assert upper_reg_gamma_int(64, 800.0) <= q


@given(st.integers(min_value=10, max_value=100000))
@settings(max_examples=60, deadline=None)
def test_harmonic_euler_mascheroni_band(n):
    h = harmonic_sum(n, 1.0)
    assert math.log(n) + EULER_GAMMA <= h <= math.log(n) + EULER_GAMMA + 1.0 / n


@given(
    st.integers(min_value=1, max_value=2000),
    st.floats(min_value=0.0, max_value=2.5),
)
@settings(max_examples=100, deadline=None)
def test_harmonic_matches_direct_sum(n, delta):
    direct = sum(f ** -delta for f in range(1, n + 1))
    assert harmonic_sum(n, delta) == pytest.approx(direct, rel=1e-12)
