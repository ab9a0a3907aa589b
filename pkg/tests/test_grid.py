import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gkmmnlab.grid import (Domain, Field, InvalidFieldError, NoPeriodicAntiderivativeError,
                           SingularFieldError, antideriv, axis_mean, dealias, deriv, pointwise,
                           random_bandlimited, rms)


def test_domain_validation():
    with pytest.raises(ValueError):
        Domain(1.0, 1.0, 7, 8)
    with pytest.raises(ValueError):
        Domain(1.0, 1.0, 6, 8)
    with pytest.raises(ValueError):
        Domain(-1.0, 1.0, 8, 8)


def test_field_rejects_nonfinite():
    d = Domain(1.0, 1.0, 8, 8)
    v = np.zeros(d.shape)
    v[2, 3] = np.nan
    with pytest.raises(InvalidFieldError):
        deriv(Field(d, v), "x")


def test_deriv_constant_is_zero(dom32):
    assert rms(deriv(Field.constant(dom32, 1.0), "x")) == 0.0


def test_deriv_sine():
    d = Domain(3.0, 2.0, 32, 16)
    f = Field.from_function(d, lambda X, Y: np.sin(2 * np.pi * X / d.Lx))
    exact = Field.from_function(d, lambda X, Y: (2 * np.pi / d.Lx) * np.cos(2 * np.pi * X / d.Lx))
    assert np.max(np.abs((deriv(f, "x") - exact).values)) <= 1e-12


def test_mixed_derivatives_commute(dom32, rng):
    f = random_bandlimited(dom32, rng, 5)
    a = deriv(deriv(f, "x"), "y")
    b = deriv(deriv(f, "y"), "x")
    assert rms(a - b) <= 1e-11 * rms(a)


def test_antideriv_examples():
    d = Domain(2.5, 1.0, 32, 16)
    assert rms(antideriv(Field.zeros(d), "x", 0.0)) == 0.0
    f = Field.from_function(d, lambda X, Y: np.cos(2 * np.pi * X / d.Lx))
    exact = Field.from_function(d, lambda X, Y: d.Lx / (2 * np.pi) * np.sin(2 * np.pi * X / d.Lx))
    assert rms(antideriv(f, "x", 0.0) - exact) <= 1e-12


def test_antideriv_roundtrip_and_zero_mode(dom32, rng):
    g = random_bandlimited(dom32, rng, 4)
    g = g - Field(dom32, np.broadcast_to(axis_mean(g, "x")[None, :], dom32.shape))
    r = antideriv(deriv(g, "x"), "x", 0.0)
    assert rms(r - g) <= 1e-10 * rms(g)
    zm = np.linspace(0, 1, dom32.Ny)
    r2 = antideriv(deriv(g, "x"), "x", zm)
    assert np.allclose(axis_mean(r2, "x"), zm, atol=1e-13)


def test_antideriv_rejects_nonzero_mean(dom32):
    f = Field.from_function(dom32, lambda X, Y: 1.0 + 0.5 * np.cos(3 * Y))
    with pytest.raises(NoPeriodicAntiderivativeError) as e:
        antideriv(f, "x")
    assert e.value.index == 0


def test_pointwise_ops(dom32):
    f = Field.from_function(dom32, lambda X, Y: np.sin(X) + Y)
    assert rms(pointwise("add", f, 0) - f) == 0.0
    c = Field.from_function(dom32, lambda X, Y: 2 + np.cos(X))
    assert np.max(np.abs((pointwise("exp", pointwise("log", c)) - c).values)) <= 1e-13
    z = Field.from_function(dom32, lambda X, Y: np.sin(X))
    with pytest.raises(SingularFieldError) as e:
        pointwise("div", f, z)
    assert e.value.location[0] == 0
    with pytest.raises(SingularFieldError):
        pointwise("log", z)


def test_dealiased_product_matches_coefficient_convolution():
    # oracle: direct convolution of Fourier coefficients on a 16x16 grid
    d = Domain(2 * math.pi, 2 * math.pi, 16, 16)
    rng = np.random.default_rng(7)
    a, b = random_bandlimited(d, rng, 3, real=False), random_bandlimited(d, rng, 3, real=False)
    ah, bh = np.fft.fft2(a.values) / 256, np.fft.fft2(b.values) / 256
    idx = d.mode_index("x").astype(int)
    conv = np.zeros((16, 16), complex)
    for i, m1 in enumerate(idx):
        for j, n1 in enumerate(idx):
            for k, m2 in enumerate(idx):
                for l, n2 in enumerate(idx):
                    m, n = m1 + m2, n1 + n2
                    if abs(m) < 16 / 3 and abs(n) < 16 / 3:
                        conv[int(m) % 16, int(n) % 16] += ah[i, j] * bh[k, l]
    got = np.fft.fft2(dealias(pointwise("mul", a, b)).values) / 256
    assert np.max(np.abs(got - conv)) <= 1e-13


def test_dealias_examples(dom32, rng):
    f = random_bandlimited(dom32, rng, 4)
    assert rms(dealias(f) - f) <= 1e-14
    hi = Field.from_function(dom32, lambda X, Y: np.cos(14 * X))
    assert rms(dealias(hi)) <= 1e-13
    g = Field(dom32, rng.standard_normal(dom32.shape))
    once = dealias(g)
    assert np.array_equal(dealias(once).values, once.values)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), alpha=st.floats(-3, 3), beta=st.floats(-3, 3))
def test_deriv_linear(seed, alpha, beta):
    d = Domain(2 * math.pi, 4.0, 16, 16)
    rng = np.random.default_rng(seed)
    f, g = random_bandlimited(d, rng, 4), random_bandlimited(d, rng, 4)
    lhs = deriv(alpha * f + beta * g, "y")
    rhs = alpha * deriv(f, "y") + beta * deriv(g, "y")
    assert rms(lhs - rhs) <= 1e-12 * max(rms(deriv(f, "y")) + rms(deriv(g, "y")), 1.0) * (abs(alpha) + abs(beta) + 1)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_parseval(seed):
    d = Domain(1.0, 1.0, 16, 8)
    v = np.random.default_rng(seed).standard_normal(d.shape)
    grid_sum = np.sum(np.abs(v) ** 2)
    coef_sum = np.sum(np.abs(np.fft.fft2(v)) ** 2) / v.size
    assert abs(grid_sum - coef_sum) <= 1e-12 * grid_sum


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_antideriv_of_deriv_removes_mean(seed):
    d = Domain(2 * math.pi, 2 * math.pi, 16, 16)
    f = random_bandlimited(d, np.random.default_rng(seed), 4)
    mean = Field(d, np.broadcast_to(axis_mean(f, "y")[:, None], d.shape))
    r = antideriv(deriv(f, "y"), "y", 0.0)
    assert rms(r - (f - mean)) <= 1e-10 * max(rms(f), 1.0)
