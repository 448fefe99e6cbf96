from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracheat.quadrature import gauss_legendre, integrate_breaks, tanh_sinh, tanh_sinh_halfline, tanh_sinh_unit
from fracheat.sampling import search_extremum


def test_tanh_sinh_endpoint_singularity():
    x, w, _ = tanh_sinh_unit(6)
    assert np.sum(w * x**-0.5) == pytest.approx(2.0, rel=1e-10)
    x, w, d_lo, d_hi = tanh_sinh(0.0, 2.0, 6)
    assert np.sum(w) == pytest.approx(2.0, rel=1e-12)
    # distance form keeps the endpoint power accurate: int_0^2 (2 - x)^(-1/2) = 2 sqrt(2)
    assert np.sum(w * d_hi**-0.5) == pytest.approx(2 * math.sqrt(2), rel=1e-9)


def test_tanh_sinh_halfline():
    x, w = tanh_sinh_halfline(1.0, 1.0, 7)[:2]
    assert np.sum(w * x**-2) == pytest.approx(1.0, rel=1e-8)


@given(st.integers(1, 12))
def test_gauss_legendre_exact(n):
    x, w = gauss_legendre(n)
    for k in range(2 * n):
        assert np.sum(w * x**k) == pytest.approx(1 / (k + 1), rel=1e-12)


def test_integrate_breaks_kink():
    val = integrate_breaks(lambda x: np.abs(x - 0.3), [0.0, 0.3, 1.0])
    assert val == pytest.approx(0.5 * (0.09 + 0.49), rel=1e-12)


def test_search_extremum_finds_known_max():
    def fn(z):
        return -np.sum((z - 0.3) ** 2, axis=1) + 1.0
    res = search_extremum(fn, [-1, -1], [1, 1], 128, seed=3)
    assert res.value == pytest.approx(1.0, abs=1e-8)
    np.testing.assert_allclose(res.point, [0.3, 0.3], atol=1e-3)
    low = search_extremum(lambda z: np.cos(3 * z[:, 0]), [0], [math.pi / 2], 64, mode="min")
    assert low.value == pytest.approx(-1.0, abs=1e-8)


def test_search_extremum_deterministic():
    def fn(z):
        return np.sin(5 * z[:, 0]) * np.cos(3 * z[:, 1])
    a = search_extremum(fn, [0, 0], [2, 2], 64, seed=11)
    b = search_extremum(fn, [0, 0], [2, 2], 64, seed=11)
    assert a.value == b.value and np.array_equal(a.point, b.point)
