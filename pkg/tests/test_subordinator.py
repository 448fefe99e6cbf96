from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from fracheat.subordinator import (
    SubordinatorSpec, clock_rule, density, gauss_moment_integral, laplace, laplace_report,
    _density_kanter, _density_series, qq_envelope_constant, standard_density,
)

ALPHAS = (1.2, 1.5, 1.8)


def test_spec_validates_alpha():
    with pytest.raises(ValueError):
        SubordinatorSpec(2.0)
    with pytest.raises(ValueError):
        SubordinatorSpec(0.0)
    assert SubordinatorSpec(1.5).sub_index == 0.75
    assert SubordinatorSpec(1.5).perturbative_range and not SubordinatorSpec(1.0).perturbative_range


def test_levy_density_value():
    # (4 pi)^(-1/2) e^(-1/4), evaluated with mpmath at 30 digits
    assert density(SubordinatorSpec(1.0), 1.0, 1.0) == pytest.approx(0.219695644733861198, rel=1e-12)


def test_levy_density_profile():
    s = np.logspace(-2, 2, 200)
    for t in (0.5, 2.0):
        exact = t / (2 * math.sqrt(math.pi)) * s**-1.5 * np.exp(-t * t / (4 * s))
        np.testing.assert_allclose(density(SubordinatorSpec(1.0), t, s), exact, rtol=1e-8)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_density_normalized(alpha):
    spec = SubordinatorSpec(alpha)
    # substitute s = e^u; the density is smooth in u on the whole line
    mass, _ = quad(lambda u: float(density(spec, 1.0, math.exp(u))) * math.exp(u), -40, 60, limit=400)
    assert mass == pytest.approx(1.0, abs=1e-7)


@pytest.mark.parametrize("b", [0.6, 0.75, 0.9])
def test_kanter_and_series_agree_near_switch(b):
    # the two representations are independent routes; they must coincide where they hand over
    x = 2.0 ** (1 / b) * np.array([0.8, 1.0, 1.25, 2.0])
    np.testing.assert_allclose(_density_kanter(x, b), _density_series(x, b), rtol=1e-9)
    g = standard_density(b, x)
    assert np.all(np.isfinite(g)) and np.all(g > 0)


def test_laplace_examples():
    assert laplace(SubordinatorSpec(1.5), 1.0, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert laplace(SubordinatorSpec(1.5), 1.0, 1.0) == pytest.approx(0.367879441171442322, rel=1e-9)
    assert laplace(SubordinatorSpec(1.0), 2.0, 4.0) == pytest.approx(0.0183156388887341803, rel=1e-9)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_laplace_report(alpha):
    rep = laplace_report(SubordinatorSpec(alpha), (0.25, 1.0, 4.0), (0.1, 0.5, 1.0, 2.0, 5.0, 10.0))
    assert rep["ok"] and rep["max_rel_error"] < 1e-6


@given(st.sampled_from(ALPHAS), st.floats(0.05, 5), st.floats(0.0, 20), st.floats(0.0, 20))
def test_laplace_monotone_in_lambda(alpha, t, l1, l2):
    spec = SubordinatorSpec(alpha)
    lo, hi = sorted((l1, l2))
    a, b = laplace(spec, t, lo), laplace(spec, t, hi)
    assert 0 < b <= a + 1e-14 and a <= 1 + 1e-13


def test_clock_rule_sealed_and_coarse():
    rule = clock_rule(1.5)
    assert not rule.weights.flags.writeable
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-12)
    c = rule.coarse()
    assert c.step == 2 * rule.step and c.weights.sum() == pytest.approx(1.0, abs=1e-6)
    assert clock_rule(1.5) is rule


def test_gauss_moment_trivial_case():
    J, _ = gauss_moment_integral(SubordinatorSpec(1.5), 1.0, 0.0, 1.0, 0)
    assert J == pytest.approx(1.0, abs=1e-12)


def test_gauss_moment_boundary_closed_form():
    # alpha = 1, lam = 1/4, m = 1: J = 2t / (sqrt(pi) (t^2 + r^2)), checked with mpmath
    frozen = {(1.0, 0.0): 1.12837916709551257, (1.0, 1.0): 0.564189583547756287, (2.0, 4.0): 0.112837916709551257}
    for (t, r), val in frozen.items():
        J, _ = gauss_moment_integral(SubordinatorSpec(1.0), t, r, 0.25, 1)
        assert J == pytest.approx(val, rel=1e-9)


def test_gauss_moment_ratio_stable():
    spec = SubordinatorSpec(1.5)
    r = np.array([0.0, 1.0, 4.0])
    _, ratio = gauss_moment_integral(spec, 1.0, r, 0.25, 1)
    _, ratio_fine = gauss_moment_integral(spec, 1.0, r, 0.25, 1, rule=clock_rule(1.5, 1))
    assert np.all(ratio > 0) and np.all(np.isfinite(ratio))
    np.testing.assert_allclose(ratio, ratio_fine, rtol=1e-8)
    assert ratio.max() / ratio.min() < 10


def test_qq_envelope_finite():
    c = qq_envelope_constant(SubordinatorSpec(1.5))
    assert np.isfinite(c) and c > 0
    assert qq_envelope_constant(SubordinatorSpec(1.5), points=800) == pytest.approx(c, rel=1e-2)
