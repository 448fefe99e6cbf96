from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import beta as beta_fn

from fracheat.fields import Bump, BumpDrift, Constant, RadialPower, Separable, TimeProfile
from fracheat.geometry import euclidean_box, torus
from fracheat.kato import (
    LqLpSpec, class_membership_test, default_eps_sequence, k_functional, kato_class_test,
    kato_inclusion_check, lqlp_companion, lqlp_predicate, seminorm,
)
from fracheat.kernels import XiProfile

BOX1 = euclidean_box(1, 10.0)


def k11_closed(alpha, eps):
    return 2 * (1 + 1 / alpha) * beta_fn(1 - 1 / alpha, 1 - 1 / alpha) * eps ** ((alpha - 1) / alpha)


def test_zero_field():
    assert k_functional(Constant(BOX1, kappa=0.0), XiProfile(1.5, 1), 0, 0, 0.1) == 0.0


def test_k00_example():
    assert k_functional(Constant(BOX1, kappa=1.0), XiProfile(1.5, 1), 0, 0, 0.1) == pytest.approx(1 / 3, rel=1e-10)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
@pytest.mark.parametrize("eps", [0.3, 0.01])
def test_closed_forms(alpha, eps):
    one = Constant(BOX1, kappa=1.0)
    prof = XiProfile(alpha, 1)
    assert k_functional(one, prof, 0, 0, eps) == pytest.approx(2 * (1 + 1 / alpha) * eps, rel=1e-4)
    assert k_functional(one, prof, 1, 1, eps) == pytest.approx(k11_closed(alpha, eps), rel=1e-4)


def test_k11_frozen_value():
    # alpha = 1.5, eps = 0.1, evaluated with mpmath
    val = k_functional(Constant(BOX1, kappa=1.0), XiProfile(1.5, 1), 1, 1, 0.1)
    assert val == pytest.approx(8.20001069635257902, rel=1e-6)


def test_constant_membership_rate():
    tab = class_membership_test(Constant(BOX1, kappa=1.0), XiProfile(1.5, 1), 1, 1)
    assert tab.member and tab.rate == pytest.approx(1 / 3, abs=1e-3)
    assert len(tab.rows()) == len(default_eps_sequence())


def test_radial_powers():
    prof = XiProfile(1.5, 1)
    bad = RadialPower(BOX1, center=(0.0,), theta=1.5, cutoff=1.0)
    assert not class_membership_test(bad, prof, 0, 0).member
    good = RadialPower(BOX1, center=(0.0,), theta=0.25, cutoff=1.0)
    assert class_membership_test(good, prof, 0, 0).member


def test_kato_class():
    assert kato_class_test(Constant(BOX1, kappa=0.0), 1.5).member
    assert kato_class_test(Bump(BOX1, center=(0.0,), width=1.0, height=1.0), 1.5).member
    assert not kato_class_test(RadialPower(BOX1, center=(0.0,), theta=1.5, cutoff=1.0), 1.5).member


def test_inclusion():
    prof = XiProfile(1.5, 1)
    rep = kato_inclusion_check(Bump(BOX1, center=(0.0,), width=1.0, height=1.0), prof, 1.0)
    assert rep["status"] == "holds"
    tor = torus(1, 1.0)
    rep = kato_inclusion_check(Constant(tor, kappa=1.0), XiProfile(1.5, 1, 1.0), 1.0)
    assert rep["status"] == "holds"
    rep = kato_inclusion_check(RadialPower(BOX1, center=(0.0,), theta=1.5, cutoff=1.0), prof, 1.0)
    assert rep["status"] == "vacuous" and rep["ok"]


def test_lqlp_arithmetic():
    assert lqlp_predicate(LqLpSpec(math.inf, math.inf), 1, 1.5)["ok"]
    rep = lqlp_predicate(LqLpSpec(4, 8, 1, 1), 1, 1.5)
    assert rep["ok"] and rep["space_margin"] == pytest.approx(0.5 - 0.4375)
    assert rep["time_margin"] == pytest.approx(8 - 3)
    assert not lqlp_predicate(LqLpSpec(2, 3, 1, 1), 1, 1.5)["ok"]


@given(st.floats(1.01, 50), st.floats(1.01, 50), st.floats(1.01, 50), st.floats(1.01, 50))
def test_lqlp_monotone(p1, p2, q1, q2):
    # raising the integrability exponents can only help
    (pa, pb), (qa, qb) = sorted((p1, p2)), sorted((q1, q2))
    if lqlp_predicate(LqLpSpec(pa, qa, 0.5, 0.5), 2, 1.5)["ok"]:
        assert lqlp_predicate(LqLpSpec(pb, qb, 0.5, 0.5), 2, 1.5)["ok"]


def test_lqlp_companion_reaches_rate():
    rep = lqlp_companion(LqLpSpec(4, 8, 1, 1), BOX1, 1.5)
    assert rep["predicate"]["ok"] and rep["ok"]


def test_sign_modes():
    f = Separable(BOX1, spatial_field=Bump(BOX1, center=(0.0,), width=1.0, height=1.0),
                  time=TimeProfile(exponent=0.3, center=0.5, windowed=True))
    prof = XiProfile(1.5, 1)
    vals = {s: k_functional(f, prof, 1, 1, 0.1, sign=s) for s in ("plus", "minus", "max")}
    assert vals["max"] == pytest.approx(max(vals["plus"], vals["minus"]))
    with pytest.raises(ValueError):
        k_functional(f, prof, 1, 1, 0.1, sign="both")


def test_seminorms():
    prof = XiProfile(1.5, 1)
    assert np.all(seminorm(prof, [0.1, 0.5]) == 0)
    kappa = 0.7
    r = np.array([0.05, 0.2])
    got = seminorm(prof, r, potential=Constant(BOX1, kappa=kappa))
    np.testing.assert_allclose(got, kappa * k11_closed(1.5, r), rtol=1e-4)
    b = BumpDrift(BOX1, center=(0.0,), width=0.5, vector=(1.0,))
    c = Bump(BOX1, center=(0.5,), width=0.3, height=2.0)
    vals = seminorm(prof, [0.01, 0.05, 0.2, 0.3], drift=b, potential=c, variant="l_tilde")
    assert np.all(np.diff(vals) >= 0)
