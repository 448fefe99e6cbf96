from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracheat.fields import (
    Bump, BumpDrift, Constant, DriftDivergence, DriftNorm, RadialPower, Separable, SwirlDrift,
    TimeProfile,
)
from fracheat.geometry import euclidean_box, torus

pt2 = st.tuples(st.floats(0, 1), st.floats(0, 1))


def central_div(b, x, h=1e-5):
    d = x.shape[-1]
    out = 0.0
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        out += (b(x + e)[i] - b(x - e)[i]) / (2 * h)
    return out


@given(pt2)
def test_bump_gradient_and_divergence(p):
    dom = torus(2, 1.0)
    x = np.array(p)
    f = Bump(dom, center=(0.4, 0.6), width=0.2, height=1.5)
    h = 1e-6
    fd = [(f.spatial(x + h * e) - f.spatial(x - h * e)) / (2 * h) for e in np.eye(2)]
    np.testing.assert_allclose(f.grad(x), fd, atol=1e-7)
    b = BumpDrift(dom, center=(0.4, 0.6), width=0.2, vector=(1.0, -0.5))
    assert b.div(x) == pytest.approx(central_div(b, x), abs=1e-6)
    assert DriftDivergence(dom, drift=b).spatial(x) == pytest.approx(-b.div(x))


@given(pt2)
def test_swirl_is_divergence_free(p):
    dom = torus(2, 1.0)
    b = SwirlDrift(dom, center=(0.5, 0.5), width=0.1, strength=3.0)
    x = np.array(p)
    assert central_div(b, x) == pytest.approx(0.0, abs=1e-5)
    assert DriftNorm(dom, drift=b).spatial(x) == pytest.approx(np.linalg.norm(b(x)))


def test_torus_bump_periodic():
    f = Bump(torus(1, 1.0), center=(0.05,), width=0.1)
    assert f.spatial(np.array([0.95])) == pytest.approx(f.spatial(np.array([0.15])), rel=1e-12)


def test_radial_power():
    box = euclidean_box(2, 5.0)
    f = RadialPower(box, center=(0.0, 0.0), theta=1.5, cutoff=1.0)
    assert f.locally_integrable and f.local_exponent == 1.5
    assert f.spatial(np.array([0.5, 0.0])) == pytest.approx(0.5**-1.5)
    assert f.spatial(np.array([2.0, 0.0])) == 0.0
    with pytest.raises(ValueError):
        RadialPower(box, center=(0.0, 0.0), theta=-1.0)


def test_time_profile():
    g = TimeProfile(exponent=0.5, center=1.0, windowed=True)
    np.testing.assert_allclose(g(np.array([-0.5, 0.75, 1.25, 2.5])), [0.0, 2.0, 2.0, 0.0])
    assert TimeProfile().constant and not g.constant
    f = Separable(euclidean_box(1, 5.0), spatial_field=Constant(euclidean_box(1, 5.0), kappa=2.0), time=g)
    assert f.time is g


def test_validation():
    with pytest.raises(ValueError):
        Bump(torus(1, 1.0), center=(0.1, 0.2), width=0.1)
    with pytest.raises(ValueError):
        SwirlDrift(torus(1, 1.0), center=(0.5,), width=0.1)
