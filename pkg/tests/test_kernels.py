from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracheat.geometry import euclidean_box, torus
from fracheat.kernels import (
    BaseKernel, FracKernel, SampleSpec, XiProfile, base_eval, eta_eval, fd_derivative_check, frac_eval,
    grad_bound_report, holder_grad_report, normalization_defect, scaling_defect, semigroup_defect,
    symmetry_defect, tail_slope, three_p_kernel_report, three_p_report, two_sided_report, xi_eval,
)
from fracheat.subordinator import SubordinatorSpec

INV_PI = 0.318309886183790672
INV_2PI = 0.159154943091895336


def frac(dom, alpha):
    return FracKernel(BaseKernel(dom), SubordinatorSpec(alpha))


def torus_series(t, x, alpha, L, modes=400):
    """Fourier series of the alpha-stable kernel on a circle of length L."""
    k = np.arange(1, modes + 1)
    lam = (2 * np.pi * k / L) ** alpha
    x = np.asarray(x, dtype=float)[..., None]
    return (1 + 2 * np.sum(np.exp(-t * lam) * np.cos(2 * np.pi * k * x / L), axis=-1)) / L


# ---------------------------------------------------------------- base kernel

def test_base_kernel_examples():
    box = BaseKernel(euclidean_box(1, 10))
    assert base_eval(box, 1.0, [0.0], [0.0]) == pytest.approx(0.282094791773878143, rel=1e-14)
    np.testing.assert_allclose(base_eval(box, 0.7, [0.3], [0.3], "grad"), [0.0], atol=1e-16)
    tor = BaseKernel(torus(1, 1.0))
    np.testing.assert_allclose(base_eval(tor, 50.0, [[0.1], [0.7]], [0.4]), 1.0, rtol=1e-12)


@given(st.floats(1e-3, 3.0), st.floats(-2, 2))
def test_wrapped_gaussian_matches_image_sum(s, x):
    # direct image sum with generous truncation, independent of the switch inside the kernel
    L = 1.3
    n = np.arange(-60, 61)
    direct = np.sum(np.exp(-((x + n * L) ** 2) / (4 * s))) / math.sqrt(4 * math.pi * s)
    got = base_eval(BaseKernel(torus(1, L)), s, [x], [0.0])
    assert got == pytest.approx(direct, rel=1e-12, abs=1e-300)


# ---------------------------------------------------------------- fractional kernel

def test_poisson_kernel_at_boundary():
    k = frac(euclidean_box(1, 10), 1.0)
    assert k.value(1.0, [0.0], [0.0]) == pytest.approx(INV_PI, rel=1e-9)
    r = np.linspace(0, 20, 41)
    np.testing.assert_allclose(k.value(2.0, [0.0], (2 * r)[:, None]), 2 / (math.pi * (4 + 4 * r**2)), rtol=1e-7)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
def test_torus_kernel_matches_fourier_series(alpha):
    # an independent route: the torus symbol exp(-t |2 pi k / L|^alpha)
    k = frac(torus(1, 2.0), alpha)
    x = np.linspace(0, 2, 17)
    for t in (0.05, 0.5):
        np.testing.assert_allclose(k.value(t, x[:, None], [0.0]), torus_series(t, x, alpha, 2.0), rtol=1e-8)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
@pytest.mark.parametrize("d", [1, 2])
def test_normalization(alpha, d):
    assert abs(normalization_defect(frac(torus(d, 1.0), alpha), 0.1, nodes=128 if d == 1 else 64)) < 1e-6
    assert abs(normalization_defect(frac(euclidean_box(d, 10), alpha), 1.0, nodes=401 if d == 1 else 201)) < 1e-5


@given(st.floats(0.05, 3), st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.sampled_from([1.2, 1.5, 1.8]))
def test_symmetry_and_scaling(t, c, alpha):
    k = frac(euclidean_box(2, 10), alpha)
    x, y = np.array(c[:2]), np.array(c[2:])
    assert symmetry_defect(k, t, x, y) < 1e-12
    assert scaling_defect(k, t, x, y) < 1e-8


def test_semigroup_on_torus():
    k = frac(torus(1, 1.0), 1.5)
    assert semigroup_defect(k, 0.03, 0.05, [0.1], [0.4]) < 1e-9


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
def test_tail_slope(alpha):
    for d in (1, 2):
        assert tail_slope(frac(euclidean_box(d, 10), alpha)) == pytest.approx(-(d + alpha), abs=0.05)
    with pytest.raises(ValueError):
        tail_slope(frac(torus(1, 1.0), alpha))


def test_quadrature_error_estimate_small():
    kv = frac_eval(frac(euclidean_box(1, 10), 1.5), np.array([0.01, 1.0, 100.0]), [0.0], [0.5])
    assert not kv.flagged
    assert np.all(kv.error <= 1e-9 * kv.value)


def test_batch_invariance():
    # each point's value must not depend on what else is evaluated with it
    k = frac(torus(1, 1.0), 1.5)
    x = np.linspace(0, 1, 50)[:, None]
    whole = k.value(0.1, x, [0.2])
    single = np.array([k.value(0.1, xi, [0.2]) for xi in x])
    assert np.array_equal(whole, single.ravel())


@pytest.mark.parametrize("dom", [euclidean_box(2, 10), torus(2, 1.0)])
def test_derivatives_against_differences(dom):
    k = frac(dom, 1.5)
    fd = fd_derivative_check(k, 0.2, [0.1, -0.05], [0.3, 0.2])
    assert fd["grad_rel_error"] < 1e-5 and fd["hess_rel_error"] < 1e-5


# ---------------------------------------------------------------- profile and reports

def test_xi_examples():
    assert xi_eval(XiProfile(1.5, 1), 1.0, 0.0) == pytest.approx(1.0)
    assert xi_eval(XiProfile(1.5, 1), 1.0, 2.0) == pytest.approx(2**-2.5)
    assert xi_eval(XiProfile(1.5, 1, 1.0), 1.0, 2.0) == pytest.approx(2**-2.5 + 2**-1.5)


@given(st.floats(1e-3, 10), st.floats(0, 50), st.floats(0, 50))
def test_xi_decreasing_in_r(t, r1, r2):
    prof = XiProfile(1.5, 2, 4.0)
    lo, hi = sorted((r1, r2))
    assert prof(t, hi) <= prof(t, lo)


def test_three_p_diagonal_formula():
    # s = t, r = u beyond the kink: xi(t,r) / xi(2t,2r) = 2^(d+alpha-1)
    prof = XiProfile(1.5, 1)
    assert prof(1.0, 3.0) / prof(2.0, 6.0) == pytest.approx(2.82842712474619, rel=1e-12)


def test_three_p_report_values():
    rep = three_p_report(XiProfile(1.5, 1), SampleSpec(n=1024))
    # the m = d form respects 2^(6m/alpha); the m = 0 form reaches 2^(alpha-1) > 1
    assert rep["xi_m1_ok"] and rep["xi_m1"] <= 16.0
    assert rep["xi_m0"] == pytest.approx(2**0.5, rel=1e-6)
    assert not rep["xi_m0_ok"]
    assert np.isfinite(rep["xi"])


def test_three_p_kernel_finite():
    rep = three_p_kernel_report(frac(euclidean_box(1, 10), 1.5), SampleSpec(n=256))
    assert rep["ok"] and 1.0 < rep["constant"] < 10


def test_two_sided_boundary_oracle():
    # alpha = 1, d = 1: the ratio is (1/pi)(1+u^2)^(-1)(u v 1)^2, extremes 1/(2 pi) and 1/pi
    rep = two_sided_report(frac(euclidean_box(1, 10), 1.0), sample=SampleSpec(n=256))
    assert rep["c_low"] == pytest.approx(INV_2PI, rel=1e-6)
    assert rep["c_high"] == pytest.approx(INV_PI, rel=1e-6)


def test_gradient_boundary_oracle():
    # |d_r p| t / xi = 2 r (u v 1)^2 / (pi (1+r^2)^2): sup 3 sqrt(3) / (8 pi) at r = 1/sqrt(3) and sqrt(3)
    rep = grad_bound_report(frac(euclidean_box(1, 10), 1.0), 1, sample=SampleSpec(n=256))
    assert rep["constant"] == pytest.approx(0.206748335783172019, rel=1e-6)
    # second derivative: |p''| t^2 / xi peaks at r = 0 with value 2 / pi
    rep2 = grad_bound_report(frac(euclidean_box(1, 10), 1.0), 2, sample=SampleSpec(n=256))
    assert rep2["constant"] == pytest.approx(2 * INV_PI, rel=1e-6)


def test_grad_zero_on_diagonal():
    k = frac(torus(2, 1.0), 1.5)
    np.testing.assert_allclose(k.grad(0.3, [0.2, 0.4], [0.2, 0.4]), 0.0, atol=1e-14)


def test_eta_degenerate_and_symmetric():
    k = frac(euclidean_box(2, 10), 1.5)
    x, x2, y = np.array([0.2, 0.1]), np.array([-0.4, 0.5]), np.array([1.0, 0.0])
    assert eta_eval(k, 0.5, x, x, y) == pytest.approx(3 * k.value(0.5, x, y), rel=1e-12)
    assert eta_eval(k, 0.5, x, x2, y) == pytest.approx(eta_eval(k, 0.5, x2, x, y), rel=1e-12)


def test_eta_boundary_antiderivative():
    # alpha = 1: the geodesic integral of the Poisson kernel is an arctan difference (mpmath value)
    k = frac(euclidean_box(1, 10), 1.0)
    assert eta_eval(k, 1.0, [0.2], [1.0], [0.0]) == pytest.approx(0.699180943609288716, rel=1e-9)


def test_holder_report_finite():
    rep = holder_grad_report(frac(euclidean_box(1, 10), 1.5), 1.2, SampleSpec(n=64))
    assert rep["ok"] and rep["drift"] < 0.1
    with pytest.raises(ValueError):
        holder_grad_report(frac(euclidean_box(1, 10), 1.5), 1.6)
