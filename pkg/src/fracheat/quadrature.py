"""Fixed quadrature rules shared by the kernel, Kato and Duhamel modules.

The tanh-sinh (double exponential) rule is the workhorse for integrands with
algebraic endpoint singularities, e.g. s^(-gamma/alpha) (eps - s)^(-beta/alpha).
Nodes are generated in the distance-to-endpoint form so that values very
close to an endpoint keep full relative precision.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = [
    "tanh_sinh_unit",
    "tanh_sinh",
    "tanh_sinh_halfline",
    "gauss_legendre",
    "integrate_breaks",
]


@lru_cache(maxsize=32)
def tanh_sinh_unit(level: int = 6, tmax: float = 4.0):
    """Tanh-sinh rule on [0, 1].

    Returns ``(x, w, xc)`` with ``xc = 1 - x`` computed without cancellation.
    Step h = 2^-level in the t variable, truncated at |t| <= tmax.
    """
    h = 2.0 ** (-level)
    t = np.arange(-tmax, tmax + h / 2, h)
    u = 0.5 * np.pi * np.sinh(t)
    # x = (1 + tanh u)/2 = 1/(1 + e^{-2u}),  1 - x = 1/(1 + e^{2u})
    x = 1.0 / (1.0 + np.exp(-2 * u))
    xc = 1.0 / (1.0 + np.exp(2 * u))
    w = h * 0.5 * np.pi * np.cosh(t) / (2 * np.cosh(u) ** 2)
    keep = (x > 0) & (xc > 0) & (w > 0)
    x, xc, w = x[keep], xc[keep], w[keep]
    x.flags.writeable = False
    xc.flags.writeable = False
    w.flags.writeable = False
    return x, w, xc


def tanh_sinh(a: float, b: float, level: int = 6):
    """Nodes, weights and distances to both endpoints for [a, b]."""
    x, w, xc = tanh_sinh_unit(level)
    span = b - a
    return a + span * x, span * w, span * x, span * xc


def tanh_sinh_halfline(a: float, scale: float, level: int = 6):
    """Nodes/weights for [a, inf) via rho = a + scale * x / (1 - x)."""
    x, w, xc = tanh_sinh_unit(level)
    nodes = a + scale * x / xc
    weights = scale * w / xc**2
    return nodes, weights


@lru_cache(maxsize=64)
def gauss_legendre(n: int):
    """Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1), 0.5 * w


def integrate_breaks(f, breaks, tail_scale: float | None = None, level: int = 6):
    """Integrate a vectorized ``f`` over consecutive ``breaks``.

    Each sub-interval gets its own tanh-sinh rule so singular or kinked
    points must be listed among the breaks.  When ``tail_scale`` is given
    the last break is continued to +infinity.
    """
    breaks = np.asarray(breaks, dtype=float)
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b <= a:
            continue
        nodes, weights, _, _ = tanh_sinh(a, b, level)
        total = total + np.tensordot(f(nodes), weights, axes=([-1], [0]))
    if tail_scale is not None:
        nodes, weights = tanh_sinh_halfline(breaks[-1], tail_scale, level)
        total = total + np.tensordot(f(nodes), weights, axes=([-1], [0]))
    return total
