"""Flat geometries: Euclidean box and flat torus.

Both carry the distance, minimal geodesics, ball volumes and tensor
quadrature grids used by the kernel, Kato and Duhamel modules.  Points are
arrays whose last axis has length ``d``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi

import numpy as np

__all__ = [
    "Domain",
    "GridSpec",
    "Grid",
    "euclidean_box",
    "torus",
    "unit_ball_volume",
    "distance",
    "geodesic_point",
    "measure_ball",
    "build_grid",
    "graded_time_nodes",
    "simpson_weights",
]


def unit_ball_volume(d: int) -> float:
    """Volume omega_d of the unit ball in R^d."""
    return pi ** (d / 2) / gamma(d / 2 + 1)


@dataclass(frozen=True)
class Domain:
    """A flat geometry.

    ``kind`` is ``"euclidean-box"`` (infinite measure, integrals truncated to
    ``[-extent, extent]^d`` with an analytic far field) or ``"torus"``
    (period ``extent`` per axis, total mass ``extent**d``).
    """

    kind: str
    d: int
    extent: float

    def __post_init__(self):
        if self.kind not in ("euclidean-box", "torus"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("dimension must be an integer >= 1")
        if not self.extent > 0:
            raise ValueError("extent must be positive")

    @property
    def is_torus(self) -> bool:
        return self.kind == "torus"

    @property
    def total_mass(self) -> float:
        """mu(M); ``inf`` for the Euclidean box."""
        return self.extent ** self.d if self.is_torus else float("inf")

    @property
    def diameter(self) -> float:
        if self.is_torus:
            return self.extent * np.sqrt(self.d) / 2
        return float("inf")

    def as_points(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        if x.shape[-1] != self.d:
            raise ValueError(
                f"point dimension {x.shape[-1]} does not match domain dimension {self.d}"
            )
        return x

    def wrap(self, x) -> np.ndarray:
        """Reduce torus coordinates to [0, L); identity on the box."""
        x = self.as_points(x)
        if self.is_torus:
            return np.mod(x, self.extent)
        return x

    def difference(self, x, y) -> np.ndarray:
        """Coordinate difference x - y; minimal-wrap representative on the torus.

        On the torus each coordinate lies in (-L/2, L/2]; an exact antipodal
        tie resolves to +L/2 (positive wrap direction).
        """
        x = self.as_points(x)
        y = self.as_points(y)
        delta = x - y
        if self.is_torus:
            L = self.extent
            delta = -np.mod(-delta + L / 2, L) + L / 2
        return delta


def euclidean_box(d: int, half_width: float) -> Domain:
    return Domain("euclidean-box", d, half_width)


def torus(d: int, period: float = 1.0) -> Domain:
    return Domain("torus", d, period)


def distance(dom: Domain, x, y) -> np.ndarray:
    """rho(x, y); per-coordinate wrapped differences on the torus."""
    delta = dom.difference(x, y)
    return np.sqrt(np.sum(delta**2, axis=-1))


def geodesic_point(dom: Domain, x, x2, theta) -> np.ndarray:
    """Point gamma_theta on the minimal geodesic from ``x`` to ``x2``."""
    theta = np.asarray(theta, dtype=float)
    if np.any((theta < 0) | (theta > 1)):
        raise ValueError("theta must lie in [0, 1]")
    x = dom.as_points(x)
    # direction x2 - x, so difference(x2, x)
    step = dom.difference(x2, x)
    out = x + theta[..., None] * step if theta.ndim else x + theta * step
    if dom.is_torus:
        out = np.mod(out, dom.extent)
    return out


def measure_ball(dom: Domain, x, r) -> np.ndarray:
    """mu(B(x, r)); exact, independent of ``x``.

    The box uses the untruncated Euclidean volume omega_d r^d.  On the torus
    the value is exact for d <= 2 and for r <= L/2 in any dimension; larger
    balls with d >= 3 fall back to a midpoint-cell count.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    d = dom.d
    if not dom.is_torus:
        return unit_ball_volume(d) * r**d
    L = dom.extent
    if d == 1:
        return np.minimum(2 * r, L)
    a = L / 2
    if d == 2:
        rc = np.maximum(r, a)
        # disc minus the four circular segments cut off by the square's sides
        seg = rc**2 * np.arccos(a / rc) - a * np.sqrt(rc**2 - a**2)
        out = np.where(r <= a, pi * r**2, pi * rc**2 - 4 * seg)
        return np.where(r >= a * np.sqrt(2), L**2, np.minimum(out, L**2))
    small = unit_ball_volume(d) * r**d
    flat = np.atleast_1d(np.where(r <= a, small, 0.0)).astype(float)
    rflat = np.atleast_1d(r)
    if np.any(rflat > a):
        # d >= 3 beyond the inscribed radius: midpoint-cell volume of cube n ball
        n = 60
        g = (np.arange(n) + 0.5) / n * L - a
        mesh = np.stack(np.meshgrid(*([g] * d), indexing="ij"), axis=-1)
        rr = np.sqrt(np.sum(mesh**2, axis=-1)).ravel()
        cell = (L / n) ** d
        flat[rflat > a] = [np.count_nonzero(rr <= b) * cell for b in rflat[rflat > a]]
    out = flat.reshape(np.shape(r))
    return np.minimum(out, L**d)


@dataclass(frozen=True)
class GridSpec:
    nodes_per_axis: int = 64
    time_slices: int = 16
    far_field_cut: float | None = None

    def __post_init__(self):
        if self.nodes_per_axis < 3:
            raise ValueError("nodes_per_axis must be >= 3")
        if self.time_slices < 2:
            raise ValueError("time_slices must be >= 2")


@dataclass(frozen=True)
class Grid:
    """Tensor spatial grid with quadrature weights plus time nodes."""

    axis: np.ndarray
    axis_weights: np.ndarray
    d: int
    times: np.ndarray

    @property
    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*([self.axis] * self.d), indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.d)

    @property
    def weights(self) -> np.ndarray:
        w = self.axis_weights
        out = w
        for _ in range(self.d - 1):
            out = np.multiply.outer(out, w)
        return np.asarray(out).ravel()


def simpson_weights(n: int, a: float, b: float) -> np.ndarray:
    """Composite Simpson weights on n equispaced nodes of [a, b].

    Even n (odd interval count) closes the last three intervals with the
    Simpson 3/8 rule.
    """
    if n < 3:
        raise ValueError("Simpson rule needs at least 3 nodes")
    h = (b - a) / (n - 1)
    w = np.zeros(n)
    m = n - 1
    simpson_end = m if m % 2 == 0 else m - 3
    if simpson_end > 0:
        w[0:simpson_end + 1:2] += 2 * h / 3
        w[1:simpson_end:2] += 4 * h / 3
        w[0] -= h / 3
        w[simpson_end] -= h / 3
    if m % 2 == 1:
        j = simpson_end
        w[j:j + 4] += 3 * h / 8 * np.array([1, 3, 3, 1])
    return w


def graded_time_nodes(t0: float, t1: float, count: int) -> np.ndarray:
    """``count`` nodes in (t0, t1] refined toward ``t0``.

    u_i = (i / count)^(3/2): the first slice sits at count^(-3/2) of the
    window, close enough to resolve the early-time regime without forcing
    an excessive spectral resolution.  The last node is ``t1``.
    """
    if not t1 > t0:
        raise ValueError("empty time window")
    if count < 2:
        raise ValueError("need at least two time slices")
    u = (np.arange(1, count + 1) / count) ** 1.5
    u[-1] = 1.0
    return t0 + (t1 - t0) * u


def build_grid(dom: Domain, spec: GridSpec, window: tuple[float, float]) -> Grid:
    """Tensor nodes with quadrature weights and graded time slices.

    Box: equispaced nodes on [-R, R] with Simpson weights.  Torus: periodic
    trapezoid nodes k L / n with equal weights L / n.
    """
    n = spec.nodes_per_axis
    if dom.is_torus:
        L = dom.extent
        axis = np.arange(n) * (L / n)
        w = np.full(n, L / n)
    else:
        R = dom.extent
        axis = np.linspace(-R, R, n)
        w = simpson_weights(n, -R, R)
    times = graded_time_nodes(window[0], window[1], spec.time_slices)
    return Grid(axis=axis, axis_weights=w, d=dom.d, times=times)
