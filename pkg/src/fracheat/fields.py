"""Built-in time-space fields for potentials c, drifts b and Kato tests.

Every scalar field has the separable form f(t, x) = g(t) h(x).  The time
factor is extended by zero to t < 0.  On the torus, spatial profiles are
made periodic by summing the nearest images, so they stay smooth.

Drift divergence is exposed twice.  ``div`` is the usual divergence.
``div_mu`` is its negative.  The negative sign makes
int (div_mu b) f dmu = int <b, grad f> dmu, which is the convention the
divergence-rewritten iteration uses.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Domain

__all__ = [
    "TimeProfile",
    "ScalarField",
    "Constant",
    "Bump",
    "RadialPower",
    "Separable",
    "SumField",
    "ScaledField",
    "VectorField",
    "ConstantDrift",
    "BumpDrift",
    "SwirlDrift",
    "ZeroDrift",
    "DriftNorm",
    "DriftDivergence",
]

_IMAGE_RANGE = (-2, -1, 0, 1, 2)


@dataclass(frozen=True)
class TimeProfile:
    """g(t) = 1 for t >= 0, or |t - t0|^(-a) on 0 < |t - t0| <= 1 (and t >= 0).

    ``a = 0`` with no window is the time-independent case.  The singular
    profile lies in L^q exactly when a q < 1.
    """

    exponent: float = 0.0
    center: float = 0.0
    windowed: bool = False

    @property
    def constant(self) -> bool:
        return not self.windowed and self.exponent == 0

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.where(t >= 0, 1.0, 0.0)
        if self.windowed:
            gap = np.abs(t - self.center)
            with np.errstate(divide="ignore"):
                core = np.where((gap > 0) & (gap <= 1), gap ** (-self.exponent), 0.0)
            out = out * core
        return out

    def singular_times(self) -> tuple[float, ...]:
        """Times where g is singular or jumps (used as quadrature breaks)."""
        pts = [0.0]
        if self.windowed:
            pts += [self.center, self.center - 1, self.center + 1]
        return tuple(pts)


def _offsets(dom: Domain, x, center):
    """x - center; on the torus one entry per image shift (last-but-one axis)."""
    x = dom.as_points(x)
    c = np.asarray(center, dtype=float)
    delta = dom.difference(x, c) if dom.is_torus else x - c
    if not dom.is_torus:
        return delta[..., None, :]
    L = dom.extent
    shifts = np.array(np.meshgrid(*([_IMAGE_RANGE] * dom.d), indexing="ij")).reshape(dom.d, -1).T
    return delta[..., None, :] + L * shifts


@dataclass(frozen=True)
class ScalarField:
    """Base class: f(t, x) = g(t) h(x) on a domain."""

    domain: Domain

    time: TimeProfile = field(default_factory=TimeProfile, kw_only=True)

    # radial singularity data used by the Kato quadrature
    def singular_center(self):
        return None

    @property
    def local_exponent(self) -> float:
        """theta with |h| ~ rho(., x0)^(-theta) near its singular point (0 if bounded)."""
        return 0.0

    def peak_points(self) -> np.ndarray:
        """Points where sup_x of a kernel average of |h| is attained (radially decreasing h)."""
        return np.zeros((1, self.domain.d))

    def radial_breaks(self) -> tuple[float, ...]:
        return ()

    def spatial(self, x) -> np.ndarray:
        raise NotImplementedError

    def polar(self, x, rho, dirs) -> np.ndarray:
        """h(x + rho * dir) for radii ``rho`` (..., n) and unit ``dirs`` (..., d)."""
        return self.spatial(np.asarray(x) + rho[..., None] * dirs[..., None, :])

    def __call__(self, t, x) -> np.ndarray:
        return self.time(t) * self.spatial(x)

    def grad(self, x) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no analytic gradient")


@dataclass(frozen=True)
class Constant(ScalarField):
    kappa: float = 1.0

    def spatial(self, x):
        x = self.domain.as_points(x)
        return np.full(x.shape[:-1], float(self.kappa))

    def grad(self, x):
        return np.zeros_like(self.domain.as_points(x), dtype=float)


@dataclass(frozen=True)
class Bump(ScalarField):
    """height * exp(-|x - center|^2 / (2 width^2)), image-summed on the torus."""

    center: tuple = (0.0,)
    width: float = 0.1
    height: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("bump width must be positive")
        if len(self.center) != self.domain.d:
            raise ValueError("bump center has the wrong dimension")

    def peak_points(self):
        return np.asarray(self.center, dtype=float)[None, :]

    def _parts(self, x):
        off = _offsets(self.domain, x, self.center)
        e = self.height * np.exp(-np.sum(off**2, axis=-1) / (2 * self.width**2))
        return off, e

    def spatial(self, x):
        _, e = self._parts(x)
        return e.sum(axis=-1)

    def grad(self, x):
        off, e = self._parts(x)
        return -np.sum(off * e[..., None], axis=-2) / self.width**2

    def hess_trace(self, x):
        off, e = self._parts(x)
        d = self.domain.d
        r2 = np.sum(off**2, axis=-1)
        return np.sum(e * (r2 / self.width**4 - d / self.width**2), axis=-1)


@dataclass(frozen=True)
class RadialPower(ScalarField):
    """rho(x, center)^(-theta), optionally cut off beyond ``cutoff``."""

    center: tuple = (0.0,)
    theta: float = 0.5
    cutoff: float = float("inf")

    def __post_init__(self):
        if self.theta < 0:
            raise ValueError("theta must be nonnegative")

    def singular_center(self):
        return np.asarray(self.center, dtype=float)

    @property
    def local_exponent(self):
        return self.theta

    @property
    def locally_integrable(self) -> bool:
        return self.theta < self.domain.d

    def peak_points(self):
        return np.asarray(self.center, dtype=float)[None, :]

    def radial_breaks(self):
        return (self.cutoff,) if np.isfinite(self.cutoff) else ()

    def _profile(self, r):
        with np.errstate(divide="ignore"):
            out = np.where(r > 0, r ** (-self.theta), np.inf)
        return np.where(r <= self.cutoff, out, 0.0)

    def spatial(self, x):
        x = self.domain.as_points(x)
        r = np.sqrt(np.sum(self.domain.difference(x, np.asarray(self.center, float)) ** 2, axis=-1))
        return self._profile(r)

    def polar(self, x, rho, dirs):
        gap = self.domain.difference(self.domain.as_points(x), np.asarray(self.center, float))
        if np.all(gap == 0):
            # centred at the singularity: rho is the exact distance
            return self._profile(rho)
        return super().polar(x, rho, dirs)


@dataclass(frozen=True)
class Separable(ScalarField):
    """g(t) h(x) with a singular time profile and a built-in spatial field."""

    spatial_field: ScalarField | None = None

    def __post_init__(self):
        if self.spatial_field is None:
            raise ValueError("separable field needs a spatial factor")

    def singular_center(self):
        return self.spatial_field.singular_center()

    @property
    def local_exponent(self):
        return self.spatial_field.local_exponent

    def peak_points(self):
        return self.spatial_field.peak_points()

    def radial_breaks(self):
        return self.spatial_field.radial_breaks()

    def spatial(self, x):
        return self.spatial_field.spatial(x)

    def polar(self, x, rho, dirs):
        return self.spatial_field.polar(x, rho, dirs)


@dataclass(frozen=True)
class SumField(ScalarField):
    """Sum of time-independent fields, e.g. c + div_mu b."""

    parts: tuple = ()

    def __post_init__(self):
        if any(not p.time.constant for p in self.parts):
            raise ValueError("sums are only formed for time-independent fields")

    def singular_center(self):
        for p in self.parts:
            if p.singular_center() is not None:
                return p.singular_center()
        return None

    @property
    def local_exponent(self):
        return max((p.local_exponent for p in self.parts), default=0.0)

    def peak_points(self):
        return np.unique(np.concatenate([p.peak_points() for p in self.parts]), axis=0)

    def radial_breaks(self):
        return tuple(b for p in self.parts for b in p.radial_breaks())

    def spatial(self, x):
        out = 0.0
        for p in self.parts:
            out = out + p.spatial(x)
        return out

    def polar(self, x, rho, dirs):
        out = 0.0
        for p in self.parts:
            out = out + p.polar(x, rho, dirs)
        return out


@dataclass(frozen=True)
class ScaledField(ScalarField):
    base: ScalarField | None = None
    factor: float = 1.0

    def singular_center(self):
        return self.base.singular_center()

    @property
    def local_exponent(self):
        return self.base.local_exponent

    def peak_points(self):
        return self.base.peak_points()

    def radial_breaks(self):
        return self.base.radial_breaks()

    def spatial(self, x):
        return self.factor * self.base.spatial(x)

    def polar(self, x, rho, dirs):
        return self.factor * self.base.polar(x, rho, dirs)


# ---------------------------------------------------------------- drifts

@dataclass(frozen=True)
class VectorField:
    """Time-independent drift b(x) with an analytic divergence."""

    domain: Domain

    def __call__(self, x) -> np.ndarray:
        raise NotImplementedError

    def div(self, x) -> np.ndarray:
        """Usual divergence sum_i d b_i / d x_i."""
        raise NotImplementedError

    def div_mu(self, x) -> np.ndarray:
        """Divergence in the integration-by-parts sign convention (= -div)."""
        return -self.div(x)

    def peak_points(self) -> np.ndarray:
        return np.zeros((1, self.domain.d))

    def at(self, t, x) -> np.ndarray:
        """b(t, x) with the zero extension to t < 0."""
        t = np.asarray(t, dtype=float)
        return np.where(t[..., None] >= 0, 1.0, 0.0) * self(x)


@dataclass(frozen=True)
class ZeroDrift(VectorField):
    def __call__(self, x):
        return np.zeros_like(self.domain.as_points(x), dtype=float)

    def div(self, x):
        return np.zeros(self.domain.as_points(x).shape[:-1])


@dataclass(frozen=True)
class ConstantDrift(VectorField):
    vector: tuple = (0.0,)

    def __post_init__(self):
        if len(self.vector) != self.domain.d:
            raise ValueError("drift vector has the wrong dimension")

    def __call__(self, x):
        x = self.domain.as_points(x)
        return np.broadcast_to(np.asarray(self.vector, float), x.shape).copy()

    def div(self, x):
        return np.zeros(self.domain.as_points(x).shape[:-1])


@dataclass(frozen=True)
class BumpDrift(VectorField):
    """vector * bump(x)."""

    center: tuple = (0.0,)
    width: float = 0.1
    vector: tuple = (1.0,)

    def _bump(self):
        return Bump(self.domain, center=self.center, width=self.width, height=1.0)

    def peak_points(self):
        return np.asarray(self.center, dtype=float)[None, :]

    def __call__(self, x):
        return self._bump().spatial(x)[..., None] * np.asarray(self.vector, float)

    def div(self, x):
        return self._bump().grad(x) @ np.asarray(self.vector, float)


@dataclass(frozen=True)
class SwirlDrift(VectorField):
    """Divergence-free swirl strength * bump(x) * J (x - center) in d = 2.

    It equals the rotated gradient of -strength * width^2 * bump.
    """

    center: tuple = (0.5, 0.5)
    width: float = 0.1
    strength: float = 1.0

    def __post_init__(self):
        if self.domain.d != 2:
            raise ValueError("swirl drift is two-dimensional")

    def peak_points(self):
        return np.asarray(self.center, dtype=float)[None, :]

    def __call__(self, x):
        off = _offsets(self.domain, x, self.center)
        e = np.exp(-np.sum(off**2, axis=-1) / (2 * self.width**2))
        rot = np.stack([-off[..., 1], off[..., 0]], axis=-1)
        return self.strength * np.sum(rot * e[..., None], axis=-2)

    def div(self, x):
        return np.zeros(self.domain.as_points(x).shape[:-1])


@dataclass(frozen=True)
class DriftNorm(ScalarField):
    """|b| as a scalar field (for the Kato functionals)."""

    drift: VectorField | None = None

    def peak_points(self):
        return self.drift.peak_points()

    def spatial(self, x):
        return np.linalg.norm(self.drift(x), axis=-1)


@dataclass(frozen=True)
class DriftDivergence(ScalarField):
    """div_mu b as a scalar field."""

    drift: VectorField | None = None

    def peak_points(self):
        return self.drift.peak_points()

    def spatial(self, x):
        return self.drift.div_mu(x)
