"""One-sided stable subordination law mu_t.

mu_t has Laplace transform exp(-t lam^(alpha/2)), i.e. it is the one-sided
stable law of index ``beta = alpha/2``.  Subordinating the heat semigroup of
the Laplacian with it yields the alpha-stable semigroup exp(-t (-Delta)^(alpha/2)).

The standardized density g (t = 1) is evaluated by Kanter's finite-interval
integral

    g(x) = k/pi * x^(-1/(1-beta)) * int_0^pi A(phi) exp(-A(phi) x^(-k)) dphi,
    A(phi) = [sin(beta phi)^beta sin((1-beta) phi)^(1-beta) / sin phi]^(1/(1-beta)),
    k = beta/(1-beta),

with a tanh-sinh rule, and by the convergent large-x series for
x^(-beta) <= 1/2.  Every clock integral int F(s) mu_t(ds) is computed by a
trapezoid rule in log s over the standardized law (``ClockRule``), which is
exponentially convergent for the smooth integrands used here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gamma, log, pi

import numpy as np
from scipy.special import gammaln

from .quadrature import tanh_sinh_unit

__all__ = [
    "SubordinatorSpec",
    "ClockRule",
    "clock_rule",
    "standard_density",
    "density",
    "laplace",
    "laplace_report",
    "gauss_moment_integral",
    "qq_envelope_constant",
]

_SERIES_SWITCH = 0.5
_SERIES_TERMS = 80


@dataclass(frozen=True)
class SubordinatorSpec:
    """Stability parameter alpha in (0, 2); subordinator index alpha/2."""

    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise ValueError("alpha must lie in (0, 2)")

    @property
    def sub_index(self) -> float:
        return self.alpha / 2

    @property
    def perturbative_range(self) -> bool:
        """True when alpha is in (1, 2), where the perturbation theory applies."""
        return 1 < self.alpha < 2

    @property
    def clock(self) -> "ClockRule":
        return clock_rule(self.alpha)


def _kanter_log_a(b: float, level: int):
    u, w, uc = tanh_sinh_unit(level)
    phi = pi * u
    # sin(phi) via the nearer endpoint keeps relative precision at both ends
    log_a = (
        b * np.log(np.sin(b * phi))
        + (1 - b) * np.log(np.sin((1 - b) * phi))
        - np.log(np.sin(pi * np.minimum(u, uc)))
    ) / (1 - b)
    return log_a, w


def _density_kanter(x: np.ndarray, b: float, level: int = 7) -> np.ndarray:
    log_a, w = _kanter_log_a(b, level)
    k = b / (1 - b)
    lx = np.log(x)[..., None]
    with np.errstate(over="ignore", under="ignore"):
        expo = log_a - np.exp(log_a - k * lx) - lx / (1 - b)
        vals = np.exp(expo)
    return k * (vals @ w)


def _density_series(x: np.ndarray, b: float) -> np.ndarray:
    n = np.arange(1, _SERIES_TERMS + 1)
    coef = (-1.0) ** (n + 1) * np.exp(gammaln(n * b + 1) - gammaln(n + 1)) * np.sin(n * pi * b)
    lx = np.log(x)[..., None]
    return np.sum(coef * np.exp(-(n * b + 1) * lx), axis=-1) / pi


def standard_density(b: float, x) -> np.ndarray:
    """Density g_b(x) of the one-sided stable law with Laplace exp(-lam^b)."""
    if not 0 < b < 1:
        raise ValueError("subordinator index must lie in (0, 1)")
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("clock value must be positive")
    flat = x.ravel()
    out = np.empty_like(flat)
    use_series = flat ** (-b) <= _SERIES_SWITCH
    if np.any(use_series):
        out[use_series] = _density_series(flat[use_series], b)
    if np.any(~use_series):
        out[~use_series] = _density_kanter(flat[~use_series], b)
    return out.reshape(x.shape)


@dataclass(frozen=True)
class ClockRule:
    """Trapezoid rule in u = log v for the standardized law.

    ``int F(s) mu_t(ds) ~= sum_j weights[j] * F(t^(1/b) * nodes[j])``.  The
    arrays are read-only once built.
    """

    alpha: float
    step: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def b(self) -> float:
        return self.alpha / 2

    def clock_values(self, t) -> np.ndarray:
        """Clock nodes s_j = t^(2/alpha) v_j; shape ``t.shape + (J,)``."""
        t = np.asarray(t, dtype=float)
        return t[..., None] ** (1.0 / self.b) * self.nodes

    def coarse(self) -> "ClockRule":
        """Same rule with doubled step (every other node)."""
        return ClockRule(self.alpha, 2 * self.step, self.nodes[::2], 2 * self.weights[::2])


def _build_clock(alpha: float, refine: int) -> ClockRule:
    b = alpha / 2
    k = b / (1 - b)
    # analyticity strip of the log-variable integrand
    strip = min(pi * (1 - b) / (2 * b), pi / 2)
    step = min(0.05, 2 * pi * strip / 40) / 2**refine
    log_a0 = (b * log(b) + (1 - b) * log(1 - b)) / (1 - b)
    # below u_min the factor exp(-A(0) v^-k) is < e^-760
    u_min = (log_a0 - log(760.0)) / k
    # above u_max the remaining mass ~ v^-b / Gamma(1-b) is < 1e-17
    u_max = (log(1e17) - log(gamma(1 - b))) / b
    u = np.arange(u_min, u_max + step, step)
    v = np.exp(u)
    g = standard_density(b, v)
    w = step * g * v
    keep = w > 0
    v, w = v[keep], w[keep]
    v.flags.writeable = False
    w.flags.writeable = False
    return ClockRule(alpha=alpha, step=step, nodes=v, weights=w)


@lru_cache(maxsize=32)
def clock_rule(alpha: float, refine: int = 0) -> ClockRule:
    """Sealed clock rule for ``alpha``; ``refine`` halves the step per level."""
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    return _build_clock(float(alpha), refine)


def density(spec: SubordinatorSpec, t, s) -> np.ndarray:
    """Density of mu_t at clock value s: t^(-2/alpha) g(s t^(-2/alpha))."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(t <= 0) or np.any(s <= 0):
        raise ValueError("t and s must be positive")
    scale = t ** (-1.0 / spec.sub_index)
    return scale * standard_density(spec.sub_index, s * scale)


def laplace(spec: SubordinatorSpec, t, lam, rule: ClockRule | None = None) -> np.ndarray:
    """int exp(-lam s) mu_t(ds) by the clock rule."""
    lam = np.asarray(lam, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(lam < 0):
        raise ValueError("Laplace variable must be nonnegative")
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    rule = rule or spec.clock
    s = rule.clock_values(t)
    lam_b = lam[..., None] if lam.ndim else lam
    return np.exp(-lam_b * s) @ rule.weights


def laplace_report(spec: SubordinatorSpec, ts, lams, tol: float = 1e-6) -> dict:
    """Relative error of ``laplace`` against exp(-t lam^(alpha/2)) on a grid."""
    T, Lam = np.meshgrid(np.asarray(ts, float), np.asarray(lams, float), indexing="ij")
    got = laplace(spec, T.ravel(), Lam.ravel())
    exact = np.exp(-T.ravel() * Lam.ravel() ** spec.sub_index)
    rel = np.abs(got / exact - 1)
    return {
        "t": T.ravel(),
        "lam": Lam.ravel(),
        "value": got,
        "exact": exact,
        "rel_error": rel,
        "max_rel_error": float(rel.max()),
        "ok": bool(rel.max() < tol),
    }


def gauss_moment_integral(spec: SubordinatorSpec, t, r, lam, m, rule: ClockRule | None = None):
    """J = int s^(-m/2) exp(-lam r^2 / s) mu_t(ds) and the normalized ratio.

    The ratio J (r v t^(1/alpha))^(m+alpha) / t is bounded above and below
    uniformly in (t, r) for fixed (lam, m).
    """
    if m < 0 or lam <= 0:
        raise ValueError("need m >= 0 and lam > 0")
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    t, r = np.broadcast_arrays(t, r)
    rule = rule or spec.clock
    s = rule.clock_values(t)
    with np.errstate(under="ignore"):
        integrand = s ** (-m / 2) * np.exp(-lam * r[..., None] ** 2 / s)
    J = integrand @ rule.weights
    a = spec.alpha
    ratio = J * np.maximum(r, t ** (1 / a)) ** (m + a) / t
    return J, ratio


def qq_envelope_constant(spec: SubordinatorSpec, t: float = 1.0, points: int = 400,
                         span: tuple[float, float] = (-6.0, 12.0)) -> float:
    """sup_s density(t, s) / [t s^(-(2+alpha)/2) exp(-t s^(-alpha/2))] on a log grid."""
    a = spec.alpha
    s = np.logspace(span[0], span[1], points) * t ** (2 / a)
    dens = density(spec, t, s)
    with np.errstate(over="ignore", under="ignore"):
        log_env = log(t) - (2 + a) / 2 * np.log(s) - t * s ** (-a / 2)
        ratio = np.where(dens > 0, np.exp(np.log(np.maximum(dens, 1e-320)) - log_env), 0.0)
    return float(ratio.max())
