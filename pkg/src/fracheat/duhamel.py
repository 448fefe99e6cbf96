"""Perturbed kernels by Picard iteration on the Duhamel equation.

The perturbed kernel p_{b,c}(t, x; s, y) of L^(alpha) + b.grad + c is the
sum of increments Theta_n, where Theta_0 = p^(alpha) and

    Theta_n(t) = int_s^t P_{t-r}[ b . grad Theta_{n-1}(r) + c Theta_{n-1}(r) ] dr.

On the flat torus P_tau is diagonal in Fourier space (multiplier
exp(-tau |xi|^alpha)), so each increment is carried as Fourier coefficients.
Products with b and c are formed pseudo-spectrally on a 3/2 zero-padded
grid, gradients are exact multiplications by i xi, and the r-integral uses
composite Gauss-Legendre panels graded toward s with product-integration
weights that integrate the exponential exp(-(t - r) |xi|^alpha) exactly.
Only the slowly varying factor is interpolated.  The weighted norms
compare each increment against p^(alpha) evaluated by subordination.

Three forms of the increment share the same engine:

``forward``     b . grad Theta + c Theta          (solve)
``dual``        -div(b Theta) + c Theta           (dual equation, free variable y)
``divergence``  div(b Theta) + (c + div_mu b) Theta
                (the rewritten iteration; the derivative sits on the outer kernel)
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg

from .fields import ScalarField, VectorField
from .geometry import Domain, GridSpec, build_grid, distance
from .kernels import FracKernel, XiProfile, eta_eval, frac_eval
from .quadrature import gauss_legendre

__all__ = [
    "SolveConfig",
    "KernelField",
    "PicardIteration",
    "Increment",
    "solve",
    "dual_solve",
    "picard_terms",
    "kernel_matrices",
    "chapman_kolmogorov_residual",
    "bound_reports",
    "holder_gradient_report",
    "grad_y_report",
    "generator_weak_check",
    "exp_weights",
]

_SMALL_Z = 24.0
_DECAY_TARGET = 32.0  # exp(-32) ~ 1e-14: spectral truncation at round-off level


@dataclass(frozen=True)
class SolveConfig:
    """Resolution and stopping parameters of the Picard construction.

    ``window`` fixes the admissible window length; ``None`` selects it by
    bisection until the first-iteration ratio drops below
    ``smallness_target``.
    """

    grid: GridSpec = field(default_factory=GridSpec)
    window: float | None = None
    tol: float = 1e-9
    max_iterations: int = 40
    smallness_target: float = 1.0 / 3.0
    max_window: float = 1.0
    panel_nodes: int = 10
    panel_split: int = 1
    max_modes: int | None = None
    bisections: int = 12

    def refined(self) -> "SolveConfig":
        g = self.grid
        grid = GridSpec(2 * g.nodes_per_axis, 2 * g.time_slices, g.far_field_cut)
        return replace(self, grid=grid, panel_split=2 * self.panel_split)


class ContractionError(RuntimeError):
    """The Picard series did not reach the tolerance."""


# ---------------------------------------------------------------- time weights

@lru_cache(maxsize=8)
def _legendre_power(Q: int):
    """Power-basis coefficients a[m, i] of P_m(u) and binomials binom(i, j)."""
    a = np.zeros((Q, Q))
    for m in range(Q):
        unit = np.zeros(m + 1)
        unit[m] = 1.0
        a[m, : m + 1] = npleg.leg2poly(unit)
    i = np.arange(Q)
    binom = np.array([[math.comb(ii, jj) for jj in i] for ii in i], dtype=float)
    return a, binom


def _legendre_in_v(Q: int, c: float) -> np.ndarray:
    """C[m, j] with P_m(2 c (1 - v) - 1) = sum_j C[m, j] v^j."""
    a, binom = _legendre_power(Q)
    i = np.arange(Q)
    expo = i[:, None] - i[None, :]
    shift = np.where(expo >= 0, (2 * c - 1) ** np.maximum(expo, 0), 0.0)
    return (a @ (binom * shift)) * (-2 * c) ** i


def exp_weights(lam, h: float, width: float, Q: int) -> np.ndarray:
    """Product-integration weights on one panel.

    Returns w[q, k] with

        int_a^{a+h} exp(-(a + h - r) lam_k) l_q(r) dr = sum_q w[q, k] g(r_q)

    exact for polynomials g of degree < Q, where l_q is the Lagrange basis on
    the Q Gauss-Legendre nodes of the panel [a, a + width] and 0 < h <= width.
    """
    lam = np.asarray(lam, dtype=float).ravel()
    x, wq = gauss_legendre(Q)
    z = lam * h
    c = h / width
    M = np.empty((Q, z.size))
    small = z <= _SMALL_Z
    if np.any(small):
        v, wv = gauss_legendre(32)
        P = npleg.legvander(2 * c * (1 - v) - 1, Q - 1)
        E = np.exp(-np.outer(z[small], v)) * wv
        M[:, small] = (E @ P).T
    if np.any(~small):
        zl = z[~small]
        e = np.exp(-zl)
        K = np.empty((Q, zl.size))
        K[0] = -np.expm1(-zl) / zl
        for j in range(1, Q):
            K[j] = (j * K[j - 1] - e) / zl
        M[:, ~small] = _legendre_in_v(Q, c) @ K
    M *= h
    B = (2 * np.arange(Q) + 1) * npleg.legvander(2 * x - 1, Q - 1)
    return wq[:, None] * (B @ M)


def _panel_edges(T: float, lam_max: float, split: int) -> np.ndarray:
    """Panels of (0, T] halving toward 0 until the first resolves 1 / lam_max."""
    levels = max(3, math.ceil(math.log2(max(T * lam_max / 0.05, 2.0))))
    edges = [0.0] + [T * 2.0**-j for j in range(levels, 0, -1)] + [0.75 * T, T]
    edges = np.asarray(edges)
    if split > 1:
        fine = [edges[:1]]
        for a, b in zip(edges[:-1], edges[1:]):
            fine.append(np.linspace(a, b, split + 1)[1:])
        edges = np.concatenate(fine)
    return edges


# ---------------------------------------------------------------- spectral grid

class _Spectral:
    """Fourier representation on the flat torus with n modes per axis."""

    def __init__(self, dom: Domain, alpha: float, n: int):
        if n % 2:
            raise ValueError("spectral resolution must be even")
        self.dom = dom
        self.alpha = alpha
        self.n = n
        self.d = d = dom.d
        L = dom.extent
        kk = np.fft.fftfreq(n, 1.0 / n)
        ax = 2 * np.pi * kk / L
        self.xi = np.stack([g.ravel() for g in np.meshgrid(*([ax] * d), indexing="ij")])
        self.lam = np.sum(self.xi**2, axis=0) ** (alpha / 2)
        keep = np.abs(kk) < n / 2
        self.mask = np.ones([n] * d, dtype=bool)
        for i in range(d):
            shape = [1] * d
            shape[i] = n
            self.mask = self.mask & keep.reshape(shape)
        self.mask = self.mask.ravel()
        self.lam_unique, self.lam_index = np.unique(self.lam, return_inverse=True)
        self.m = 3 * n // 2
        pax = np.arange(self.m) * (L / self.m)
        self.pad_points = np.stack(
            [g.ravel() for g in np.meshgrid(*([pax] * d), indexing="ij")], axis=-1)
        self.K = n**d

    def _blocks(self):
        """Matching (small, big) slice tuples of the kept modes, 2^d blocks."""
        n, m, h = self.n, self.m, self.n // 2
        pairs = [(slice(0, h), slice(0, h)), (slice(n - h + 1, n), slice(m - h + 1, m))]
        for combo in itertools.product(pairs, repeat=self.d):
            yield ((slice(None),) + tuple(p[0] for p in combo),
                   (slice(None),) + tuple(p[1] for p in combo))

    def pad(self, c: np.ndarray) -> np.ndarray:
        """(B, K) coefficients to (B, m, ..., m) zero-padded coefficients."""
        B = c.shape[0]
        out = np.zeros((B,) + (self.m,) * self.d, dtype=complex)
        src = c.reshape((B,) + (self.n,) * self.d)
        for small, big in self._blocks():
            out[big] = src[small]
        return out

    def truncate(self, C: np.ndarray) -> np.ndarray:
        B = C.shape[0]
        out = np.zeros((B,) + (self.n,) * self.d, dtype=complex)
        for small, big in self._blocks():
            out[small] = C[big]
        return out.reshape(B, -1)

    def to_pad_phys(self, c: np.ndarray) -> np.ndarray:
        axes = tuple(range(1, self.d + 1))
        v = np.fft.ifftn(self.pad(c), axes=axes) * self.m**self.d
        return v.reshape(c.shape[0], -1)

    def from_pad_phys(self, v: np.ndarray) -> np.ndarray:
        axes = tuple(range(1, self.d + 1))
        V = np.fft.fftn(v.reshape((v.shape[0],) + (self.m,) * self.d), axes=axes)
        return self.truncate(V / self.m**self.d)

    def coefficients(self, values_on_grid: np.ndarray) -> np.ndarray:
        """Coefficients of real values sampled on the n-point grid (B, K)."""
        axes = tuple(range(1, self.d + 1))
        B = values_on_grid.shape[0]
        v = values_on_grid.reshape((B,) + (self.n,) * self.d)
        return (np.fft.fftn(v, axes=axes) / self.n**self.d).reshape(B, -1) * self.mask

    def grid_points(self) -> np.ndarray:
        ax = np.arange(self.n) * (self.dom.extent / self.n)
        return np.stack([g.ravel() for g in np.meshgrid(*([ax] * self.d), indexing="ij")], axis=-1)

    def delta(self, sources: np.ndarray) -> np.ndarray:
        """Coefficients of the point masses at ``sources`` (Y, d)."""
        phase = np.exp(-1j * (sources @ self.xi))
        return phase * self.mask / self.dom.extent**self.d

    def sample(self, c: np.ndarray, stride: int) -> np.ndarray:
        """Physical values of (..., K) coefficients on every ``stride``-th node."""
        lead = c.shape[:-1]
        axes = tuple(range(-self.d, 0))
        v = np.fft.ifftn(c.reshape(lead + (self.n,) * self.d), axes=axes).real * self.n**self.d
        sl = (Ellipsis,) + (slice(None, None, stride),) * self.d
        return v[sl].reshape(lead + (-1,))

    def sample_grad(self, c: np.ndarray, stride: int) -> np.ndarray:
        return np.stack([self.sample(1j * self.xi[i] * c, stride) for i in range(self.d)], axis=-1)


class _Operator:
    """Spatial part of one Picard increment in Fourier coefficients."""

    def __init__(self, spec: _Spectral, drift: VectorField | None,
                 potential: ScalarField | None, form: str):
        if form not in ("forward", "dual", "divergence"):
            raise ValueError(f"unknown iteration form {form!r}")
        self.spec = spec
        self.form = form
        pts = spec.pad_points
        self.b = None if drift is None else np.asarray(drift(pts), dtype=float)
        c = np.zeros(len(pts)) if potential is None else np.asarray(potential.spatial(pts), float)
        if potential is not None and not potential.time.constant:
            raise NotImplementedError("time-dependent potentials are not supported by the spectral engine")
        if form == "divergence" and drift is not None:
            c = c + np.asarray(drift.div_mu(pts), dtype=float)
        self.c = c if np.any(c != 0) else None
        if self.b is not None and not np.any(self.b != 0):
            self.b = None

    @property
    def trivial(self) -> bool:
        return self.b is None and self.c is None

    def __call__(self, coef: np.ndarray) -> np.ndarray:
        sp = self.spec
        out = np.zeros_like(coef)
        if self.trivial:
            return out
        if self.form == "forward":
            phys = np.zeros((coef.shape[0], sp.m**sp.d), dtype=complex)
            if self.c is not None:
                phys += self.c * sp.to_pad_phys(coef)
            if self.b is not None:
                for i in range(sp.d):
                    phys += self.b[:, i] * sp.to_pad_phys(1j * sp.xi[i] * coef)
            return sp.from_pad_phys(phys)
        u = sp.to_pad_phys(coef)
        if self.c is not None:
            out += sp.from_pad_phys(self.c * u)
        if self.b is not None:
            sign = -1.0 if self.form == "dual" else 1.0
            for i in range(sp.d):
                out += sign * 1j * sp.xi[i] * sp.from_pad_phys(self.b[:, i] * u)
        return out


# ---------------------------------------------------------------- iteration

@dataclass
class Increment:
    """Coefficients of one Picard increment at the output times."""

    n: int
    coefficients: np.ndarray  # (T, B, K)


class PicardIteration:
    """Picard increments Theta_n for the initial data ``seed`` at time 0.

    Theta_0(tau) = P_tau seed; every :meth:`step` returns the next increment
    at ``out_times`` (relative to the source time, in (0, horizon]).
    """

    def __init__(self, k: FracKernel, drift, potential, seed: np.ndarray,
                 out_times, spec: _Spectral, form: str = "forward",
                 panel_nodes: int = 10, panel_split: int = 1):
        self.k = k
        self.spec = spec
        self.op = _Operator(spec, drift, potential, form)
        self.seed = np.asarray(seed, dtype=complex)
        self.out_times = np.asarray(out_times, dtype=float)
        T = float(self.out_times.max())
        Q = panel_nodes
        self.Q = Q
        self.edges = _panel_edges(T, float(spec.lam.max()), panel_split)
        x, _ = gauss_legendre(Q)
        widths = np.diff(self.edges)
        self.nodes = (self.edges[:-1, None] + widths[:, None] * x).ravel()
        targets = np.concatenate([self.nodes, self.out_times])
        panel = np.clip(np.searchsorted(self.edges, targets, side="left") - 1, 0, len(widths) - 1)
        lu = spec.lam_unique
        self._full = [(exp_weights(lu, w, w, Q), np.exp(-w * lu)) for w in widths]
        self._targets = []
        for j in range(len(widths)):
            idx = np.nonzero(panel == j)[0]
            h = targets[idx] - self.edges[j]
            w = np.stack([exp_weights(lu, hh, widths[j], Q) for hh in h]) if len(idx) else None
            e = np.exp(-np.outer(h, lu))
            self._targets.append((idx, w, e))
        self.n = 0
        self._state = self._theta0(self.nodes)

    def _theta0(self, taus) -> np.ndarray:
        decay = np.exp(-np.outer(taus, self.spec.lam))
        return decay[:, None, :] * self.seed[None]

    def initial(self) -> Increment:
        return Increment(0, self._theta0(self.out_times))

    def _apply(self, state: np.ndarray) -> np.ndarray:
        """Operator on every node, batched in chunks of about 2^21 coefficients."""
        N, B, K = state.shape
        flat = state.reshape(N * B, K)
        step = max(1, (1 << 18) // K)
        out = np.empty_like(flat)
        for a in range(0, N * B, step):
            out[a:a + step] = self.op(flat[a:a + step])
        return out.reshape(N, B, K)

    def step(self) -> Increment:
        """Advance to the next increment; values at the internal nodes are kept."""
        sp = self.spec
        inv = sp.lam_index
        Q = self.Q
        G = self._apply(self._state)
        n_nodes = len(self.nodes)
        out = np.empty((n_nodes + len(self.out_times),) + self.seed.shape, dtype=complex)
        phi = np.zeros(self.seed.shape, dtype=complex)
        for j, (idx, w, e) in enumerate(self._targets):
            Gj = G[j * Q:(j + 1) * Q]
            if len(idx):
                out[idx] = (e[:, inv][:, None, :] * phi[None]
                            + np.einsum("tqk,qbk->tbk", w[:, :, inv], Gj))
            wf, ef = self._full[j]
            phi = ef[inv] * phi + np.einsum("qk,qbk->bk", wf[:, inv], Gj)
        if not np.all(np.isfinite(out)):
            raise FloatingPointError("non-finite Picard increment")
        self._state = out[:n_nodes]
        self.n += 1
        return Increment(self.n, out[n_nodes:])


def _spectral_size(dom: Domain, alpha: float, n_user: int, tau_min: float,
                   cap: int | None) -> int:
    """Smallest n = n_user 2^j whose edge mode has decayed by tau_min."""
    if cap is None:
        cap = 4096 if dom.d == 1 else 256
    n = max(n_user, 16)
    if n % 2:
        raise ValueError("torus grids need an even number of nodes per axis")
    while n < cap:
        edge = (2 * np.pi * (n / 2 - 1) / dom.extent) ** alpha
        if edge * tau_min >= _DECAY_TARGET:
            break
        n *= 2
    return max(min(n, cap), n_user)


# ---------------------------------------------------------------- kernel field

@dataclass
class KernelField:
    """Perturbed kernel on slices x grid x sources.

    ``value[t, j, i]`` is the kernel at time ``times[t]`` between grid point
    ``points[i]`` and source ``sources[j]``; for the dual construction the
    roles of the two spatial arguments are swapped (the grid is the free
    variable y).  ``grad`` differentiates in the grid variable.
    """

    s: float
    sources: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    times: np.ndarray
    value: np.ndarray
    grad: np.ndarray
    last_value: np.ndarray
    last_grad: np.ndarray
    base_value: np.ndarray
    base_grad: np.ndarray
    norms: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    terms: int = 1
    window: float = 0.0
    residual: float = 0.0
    quad_error: float = 0.0
    composed: bool = False
    spectral_nodes: int = 0
    form: str = "forward"

    @property
    def ratios(self) -> np.ndarray:
        v = np.asarray(self.norms, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return v[1:] / v[:-1]

    @property
    def elapsed(self) -> np.ndarray:
        return self.times - self.s

    def summary(self) -> dict:
        return {
            "terms": self.terms,
            "window": self.window,
            "composed": self.composed,
            "residual": self.residual,
            "quad_error": self.quad_error,
            "spectral_nodes": self.spectral_nodes,
            "norms": [float(v) for v in self.norms],
            "grad_norms": [float(v) for v in self.grad_norms],
        }


def _require_torus(k: FracKernel):
    if not k.domain.is_torus:
        raise NotImplementedError("the Duhamel engine runs on the flat torus only")


def _base(k: FracKernel, taus, points, sources):
    """p^(alpha) and grad_x p^(alpha) on (taus, sources, points).

    The torus kernel depends on x - y only, so it is evaluated once per
    distinct coordinate difference (using a representative pair, so the
    numbers are exactly those of a direct evaluation).
    """
    dom = k.domain
    delta = dom.difference(points[None, :, :], sources[:, None, :]).reshape(-1, dom.d)
    _, first, inv = np.unique(delta, axis=0, return_index=True, return_inverse=True)
    inv = inv.ravel()
    yi, xi = np.divmod(first, len(points))
    t = np.asarray(taus, dtype=float)[:, None]
    v = frac_eval(k, t, points[xi][None], sources[yi][None], "value")
    g = frac_eval(k, t, points[xi][None], sources[yi][None], "grad")
    shape = (len(t), len(sources), len(points))
    err = float(np.max(v.error / np.maximum(np.abs(v.value), 1e-300)))
    return v.value[:, inv].reshape(shape), g.value[:, inv].reshape(shape + (dom.d,)), err


def _weighted(values, grads, base, taus, alpha):
    tw = np.asarray(taus)[:, None, None] ** (1 / alpha)
    nv = float(np.max(np.abs(values) / base))
    ng = float(np.max(np.linalg.norm(grads, axis=-1) * tw / base))
    return nv, ng


def _run_window(k, drift, potential, sources, taus, cfg: SolveConfig, form: str,
                base=None, points=None, max_iterations=None, strict=True):
    """Single-window Picard series at relative times ``taus`` (no composition)."""
    dom = k.domain
    nu = cfg.grid.nodes_per_axis
    n = _spectral_size(dom, k.alpha, nu, float(np.min(taus)), cfg.max_modes)
    spec = _Spectral(dom, k.alpha, n)
    stride = n // nu
    if points is None:
        points = build_grid(dom, cfg.grid, (0.0, 1.0)).points
    if base is None:
        base = _base(k, taus, points, sources)
    bv, bg, err = base
    it = PicardIteration(k, drift, potential, spec.delta(sources), taus, spec, form,
                         cfg.panel_nodes, cfg.panel_split)
    norms, gnorms = [1.0], [float(np.max(np.linalg.norm(bg, axis=-1)
                                         * np.asarray(taus)[:, None, None] ** (1 / k.alpha) / bv))]
    value, grad = bv.copy(), bg.copy()
    last_v, last_g = bv, bg
    if form == "dual":
        # the iteration differentiates the free variable: grad_y p = -grad_x p
        grad = -grad
        last_g = grad
    limit = cfg.max_iterations if max_iterations is None else max_iterations
    terms = 1
    residual = 0.0
    converged = it.op.trivial
    while not converged and it.n < limit:
        inc = it.step()
        v = spec.sample(inc.coefficients, stride)
        g = spec.sample_grad(inc.coefficients, stride)
        nv, ng = _weighted(v, g, bv, taus, k.alpha)
        norms.append(nv)
        gnorms.append(ng)
        value = value + v
        grad = grad + g
        last_v, last_g = v, g
        terms += 1
        if nv < cfg.tol and ng < cfg.tol:
            converged = True
            residual = nv
    if not converged:
        residual = norms[-1]
        if strict and max_iterations is None:
            ratio = norms[-1] / norms[-2] if len(norms) > 1 and norms[-2] > 0 else float("nan")
            raise ContractionError(
                f"no convergence in {limit} iterations (last ratio {ratio:.3g}); use a smaller window")
    return dict(value=value, grad=grad, last_value=last_v, last_grad=last_g,
                base_value=bv, base_grad=bg if form != "dual" else -bg, norms=norms,
                grad_norms=gnorms, terms=terms, residual=residual, quad_error=err,
                spectral_nodes=n, points=points)


def select_window(k: FracKernel, drift, potential, sources, horizon: float,
                  cfg: SolveConfig, form: str = "forward") -> tuple[float, float]:
    """Largest window (halving from min(horizon, max_window)) meeting the smallness target.

    Returns (window, measured first-iteration ratio).
    """
    if cfg.window is not None:
        return float(cfg.window), float("nan")
    delta = min(horizon, cfg.max_window)
    probe = cfg.grid.time_slices
    for _ in range(cfg.bisections + 1):
        taus = delta * (np.arange(1, probe + 1) / probe) ** 1.5
        out = _run_window(k, drift, potential, sources, taus, cfg, form, max_iterations=1)
        ratio = out["norms"][1] if len(out["norms"]) > 1 else 0.0
        if ratio <= cfg.smallness_target:
            return delta, ratio
        delta /= 2
    raise ContractionError("no admissible window found; the perturbation is too strong")


def kernel_matrices(k: FracKernel, drift, potential, taus, cfg: SolveConfig,
                    sources=None, form: str = "forward", window: float | None = None) -> dict:
    """Perturbed kernel at relative times ``taus`` for all grid sources.

    Times beyond the admissible window are reached by composing window
    kernels with the grid quadrature over the intermediate point.  Requires
    time-independent coefficients.
    """
    _require_torus(k)
    dom = k.domain
    grid = build_grid(dom, cfg.grid, (0.0, 1.0))
    points, w = grid.points, grid.weights
    src = points if sources is None else dom.as_points(sources).reshape(-1, dom.d)
    taus = np.asarray(taus, dtype=float)
    if window is None:
        window, _ = select_window(k, drift, potential, src, float(taus.max()), cfg, form)
    if taus.max() <= window * (1 + 1e-12):
        out = _run_window(k, drift, potential, src, taus, cfg, form, points=points)
        out.update(window=window, composed=False, points=points, weights=w, sources=src)
        return out
    if form != "forward":
        raise NotImplementedError("composition is implemented for the forward form")
    m = np.maximum(np.ceil(taus / window - 1e-12) - 1, 0).astype(int)
    rem = taus - m * window
    inner = np.unique(np.concatenate([rem, [window]]))
    allsrc = np.concatenate([points, src])
    out = _run_window(k, drift, potential, allsrc, inner, cfg, form, points=points)
    P = len(points)
    Kv = out["value"]            # (T, Y, X): value[t, y, x]
    Kg = out["grad"]
    step = np.searchsorted(inner, window)
    full = Kv[step, :P, :].T     # full[x, z] for one window
    value = np.empty((len(taus), len(src), P))
    grad = np.empty((len(taus), len(src), P, dom.d))
    for i, (mi, ri) in enumerate(zip(m, rem)):
        j = int(np.argmin(np.abs(inner - ri)))
        col = Kv[step, P:, :].T  # (z, y) after one window from the sources
        for _ in range(mi - 1):
            col = full @ (w[:, None] * col)
        if mi == 0:
            value[i] = Kv[j, P:, :]
            grad[i] = Kg[j, P:, :, :]
            continue
        left = Kv[j, :P, :].T          # (x, z)
        leftg = np.moveaxis(Kg[j, :P, :, :], 0, 1)  # (x, z, d)
        value[i] = (left @ (w[:, None] * col)).T
        grad[i] = np.einsum("xzd,zy->yxd", leftg, w[:, None] * col)
    bv, bg, err = _base(k, taus, points, src)
    tw = taus[:, None, None] ** (1 / k.alpha)
    return dict(value=value, grad=grad, last_value=value - bv, last_grad=grad - bg,
                base_value=bv, base_grad=bg, norms=out["norms"], grad_norms=out["grad_norms"],
                terms=out["terms"], residual=out["residual"], quad_error=max(err, out["quad_error"]),
                spectral_nodes=out["spectral_nodes"], window=window, composed=True,
                points=points, weights=w, sources=src,
                sum_norm=float(np.max(np.abs(value - bv) / bv)),
                sum_grad_norm=float(np.max(np.linalg.norm(grad - bg, axis=-1) * tw / bv)))


def _as_field(out: dict, s: float, taus, form: str) -> KernelField:
    return KernelField(
        s=s, sources=out["sources"], points=out["points"], weights=out["weights"],
        times=s + np.asarray(taus), value=out["value"], grad=out["grad"],
        last_value=out["last_value"], last_grad=out["last_grad"],
        base_value=out["base_value"], base_grad=out["base_grad"],
        norms=out["norms"], grad_norms=out["grad_norms"], terms=out["terms"],
        window=out["window"], residual=out["residual"], quad_error=out["quad_error"],
        composed=out["composed"], spectral_nodes=out["spectral_nodes"], form=form)


def solve(k: FracKernel, drift: VectorField | None = None, potential: ScalarField | None = None,
          s: float = 0.0, y=None, t_max: float = 0.2, cfg: SolveConfig | None = None) -> KernelField:
    """Perturbed kernel p_{b,c}(t, x; s, y) on graded slices of (s, t_max].

    ``y`` defaults to every grid node.  With b = c = 0 the field is the
    unperturbed kernel exactly (a single term).
    """
    cfg = cfg or SolveConfig()
    if not t_max > s:
        raise ValueError("t_max must exceed s")
    grid = build_grid(k.domain, cfg.grid, (s, t_max))
    taus = grid.times - s
    out = kernel_matrices(k, drift, potential, taus, cfg, sources=y)
    return _as_field(out, s, taus, "forward")


def dual_solve(k: FracKernel, drift: VectorField | None = None, s: float = 0.0, x=None,
               t_max: float = 0.2, cfg: SolveConfig | None = None,
               potential: ScalarField | None = None) -> KernelField:
    """Kernel from the dual equation, as a function of the second argument.

    ``value[t, j, i]`` approximates p_b(t, x_j; s, y_i) with the derivative in
    each increment placed on the known kernel.  Horizons beyond one window
    are not composed.
    """
    cfg = cfg or SolveConfig()
    grid = build_grid(k.domain, cfg.grid, (s, t_max))
    taus = grid.times - s
    out = kernel_matrices(k, drift, potential, taus, cfg, sources=x, form="dual",
                          window=float(taus.max()) if cfg.window is None else cfg.window)
    return _as_field(out, s, taus, "dual")


def picard_terms(k: FracKernel, drift, potential, taus, count: int, cfg: SolveConfig | None = None,
                 sources=None, form: str = "forward") -> list[np.ndarray]:
    """Values of Theta_0 ... Theta_count at relative times ``taus`` (single window)."""
    _require_torus(k)
    cfg = cfg or SolveConfig()
    dom = k.domain
    points = build_grid(dom, cfg.grid, (0.0, 1.0)).points
    src = points if sources is None else dom.as_points(sources).reshape(-1, dom.d)
    taus = np.asarray(taus, dtype=float)
    n = _spectral_size(dom, k.alpha, cfg.grid.nodes_per_axis, float(taus.min()), cfg.max_modes)
    spec = _Spectral(dom, k.alpha, n)
    it = PicardIteration(k, drift, potential, spec.delta(src), taus, spec, form,
                         cfg.panel_nodes, cfg.panel_split)
    bv, _, _ = _base(k, taus, points, src)
    out = [bv]
    for _ in range(count):
        out.append(spec.sample(it.step().coefficients, n // cfg.grid.nodes_per_axis))
    return out


# ---------------------------------------------------------------- verifications

def chapman_kolmogorov_residual(k: FracKernel, drift, potential, s: float, r: float, t: float,
                                cfg: SolveConfig | None = None) -> float:
    """max |int p(t,x;r,z) p(r,z;s,y) dz - p(t,x;s,y)| / p^(alpha)(t-s, rho(x,y)).

    The coefficients are time-independent, so p(t, .; r, .) is the kernel
    after t - r.  The z-integral uses the grid quadrature.
    """
    cfg = cfg or SolveConfig()
    if not s < r < t:
        raise ValueError("need s < r < t")
    taus = np.array(sorted({t - r, r - s, t - s}))
    out = kernel_matrices(k, drift, potential, taus, cfg)
    w = out["weights"]

    def mat(tau):
        return out["value"][int(np.argmin(np.abs(taus - tau)))].T  # (x, y)

    glued = mat(t - r) @ (w[:, None] * mat(r - s))
    direct = mat(t - s)
    base = out["base_value"][int(np.argmin(np.abs(taus - (t - s))))].T
    return float(np.max(np.abs(glued - direct) / base))


def bound_reports(fld: KernelField, k: FracKernel, profile: XiProfile | None = None) -> dict:
    """Empirical two-sided and gradient constants of a field against xi.

    ``a1_low``/``a1_high`` bound p_{b,c} / xi, ``a2`` bounds
    |grad p_{b,c}| (t - s)^(1/alpha) / xi; the ``base_*`` entries are the same
    statistics of the unperturbed kernel on the same points.
    """
    profile = profile or XiProfile.for_kernel(k)
    tau = fld.elapsed[:, None, None]
    r = distance(k.domain, fld.points[None, :, :], fld.sources[:, None, :])[None]
    xi = profile(np.broadcast_to(tau, fld.value.shape), np.broadcast_to(r, fld.value.shape))
    tw = tau ** (1 / k.alpha)
    ratio = fld.value / xi
    base = fld.base_value / xi
    g = np.linalg.norm(fld.grad, axis=-1) * tw / xi
    gb = np.linalg.norm(fld.base_grad, axis=-1) * tw / xi
    return {
        "a1_low": float(ratio.min()), "a1_high": float(ratio.max()),
        "a2": float(g.max()),
        "base_a1_low": float(base.min()), "base_a1_high": float(base.max()),
        "base_a2": float(gb.max()),
        "min_value": float(fld.value.min()),
    }


class _FourierKernel:
    """Torus kernel as its Fourier series sum_k exp(-t |xi_k|^alpha) cos(xi_k . (x - y)) / L^d.

    Exposes ``domain`` and ``value`` so it can stand in for a FracKernel in
    :func:`eta_eval`; ``n`` modes per axis are used.
    """

    def __init__(self, dom: Domain, alpha: float, n: int, chunk: int = 4_000_000):
        self.domain = dom
        self.alpha = alpha
        self.spec = _Spectral(dom, alpha, n)
        self.chunk = chunk

    def value(self, t, x, y) -> np.ndarray:
        dom = self.domain
        delta = dom.difference(x, y)
        t = np.asarray(t, dtype=float)
        shape = np.broadcast_shapes(t.shape, delta.shape[:-1])
        delta = np.broadcast_to(delta, shape + (dom.d,)).reshape(-1, dom.d)
        t = np.broadcast_to(t, shape).ravel()
        sp = self.spec
        xi = sp.xi[:, sp.mask]
        lam = sp.lam[sp.mask]
        out = np.empty(len(t))
        step = max(1, self.chunk // lam.size)
        for a in range(0, len(t), step):
            sl = slice(a, a + step)
            out[sl] = np.sum(np.exp(-np.outer(t[sl], lam)) * np.cos(delta[sl] @ xi), axis=1)
        return out.reshape(shape) / dom.extent**dom.d


def holder_gradient_report(fld: KernelField, k: FracKernel, beta: float,
                           offsets=(1, 2, 4, 8), source_stride: int = 8, level: int = 3) -> dict:
    """sup |grad p(t,x;y) - grad p(t,x';y)| (1 ^ (t-s))^(beta/alpha) / (rho^(beta-1) eta).

    Pairs x' are grid shifts of x along each axis by ``offsets`` nodes;
    every ``source_stride``-th source is used.  eta uses the unperturbed
    kernel summed as its Fourier series, and translation invariance on the
    torus lets it be computed once per distinct (t, x - y, x' - y).
    """
    if not 1 < beta < k.alpha:
        raise ValueError("beta must lie in (1, alpha)")
    dom = k.domain
    n = round(len(fld.points) ** (1 / dom.d))
    h = dom.extent / n
    idx = np.arange(len(fld.points)).reshape((n,) * dom.d)
    srcs = np.arange(0, len(fld.sources), source_stride)
    tau = fld.elapsed
    rows, diffs = [], []
    for o in offsets:
        if o >= n / 2:
            continue
        for axis in range(dom.d):
            j2 = np.roll(idx, -o, axis=axis).ravel()
            g1 = fld.grad[:, srcs, :, :]
            g2 = fld.grad[:, srcs][:, :, j2, :]
            diff = np.linalg.norm(g1 - g2, axis=-1)  # (T, S, X)
            dx = dom.difference(fld.points[None, :, :], fld.sources[srcs][:, None, :])
            dx2 = dom.difference(fld.points[j2][None, :, :], fld.sources[srcs][:, None, :])
            T, S, X = diff.shape
            key = np.concatenate([
                np.broadcast_to(np.arange(T)[:, None, None, None], (T, S, X, 1)),
                np.broadcast_to(np.round(dx / h).astype(int)[None], (T, S, X, dom.d)),
                np.broadcast_to(np.round(dx2 / h).astype(int)[None], (T, S, X, dom.d)),
            ], axis=-1).reshape(-1, 1 + 2 * dom.d)
            rows.append(key)
            diffs.append((diff.ravel(), o * h))
    keys = np.concatenate(rows)
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    n_modes = _spectral_size(dom, k.alpha, 16, float(tau.min()), None)
    eta = eta_eval(_FourierKernel(dom, k.alpha, n_modes), tau[uniq[:, 0]], uniq[:, 1:1 + dom.d] * h,
                   uniq[:, 1 + dom.d:] * h, np.zeros(dom.d), level=level)
    best = 0.0
    pos = 0
    for dv, rho in diffs:
        e = eta[inv[pos:pos + dv.size]]
        T = len(tau)
        tfac = np.repeat(np.minimum(1.0, tau) ** (beta / k.alpha), dv.size // T)
        best = max(best, float(np.max(dv * tfac / (rho ** (beta - 1) * e))))
        pos += dv.size
    return {"beta": beta, "constant": best, "pairs": int(keys.shape[0]), "eta_evaluations": int(len(uniq))}


def grad_y_report(k: FracKernel, drift, potential, s: float = 0.0, t_max: float = 0.2, y=None,
                  cfg: SolveConfig | None = None, profile: XiProfile | None = None) -> dict:
    """sup |grad_y p_{b,c}| (t - s)^(1/alpha) / xi from the rewritten iteration.

    The iteration runs with the derivative on the outer kernel and the
    potential c + div_mu b; the seed is differentiated in the source.
    Single window only.
    """
    _require_torus(k)
    cfg = cfg or SolveConfig()
    dom = k.domain
    profile = profile or XiProfile.for_kernel(k)
    grid = build_grid(dom, cfg.grid, (s, t_max))
    points = grid.points
    src = points if y is None else dom.as_points(y).reshape(-1, dom.d)
    taus = grid.times - s
    n = _spectral_size(dom, k.alpha, cfg.grid.nodes_per_axis, float(taus.min()), cfg.max_modes)
    spec = _Spectral(dom, k.alpha, n)
    stride = n // cfg.grid.nodes_per_axis
    d = dom.d
    delta = spec.delta(src)
    seed = np.concatenate([delta] + [-1j * spec.xi[i] * delta for i in range(d)])
    it = PicardIteration(k, drift, potential, seed, taus, spec, "divergence",
                         cfg.panel_nodes, cfg.panel_split)
    bv, bg, _ = _base(k, taus, points, src)
    Y = len(src)
    value = bv.copy()
    gy = -bg.copy()  # grad_y p^(alpha)(t, x, y) = -grad_x p^(alpha)
    norms = [1.0]
    while not it.op.trivial and it.n < cfg.max_iterations:
        v = spec.sample(it.step().coefficients, stride)  # (T, (1+d) Y, X)
        value = value + v[:, :Y]
        inc = np.stack([v[:, (i + 1) * Y:(i + 2) * Y] for i in range(d)], axis=-1)
        gy = gy + inc
        nv = float(np.max(np.abs(v[:, :Y]) / bv))
        norms.append(nv)
        if nv < cfg.tol and float(np.max(np.abs(inc))) < cfg.tol * float(np.max(np.abs(bg))):
            break
    tau = taus[:, None, None]
    r = distance(dom, points[None, :, :], src[:, None, :])[None]
    xi = profile(np.broadcast_to(tau, bv.shape), np.broadcast_to(r, bv.shape))
    ratio = np.linalg.norm(gy, axis=-1) * tau ** (1 / k.alpha) / xi
    return {"constant": float(ratio.max()), "value": value, "grad_y": gy, "times": s + taus,
            "points": points, "sources": src, "terms": len(norms), "norms": norms}


def _neville_zero(h, values) -> float:
    """Polynomial extrapolation of values(h) to h = 0."""
    h = np.asarray(h, dtype=float)
    p = np.array(values, dtype=float)
    n = len(h)
    for m in range(1, n):
        p[: n - m] = (h[m:] * p[: n - m] - h[: n - m] * p[1: n - m + 1]) / (h[m:] - h[: n - m])
    return float(p[0])


def generator_weak_check(k: FracKernel, drift, potential, phi: ScalarField, psi: ScalarField,
                         s: float = 0.0, steps=(0.2, 0.1, 0.05, 0.025),
                         cfg: SolveConfig | None = None, tau0: float = 0.02,
                         levels: int = 6) -> dict:
    """Weak generator residual R(t) for smooth test functions phi, psi.

    R(t) = (P_{t,s} phi - phi, psi) / (t - s) - (L phi + b.grad phi + c phi, psi),
    with P_{t,s} phi from the Picard series seeded by phi, and L phi from a
    Richardson-extrapolated difference quotient of the subordinated heat
    semigroup (multiplier sum_j W_j exp(-tau^(2/alpha) v_j |xi|^2)).  The
    exact symbol -|xi|^alpha and the symmetry (L phi, psi) = (phi, L psi) are
    reported as cross-checks.
    """
    _require_torus(k)
    cfg = cfg or SolveConfig()
    dom = k.domain
    L = dom.extent
    n = max(cfg.grid.nodes_per_axis, 16)
    spec = _Spectral(dom, k.alpha, n)
    pts = spec.grid_points()
    cell = (L / n) ** dom.d
    phi_h = spec.coefficients(np.asarray(phi.spatial(pts), float)[None])[0]
    psi_h = spec.coefficients(np.asarray(psi.spatial(pts), float)[None])[0]

    def pair(a, b):
        return float(L**dom.d * np.real(np.sum(np.conj(b) * a)))

    steps = np.asarray(steps, dtype=float)
    it = PicardIteration(k, drift, potential, phi_h[None], steps, spec, "forward",
                         cfg.panel_nodes, cfg.panel_split)
    total = it.initial().coefficients[:, 0, :]
    terms = 1
    while not it.op.trivial and it.n < cfg.max_iterations:
        inc = it.step().coefficients[:, 0, :]
        total = total + inc
        terms += 1
        if np.max(np.abs(inc)) < cfg.tol * np.max(np.abs(phi_h)):
            break

    rule = k.rule
    k2 = np.sum(spec.xi**2, axis=0)

    def quotient(f_h, tau):
        s_vals = rule.clock_values(np.array([tau]))[0]
        mult = np.exp(-np.outer(k2, s_vals)) @ rule.weights
        return (mult - 1) / tau * f_h

    hs = tau0 * 0.5 ** np.arange(levels)
    rich = _neville_zero(hs, [pair(quotient(phi_h, h_), psi_h) for h_ in hs])
    rich_sym = _neville_zero(hs, [pair(quotient(psi_h, h_), phi_h) for h_ in hs])
    exact = pair(-spec.lam * phi_h, psi_h)
    psi_vals = np.asarray(psi.spatial(pts), float)
    phi_vals = np.asarray(phi.spatial(pts), float)
    lower = 0.0
    if drift is not None:
        lower += float(np.sum(psi_vals * np.sum(drift(pts) * phi.grad(pts), axis=-1)) * cell)
    if potential is not None:
        lower += float(np.sum(psi_vals * potential.spatial(pts) * phi_vals) * cell)
    base = pair(phi_h, psi_h)
    R = np.array([(pair(total[i], psi_h) - base) / steps[i] - (rich + lower)
                  for i in range(len(steps))])
    return {
        "steps": steps, "R": R, "scale": abs(rich), "relative": np.abs(R) / abs(rich),
        "generator_richardson": rich, "generator_symbol": exact, "generator_symmetric": rich_sym,
        "lower_order": lower, "terms": terms,
    }
