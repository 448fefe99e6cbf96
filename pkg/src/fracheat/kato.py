"""Time-space Kato functionals, class membership and the L^q L^p criterion.

K^{gamma,beta}_f(eps) = sup_{t,x} eps^(beta/alpha) int_0^eps int xi(s, rho(x,y)) |f(t +- s, y)|
                        s^(-gamma/alpha) (eps - s)^(-beta/alpha) dy ds.

The spatial integral is done in polar coordinates about x.  Radii are split
at the profile kink s^(1/alpha), at field breaks and at the torus cell
boundary; angles use Gauss-Legendre on eight sectors in d = 2.  The s
integral uses tanh-sinh pieces split at eps/2 and at the singular times of
the time profile, with nodes in distance form so the endpoint powers keep
full precision.  Non-integrable radial powers are detected from their
exponents and reported as ``inf``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import (
    DriftDivergence,
    DriftNorm,
    RadialPower,
    ScalarField,
    Separable,
    SumField,
    TimeProfile,
    VectorField,
)
from .geometry import Domain
from .kernels import XiProfile
from .quadrature import gauss_legendre, tanh_sinh_unit

__all__ = [
    "DecayTable",
    "LqLpSpec",
    "k_functional",
    "class_membership_test",
    "kato_class_integral",
    "kato_class_test",
    "kato_inclusion_check",
    "lqlp_predicate",
    "lqlp_companion",
    "seminorm",
    "default_eps_sequence",
]

_SIGNS = ("plus", "minus", "max")


def default_eps_sequence(levels: int = 11) -> np.ndarray:
    return 2.0 ** -np.arange(levels)


# ---------------------------------------------------------------- polar rule

def _directions(dom: Domain, sectors: int = 8, per_sector: int = 6):
    """Unit directions, angular weights and cell radius per direction."""
    d = dom.d
    if d == 1:
        dirs = np.array([[1.0], [-1.0]])
        aw = np.ones(2)
    elif d == 2:
        g, w = gauss_legendre(per_sector)
        width = 2 * np.pi / sectors
        phi = (np.arange(sectors)[:, None] + g[None, :]).ravel() * width
        aw = np.tile(w, sectors) * width
        dirs = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    else:
        raise ValueError("Kato functionals are implemented for d <= 2")
    if dom.is_torus:
        rmax = dom.extent / 2 / np.max(np.abs(dirs), axis=-1)
    else:
        rmax = np.full(len(dirs), np.inf)
    return dirs, aw, rmax


def _radial_integral(dom, field, x, weight, kinks, common, level=5, max_elems=3_000_000):
    """int |h(y)| weight(rho) dy about x for each kink value.

    ``weight(rho, idx)`` gets radii of shape (S, A, N) and the index array of
    the current chunk of kinks; ``kinks`` has shape (S,).
    """
    dirs, aw, rmax = _directions(dom)
    u, w, _ = tanh_sinh_unit(level)
    d = dom.d
    kinks = np.asarray(kinks, dtype=float)
    S, A = len(kinks), len(dirs)
    common = np.asarray(sorted(set(float(c) for c in common if c > 0)), dtype=float)
    finite = dom.is_torus
    nb = 2 + len(common) + (1 if finite else 0)
    per = A * (nb - 1 + (0 if finite else 1)) * len(u)
    chunk = max(1, max_elems // per)
    out = np.empty(S)
    for a in range(0, S, chunk):
        idx = np.arange(a, min(S, a + chunk))
        k = kinks[idx]
        br = [np.zeros((len(idx), A)), np.broadcast_to(k[:, None], (len(idx), A))]
        br += [np.full((len(idx), A), c) for c in common]
        if finite:
            br.append(np.broadcast_to(rmax, (len(idx), A)))
            br = [np.minimum(b, rmax) for b in br]
        br = np.sort(np.stack(br, axis=-1), axis=-1)  # (s, A, nb)
        lo, span = br[..., :-1], np.diff(br, axis=-1)
        rho = lo[..., None] + span[..., None] * u  # (s, A, nb-1, Q)
        wts = span[..., None] * w
        rho = rho.reshape(len(idx), A, -1)
        wts = wts.reshape(len(idx), A, -1)
        if not finite:
            last = br[..., -1]
            scale = np.maximum(last, k[:, None])
            x01, wt, xc = tanh_sinh_unit(level)
            tail_r = last[..., None] + scale[..., None] * (x01 / xc)
            tail_w = scale[..., None] * (wt / xc**2)
            rho = np.concatenate([rho, tail_r], axis=-1)
            wts = np.concatenate([wts, tail_w], axis=-1)
        h = np.abs(field.polar(x, rho, dirs))
        with np.errstate(invalid="ignore"):
            vals = h * weight(rho, idx) * rho ** (d - 1)
        vals = np.where(wts > 0, vals, 0.0)
        out[idx] = np.einsum("san,san,a->s", vals, wts, aw)
    return out


def _space_xi(dom, profile, field, x, s):
    """F(s) = int xi(s, rho(x, y)) |h(y)| dy for an array of s."""
    a = profile.alpha
    kinks = s ** (1 / a)
    extra = list(field.radial_breaks())
    c = field.singular_center()
    if c is not None:
        gap = np.sqrt(np.sum(dom.difference(dom.as_points(x), c) ** 2))
        if gap > 0:
            extra.append(gap)

    def weight(rho, idx):
        return profile(s[idx][:, None, None], rho)

    return _radial_integral(dom, field, x, weight, kinks, extra)


# ---------------------------------------------------------------- K functional

def _check_exponents(gamma, beta, alpha):
    if not (0 <= gamma < alpha and 0 <= beta < alpha):
        raise ValueError("need 0 <= gamma, beta < alpha")


def _k_is_infinite(field: ScalarField, dom: Domain, alpha, gamma, beta) -> bool:
    theta = field.local_exponent
    if theta >= dom.d:
        return True
    a = field.time.exponent
    if theta + gamma >= alpha:
        return True
    return a > 0 and (a + (theta + gamma) / alpha >= 1 or a + beta / alpha >= 1)


def _s_pieces(eps, breaks, level):
    """tanh-sinh nodes on [0, eps] split at ``breaks``; returns s, eps - s, weights."""
    u, w, uc = tanh_sinh_unit(level)
    pts = sorted({0.0, eps / 2, eps} | {float(b) for b in breaks if 0 < b < eps})
    s_all, r_all, w_all = [], [], []
    for lo, hi in zip(pts[:-1], pts[1:]):
        span = hi - lo
        s = lo + span * u if lo > 0 else span * u
        rem = (eps - hi) + span * uc if hi < eps else span * uc
        s_all.append(s)
        r_all.append(rem)
        w_all.append(span * w)
    return np.concatenate(s_all), np.concatenate(r_all), np.concatenate(w_all)


def _time_candidates(profile_t: TimeProfile, eps: float) -> list[float]:
    if profile_t.constant:
        return [0.0, eps]
    ts = {0.0, eps / 2, eps, 2 * eps}
    for c in profile_t.singular_times():
        ts |= {c + f * eps for f in (-1.0, -0.5, 0.0, 0.5, 1.0)}
    return sorted(t for t in ts if t >= 0)


def k_functional(field: ScalarField, profile: XiProfile, gamma: float, beta: float, eps: float,
                 sign: str = "max", x_points=None, level: int = 5) -> float:
    """K^{gamma,beta}_{alpha,f}(eps).

    The sup over x runs over ``x_points`` (default: the field's peak points,
    where radially decreasing profiles attain it); the sup over t runs over
    a coarse grid containing 0 and the singular times of the time profile.
    """
    if sign not in _SIGNS:
        raise ValueError(f"sign must be one of {_SIGNS}")
    if not eps > 0:
        raise ValueError("eps must be positive")
    alpha = profile.alpha
    _check_exponents(gamma, beta, alpha)
    dom = field.domain
    if _k_is_infinite(field, dom, alpha, gamma, beta):
        return float("inf")
    xs = field.peak_points() if x_points is None else dom.as_points(x_points).reshape(-1, dom.d)
    tp = field.time
    signs = ("plus", "minus") if sign == "max" else (sign,)
    best = 0.0
    for t in _time_candidates(tp, eps):
        for sg in signs:
            direction = 1.0 if sg == "plus" else -1.0
            # singular times of g(t +- s) in the s variable
            breaks = [direction * (c - t) for c in tp.singular_times()]
            s, rem, w = _s_pieces(eps, breaks, level)
            g = tp(t + direction * s)
            live = g != 0
            if not np.any(live):
                continue
            with np.errstate(divide="ignore"):
                kern = g * s ** (-gamma / alpha) * rem ** (-beta / alpha) * w
            for x in xs:
                F = np.zeros_like(s)
                F[live] = _space_xi(dom, profile, field, x, s[live])
                val = eps ** (beta / alpha) * float(np.sum(np.where(live, F * kern, 0.0)))
                best = max(best, val)
    return best


@dataclass
class DecayTable:
    """K values on a decreasing eps sequence with the fitted log-log rate."""

    eps: np.ndarray
    values: np.ndarray
    rate: float
    r2: float
    member: bool

    def rows(self):
        return [(float(e), float(v)) for e, v in zip(self.eps, self.values)]


def _decide(eps, vals, tail=6, min_rate=0.05, min_r2=0.99) -> DecayTable:
    eps = np.asarray(eps, dtype=float)
    vals = np.asarray(vals, dtype=float)
    order = np.argsort(-eps)
    eps, vals = eps[order], vals[order]
    if np.all(vals == 0):
        return DecayTable(eps, vals, float("inf"), 1.0, True)
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        return DecayTable(eps, vals, float("nan"), float("nan"), False)
    le, lv = np.log(eps[-tail:]), np.log(vals[-tail:])
    slope, icpt = np.polyfit(le, lv, 1)
    resid = lv - (slope * le + icpt)
    ss = np.sum((lv - lv.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss if ss > 0 else (1.0 if slope == 0 else 0.0)
    return DecayTable(eps, vals, float(slope), float(r2), bool(slope > min_rate and r2 >= min_r2))


def class_membership_test(field: ScalarField, profile: XiProfile, gamma: float, beta: float,
                          eps_seq=None, sign: str = "max") -> DecayTable:
    """Decide f in K^{gamma,beta} from the decay of K(eps)."""
    eps_seq = default_eps_sequence() if eps_seq is None else np.asarray(eps_seq, float)
    vals = [k_functional(field, profile, gamma, beta, e, sign) for e in eps_seq]
    return _decide(eps_seq, vals)


# ---------------------------------------------------------------- Kato class

def kato_class_integral(field: ScalarField, alpha: float, eps: float, x_points=None) -> float:
    """sup_x int |f(y)| (eps min rho^alpha) / rho^(d+1) dy."""
    dom = field.domain
    theta = field.local_exponent
    if theta >= dom.d or theta >= alpha - 1:
        return float("inf")
    xs = field.peak_points() if x_points is None else dom.as_points(x_points).reshape(-1, dom.d)
    d = dom.d
    kink = eps ** (1 / alpha)
    extra = list(field.radial_breaks())

    def weight(rho, idx):
        return np.minimum(eps, rho**alpha) / rho ** (d + 1)

    best = 0.0
    for x in xs:
        ex = list(extra)
        c = field.singular_center()
        if c is not None:
            gap = np.sqrt(np.sum(dom.difference(dom.as_points(x), c) ** 2))
            if gap > 0:
                ex.append(gap)
        best = max(best, float(_radial_integral(dom, field, x, weight, np.array([kink]), ex)[0]))
    return best


def _finite_mass_ok(field: ScalarField) -> bool:
    """1_{mu(M) < inf} mu(|f|) < inf, decided from the field's exponent."""
    if not field.domain.is_torus:
        return True
    return field.local_exponent < field.domain.d


def kato_class_test(field: ScalarField, alpha: float, eps_seq=None) -> DecayTable:
    eps_seq = default_eps_sequence() if eps_seq is None else np.asarray(eps_seq, float)
    if not field.time.constant:
        raise ValueError("the Kato class test takes time-independent fields")
    vals = [kato_class_integral(field, alpha, e) for e in eps_seq]
    table = _decide(eps_seq, vals)
    table.member = table.member and _finite_mass_ok(field)
    return table


def kato_inclusion_check(field: ScalarField, profile: XiProfile, beta: float, eps_seq=None) -> dict:
    """Kato class membership should imply membership in K^{1,beta}."""
    if not 1 <= beta < profile.alpha:
        raise ValueError("beta must lie in [1, alpha)")
    kk = kato_class_test(field, profile.alpha, eps_seq)
    kb = class_membership_test(field, profile, 1.0, beta, eps_seq)
    if not kk.member:
        status = "vacuous"
    else:
        status = "holds" if kb.member else "violated"
    return {"kato": kk, "k_class": kb, "status": status, "ok": status != "violated"}


# ---------------------------------------------------------------- L^q L^p

def _conj(p: float) -> float:
    if p == 1:
        return float("inf")
    if np.isinf(p):
        return 1.0
    return p / (p - 1)


@dataclass(frozen=True)
class LqLpSpec:
    p: float
    q: float
    gamma: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError("p and q must be >= 1")

    @property
    def p_star(self) -> float:
        return _conj(self.p)

    @property
    def q_star(self) -> float:
        return _conj(self.q)


def lqlp_predicate(spec: LqLpSpec, d: int, alpha: float) -> dict:
    """d/p + alpha/q < alpha - gamma and q > alpha / (alpha - beta)."""
    _check_exponents(spec.gamma, spec.beta, alpha)
    lhs = d / spec.p + alpha / spec.q
    space_margin = (alpha - spec.gamma) - lhs
    time_margin = spec.q - alpha / (alpha - spec.beta)
    ok = space_margin > 0 and time_margin > 0
    qs, ps = spec.q_star, spec.p_star
    if np.isinf(qs):
        theta = float("nan")
        rate = float("nan")
    else:
        inv_ps = 0.0 if np.isinf(ps) else 1.0 / ps
        theta = d * qs * inv_ps / alpha - d * qs / alpha - spec.gamma * qs / alpha
        rate = (1 + theta) / qs
    return {
        "ok": bool(ok),
        "space_margin": float(space_margin),
        "time_margin": float(time_margin),
        "theta": float(theta),
        "rate": float(rate),
    }


def lqlp_companion(spec: LqLpSpec, dom: Domain, alpha: float, eps_seq=None, slack: float = 0.5) -> dict:
    """Membership test for g(t) h(x) with g in L^q and h in L^p.

    h = rho(x, 0)^(-theta_h) on the unit ball (cell on the torus) with
    theta_h = slack d / p, and g(t) = t^(-a) on (0, 1] with a = slack / q.
    The fitted decay must reach the rate predicted by the Hoelder argument.
    """
    pred = lqlp_predicate(spec, dom.d, alpha)
    cutoff = min(1.0, dom.extent / 2) if dom.is_torus else 1.0
    h = RadialPower(dom, center=tuple([0.0] * dom.d), theta=slack * dom.d / spec.p, cutoff=cutoff)
    g = TimeProfile(exponent=slack / spec.q, center=0.0, windowed=True)
    f = Separable(dom, spatial_field=h, time=g)
    table = class_membership_test(f, XiProfile(alpha, dom.d, dom.total_mass), spec.gamma, spec.beta, eps_seq)
    rate_ok = bool(np.isnan(pred["rate"]) or table.rate >= pred["rate"] - 0.02)
    return {"predicate": pred, "table": table, "ok": bool(table.member and rate_ok) if pred["ok"] else True}


# ---------------------------------------------------------------- seminorms

def seminorm(profile: XiProfile, r, drift: VectorField | None = None, potential: ScalarField | None = None,
             variant: str = "l", beta: float | None = None, dyadic: int = 8) -> np.ndarray:
    """ell(r) = sup_{eps <= r} {K_|b|(eps) + K_c(eps)} for each r.

    ``variant`` is ``"l"`` (exponents 1, 1), ``"l_beta"`` (beta, beta) or
    ``"l_tilde"`` (c replaced by c + div_mu b).  The sup runs over the union
    of the requested r and dyadic fractions below each, so the result is
    nondecreasing in r.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if variant == "l":
        g = b = 1.0
    elif variant == "l_beta":
        if beta is None:
            raise ValueError("l_beta needs beta")
        g = b = beta
    elif variant == "l_tilde":
        g = b = 1.0
    else:
        raise ValueError(f"unknown seminorm variant {variant!r}")
    fields = []
    if drift is not None:
        fields.append(DriftNorm(drift.domain, drift=drift))
    scalar = potential
    if variant == "l_tilde" and drift is not None:
        div = DriftDivergence(drift.domain, drift=drift)
        scalar = div if potential is None else SumField(drift.domain, parts=(potential, div))
    if scalar is not None:
        fields.append(scalar)
    grid = np.unique(np.concatenate([r] + [r * 2.0**-j for j in range(1, dyadic + 1)]))
    vals = np.zeros_like(grid)
    for f in fields:
        vals += np.array([k_functional(f, profile, g, b, e) for e in grid])
    run = np.maximum.accumulate(vals)
    return run[np.searchsorted(grid, r)]
