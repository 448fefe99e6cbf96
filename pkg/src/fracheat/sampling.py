"""Deterministic search for sup/inf of a sampled ratio.

Sobol points cover the box, a few shrinking Sobol clouds are placed around
the incumbent extremum, and the best candidates are polished with a bounded
Nelder-Mead search.  Everything is driven by a single integer seed so
reports are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc


@dataclass
class Extremum:
    value: float
    point: np.ndarray
    evaluations: int


def _sobol(dim: int, n: int, seed: int) -> np.ndarray:
    m = int(np.ceil(np.log2(max(n, 2))))
    pts = qmc.Sobol(dim, scramble=True, seed=seed).random_base2(m)
    return pts[:n]


def search_extremum(fn, lower, upper, n: int, seed: int = 0, mode: str = "max",
                    rounds: int = 4, cloud: int = 64, shrink: float = 0.25,
                    polish: int = 3) -> Extremum:
    """Extremum of the vectorized ``fn`` over the box [lower, upper].

    ``fn`` takes an (m, dim) array of points and returns m values; NaN values
    are ignored.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    dim = lower.size
    sign = 1.0 if mode == "max" else -1.0
    pts = lower + (upper - lower) * _sobol(dim, n, seed)
    vals = sign * np.asarray(fn(pts), dtype=float)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    i = int(np.argmax(vals))
    best_x, best_v = pts[i], vals[i]
    count = len(pts)
    width = (upper - lower) * shrink
    starts = [pts[j] for j in np.argsort(-vals)[:polish]]
    for k in range(rounds):
        local = best_x + width * (_sobol(dim, cloud, seed + 1000 + k) - 0.5)
        local = np.clip(local, lower, upper)
        v = sign * np.asarray(fn(local), dtype=float)
        v = np.where(np.isnan(v), -np.inf, v)
        count += len(local)
        j = int(np.argmax(v))
        if v[j] > best_v:
            best_x, best_v = local[j], v[j]
        width = width * shrink
    starts = [best_x] + starts[1:] if polish else []
    span = np.where(upper > lower, upper - lower, 1.0)

    def neg(zu):
        z = np.clip(lower + zu * span, lower, upper)
        v = float(sign * np.asarray(fn(z[None, :]), dtype=float)[0])
        return np.inf if np.isnan(v) else -v

    for x0 in starts:
        res = minimize(neg, (x0 - lower) / span, method="Nelder-Mead",
                       options={"maxfev": 60 * dim, "xatol": 1e-6, "fatol": 1e-12})
        count += res.nfev
        if -res.fun > best_v:
            best_v = -res.fun
            best_x = np.clip(lower + res.x * span, lower, upper)
    return Extremum(value=float(sign * best_v), point=best_x, evaluations=count)
