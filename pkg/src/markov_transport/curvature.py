"""Curvature-dimension margins and functional-inequality constant estimators.

The CD(R, n) condition Gamma_2(f) >= R Gamma(f) + (Lf)^2 / n is evaluated
pointwise; best-R estimation samples test functions and returns an upper
bound on the largest admissible R, which is the conservative direction for
verification.  The LSI estimator returns a lower bound on the optimal
constant.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import BadDimension
from .semigroup import spectral_cache
from .triples import (
    MarkovTriple,
    entropy,
    fisher_information,
    gamma,
    gamma2,
)

GAMMA_FLOOR = 1e-12


def cd_margin(triple: MarkovTriple, f, R: float, n: float) -> float:
    """min_x [Gamma_2(f) - R Gamma(f) - (Lf)^2 / n]; >= 0 means CD holds for f."""
    if not (n >= 1):
        raise BadDimension(f"n = {n} must be >= 1 (math.inf allowed)")
    f = np.asarray(f, dtype=float)
    g2 = gamma2(triple, f)
    g1 = gamma(triple, f)
    lf = triple.generator @ f
    dim_term = 0.0 if math.isinf(n) else lf**2 / n
    return float(np.min(g2 - R * g1 - dim_term))


def lemma43_margin(triple: MarkovTriple, f, g, R: float, n: float) -> float:
    """Pointwise margin of the two-function inequality

    Gamma_2(f) + Gamma(Gamma(f), g) + Gamma(f) Gamma(g)
        >= R Gamma(f) + (Lf + Gamma(f, g))^2 / n.

    Exact for diffusion limits; on discrete chains the result is an
    empirical diagnostic only (the proof needs the chain rule for L).
    """
    if not (n >= 1):
        raise BadDimension(f"n = {n} must be >= 1")
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    gf = gamma(triple, f)
    lhs = gamma2(triple, f) + gamma(triple, gf, g) + gf * gamma(triple, g)
    lf = triple.generator @ f
    cross = gamma(triple, f, g)
    dim_term = 0.0 if math.isinf(n) else (lf + cross) ** 2 / n
    rhs = R * gf + dim_term
    return float(np.min(lhs - rhs))


def _ratio_min(triple: MarkovTriple, f, n: float) -> float:
    """min over live states of (Gamma_2 - (Lf)^2/n) / Gamma."""
    g1 = gamma(triple, f)
    live = g1 > GAMMA_FLOOR
    if not np.any(live):
        return np.inf
    g2 = gamma2(triple, f)
    lf = triple.generator @ f
    dim_term = 0.0 if math.isinf(n) else lf**2 / n
    return float(np.min((g2 - dim_term)[live] / g1[live]))


def estimate_best_R(triple: MarkovTriple, n: float, sample_count: int = 64,
                    seed: int = 0) -> float:
    """Upper bound on the largest R with CD(R, n), by sampling plus local descent.

    Test functions are random Gaussian fields and low eigenvectors of the
    generator; the worst candidates are polished by Nelder-Mead.
    Deterministic given the seed.
    """
    if not (n >= 1):
        raise BadDimension(f"n = {n} must be >= 1")
    rng = np.random.default_rng(seed)
    m = triple.m
    cache = spectral_cache(triple)
    candidates = [rng.standard_normal(m) for _ in range(sample_count)]
    order = np.argsort(-cache.eigenvalues)  # 0 first, then slowest modes
    for idx in order[1:min(m, 9)]:
        vec = cache._from_spec(np.eye(m)[idx])
        candidates.append(vec)
    scored = sorted(((_ratio_min(triple, c, n), c) for c in candidates),
                    key=lambda t: t[0])
    best = scored[0][0]
    from scipy.optimize import minimize
    for _, c in scored[:3]:
        res = minimize(lambda v: _ratio_min(triple, v, n), c,
                       method="Nelder-Mead",
                       options={"maxiter": 400 * m, "xatol": 1e-10, "fatol": 1e-12})
        best = min(best, float(res.fun))
    return best


def lsi_lower_bound(triple: MarkovTriple, sample_count: int = 64,
                    seed: int = 0) -> float:
    """Lower bound on the optimal C in Ent(f) <= C int Gamma(f)/f dmu.

    Maximizes the ratio over sampled positive densities (perturbations of 1
    and exponentials of eigenvectors, with local ascent).  The spectral-gap
    limit 1/(2 gap), approached by vanishing perturbations along the slowest
    mode, is included as an analytic candidate.  Deterministic given seed.
    """
    rng = np.random.default_rng(seed)
    m = triple.m
    mu = triple.measure
    cache = spectral_cache(triple)

    def density_from(u):
        v = np.exp(u - u.max())
        return v / float(mu @ v)

    def ratio(u):
        f = density_from(u)
        fi = fisher_information(triple, f)
        if fi <= 1e-300:
            return 0.0
        return entropy(triple, f) / fi

    candidates = [0.3 * rng.standard_normal(m) for _ in range(sample_count)]
    order = np.argsort(-cache.eigenvalues)
    for idx in order[1:min(m, 5)]:
        vec = cache._from_spec(np.eye(m)[idx])
        for eps in (0.5, 0.1, 0.02):
            candidates.append(eps * vec)
    best = max(ratio(c) for c in candidates)
    from scipy.optimize import minimize
    top = sorted(candidates, key=ratio, reverse=True)[:3]
    for c in top:
        res = minimize(lambda u: -ratio(u), c, method="Nelder-Mead",
                       options={"maxiter": 400 * m, "xatol": 1e-10, "fatol": 1e-12})
        best = max(best, float(-res.fun))
    if cache.gap > 0:
        best = max(best, 1.0 / (2.0 * cache.gap))
    return best
