"""Discretized action functional and certified upper bounds on T_2 and T_xi.

The path discretization keeps densities at K+1 uniform time nodes and
potentials at the K interval midpoints; the continuity constraint
(rho_{k+1} - rho_k)/ds + L h_{k+1/2} = 0 is exactly linear, so the feasible
set is an affine subspace of the h variables and every iterate of the
minimizer is a feasible path.  The returned action is therefore always a
true upper bound on the discretized squared distance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DegenerateMap,
    DomainError,
    InfeasiblePath,
    NonPositiveDensity,
    NotNormalized,
    RootFindFailure,
)
from .semigroup import LineGrid, spectral_cache
from .triples import MarkovTriple, XiFunction, check_density, xi_inverse

RESIDUAL_TOL = 1e-10


@dataclass
class DiscretePath:
    """Time-discretized admissible pair: densities at nodes, potentials at midpoints."""

    triple: MarkovTriple
    times: np.ndarray          # s_0 = 0 < ... < s_K = 1
    rhos: np.ndarray           # (K+1, m)
    hs: np.ndarray             # (K, m)

    @property
    def K(self) -> int:
        return len(self.hs)

    @property
    def ds(self) -> np.ndarray:
        return np.diff(self.times)

    def residuals(self) -> np.ndarray:
        """Continuity defects (rho_{k+1}-rho_k)/ds_k + L h_{k+1/2}, one row per slice."""
        L = self.triple.generator
        return np.diff(self.rhos, axis=0) / self.ds[:, None] + self.hs @ L.T

    def max_residual(self) -> float:
        return float(np.abs(self.residuals()).max())

    def validate(self, f=None, g=None) -> None:
        if f is not None and np.abs(self.rhos[0] - f).max() > 0:
            raise InfeasiblePath("path does not start at f")
        if g is not None and np.abs(self.rhos[-1] - g).max() > 0:
            raise InfeasiblePath("path does not end at g")
        if np.any(self.rhos <= 0):
            raise NonPositiveDensity("path density not strictly positive")
        mass = self.rhos @ self.triple.measure
        if np.abs(mass - 1.0).max() > 1e-8:
            raise InfeasiblePath(f"slice mass deviates by {np.abs(mass - 1.0).max():.3e}")
        scale = max(1.0, float(np.abs(self.hs @ self.triple.generator.T).max()))
        if self.max_residual() > RESIDUAL_TOL * scale:
            raise InfeasiblePath(f"continuity residual {self.max_residual():.3e}")


@dataclass
class TransportResult:
    """Certified upper bound on the squared distance plus optimality diagnostics."""

    value: float
    path: DiscretePath
    phi_profile: np.ndarray
    diagnostics: dict


@dataclass
class SolverOptions:
    tol_rel: float = 1e-8
    max_iter: int = 10000
    rho_floor: float = 1e-9
    gtol: float = 1e-9
    memory: int = 10
    reparam_eps_frac: float = 0.01
    seed: int = 0


def _slice_gammas(L: np.ndarray, hs: np.ndarray) -> np.ndarray:
    """Gamma(h_k)(x) for every slice, via the non-negative double-sum form."""
    D = hs[:, :, None] - hs[:, None, :]
    return 0.5 * np.einsum("xy,kxy->kx", L, D * D)


def phi_profile(path: DiscretePath, xi: Optional[XiFunction] = None) -> np.ndarray:
    """Per-slice costs phi_k = sum_x mu(x) Gamma(h_k)(x) xi(rhobar_k)(x)."""
    tri = path.triple
    gam = _slice_gammas(tri.generator, path.hs)
    rhobar = 0.5 * (path.rhos[:-1] + path.rhos[1:])
    if np.any(rhobar <= 0):
        raise NonPositiveDensity("midpoint density not positive")
    w = (1.0 / rhobar) if xi is None else xi.xi(rhobar)
    return (gam * w) @ tri.measure


def action(triple: MarkovTriple, path: DiscretePath,
           xi: Optional[XiFunction] = None) -> float:
    """Total action sum_k ds_k phi_k of a feasible discrete path."""
    if path.triple is not triple and path.triple != triple:
        raise ValueError("path does not belong to this triple")
    scale = max(1.0, float(np.abs(path.hs @ triple.generator.T).max()))
    if path.max_residual() > RESIDUAL_TOL * scale:
        raise InfeasiblePath(f"continuity residual {path.max_residual():.3e}")
    if np.any(path.rhos <= 0):
        raise NonPositiveDensity("path density not strictly positive")
    return float(path.ds @ phi_profile(path, xi))


def initial_path(triple: MarkovTriple, f, g, K: int) -> DiscretePath:
    """Linear interpolation rho_k = (1-s_k) f + s_k g with constant Poisson h."""
    f = check_density(triple, f, require_positive=True)
    g = check_density(triple, g, require_positive=True)
    if K < 2:
        raise ValueError(f"need K >= 2, got {K}")
    times = np.linspace(0.0, 1.0, K + 1)
    rhos = (1.0 - times)[:, None] * f[None, :] + times[:, None] * g[None, :]
    h = spectral_cache(triple).solve_poisson(f - g)
    hs = np.tile(h, (K, 1))
    return DiscretePath(triple, times, rhos, hs)


def path_from_density_trajectory(triple: MarkovTriple, times, rhos) -> DiscretePath:
    """Exactly feasible path through given density snapshots, h by Poisson solve.

    Used by the certified theorem checks: any density trajectory (mass
    conserved per slice) determines midpoint potentials with machine-level
    continuity residuals.
    """
    times = np.asarray(times, dtype=float)
    rhos = np.asarray(rhos, dtype=float)
    cache = spectral_cache(triple)
    ds = np.diff(times)
    hs = np.empty((len(ds), triple.m))
    for k in range(len(ds)):
        hs[k] = cache.solve_poisson(-(rhos[k + 1] - rhos[k]) / ds[k])
    return DiscretePath(triple, times, rhos, hs)


def t2_two_point_exact(kappa: float, r: float, t: float) -> float:
    """Closed-form squared distance between the two-point measures with
    masses r and t at the second state: 2 (arcsin sqrt t - arcsin sqrt r)^2 / kappa."""
    if kappa <= 0:
        raise DomainError(f"kappa = {kappa} must be positive")
    if not (0.0 < r < 1.0 and 0.0 < t < 1.0):
        raise DomainError(f"masses r = {r}, t = {t} must lie in (0, 1)")
    return 2.0 * (np.arcsin(np.sqrt(t)) - np.arcsin(np.sqrt(r))) ** 2 / kappa


# ---------------------------------------------------------------------------
# action minimization


class _ReducedProblem:
    """Action and gradient in the reduced h variables.

    Interior densities are eliminated through rho_{k+1} = rho_k - ds L h_k;
    the endpoint condition is the single affine constraint
    mean_k(h_k) = h_poisson with L h_poisson = f - g, and feasible descent
    directions are those with zero slice mean.
    """

    def __init__(self, triple, f, g, K, xi, rho_floor):
        self.triple = triple
        self.f = f
        self.g = g
        self.K = K
        self.ds = 1.0 / K
        self.xi = xi
        self.rho_floor = rho_floor
        self.L = triple.generator
        self.mu = triple.measure
        self.S = self.mu[:, None] * self.L
        np.fill_diagonal(self.S, 0.0)
        self.S0 = self.S.sum(axis=1)

    def _rhos(self, hs):
        Lh = hs @ self.L.T
        rhos = np.empty((self.K + 1, self.triple.m))
        rhos[0] = self.f
        rhos[1:] = self.f - self.ds * np.cumsum(Lh, axis=0)
        rhos[-1] = self.g
        return rhos

    def value(self, hs):
        rhos = self._rhos(hs)
        if rhos.min() <= self.rho_floor:
            return np.inf, None
        rhobar = 0.5 * (rhos[:-1] + rhos[1:])
        gam = _slice_gammas(self.L, hs)
        w = (1.0 / rhobar) if self.xi is None else self.xi.xi(rhobar)
        return self.ds * float(np.einsum("kx,kx,x->", gam, w, self.mu)), rhos

    def value_and_grad(self, hs):
        rhos = self._rhos(hs)
        if rhos.min() <= self.rho_floor:
            return np.inf, None
        rhobar = 0.5 * (rhos[:-1] + rhos[1:])
        gam = _slice_gammas(self.L, hs)
        if self.xi is None:
            w = 1.0 / rhobar
            wprime = -1.0 / rhobar**2
        else:
            w = self.xi.xi(rhobar)
            wprime = self.xi.xi_prime(rhobar)
        A = self.ds * float(np.einsum("kx,kx,x->", gam, w, self.mu))
        # d/dh of the Gamma factors
        Sw = w @ self.S.T                      # (K, m): sum_y S_zy w_y
        Sh = hs @ self.S.T
        Swh = (w * hs) @ self.S.T
        grad = self.ds * (hs * (w * self.S0 + Sw) - w * Sh - Swh)
        # d/dh of the density weights, through the cumulative constraint;
        # endpoint densities are pinned, so only interior nodes contribute
        q = self.ds * self.mu * gam * wprime   # (K, m)
        nodeq = 0.5 * (q[:-1] + q[1:])         # sensitivity of interior nodes 1..K-1
        suffix = np.zeros_like(q)
        suffix[:-1] = np.cumsum(nodeq[::-1], axis=0)[::-1]
        grad -= self.ds * (suffix @ self.L)
        return A, grad

    @staticmethod
    def project(direction):
        """Project onto zero-slice-mean directions (the feasible tangent space)."""
        return direction - direction.mean(axis=0, keepdims=True)


def _lbfgs_direction(g_flat, s_list, y_list):
    q = g_flat.copy()
    alphas = []
    for s, y in zip(reversed(s_list), reversed(y_list)):
        rho = 1.0 / float(y @ s)
        a = rho * float(s @ q)
        q -= a * y
        alphas.append((a, rho, s, y))
    if y_list:
        y = y_list[-1]
        q *= float(s_list[-1] @ y) / float(y @ y)
    for a, rho, s, y in reversed(alphas):
        b = rho * float(y @ q)
        q += (a - b) * s
    return -q


def minimize_action(triple: MarkovTriple, f, g, K: int = 64,
                    options: Optional[SolverOptions] = None,
                    xi: Optional[XiFunction] = None) -> TransportResult:
    """Convex descent over feasible discrete paths; certified upper bound on T_2^2.

    Feasibility holds at every iterate and the action is non-increasing
    across iterations; the run is deterministic given inputs and options.
    """
    opts = options or SolverOptions()
    f = check_density(triple, f, require_positive=True)
    g = check_density(triple, g, require_positive=True)
    if np.array_equal(f, g):
        times = np.linspace(0.0, 1.0, K + 1)
        path = DiscretePath(triple, times, np.tile(f, (K + 1, 1)), np.zeros((K, triple.m)))
        return TransportResult(0.0, path, np.zeros(K),
                               {"iterations": 0, "grad_norm": 0.0,
                                "phi_deviation": 0.0, "converged": True})
    if K < 8:
        raise ValueError(f"minimization needs K >= 8, got {K}")

    seed_path = initial_path(triple, f, g, K)
    a0 = action(triple, seed_path, xi)
    if a0 > 0 and opts.reparam_eps_frac > 0:
        seed_path = reparametrize_eps_geodesic(seed_path, opts.reparam_eps_frac * a0,
                                               xi=xi)

    prob = _ReducedProblem(triple, f, g, K, xi, opts.rho_floor)
    hs = seed_path.hs.copy()
    A, grad = prob.value_and_grad(hs)
    pg = prob.project(grad)
    s_list: list = []
    y_list: list = []
    iterations = 0
    converged = False
    for iterations in range(1, opts.max_iter + 1):
        d = _lbfgs_direction(pg.ravel(), s_list, y_list).reshape(hs.shape)
        d = prob.project(d)
        slope = float(np.sum(d * pg))
        if slope >= 0:
            d, slope = -pg, -float(np.sum(pg * pg))
            s_list, y_list = [], []
        step = 1.0
        A_new = np.inf
        for _ in range(60):
            trial = hs + step * d
            A_new, _ = prob.value(trial)
            if A_new <= A + 1e-4 * step * slope:
                break
            step *= 0.5
        else:
            break
        hs_new = trial
        A_next, grad_new = prob.value_and_grad(hs_new)
        pg_new = prob.project(grad_new)
        s_list.append((hs_new - hs).ravel())
        y_list.append((pg_new - pg).ravel())
        if float(s_list[-1] @ y_list[-1]) <= 1e-14 * float(y_list[-1] @ y_list[-1]):
            s_list.pop(), y_list.pop()
        if len(s_list) > opts.memory:
            s_list.pop(0), y_list.pop(0)
        hs, pg = hs_new, pg_new
        rel_drop = (A - A_new) / max(A, 1e-300)
        A = A_new
        gnorm = float(np.abs(pg).max())
        if rel_drop < opts.tol_rel or gnorm <= opts.gtol * max(1.0, A):
            converged = True
            break

    rhos = prob._rhos(hs)
    times = np.linspace(0.0, 1.0, K + 1)
    path = DiscretePath(triple, times, rhos, hs)
    profile = phi_profile(path, xi)
    value = float(path.ds @ profile)
    mean_phi = float(profile.mean())
    deviation = float(np.abs(profile - mean_phi).max() / mean_phi) if mean_phi > 0 else 0.0
    diagnostics = {
        "iterations": iterations,
        "grad_norm": float(np.abs(pg).max()),
        "phi_deviation": deviation,
        "converged": converged,
    }
    return TransportResult(value, path, profile, diagnostics)


def minimize_action_xi(triple: MarkovTriple, f, g, xi: XiFunction, K: int = 64,
                       options: Optional[SolverOptions] = None) -> TransportResult:
    """As minimize_action with cost weight xi(rhobar) replacing 1/rhobar."""
    return minimize_action(triple, f, g, K, options, xi=xi)


def reparametrize_eps_geodesic(path: DiscretePath, eps: float,
                               xi: Optional[XiFunction] = None) -> DiscretePath:
    """Time-change a feasible path so its per-slice cost is nearly constant.

    The scalar a with int sqrt(phi + a) = sqrt(Phi + eps) is found by
    bracketed root finding; the new potentials are slice averages of the old
    ones, which keeps the continuity residual at machine precision.
    """
    if eps <= 0:
        raise ValueError(f"eps = {eps} must be positive")
    profile = phi_profile(path, xi)
    ds = path.ds
    total = float(ds @ profile)
    if total == 0.0:
        return path
    target = np.sqrt(total + eps)

    def gap(a):
        return float(ds @ np.sqrt(profile + a)) - target

    lo, hi = 0.0, max(eps, profile.max(), 1.0)
    for _ in range(200):
        if gap(hi) >= 0:
            break
        hi *= 2.0
    else:
        raise RootFindFailure("could not bracket the time-change constant")
    if gap(lo) > 0:
        raise RootFindFailure("corrupt cost profile: already above target at a=0")
    a = brentq(gap, lo, hi, xtol=1e-15 * max(1.0, hi))

    speeds = np.sqrt(profile + a)
    cum = np.concatenate([[0.0], np.cumsum(ds * speeds)])
    K = path.K
    new_times = np.linspace(0.0, 1.0, K + 1)
    betas = np.interp(new_times * cum[-1], cum, path.times)
    betas[0], betas[-1] = 0.0, 1.0

    m = path.triple.m
    new_rhos = np.empty((K + 1, m))
    new_hs = np.zeros((K, m))
    old_t = path.times
    for k, b in enumerate(betas):
        j = min(np.searchsorted(old_t, b, side="right") - 1, path.K - 1)
        theta = (b - old_t[j]) / ds[j]
        new_rhos[k] = (1.0 - theta) * path.rhos[j] + theta * path.rhos[j + 1]
    new_rhos[0], new_rhos[-1] = path.rhos[0], path.rhos[-1]
    new_ds = np.diff(new_times)
    for k in range(K):
        b0, b1 = betas[k], betas[k + 1]
        # overlap of [b0, b1] with each original slice
        left = np.maximum(old_t[:-1], b0)
        right = np.minimum(old_t[1:], b1)
        w = np.clip(right - left, 0.0, None)
        new_hs[k] = (w @ path.hs) / new_ds[k]
    return DiscretePath(path.triple, new_times, new_rhos, new_hs)


# ---------------------------------------------------------------------------
# one-dimensional Wasserstein machinery on line grids


def _cdf(grid: LineGrid, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    inc = 0.5 * grid.h * (f[:-1] + f[1:])
    F = np.concatenate([[0.0], np.cumsum(inc)])
    if abs(F[-1] - 1.0) > 1e-6:
        raise NotNormalized(f"density integrates to {F[-1]!r}")
    return F / F[-1]


def w2_quantile_1d(grid: LineGrid, f, g, n_u: int = 4096) -> float:
    """Exact 1D Wasserstein distance via quantile functions on a midpoint u-grid."""
    F, G = _cdf(grid, f), _cdf(grid, g)
    u = (np.arange(n_u) + 0.5) / n_u
    qf = np.interp(u, F, grid.x)
    qg = np.interp(u, G, grid.x)
    return float(np.sqrt(np.mean((qf - qg) ** 2)))


def displacement_interpolation_1d(grid: LineGrid, f, g, s: float):
    """Wasserstein geodesic density rho_s = ((1-s) id + s T)_# f and its entropy.

    T is the monotone quantile map G^{-1} o F; the entropy is computed by the
    change of variables Ent(rho_s) = int f log(f / M_s') dx with M_s' from
    finite differences of T.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s = {s} outside [0, 1]")
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    F, G = _cdf(grid, f), _cdf(grid, g)
    x = grid.x
    T = np.interp(F, G, x)
    Tp = np.gradient(T, x)
    live = f > 1e-12
    if np.any(Tp[live] <= 0):
        raise DegenerateMap("monotone map has non-positive derivative where f > 0")
    Tp = np.where(live, Tp, 1.0)
    Mp = (1.0 - s) + s * Tp
    ent = grid.integrate(np.where(live, f * np.log(np.maximum(f, 1e-300) / Mp), 0.0))
    y = (1.0 - s) * x + s * T
    vals = f / Mp
    order = np.argsort(y)
    density = np.interp(x, y[order], vals[order], left=0.0, right=0.0)
    return density, float(ent)
