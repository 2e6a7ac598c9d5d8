"""Exact evolution on finite triples and the heat semigroup on 1D line grids.

Finite-triple evolution P_t = e^{tL} goes through a dense eigendecomposition
of the mu-symmetrized generator, cached per triple; state spaces are small
and many t values are needed per trajectory.  Line-grid heat evolution uses
direct Gaussian-kernel quadrature, which keeps the kernel exact and the
grids are small.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryMassLoss, NegativeTime, ReducibleChain
from .triples import MarkovTriple

_KERNEL_TOL = 1e-12


class SpectralCache:
    """Eigendecomposition of L in L^2(mu), reused across evolve calls.

    With D = diag(mu), the matrix D^{1/2} L D^{-1/2} is symmetric by
    detailed balance; its eigenpairs give e^{tL} f = D^{-1/2} U e^{t lam}
    U^T D^{1/2} f.  Immutable after construction.
    """

    def __init__(self, triple: MarkovTriple):
        self.triple = triple
        mu = triple.measure
        d = np.sqrt(mu)
        M = (d[:, None] * triple.generator) / d[None, :]
        M = 0.5 * (M + M.T)
        lam, U = np.linalg.eigh(M)
        # clip rounding noise: the spectrum of a generator is <= 0
        lam[lam > 0] = 0.0
        self.eigenvalues = lam
        self._U = U
        self._d = d
        self._kernel = np.abs(lam) < _KERNEL_TOL
        if np.count_nonzero(self._kernel) > 1:
            raise ReducibleChain("kernel of L has dimension > 1")
        nonzero = lam[~self._kernel]
        self.gap = float(-nonzero.max()) if nonzero.size else 0.0
        recon = (self._U * lam) @ self._U.T
        recon = recon / d[:, None] * d[None, :]
        self.reconstruction_error = float(np.abs(recon - triple.generator).max())

    def _to_spec(self, f):
        return self._U.T @ (self._d * np.asarray(f, dtype=float))

    def _from_spec(self, c):
        return (self._U @ c) / self._d

    def evolve(self, f, t: float) -> np.ndarray:
        """e^{tL} f for a scalar field or density given by values on states."""
        if t < 0:
            raise NegativeTime(f"t = {t} < 0")
        return self._from_spec(np.exp(t * self.eigenvalues) * self._to_spec(f))

    def evolve_integral(self, f, a: float, b: float) -> np.ndarray:
        """int_a^b e^{uL} f du, evaluated exactly on the spectrum."""
        if a < 0 or b < a:
            raise NegativeTime(f"bad time interval [{a}, {b}]")
        lam = self.eigenvalues
        w = np.where(self._kernel, b - a,
                     (np.exp(lam * b) - np.exp(lam * a)) / np.where(self._kernel, 1.0, lam))
        return self._from_spec(w * self._to_spec(f))

    def solve_poisson(self, rhs) -> np.ndarray:
        """L h = rhs with sum mu h = 0; pseudo-inverse on the mean-zero subspace."""
        c = self._to_spec(rhs)
        inv = np.where(self._kernel, 0.0, 1.0 / np.where(self._kernel, 1.0, self.eigenvalues))
        h = self._from_spec(inv * c)
        return h - float(self.triple.measure @ h)


_caches: dict = {}


def spectral_cache(triple: MarkovTriple) -> SpectralCache:
    """Per-triple cache keyed on identity; triples are immutable."""
    key = id(triple)
    cache = _caches.get(key)
    if cache is None or cache.triple is not triple:
        cache = SpectralCache(triple)
        _caches[key] = cache
    return cache


def evolve(triple: MarkovTriple, f, t: float) -> np.ndarray:
    """P_t f = e^{tL} f; preserves mass of densities and positivity."""
    return spectral_cache(triple).evolve(f, t)


@dataclass(frozen=True)
class LineGrid:
    """Uniform grid on [a, b] with trapezoid quadrature weights."""

    a: float
    b: float
    m: int

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("need b > a")
        if self.m < 16:
            raise ValueError("need at least 16 grid nodes")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.m)

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.m - 1)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.m, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def integrate(self, values) -> float:
        return float(self.weights @ np.asarray(values, dtype=float))

    def entropy(self, f) -> float:
        """int f log f dx with 0 log 0 := 0."""
        f = np.asarray(f, dtype=float)
        logs = np.log(np.maximum(f, 1e-300))
        return self.integrate(np.where(f > 0, f * logs, 0.0))


def _heat_kernel_matrix(grid: LineGrid, t: float) -> np.ndarray:
    x = grid.x
    dx2 = (x[:, None] - x[None, :]) ** 2
    return np.exp(-dx2 / (4.0 * t)) / np.sqrt(4.0 * np.pi * t)


def heat_evolve_vector_line(grid: LineGrid, w, t: float) -> np.ndarray:
    """Heat semigroup on fields (no unit-mass requirement); same scalar kernel."""
    if t < 0:
        raise NegativeTime(f"t = {t} < 0")
    w = np.asarray(w, dtype=float)
    if t == 0:
        return w.copy()
    K = _heat_kernel_matrix(grid, t)
    return K @ (grid.weights * w)


def heat_evolve_gradient_line(grid: LineGrid, f, t: float) -> np.ndarray:
    """Spatial derivative of the evolved field, via the exact kernel derivative
    d/dx K_t(x, y) = -(x - y)/(2t) K_t(x, y); finite differences only at t=0."""
    f = np.asarray(f, dtype=float)
    if t < 0:
        raise NegativeTime(f"t = {t} < 0")
    if t == 0:
        return np.gradient(f, grid.x)
    x = grid.x
    K = _heat_kernel_matrix(grid, t) * (-(x[:, None] - x[None, :]) / (2.0 * t))
    return K @ (grid.weights * f)


def heat_evolve_line(grid: LineGrid, f, t: float, mass_tol: float = 1e-4) -> np.ndarray:
    """H_t f by trapezoid quadrature of the Gaussian convolution.

    Hard error on boundary mass loss (rather than renormalizing) so that
    contraction checks stay honest.
    """
    f = np.asarray(f, dtype=float)
    out = heat_evolve_vector_line(grid, f, t)
    if abs(grid.integrate(out) - 1.0) > mass_tol:
        raise BoundaryMassLoss(
            f"mass after evolution {grid.integrate(out)!r}; truncation too tight")
    return out
