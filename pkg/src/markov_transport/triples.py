"""Finite reversible Markov triples and the operator calculus on them.

A triple bundles an ordered state space, a generator matrix L and a
reversible probability measure mu.  On top of it live the carre du champ
Gamma, its iterate Gamma_2, entropies, Fisher information and the Poisson
solve used to seed transport paths.  All objects are immutable after
construction and every operation is a pure function of its inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DetailedBalanceViolation,
    DomainError,
    NonMarkovGenerator,
    NonPositiveMeasure,
    NotMeanZero,
    ReducibleChain,
    XiDomainError,
    ZeroDensity,
)

ROW_SUM_TOL = 1e-12
MASS_TOL = 1e-10
# densities below this are clamped inside logarithms only
LOG_CLAMP = 1e-300


@dataclass(frozen=True)
class MarkovTriple:
    """Finite state space with generator ``L`` and reversible measure ``mu``."""

    states: tuple
    generator: np.ndarray
    measure: np.ndarray
    detailed_balance_tol: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "generator", np.asarray(self.generator, dtype=float))
        object.__setattr__(self, "measure", np.asarray(self.measure, dtype=float))
        self.generator.setflags(write=False)
        self.measure.setflags(write=False)

    @property
    def m(self) -> int:
        return len(self.states)

    # mu(x) L(x,y), symmetric off the diagonal by detailed balance
    @property
    def edge_weights(self) -> np.ndarray:
        return self.measure[:, None] * self.generator

    def to_json(self) -> str:
        doc = {
            "states": list(self.states),
            "generator": [float(v) for v in self.generator.ravel()],
            "measure": [float(v) for v in self.measure],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "MarkovTriple":
        doc = json.loads(text)
        m = len(doc["states"])
        gen = np.asarray(doc["generator"], dtype=float).reshape(m, m)
        return build_triple(doc["states"], gen, np.asarray(doc["measure"], dtype=float))


def build_triple(states: Sequence, generator, measure,
                 detailed_balance_tol: float = 1e-10) -> MarkovTriple:
    """Validate and assemble a reversible Markov triple.

    Raises NonMarkovGenerator, DetailedBalanceViolation or NonPositiveMeasure
    when the inputs are not a generator matrix reversible with respect to a
    positive probability measure.
    """
    L = np.asarray(generator, dtype=float)
    mu = np.asarray(measure, dtype=float)
    m = len(states)
    if L.shape != (m, m) or mu.shape != (m,):
        raise ValueError(f"inconsistent dimensions: {m} states, L {L.shape}, mu {mu.shape}")
    off = L - np.diag(np.diag(L))
    if np.any(off < 0):
        raise NonMarkovGenerator("negative off-diagonal rate")
    rowsums = L.sum(axis=1)
    if np.max(np.abs(rowsums)) > ROW_SUM_TOL * max(1.0, float(np.abs(L).max())):
        raise NonMarkovGenerator(f"row sums not zero: max |sum| = {np.max(np.abs(rowsums)):.3e}")
    if np.any(mu <= 0):
        raise NonPositiveMeasure("measure must be strictly positive")
    if abs(mu.sum() - 1.0) > MASS_TOL:
        raise NonPositiveMeasure(f"measure mass {mu.sum()!r} != 1")
    S = mu[:, None] * L
    asym = np.abs(S - S.T)
    np.fill_diagonal(asym, 0.0)
    if asym.max() > detailed_balance_tol:
        raise DetailedBalanceViolation(
            f"max |mu(x)L(x,y) - mu(y)L(y,x)| = {asym.max():.3e}")
    return MarkovTriple(tuple(states), L, mu, detailed_balance_tol)


def check_density(triple: MarkovTriple, f, require_positive: bool = False) -> np.ndarray:
    """Validate a density with respect to mu (unit mass, non-negative)."""
    f = np.asarray(f, dtype=float)
    if f.shape != (triple.m,):
        raise ValueError(f"density shape {f.shape} != ({triple.m},)")
    if np.any(f < 0):
        raise ZeroDensity("density has negative entries")
    if require_positive and np.any(f <= 0):
        raise ZeroDensity("density must be strictly positive")
    mass = float(triple.measure @ f)
    if abs(mass - 1.0) > MASS_TOL:
        raise ZeroDensity(f"density mass {mass!r} != 1")
    return f


def gamma(triple: MarkovTriple, f, g=None) -> np.ndarray:
    """Carre du champ Gamma(f,g)(x) = 1/2 sum_y L(x,y)[f(x)-f(y)][g(x)-g(y)].

    The double-sum form is used so that Gamma(f,f) is pointwise non-negative
    exactly; it agrees with 1/2(L(fg) - fLg - gLf) to rounding.
    """
    f = np.asarray(f, dtype=float)
    g = f if g is None else np.asarray(g, dtype=float)
    df = f[:, None] - f[None, :]
    dg = g[:, None] - g[None, :]
    return 0.5 * np.einsum("xy,xy,xy->x", triple.generator, df, dg)


def gamma_operator_form(triple: MarkovTriple, f, g=None) -> np.ndarray:
    """Gamma via the operator identity 1/2(L(fg) - fLg - gLf); self-test route."""
    f = np.asarray(f, dtype=float)
    g = f if g is None else np.asarray(g, dtype=float)
    L = triple.generator
    return 0.5 * (L @ (f * g) - f * (L @ g) - g * (L @ f))


def gamma2(triple: MarkovTriple, f) -> np.ndarray:
    """Iterated carre du champ Gamma_2(f) = 1/2(L Gamma(f) - 2 Gamma(f, Lf))."""
    f = np.asarray(f, dtype=float)
    L = triple.generator
    gf = gamma(triple, f)
    return 0.5 * (L @ gf - 2.0 * gamma(triple, f, L @ f))


def entropy(triple: MarkovTriple, f) -> float:
    """Ent_mu(f) = sum_x mu(x) f(x) log f(x), with 0 log 0 := 0."""
    f = np.asarray(f, dtype=float)
    logs = np.log(np.maximum(f, LOG_CLAMP))
    return float(triple.measure @ (np.where(f > 0, f * logs, 0.0)))


@dataclass(frozen=True)
class XiFunction:
    """Cost weight xi on (0, inf) with 1/xi concave, and Phi with Phi'' = xi."""

    xi: Callable[[np.ndarray], np.ndarray]
    xi_prime: Callable[[np.ndarray], np.ndarray]
    xi_second: Callable[[np.ndarray], np.ndarray]
    phi: Callable[[np.ndarray], np.ndarray]
    name: str = "xi"
    defined_at_zero: bool = False

    def __post_init__(self):
        grid = np.geomspace(1e-4, 1e4, 200)
        vals = self.xi(grid)
        if np.any(vals <= 0):
            raise XiDomainError(f"{self.name}: xi must be positive on (0, inf)")
        # (1/xi)'' = (2 xi'^2 - xi xi'') / xi^3 must be <= 0 for concavity
        xp, xpp = self.xi_prime(grid), self.xi_second(grid)
        inv_second = (2.0 * xp**2 - vals * xpp) / vals**3
        if np.max(inv_second) > 1e-9:
            raise XiDomainError(f"{self.name}: 1/xi is not concave")


def xi_inverse() -> XiFunction:
    """xi(x) = 1/x, Phi(x) = x log x: recovers the usual entropy and distance."""
    return XiFunction(
        xi=lambda x: 1.0 / x,
        xi_prime=lambda x: -1.0 / x**2,
        xi_second=lambda x: 2.0 / x**3,
        phi=lambda x: x * np.log(np.maximum(x, LOG_CLAMP)),
        name="1/x",
    )


def xi_power(p: float) -> XiFunction:
    """xi_p(x) = x^(p-2) with Phi_p(x) = x^p / (p(p-1)), for p in (1,2)."""
    if not 1.0 < p < 2.0:
        raise XiDomainError(f"power exponent p={p} outside (1,2)")
    return XiFunction(
        xi=lambda x: x ** (p - 2.0),
        xi_prime=lambda x: (p - 2.0) * x ** (p - 3.0),
        xi_second=lambda x: (p - 2.0) * (p - 3.0) * x ** (p - 4.0),
        phi=lambda x: x**p / (p * (p - 1.0)),
        name=f"x^{p - 2:g}",
        defined_at_zero=True,
    )


def phi_entropy(triple: MarkovTriple, f, xi: XiFunction) -> float:
    """Phi-entropy int Phi(f) dmu - Phi(int f dmu), with Phi'' = xi."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0) and not xi.defined_at_zero:
        raise DomainError("density has zeros and Phi is undefined at 0")
    mean = float(triple.measure @ f)
    return float(triple.measure @ xi.phi(f) - xi.phi(np.array(mean)))


def fisher_information(triple: MarkovTriple, f) -> float:
    """sum_x mu(x) Gamma(f)(x) / f(x); requires f strictly positive."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise ZeroDensity("Fisher information needs a strictly positive density")
    return float(triple.measure @ (gamma(triple, f) / f))


def entropy_production(triple: MarkovTriple, f) -> float:
    """sum_x mu(x) Gamma(f, log f)(x): the exact -d/dt Ent(P_t f) at t=0.

    Coincides with fisher_information in the diffusion limit; on discrete
    chains it is the quantity the entropy actually dissipates.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise ZeroDensity("entropy production needs a strictly positive density")
    return float(triple.measure @ gamma(triple, f, np.log(f)))


def solve_poisson(triple: MarkovTriple, rhs, _cache=None) -> np.ndarray:
    """Solve L h = rhs with sum mu h = 0, for rhs orthogonal to constants.

    Spectral solve of the mu-symmetrized generator restricted to the
    mean-zero subspace; eigenvalues below 1e-12 in modulus are treated as
    kernel directions (only the constant is allowed).
    """
    rhs = np.asarray(rhs, dtype=float)
    mu = triple.measure
    if abs(float(mu @ rhs)) > MASS_TOL * max(1.0, float(np.abs(rhs).max())):
        raise NotMeanZero("right-hand side is not mean-zero in L^2(mu)")
    if _cache is None:
        from .semigroup import SpectralCache
        _cache = SpectralCache(triple)
    return _cache.solve_poisson(rhs)


def spectral_gap(triple: MarkovTriple) -> float:
    """Smallest nonzero modulus among the eigenvalues of -L."""
    from .semigroup import SpectralCache
    return SpectralCache(triple).gap
