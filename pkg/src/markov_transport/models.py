"""Constructors for the concrete models the verification harness runs on.

Two-point spaces and rings are genuinely discrete chains; circle-diffusion
triples discretize L = d^2/dx^2 - V' d/dx on the unit circle and serve as
diffusion limits for the curvature-dimension checks.
"""

from __future__ import annotations

import numpy as np

from .errors import BadSize, NonPositiveRate, SizeOverflow
from .triples import MarkovTriple, build_triple

PRODUCT_STATE_CAP = 16384


def two_point(kappa: float) -> MarkovTriple:
    """The two point space {a, b} with rate kappa and mu = (1/2, 1/2)."""
    if kappa <= 0:
        raise NonPositiveRate(f"kappa = {kappa} must be positive")
    L = kappa * np.array([[-1.0, 1.0], [1.0, -1.0]])
    return build_triple(("a", "b"), L, np.array([0.5, 0.5]))


def ring_chain(m: int, rate: float) -> MarkovTriple:
    """Nearest-neighbor ring of m states with uniform rates and uniform mu."""
    if m < 3:
        raise BadSize(f"ring needs m >= 3, got {m}")
    if rate <= 0:
        raise NonPositiveRate(f"rate = {rate} must be positive")
    L = np.zeros((m, m))
    idx = np.arange(m)
    L[idx, (idx + 1) % m] = rate
    L[idx, (idx - 1) % m] = rate
    L[idx, idx] = -2.0 * rate
    return build_triple(tuple(range(m)), L, np.full(m, 1.0 / m))


def circle_diffusion(m: int, V=None, circumference: float = 1.0) -> MarkovTriple:
    """Discretization of L = d^2/dx^2 - V' d/dx on a circle.

    Rates c_{i,i+-1} = exp((V_i - V_{i+-1})/2) / h^2 make detailed balance
    with mu_i ~ exp(-V_i) exact at every m; the generator converges to the
    diffusion at order h^2 on smooth test functions.
    """
    if m < 16:
        raise BadSize(f"circle diffusion needs m >= 16, got {m}")
    if V is None:
        Vv = np.zeros(m)
    elif callable(V):
        Vv = np.asarray(V(np.arange(m) * circumference / m), dtype=float)
    else:
        Vv = np.asarray(V, dtype=float)
        if Vv.shape != (m,):
            raise BadSize(f"V has shape {Vv.shape}, expected ({m},)")
    h = circumference / m
    L = np.zeros((m, m))
    idx = np.arange(m)
    for nb in ((idx + 1) % m, (idx - 1) % m):
        L[idx, nb] = np.exp((Vv - Vv[nb]) / 2.0) / h**2
    L[idx, idx] = -L.sum(axis=1)
    mu = np.exp(-Vv)
    mu /= mu.sum()
    return build_triple(tuple(range(m)), L, mu)


def product(t1: MarkovTriple, t2: MarkovTriple) -> MarkovTriple:
    """Product triple: L = L1 (+) L2, mu = mu1 (x) mu2, states (x, y)."""
    m1, m2 = t1.m, t2.m
    if m1 * m2 > PRODUCT_STATE_CAP:
        raise SizeOverflow(f"product would have {m1 * m2} states (cap {PRODUCT_STATE_CAP})")
    L = np.kron(t1.generator, np.eye(m2)) + np.kron(np.eye(m1), t2.generator)
    mu = np.kron(t1.measure, t2.measure)
    states = tuple((a, b) for a in t1.states for b in t2.states)
    return build_triple(states, L, mu)


def lift_first(t1: MarkovTriple, t2: MarkovTriple, f1) -> np.ndarray:
    """Lift a function on the first factor to the product space."""
    return np.kron(np.asarray(f1, dtype=float), np.ones(t2.m))


def lift_second(t1: MarkovTriple, t2: MarkovTriple, f2) -> np.ndarray:
    return np.kron(np.ones(t1.m), np.asarray(f2, dtype=float))


_V_PRESETS = {
    "zero": lambda x: np.zeros_like(x),
    "cos": lambda x: np.cos(2.0 * np.pi * x),
    "sin": lambda x: np.sin(2.0 * np.pi * x),
}


def model_from_config(config: dict) -> MarkovTriple:
    """Build a triple from a CLI-style config dict, e.g.

    {"model": "two_point", "kappa": 2.0}
    {"model": "circle_diffusion", "m": 64, "V": "cos"}
    """
    kind = config.get("model")
    if kind == "two_point":
        return two_point(float(config.get("kappa", 1.0)))
    if kind == "ring_chain":
        return ring_chain(int(config["m"]), float(config.get("rate", 1.0)))
    if kind == "circle_diffusion":
        V = config.get("V", "zero")
        if isinstance(V, str):
            try:
                V = _V_PRESETS[V]
            except KeyError:
                raise ValueError(f"unknown potential preset {V!r}") from None
        return circle_diffusion(int(config["m"]), V,
                                float(config.get("circumference", 1.0)))
    if kind == "product":
        return product(model_from_config(config["first"]),
                       model_from_config(config["second"]))
    raise ValueError(f"unknown model {kind!r}")
