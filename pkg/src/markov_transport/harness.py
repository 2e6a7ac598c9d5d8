"""Certified numerical verification of contraction and EVI inequalities.

Each ``verify_*`` operation produces a VerificationReport for one inequality
instance.  Wherever the underlying proof pushes an explicit admissible path
through the semigroup, the check is run on that pushed path: for a fixed
discrete density trajectory the midpoint potentials are unique up to
constants, so the recomputed action is a genuine upper bound on the squared
distance and the report is a numerical instance of the proof inequality
("certified-path-action" provenance).  Comparisons of two independent solver
outputs are labeled "solver-upper-bound" and are diagnostics, not proofs.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BadExponent,
    BadParameters,
    BadTimes,
    GeodesicQuality,
    NegativeTime,
    NotProductForm,
)
from .models import product as product_triple
from .semigroup import (
    LineGrid,
    heat_evolve_gradient_line,
    heat_evolve_line,
    heat_evolve_vector_line,
    spectral_cache,
)
from .transport import (
    DiscretePath,
    SolverOptions,
    action,
    displacement_interpolation_1d,
    minimize_action,
    path_from_density_trajectory,
    w2_quantile_1d,
)
from .triples import (
    MarkovTriple,
    XiFunction,
    entropy,
    gamma,
    phi_entropy,
)

EMPIRICAL_NOTE = "empirical-only (no diffusion property)"

_trapz = getattr(np, "trapezoid", np.trapz)


# ---------------------------------------------------------------------------
# report plumbing


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _serialize(obj) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if obj is None:
        return "null"
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {_serialize(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_serialize(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_17g(obj) -> str:
    return _serialize(obj)


def _digest(values) -> str:
    """Short stable fingerprint for array-valued parameters."""
    arr = np.ascontiguousarray(np.asarray(values, dtype=float))
    return hashlib.sha1(arr.tobytes()).hexdigest()[:12]


@dataclass
class VerificationReport:
    """One inequality instance: lhs <= rhs expected, margin = rhs - lhs."""

    inequality_id: str
    parameters: dict
    lhs: float
    rhs: float
    lhs_provenance: str
    rhs_provenance: str
    tolerance: float
    notes: tuple = ()
    diagnostic: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance

    @property
    def params_hash(self) -> str:
        return hashlib.sha1(dumps_17g(self.parameters).encode()).hexdigest()[:12]

    def to_dict(self) -> dict:
        return {
            "inequality_id": self.inequality_id,
            "parameters": self.parameters,
            "params_hash": self.params_hash,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "lhs_provenance": self.lhs_provenance,
            "rhs_provenance": self.rhs_provenance,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "diagnostic": self.diagnostic,
            "notes": list(self.notes),
            "extras": self.extras,
        }

    def to_json(self) -> str:
        return dumps_17g(self.to_dict())


def reports_to_json(reports: Sequence[VerificationReport]) -> str:
    return dumps_17g([r.to_dict() for r in reports])


def reports_to_csv(reports: Sequence[VerificationReport]) -> str:
    lines = ["inequality_id,params_hash,lhs,rhs,margin,pass"]
    for r in reports:
        lines.append(",".join([
            r.inequality_id, r.params_hash, format_float(r.lhs),
            format_float(r.rhs), format_float(r.margin),
            "true" if r.passed else "false",
        ]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# shared helpers


def composite_time_grid(T: float, nodes: int = 33) -> np.ndarray:
    """Geometric-near-zero plus uniform time nodes on [0, T]."""
    if T < 0:
        raise NegativeTime(f"T = {T} < 0")
    if T == 0:
        return np.array([0.0])
    n_geo = max(nodes // 2, 4)
    geo = T * np.geomspace(1e-4, 0.5, n_geo)
    uni = np.linspace(0.5 * T, T, max(nodes - n_geo, 4))
    return np.unique(np.concatenate([[0.0], geo, uni]))


def _heat_time_grid(grid: LineGrid, T: float, nodes: int) -> np.ndarray:
    """Composite grid restricted to times the kernel quadrature resolves.

    Below t_min = (2h)^2 the Gaussian kernel is narrower than the grid can
    integrate; t = 0 stays (the evolution is the identity there) and the
    integrand is continuous across the gap.
    """
    t_min = (2.0 * grid.h) ** 2
    tg = composite_time_grid(T, nodes)
    if T <= t_min:
        return np.array([0.0, T]) if T > 0 else np.array([0.0])
    keep = (tg == 0.0) | (tg >= t_min)
    return np.unique(np.concatenate([tg[keep], [t_min]]))


def _is_circle_like(triple: MarkovTriple) -> bool:
    """Nearest-neighbor ring with many states: treated as a diffusion limit."""
    m = triple.m
    if m < 16:
        return False
    off = triple.generator.copy()
    np.fill_diagonal(off, 0.0)
    idx = np.arange(m)
    allowed = np.zeros((m, m), dtype=bool)
    allowed[idx, (idx + 1) % m] = True
    allowed[idx, (idx - 1) % m] = True
    return not np.any(off[~allowed] != 0.0)


def _diffusion_notes(triple: MarkovTriple) -> tuple:
    return () if _is_circle_like(triple) else (EMPIRICAL_NOTE,)


def mesh_tolerance(triple: MarkovTriple, scale: float) -> float:
    """max(0.05 scale, 5 h scale) with h the spatial step of the ring."""
    scale = max(abs(scale), 1e-12)
    h = 1.0 / triple.m if _is_circle_like(triple) else 0.0
    return max(0.05 * scale, 5.0 * h * scale)


def push_path(path: DiscretePath, T: float) -> DiscretePath:
    """Evolve every density node by P_T; potentials by the unique Poisson solve.

    P_T commutes with L, so the evolved trajectory is exactly feasible and
    its action upper-bounds the squared distance of the evolved endpoints.
    """
    cache = spectral_cache(path.triple)
    rhos = np.array([cache.evolve(r, T) for r in path.rhos])
    return path_from_density_trajectory(path.triple, path.times, rhos)


def evi_path(path: DiscretePath, t: float) -> DiscretePath:
    """Time-skewed push (P_{ts} rho_s)_s joining rho_0 to P_t(rho_1)."""
    cache = spectral_cache(path.triple)
    rhos = np.array([cache.evolve(r, t * s) for r, s in zip(path.rhos, path.times)])
    return path_from_density_trajectory(path.triple, path.times, rhos)


def _entropy_correction(triple: MarkovTriple, f, g, R: float, n: float,
                        T: float, nodes: int) -> float:
    """(2/n) int_0^T e^{-2R(T-t)} (Ent P_t g - Ent P_t f)^2 dt."""
    if math.isinf(n) or T == 0:
        return 0.0
    grid = composite_time_grid(T, nodes)
    cache = spectral_cache(triple)
    vals = np.array([
        math.exp(-2.0 * R * (T - t))
        * (entropy(triple, cache.evolve(g, t)) - entropy(triple, cache.evolve(f, t))) ** 2
        for t in grid])
    return (2.0 / n) * float(_trapz(vals, grid))


# ---------------------------------------------------------------------------
# heat-semigroup checks on line grids


def verify_prop22_heat(grid: LineGrid, f, g, T: float,
                       options: Optional[SolverOptions] = None,
                       n: float = 1.0, t_nodes: int = 65,
                       tolerance: Optional[float] = None) -> VerificationReport:
    """Dimensional contraction of the 1D heat flow in exact quantile W2."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    w0 = w2_quantile_1d(grid, f, g) ** 2
    lhs = w2_quantile_1d(grid, heat_evolve_line(grid, f, T),
                         heat_evolve_line(grid, g, T)) ** 2
    tg = _heat_time_grid(grid, T, t_nodes)
    ent_gap = np.array([
        grid.entropy(heat_evolve_line(grid, f, t)) - grid.entropy(heat_evolve_line(grid, g, t))
        for t in tg])
    correction = (2.0 / n) * float(_trapz(ent_gap**2, tg))
    rhs = w0 - correction
    scale = max(w0, 1e-9)
    tol = 1e-3 * scale if tolerance is None else tolerance
    return VerificationReport(
        "prop22_heat",
        {"T": T, "n": n, "t_nodes": int(t_nodes), "grid": [grid.a, grid.b, grid.m],
         "f": _digest(f), "g": _digest(g)},
        lhs, rhs, "quadrature", "quadrature", tol,
        extras={"w2sq_initial": w0, "correction": correction})


def verify_lemma21_heat(grid: LineGrid, F, g, T: float,
                        n: float = 1.0, t_nodes: int = 65,
                        tolerance: Optional[float] = None) -> VerificationReport:
    """Weighted-field dissipation bound along the heat flow (n = 1)."""
    F = np.asarray(F, dtype=float)
    g = np.asarray(g, dtype=float)
    rhs0 = grid.integrate(F**2 / g)
    gT = heat_evolve_line(grid, g, T)
    lhs = grid.integrate(heat_evolve_vector_line(grid, F, T) ** 2 / gT)
    tg = _heat_time_grid(grid, T, t_nodes)
    inner = np.array([
        grid.integrate(heat_evolve_vector_line(grid, F, t)
                       * heat_evolve_gradient_line(grid, g, t)
                       / heat_evolve_line(grid, g, t))
        for t in tg])
    correction = (2.0 / n) * float(_trapz(inner**2, tg))
    rhs = rhs0 - correction
    scale = max(rhs0, 1e-9)
    tol = 1e-3 * scale if tolerance is None else tolerance
    return VerificationReport(
        "lemma21_heat",
        {"T": T, "n": n, "t_nodes": int(t_nodes), "grid": [grid.a, grid.b, grid.m],
         "F": _digest(F), "g": _digest(g)},
        lhs, rhs, "quadrature", "quadrature", tol,
        extras={"initial": rhs0, "correction": correction})


def verify_remark23_different_times(grid: LineGrid, f, g, s: float, t: float,
                                    n: float = 1.0, t_nodes: int = 65,
                                    tolerance: Optional[float] = None
                                    ) -> VerificationReport:
    """Two-time contraction: W2^2(H_t f, H_s g) against the shifted bound."""
    if s > t:
        raise BadTimes(f"need s <= t, got s = {s}, t = {t}")
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    w0 = w2_quantile_1d(grid, f, g) ** 2
    lhs = w2_quantile_1d(grid, heat_evolve_line(grid, f, t),
                         heat_evolve_line(grid, g, s)) ** 2
    ug = _heat_time_grid(grid, s, t_nodes)
    ent_gap = np.array([
        grid.entropy(heat_evolve_line(grid, f, t - s + u))
        - grid.entropy(heat_evolve_line(grid, g, u))
        for u in ug])
    correction = (2.0 / n) * float(_trapz(ent_gap**2, ug))
    rhs = w0 + n * (t - s) - correction
    scale = max(w0 + n * (t - s), 1e-9)
    tol = 1e-3 * scale if tolerance is None else tolerance
    return VerificationReport(
        "remark23_different_times",
        {"s": s, "t": t, "n": n, "t_nodes": int(t_nodes),
         "grid": [grid.a, grid.b, grid.m], "f": _digest(f), "g": _digest(g)},
        lhs, rhs, "quadrature", "quadrature", tol,
        extras={"w2sq_initial": w0, "correction": correction})


# ---------------------------------------------------------------------------
# transport-distance checks on finite triples


def verify_prop38_kuwada(triple: MarkovTriple, f, t: float, K: int = 32,
                         options: Optional[SolverOptions] = None,
                         tolerance: Optional[float] = None) -> VerificationReport:
    """T_2^2(P_t f mu, f mu) <= t (Ent f - Ent P_t f), certified on the
    explicit trajectory rho_s = P_{st} f."""
    f = np.asarray(f, dtype=float)
    cache = spectral_cache(triple)
    ft = cache.evolve(f, t)
    rhs = t * (entropy(triple, f) - entropy(triple, ft))
    if t == 0:
        return VerificationReport(
            "prop38_kuwada", {"t": 0.0, "K": int(K), "f": _digest(f)},
            0.0, 0.0, "certified-path-action", "exact-formula",
            1e-12, notes=_diffusion_notes(triple))
    times = np.linspace(0.0, 1.0, K + 1)
    rhos = np.array([cache.evolve(f, s * t) for s in times])
    explicit = path_from_density_trajectory(triple, times, rhos)
    lhs_explicit = action(triple, explicit)
    solver = minimize_action(triple, ft, f, K, options)
    lhs = min(lhs_explicit, solver.value)
    tol = 1e-6 * max(1.0, abs(rhs)) if tolerance is None else tolerance
    return VerificationReport(
        "prop38_kuwada",
        {"t": t, "K": int(K), "f": _digest(f)},
        lhs_explicit, rhs, "certified-path-action", "exact-formula", tol,
        notes=_diffusion_notes(triple),
        extras={"lhs_solver": solver.value, "lhs_best": lhs})


def verify_cor310_talagrand(triple: MarkovTriple, f, C: float, T_grid,
                            K: int = 32, options: Optional[SolverOptions] = None,
                            tolerance: Optional[float] = None) -> VerificationReport:
    """Talagrand-type bound T_2^2(f mu, P_T f mu) <= 4 C Ent f along a
    trajectory of times, plus the sharper square-root chain."""
    if C <= 0:
        raise BadParameters(f"LSI constant C = {C} must be positive")
    f = np.asarray(f, dtype=float)
    cache = spectral_cache(triple)
    ent0 = entropy(triple, f)
    rhs = 4.0 * C * ent0
    traj, chain_margins = [], []
    for T in T_grid:
        fT = cache.evolve(f, T)
        val = minimize_action(triple, f, fT, K, options).value if T > 0 else 0.0
        traj.append(val)
        chain_margins.append(
            math.sqrt(4.0 * C) * (math.sqrt(max(ent0, 0.0))
                                  - math.sqrt(max(entropy(triple, fT), 0.0)))
            - math.sqrt(max(val, 0.0)))
    lhs = max(traj)
    tol = 1e-6 * max(1.0, abs(rhs)) if tolerance is None else tolerance
    return VerificationReport(
        "cor310_talagrand",
        {"C": C, "T_grid": [float(T) for T in T_grid], "K": int(K), "f": _digest(f)},
        lhs, rhs, "solver-upper-bound", "exact-formula", tol,
        notes=_diffusion_notes(triple),
        extras={"trajectory": traj, "sharper_chain_margins": chain_margins,
                "entropy": ent0})


def verify_thm44_contraction(triple: MarkovTriple, f, g, R: float, n: float,
                             T: float, K: int = 32,
                             options: Optional[SolverOptions] = None,
                             t_nodes: int = 33,
                             tolerance: Optional[float] = None
                             ) -> VerificationReport:
    """Dimensional contraction of T_2 under CD(R, n), certified on the pushed
    near-geodesic path."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    base = minimize_action(triple, f, g, K, options)
    A = base.value
    if np.array_equal(f, g):
        return VerificationReport(
            "thm44_contraction",
            {"R": R, "n": n, "T": T, "K": int(K), "f": _digest(f), "g": _digest(g)},
            0.0, 0.0, "certified-path-action", "quadrature", 1e-12,
            notes=_diffusion_notes(triple))
    pushed = push_path(base.path, T)
    lhs = action(triple, pushed)
    correction = _entropy_correction(triple, f, g, R, n, T, t_nodes)
    rhs = math.exp(-2.0 * R * T) * A - correction
    tol = mesh_tolerance(triple, A) if tolerance is None else tolerance
    cache = spectral_cache(triple)
    solver_evolved = minimize_action(triple, cache.evolve(f, T),
                                     cache.evolve(g, T), K, options)
    return VerificationReport(
        "thm44_contraction",
        {"R": R, "n": n, "T": T, "K": int(K), "t_nodes": int(t_nodes),
         "f": _digest(f), "g": _digest(g)},
        lhs, rhs, "certified-path-action", "quadrature", tol,
        notes=_diffusion_notes(triple),
        extras={"base_action": A, "correction": correction,
                "lhs_solver": solver_evolved.value,
                "solver_margin": rhs - solver_evolved.value,
                "phi_deviation": base.diagnostics["phi_deviation"]})


def verify_lemma42_integrated(triple: MarkovTriple, f, g, R: float, n: float,
                              t: float, t_nodes: int = 33,
                              tolerance: Optional[float] = None
                              ) -> VerificationReport:
    """Integrated gradient-flow bound for int Gamma(P_t f)/P_t g dmu."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    mu = triple.measure
    cache = spectral_cache(triple)
    lam0 = float(mu @ (gamma(triple, f) / g))
    lhs = float(mu @ (gamma(triple, cache.evolve(f, t)) / cache.evolve(g, t)))
    if math.isinf(n) or t == 0:
        correction = 0.0
    else:
        ug = composite_time_grid(t, t_nodes)
        inner = np.array([
            math.exp(-2.0 * R * (t - u))
            * float(mu @ (gamma(triple, cache.evolve(f, u), cache.evolve(g, u))
                          / cache.evolve(g, u))) ** 2
            for u in ug])
        correction = (2.0 / n) * float(_trapz(inner, ug))
    rhs = math.exp(-2.0 * R * t) * lam0 - correction
    tol = mesh_tolerance(triple, lam0) if tolerance is None else tolerance
    return VerificationReport(
        "lemma42_integrated",
        {"R": R, "n": n, "t": t, "t_nodes": int(t_nodes),
         "f": _digest(f), "g": _digest(g)},
        lhs, rhs, "quadrature", "quadrature", tol,
        notes=_diffusion_notes(triple),
        extras={"initial": lam0, "correction": correction})


def verify_thm51_evi(triple: MarkovTriple, f, g, R: float, t: float,
                     K: int = 32, options: Optional[SolverOptions] = None,
                     tolerance: Optional[float] = None) -> VerificationReport:
    """Integrated EVI: action of the time-skewed pushed path against
    (1-e^{-2Rt})/(2Rt) A + 2t (Ent f - Ent P_t g)."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    base = minimize_action(triple, f, g, K, options)
    A = base.value
    cache = spectral_cache(triple)
    gt = cache.evolve(g, t)
    ent_term = 2.0 * t * (entropy(triple, f) - entropy(triple, gt))
    # (1 - e^{-2Rt})/(2Rt), with the R -> 0 limit value 1
    coeff = 1.0 if R * t == 0 else -math.expm1(-2.0 * R * t) / (2.0 * R * t)
    rhs = coeff * A + ent_term
    if A == 0.0 and t == 0.0:
        lhs = 0.0
    else:
        lhs = action(triple, evi_path(base.path, t))
    scale = max(A, abs(ent_term), 1e-12)
    tol = mesh_tolerance(triple, scale) if tolerance is None else tolerance
    return VerificationReport(
        "thm51_evi",
        {"R": R, "t": t, "K": int(K), "f": _digest(f), "g": _digest(g)},
        lhs, rhs, "certified-path-action", "quadrature", tol,
        notes=_diffusion_notes(triple),
        extras={"base_action": A, "coefficient": coeff, "entropy_term": ent_term,
                "phi_deviation": base.diagnostics["phi_deviation"]})


def verify_evi_heat_dimensional(grid: LineGrid, f, g, dt: float = 1e-3,
                                n: float = 1.0, s_nodes: int = 33,
                                tolerance: Optional[float] = None
                                ) -> VerificationReport:
    """Forward-difference dimensional EVI for the 1D heat flow (diagnostic)."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    w0 = w2_quantile_1d(grid, f, g) ** 2
    wdt = w2_quantile_1d(grid, f, heat_evolve_line(grid, g, dt)) ** 2
    lhs = (wdt - w0) / (2.0 * dt)
    s_grid = np.linspace(0.0, 1.0, s_nodes)
    ents = np.array([displacement_interpolation_1d(grid, f, g, s)[1] for s in s_grid])
    avg_ent = float(_trapz(ents, s_grid))
    ent_f, ent_g = grid.entropy(f), grid.entropy(g)
    correction = (2.0 / n) * (ent_g - avg_ent) ** 2
    rhs = -correction + ent_f - ent_g
    scale = max(abs(rhs), abs(lhs), 1.0)
    tol = 10.0 * dt * scale if tolerance is None else tolerance
    return VerificationReport(
        "evi_heat_dimensional",
        {"dt": dt, "n": n, "s_nodes": int(s_nodes), "grid": [grid.a, grid.b, grid.m],
         "f": _digest(f), "g": _digest(g)},
        lhs, rhs, "quadrature", "quadrature", tol,
        notes=("derivative-approximation",), diagnostic=True,
        extras={"geodesic_entropy_average": avg_ent, "correction": correction})


def verify_dimEVI_T2(triple: MarkovTriple, f, g, R: float, n: float,
                     K: int = 32, dt: float = 1e-3,
                     options: Optional[SolverOptions] = None,
                     tolerance: Optional[float] = None) -> VerificationReport:
    """Dimensional EVI for T_2, finite differences on solver upper bounds.

    Diagnostic only: the statement assumes exact geodesics exist.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    base = minimize_action(triple, f, g, K, options)
    if base.value > 0 and base.diagnostics["phi_deviation"] >= 0.01:
        raise GeodesicQuality(
            f"cost profile deviates by {base.diagnostics['phi_deviation']:.2%}")
    cache = spectral_cache(triple)
    forward = minimize_action(triple, f, cache.evolve(g, dt), K, options)
    lhs = 0.5 * (forward.value - base.value) / dt
    node_ents = np.array([entropy(triple, r) for r in base.path.rhos])
    avg_ent = float(_trapz(node_ents, base.path.times))
    ent_f, ent_g = entropy(triple, f), entropy(triple, g)
    dim_term = 0.0 if math.isinf(n) else (2.0 / n) * (ent_g - avg_ent) ** 2
    rhs = -0.5 * R * base.value - dim_term + ent_f - ent_g
    scale = max(abs(rhs), abs(lhs), 1.0)
    tol = 10.0 * dt * scale if tolerance is None else tolerance
    return VerificationReport(
        "dimEVI_T2",
        {"R": R, "n": n, "K": int(K), "dt": dt, "f": _digest(f), "g": _digest(g)},
        lhs, rhs, "solver-upper-bound", "quadrature", tol,
        notes=("diagnostic — assumes exact geodesics exist",)
        + _diffusion_notes(triple),
        diagnostic=True,
        extras={"base_action": base.value,
                "geodesic_entropy_average": avg_ent,
                "phi_deviation": base.diagnostics["phi_deviation"]})


def verify_tensorization(t1: MarkovTriple, t2: MarkovTriple, f1, g1, f2, g2,
                         K: int = 32, xi: Optional[XiFunction] = None,
                         options: Optional[SolverOptions] = None,
                         f=None, g=None,
                         tolerance: Optional[float] = None) -> VerificationReport:
    """Super-additivity of the squared distance over product chains,
    certified by marginalizing the product solver path."""
    f1 = np.asarray(f1, dtype=float)
    g1 = np.asarray(g1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    prod = product_triple(t1, t2)
    fprod = np.kron(f1, f2)
    gprod = np.kron(g1, g2)
    if f is not None and not np.allclose(f, fprod):
        raise NotProductForm("f is not the product of the given factors")
    if g is not None and not np.allclose(g, gprod):
        raise NotProductForm("g is not the product of the given factors")
    result = minimize_action(triple=prod, f=fprod, g=gprod, K=K,
                             options=options, xi=xi)
    rhs = result.value
    m1, m2 = t1.m, t2.m
    cube_rhos = result.path.rhos.reshape(-1, m1, m2)
    marg1 = path_from_density_trajectory(t1, result.path.times,
                                         cube_rhos @ t2.measure)
    marg2 = path_from_density_trajectory(t2, result.path.times,
                                         np.einsum("kxy,x->ky", cube_rhos, t1.measure))
    a1 = action(t1, marg1, xi)
    a2 = action(t2, marg2, xi)
    lhs = a1 + a2
    tol = 0.01 * max(rhs, 1e-12) if tolerance is None else tolerance
    return VerificationReport(
        "tensorization",
        {"K": int(K), "xi": xi.name if xi is not None else "1/x",
         "f1": _digest(f1), "g1": _digest(g1), "f2": _digest(f2), "g2": _digest(g2)},
        lhs, rhs, "certified-path-action", "solver-upper-bound", tol,
        extras={"marginal_1": a1, "marginal_2": a2})


def verify_thm62_phi(triple: MarkovTriple, f, g, R: float, t: float,
                     xi: XiFunction, K: int = 32,
                     options: Optional[SolverOptions] = None,
                     tolerance: Optional[float] = None) -> VerificationReport:
    """Phi-entropy contraction T_xi^2(P_t f, P_t g) <= e^{-2Rt} T_xi^2 under
    CD(R, inf); the companion EVI and the path entropy identity go to extras."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    base = minimize_action(triple, f, g, K, options, xi=xi)
    A = base.value
    if np.array_equal(f, g):
        return VerificationReport(
            "thm62_phi",
            {"R": R, "t": t, "K": int(K), "xi": xi.name,
             "f": _digest(f), "g": _digest(g)},
            0.0, 0.0, "certified-path-action", "exact-formula", 1e-12,
            notes=_diffusion_notes(triple))
    pushed = push_path(base.path, t)
    lhs = action(triple, pushed, xi)
    rhs = math.exp(-2.0 * R * t) * A
    # companion EVI, parallel to the 1/x case
    cache = spectral_cache(triple)
    gt = cache.evolve(g, t)
    coeff = 1.0 if R * t == 0 else -math.expm1(-2.0 * R * t) / (2.0 * R * t)
    ent_term = 2.0 * t * (phi_entropy(triple, f, xi) - phi_entropy(triple, gt, xi))
    evi_lhs = action(triple, evi_path(base.path, t), xi)
    evi_rhs = coeff * A + ent_term
    # path identity: int int Gamma(h_s, rho_s) xi(rho_s) dmu ds = Ent^Phi(g) - Ent^Phi(f)
    rhobar = 0.5 * (base.path.rhos[:-1] + base.path.rhos[1:])
    cross = np.array([
        float(triple.measure @ (gamma(triple, h, r) * xi.xi(r)))
        for h, r in zip(base.path.hs, rhobar)])
    identity_path = float(base.path.ds @ cross)
    identity_ent = phi_entropy(triple, g, xi) - phi_entropy(triple, f, xi)
    tol = mesh_tolerance(triple, A) if tolerance is None else tolerance
    return VerificationReport(
        "thm62_phi",
        {"R": R, "t": t, "K": int(K), "xi": xi.name,
         "f": _digest(f), "g": _digest(g)},
        lhs, rhs, "certified-path-action", "quadrature", tol,
        notes=_diffusion_notes(triple),
        extras={"base_action": A,
                "evi_lhs": evi_lhs, "evi_rhs": evi_rhs,
                "evi_margin": evi_rhs - evi_lhs,
                "identity_path_integral": identity_path,
                "identity_entropy_difference": identity_ent})


def verify_thm63_power(triple: MarkovTriple, f, g, R: float, p: float,
                       t: float, K: int = 32, t_nodes: int = 33,
                       options: Optional[SolverOptions] = None,
                       tolerance: Optional[float] = None) -> VerificationReport:
    """Refined power-cost contraction with the 4(2-p)/(p^2(p-1)) correction."""
    if not 1.0 < p < 2.0:
        raise BadExponent(f"power exponent p = {p} outside (1, 2)")
    from .triples import xi_power
    xi = xi_power(p)
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    base = minimize_action(triple, f, g, K, options, xi=xi)
    A = base.value
    if np.array_equal(f, g):
        return VerificationReport(
            "thm63_power",
            {"R": R, "p": p, "t": t, "K": int(K), "f": _digest(f), "g": _digest(g)},
            0.0, 0.0, "certified-path-action", "exact-formula", 1e-12,
            notes=_diffusion_notes(triple))
    pushed = push_path(base.path, t)
    lhs = action(triple, pushed, xi)
    coeff = 4.0 * (2.0 - p) / (p**2 * (p - 1.0))
    mu = triple.measure
    cache = spectral_cache(triple)
    if t == 0:
        correction = 0.0
    else:
        ug = composite_time_grid(t, t_nodes)
        vals = np.array([
            math.exp(-2.0 * R * (t - u))
            * (math.sqrt(float(mu @ cache.evolve(f, u) ** p))
               - math.sqrt(float(mu @ cache.evolve(g, u) ** p))) ** 2
            for u in ug])
        correction = coeff * float(_trapz(vals, ug))
    rhs = math.exp(-2.0 * R * t) * A - correction
    tol = mesh_tolerance(triple, A) if tolerance is None else tolerance
    return VerificationReport(
        "thm63_power",
        {"R": R, "p": p, "t": t, "K": int(K), "t_nodes": int(t_nodes),
         "f": _digest(f), "g": _digest(g)},
        lhs, rhs, "certified-path-action", "quadrature", tol,
        notes=_diffusion_notes(triple),
        extras={"base_action": A, "coefficient": coeff, "correction": correction})


def cor46_bound(T2sq_0: float, R: float, n: float, T: float) -> float:
    """Self-improving contraction bound
    e^{-2RT} L0 / (1 + n R L0 (1 - e^{-2RT}) / (4 (n-1)^2))."""
    if R <= 0:
        raise BadParameters(f"R = {R} must be positive")
    if not n > 1:
        raise BadParameters(f"n = {n} must exceed 1")
    if T < 0:
        raise BadParameters(f"T = {T} must be non-negative")
    if T2sq_0 < 0:
        raise BadParameters(f"initial squared distance {T2sq_0} must be >= 0")
    decay = -math.expm1(-2.0 * R * T)
    return (math.exp(-2.0 * R * T) * T2sq_0
            / (1.0 + n * R * T2sq_0 * decay / (4.0 * (n - 1.0) ** 2)))
