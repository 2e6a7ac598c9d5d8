"""Command-line front end: distance computation, verification batches,
curvature estimation.

All inputs come from a JSON config file plus flags; output is JSON on stdout
(numbers at 17 significant digits, byte-identical for identical config and
seed).  Exit codes: 0 success, 1 failed verification scenario, 2 config
error, 3 solver non-convergence (result still printed).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np
from scipy.integrate import solve_ivp

from . import harness
from .curvature import estimate_best_R, lsi_lower_bound
from .errors import MarkovTransportError
from .harness import VerificationReport, dumps_17g, reports_to_csv, reports_to_json
from .models import model_from_config
from .semigroup import LineGrid
from .transport import SolverOptions, minimize_action
from .triples import MarkovTriple, xi_inverse, xi_power

EXIT_OK = 0
EXIT_FAILED_SCENARIO = 1
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# config helpers


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _xi_from_config(spec):
    if spec is None or spec == "1/x":
        return None
    if isinstance(spec, dict) and "p" in spec:
        return xi_power(float(spec["p"]))
    raise ConfigError(f"unknown cost weight {spec!r}")


def _solver_options(config: dict, seed: int) -> SolverOptions:
    opts = SolverOptions(seed=seed)
    for key, value in (config.get("solver") or {}).items():
        if not hasattr(opts, key):
            raise ConfigError(f"unknown solver option {key!r}")
        setattr(opts, key, type(getattr(opts, key))(value))
    return opts


def density_from_config(triple: MarkovTriple, spec, seed: int) -> np.ndarray:
    """Resolve an inline array or a named generator into a unit-mass density."""
    if isinstance(spec, (list, tuple)):
        f = np.asarray(spec, dtype=float)
    elif isinstance(spec, dict):
        kind = spec.get("kind")
        m = triple.m
        x = np.arange(m) / m
        if kind == "uniform":
            f = np.ones(m)
        elif kind == "trig":
            f = np.ones(m)
            for key, value in spec.items():
                if key.startswith("cos"):
                    f += float(value) * np.cos(2 * np.pi * int(key[3:] or 1) * x)
                elif key.startswith("sin"):
                    f += float(value) * np.sin(2 * np.pi * int(key[3:] or 1) * x)
        elif kind == "random-smooth":
            rng = np.random.default_rng((seed, int(spec.get("seed", 0))))
            amp = float(spec.get("amplitude", 0.3))
            modes = int(spec.get("modes", 3))
            f = np.ones(m)
            for k in range(1, modes + 1):
                a, b = rng.uniform(-1, 1, 2) * amp / k
                f += a * np.cos(2 * np.pi * k * x) + b * np.sin(2 * np.pi * k * x)
        else:
            raise ConfigError(f"unknown density kind {kind!r}")
    else:
        raise ConfigError(f"bad density spec {spec!r}")
    if f.shape != (triple.m,) or np.any(f <= 0):
        raise ConfigError("density must be strictly positive with one value per state")
    return f / float(triple.measure @ f)


def field_from_config(triple: MarkovTriple, spec) -> np.ndarray:
    """Test function on the states (no positivity or mass constraint)."""
    if isinstance(spec, (list, tuple)):
        return np.asarray(spec, dtype=float)
    if isinstance(spec, dict) and spec.get("kind") == "trig":
        x = np.arange(triple.m) / triple.m
        f = np.full(triple.m, float(spec.get("const", 0.0)))
        for key, value in spec.items():
            if key.startswith("cos"):
                f += float(value) * np.cos(2 * np.pi * int(key[3:] or 1) * x)
            elif key.startswith("sin"):
                f += float(value) * np.sin(2 * np.pi * int(key[3:] or 1) * x)
        return f
    raise ConfigError(f"bad field spec {spec!r}")


def _grid_from_config(spec) -> LineGrid:
    a, b, m = spec
    return LineGrid(float(a), float(b), int(m))


def _line_density(grid: LineGrid, spec) -> np.ndarray:
    if isinstance(spec, (list, tuple)):
        return np.asarray(spec, dtype=float)
    if isinstance(spec, dict) and spec.get("kind") in ("gaussian", "gaussian-gradient"):
        mean = float(spec.get("mean", 0.0))
        sigma = float(spec.get("sigma", 1.0))
        x = grid.x
        dens = np.exp(-((x - mean) ** 2) / (2 * sigma**2)) / (sigma * math.sqrt(2 * math.pi))
        if spec["kind"] == "gaussian-gradient":
            return -(x - mean) / sigma**2 * dens
        return dens
    raise ConfigError(f"bad line density spec {spec!r}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_distance(config: dict, seed: int) -> tuple:
    triple = model_from_config(config)
    opts = _solver_options(config, seed)
    f = density_from_config(triple, config["f"], seed)
    g = density_from_config(triple, config["g"], seed)
    xi = _xi_from_config(config.get("xi"))
    result = minimize_action(triple, f, g, int(config.get("K", 64)), opts, xi=xi)
    doc = {
        "value": result.value,
        "diagnostics": result.diagnostics,
        "phi_profile": result.phi_profile,
        "config": dict(config, seed=seed),
    }
    code = EXIT_OK if result.diagnostics["converged"] else EXIT_NONCONVERGENCE
    return doc, result.path, code


def path_to_csv(path) -> str:
    """Node densities and midpoint potentials, one row per time value."""
    m = path.triple.m
    header = ["s", "kind"] + [f"x{i}" for i in range(m)]
    rows = [",".join(header)]
    mids = 0.5 * (path.times[:-1] + path.times[1:])
    for s, rho in zip(path.times, path.rhos):
        rows.append(",".join([harness.format_float(s), "rho"]
                             + [harness.format_float(v) for v in rho]))
    for s, h in zip(mids, path.hs):
        rows.append(",".join([harness.format_float(s), "h"]
                             + [harness.format_float(v) for v in h]))
    return "\n".join(rows) + "\n"


def _cor46_formula_report(params: dict) -> VerificationReport:
    """Compare the closed-form bound with Bernoulli-ODE integration of
    Lambda' = -(n R^2 / (2 (n-1)^2)) e^{-2Rt} Lambda^2, Lambda = e^{2Rt} T2sq."""
    R = float(params["R"])
    n = float(params["n"])
    T = float(params["T"])
    lam0 = float(params["T2sq_0"])
    formula = harness.cor46_bound(lam0, R, n, T)
    coeff = n * R**2 / (2.0 * (n - 1.0) ** 2)
    sol = solve_ivp(lambda t, y: -coeff * math.exp(-2.0 * R * t) * y**2,
                    (0.0, T), [lam0], rtol=1e-12, atol=1e-14,
                    dense_output=True)
    ode = math.exp(-2.0 * R * T) * float(sol.y[0, -1])
    rel = abs(formula - ode) / max(abs(ode), 1e-300)
    return VerificationReport(
        "cor46_formula", params, rel, 0.0, "exact-formula", "quadrature",
        1e-6, extras={"formula": formula, "ode": ode})


def run_scenario(scenario: dict, seed: int) -> VerificationReport:
    sid = scenario.get("inequality_id")
    params = dict(scenario.get("params") or {})
    local_seed = int(scenario.get("seed", seed))
    if sid == "cor46_formula":
        return _cor46_formula_report(params)

    heat_ops = {
        "prop22_heat": harness.verify_prop22_heat,
        "lemma21_heat": harness.verify_lemma21_heat,
        "remark23_different_times": harness.verify_remark23_different_times,
        "evi_heat_dimensional": harness.verify_evi_heat_dimensional,
    }
    if sid in heat_ops:
        grid = _grid_from_config(scenario["grid"])
        dens = scenario.get("densities") or {}
        kwargs = {k: _line_density(grid, v) for k, v in dens.items()}
        return heat_ops[sid](grid, **kwargs, **params)

    if sid == "tensorization":
        t1 = model_from_config(scenario["model"]["first"])
        t2 = model_from_config(scenario["model"]["second"])
        dens = scenario["densities"]
        return harness.verify_tensorization(
            t1, t2,
            density_from_config(t1, dens["f1"], local_seed),
            density_from_config(t1, dens["g1"], local_seed),
            density_from_config(t2, dens["f2"], local_seed),
            density_from_config(t2, dens["g2"], local_seed),
            xi=_xi_from_config(params.pop("xi", None)), **params)

    triple_ops = {
        "prop38_kuwada": harness.verify_prop38_kuwada,
        "cor310_talagrand": harness.verify_cor310_talagrand,
        "thm44_contraction": harness.verify_thm44_contraction,
        "lemma42_integrated": harness.verify_lemma42_integrated,
        "thm51_evi": harness.verify_thm51_evi,
        "dimEVI_T2": harness.verify_dimEVI_T2,
        "thm62_phi": harness.verify_thm62_phi,
        "thm63_power": harness.verify_thm63_power,
    }
    if sid not in triple_ops:
        raise ConfigError(f"unknown inequality_id {sid!r}")
    triple = model_from_config(scenario["model"])
    kwargs = {}
    for key, value in (scenario.get("densities") or {}).items():
        if sid == "lemma42_integrated" and key == "f":
            # test function, not a density
            kwargs[key] = field_from_config(triple, value)
        else:
            kwargs[key] = density_from_config(triple, value, local_seed)
    if sid == "thm62_phi":
        xi = _xi_from_config(params.pop("xi", None))
        params["xi"] = xi if xi is not None else xi_inverse()
    if "n" in params and params["n"] == "inf":
        params["n"] = math.inf
    return triple_ops[sid](triple, **kwargs, **params)


def _paper_suite() -> list:
    circle32 = {"model": "circle_diffusion", "m": 32}
    circle64 = {"model": "circle_diffusion", "m": 64}
    two_pt = {"model": "two_point", "kappa": 1.0}
    smooth = lambda k, amp=0.25: {"kind": "random-smooth", "seed": k, "amplitude": amp}
    return [
        {"inequality_id": "prop22_heat", "grid": [-12.0, 12.0, 512],
         "densities": {"f": {"kind": "gaussian", "mean": -1.0, "sigma": 0.5},
                       "g": {"kind": "gaussian", "mean": 1.0, "sigma": 1.0}},
         "params": {"T": 0.5}},
        {"inequality_id": "lemma21_heat", "grid": [-12.0, 12.0, 512],
         "densities": {"F": {"kind": "gaussian-gradient", "mean": 0.0, "sigma": 1.0},
                       "g": {"kind": "gaussian", "mean": 0.0, "sigma": 1.0}},
         "params": {"T": 0.4}},
        {"inequality_id": "remark23_different_times", "grid": [-12.0, 12.0, 512],
         "densities": {"f": {"kind": "gaussian", "mean": -1.0, "sigma": 0.5},
                       "g": {"kind": "gaussian", "mean": 1.0, "sigma": 1.0}},
         "params": {"s": 0.2, "t": 0.5}},
        {"inequality_id": "prop38_kuwada", "model": two_pt,
         "densities": {"f": [1.05, 0.95]}, "params": {"t": 0.3, "K": 32}},
        {"inequality_id": "prop38_kuwada", "model": circle64,
         "densities": {"f": smooth(1)}, "params": {"t": 0.3, "K": 32}},
        {"inequality_id": "cor310_talagrand", "model": two_pt,
         "densities": {"f": [1.5, 0.5]},
         "params": {"C": 0.5, "T_grid": [0.5, 1.0, 2.0, 5.0], "K": 16}},
        {"inequality_id": "thm44_contraction", "model": circle32,
         "densities": {"f": smooth(2), "g": smooth(3)},
         "params": {"R": 0.0, "n": 1.0, "T": 0.2, "K": 32}},
        {"inequality_id": "lemma42_integrated", "model": circle64,
         "densities": {"f": {"kind": "trig", "sin": 1.0}, "g": {"kind": "trig", "cos": 0.5}},
         "params": {"R": 0.0, "n": 1.0, "t": 0.2}},
        {"inequality_id": "thm51_evi", "model": circle64,
         "densities": {"f": smooth(4), "g": smooth(5)},
         "params": {"R": 0.0, "t": 0.2, "K": 32}},
        {"inequality_id": "tensorization",
         "model": {"first": two_pt, "second": two_pt},
         "densities": {"f1": [1.5, 0.5], "g1": [0.5, 1.5],
                       "f2": [1.2, 0.8], "g2": [0.7, 1.3]},
         "params": {"K": 16}},
        {"inequality_id": "thm62_phi", "model": circle32,
         "densities": {"f": smooth(6), "g": smooth(7)},
         "params": {"R": 0.0, "t": 0.2, "K": 32, "xi": {"p": 1.5}}},
        {"inequality_id": "thm63_power", "model": circle32,
         "densities": {"f": smooth(8), "g": smooth(9)},
         "params": {"R": 0.0, "p": 1.5, "t": 0.2, "K": 32}},
        {"inequality_id": "cor46_formula",
         "params": {"R": 1.0, "n": 2.0, "T": 1.0, "T2sq_0": 1.0}},
        {"inequality_id": "evi_heat_dimensional", "grid": [-12.0, 12.0, 512],
         "densities": {"f": {"kind": "gaussian", "mean": -0.5, "sigma": 0.8},
                       "g": {"kind": "gaussian", "mean": 0.8, "sigma": 1.1}},
         "params": {}},
        {"inequality_id": "dimEVI_T2", "model": two_pt,
         "densities": {"f": [1.5, 0.5], "g": [0.5, 1.5]},
         "params": {"R": 0.0, "n": 2.0, "K": 32}},
    ]


def cmd_verify(config: dict, seed: int) -> tuple:
    if config.get("preset") == "paper-suite":
        scenarios = _paper_suite()
    else:
        scenarios = config.get("scenarios")
    if not scenarios:
        raise ConfigError("no scenarios given")
    reports = [run_scenario(s, seed) for s in scenarios]
    doc = [r.to_dict() for r in reports]
    failed = any(not r.passed and not r.diagnostic for r in reports)
    return doc, reports, EXIT_FAILED_SCENARIO if failed else EXIT_OK


def cmd_curvature(config: dict, seed: int) -> dict:
    triple = model_from_config(config)
    n = config.get("n", "inf")
    n = math.inf if n == "inf" else float(n)
    sample_count = int(config.get("sample_count", 64))
    return {
        "best_R_estimate": estimate_best_R(triple, n, sample_count, seed),
        "lsi_lower_bound": lsi_lower_bound(triple, sample_count, seed),
        "sample_count": sample_count,
        "config": dict(config, seed=seed),
    }


# ---------------------------------------------------------------------------
# entry point


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mtransport",
        description="Markov transportation distance and inequality verification")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("distance", "verify", "curvature"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        p.add_argument("--dump-path", dest="dump_path", default=None)
        p.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        config = _load_config(args.config)
        if args.command == "distance":
            doc, path, code = cmd_distance(config, args.seed)
            dump = path_to_csv(path) if args.dump_path else None
        elif args.command == "verify":
            doc, reports, code = cmd_verify(config, args.seed)
            dump = reports_to_csv(reports) if args.dump_path else None
        else:
            doc, code, dump = cmd_curvature(config, args.seed), EXIT_OK, None
    except (ConfigError, MarkovTransportError, KeyError, TypeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    text = dumps_17g(doc)
    if not args.quiet:
        print(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    if args.dump_path and dump is not None:
        with open(args.dump_path, "w", encoding="utf-8") as fh:
            fh.write(dump)
    return code


if __name__ == "__main__":
    sys.exit(main())
