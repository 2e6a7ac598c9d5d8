import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize as scipy_minimize

from markov_transport.errors import (
    DomainError,
    InfeasiblePath,
    NonPositiveDensity,
    NotNormalized,
)
from markov_transport.models import circle_diffusion, ring_chain, two_point
from markov_transport.semigroup import LineGrid, spectral_cache
from markov_transport.transport import (
    DiscretePath,
    SolverOptions,
    action,
    displacement_interpolation_1d,
    initial_path,
    minimize_action,
    minimize_action_xi,
    path_from_density_trajectory,
    phi_profile,
    reparametrize_eps_geodesic,
    t2_two_point_exact,
    w2_quantile_1d,
)
from markov_transport.triples import xi_inverse, xi_power

from conftest import random_density


def _two_point_pair(r, t):
    # densities with masses (1-r, r) and (1-t, t) against mu = (1/2, 1/2)
    return np.array([2 * (1 - r), 2 * r]), np.array([2 * (1 - t), 2 * t])


# ---------------------------------------------------------------------------
# closed form and exact identities


def test_two_point_closed_form_formula():
    # arcsin(sqrt(3)/2) - arcsin(1/2) = pi/6
    assert t2_two_point_exact(1.0, 0.25, 0.75) == pytest.approx(math.pi**2 / 18,
                                                                abs=1e-15)
    assert t2_two_point_exact(2.0, 0.25, 0.75) == pytest.approx(math.pi**2 / 36,
                                                                abs=1e-15)
    with pytest.raises(DomainError):
        t2_two_point_exact(-1.0, 0.25, 0.75)
    with pytest.raises(DomainError):
        t2_two_point_exact(1.0, 0.0, 0.5)


def test_solver_matches_closed_form_moderate_grid():
    f, g = _two_point_pair(0.25, 0.75)
    res = minimize_action(two_point(1.0), f, g, K=16)
    assert res.value == pytest.approx(math.pi**2 / 18, rel=1e-2)
    assert res.diagnostics["converged"]


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 0.9), st.floats(0.1, 0.9))
def test_solver_tracks_closed_form(r, t):
    f, g = _two_point_pair(r, t)
    res = minimize_action(two_point(1.0), f, g, K=16)
    assert res.value == pytest.approx(t2_two_point_exact(1.0, r, t),
                                      rel=2e-2, abs=1e-9)


def test_distance_symmetry_exact():
    tri = ring_chain(6, 1.0)
    rng = np.random.default_rng(0)
    f = random_density(rng, tri)
    g = random_density(rng, tri)
    a = minimize_action(tri, f, g, K=16).value
    b = minimize_action(tri, g, f, K=16).value
    assert a == pytest.approx(b, rel=1e-9)


def test_identical_endpoints_give_zero():
    tri = two_point(1.0)
    f = np.array([1.3, 0.7])
    res = minimize_action(tri, f, f, K=16)
    assert res.value == 0.0
    assert res.path.max_residual() == 0.0


def test_xi_inverse_equals_default():
    f, g = _two_point_pair(0.3, 0.8)
    plain = minimize_action(two_point(1.0), f, g, K=32)
    weighted = minimize_action_xi(two_point(1.0), f, g, xi_inverse(), K=32)
    assert weighted.value == pytest.approx(plain.value, abs=1e-12)


# ---------------------------------------------------------------------------
# feasibility machinery


def test_initial_path_feasible():
    tri = ring_chain(5, 1.0)
    rng = np.random.default_rng(1)
    f = random_density(rng, tri)
    g = random_density(rng, tri)
    path = initial_path(tri, f, g, 12)
    path.validate(f, g)
    assert path.max_residual() < 1e-12


def test_path_from_density_trajectory_certified():
    tri = ring_chain(5, 1.0)
    rng = np.random.default_rng(2)
    f = random_density(rng, tri)
    cache = spectral_cache(tri)
    times = np.linspace(0.0, 1.0, 17)
    rhos = np.array([cache.evolve(f, 0.4 * s) for s in times])
    path = path_from_density_trajectory(tri, times, rhos)
    assert path.max_residual() < 1e-12
    # the potential of a fixed trajectory is unique up to slice constants
    shifted = DiscretePath(tri, times, rhos, path.hs + 3.7)
    assert action(tri, shifted) == pytest.approx(action(tri, path), rel=1e-12)


def test_action_rejects_bad_paths():
    tri = two_point(1.0)
    path = initial_path(tri, np.array([1.4, 0.6]), np.array([0.6, 1.4]), 8)
    broken = DiscretePath(tri, path.times, path.rhos, path.hs + np.linspace(
        0, 1, 8)[:, None] * np.array([1.0, -1.0]))
    with pytest.raises(InfeasiblePath):
        action(tri, broken)
    negative = DiscretePath(tri, path.times, path.rhos.copy(), path.hs)
    negative.rhos[3] = [-3.0, 5.0]
    with pytest.raises(NonPositiveDensity):
        phi_profile(negative)


def test_solver_never_exceeds_seed_action():
    tri = circle_diffusion(32)
    rng = np.random.default_rng(3)
    x = np.arange(32) / 32.0
    f = 1.0 + 0.4 * np.cos(2 * np.pi * x)
    g = 1.0 - 0.3 * np.sin(2 * np.pi * x)
    f /= tri.measure @ f
    g /= tri.measure @ g
    seed = action(tri, initial_path(tri, f, g, 16))
    res = minimize_action(tri, f, g, K=16)
    assert res.value <= seed + 1e-12


# ---------------------------------------------------------------------------
# gradient of the reduced objective, against finite differences


@pytest.mark.parametrize("xi", [None, xi_power(1.5)])
def test_reduced_gradient_matches_finite_differences(xi):
    from markov_transport.transport import _ReducedProblem
    tri = ring_chain(4, 1.0)
    rng = np.random.default_rng(4)
    f = random_density(rng, tri, 0.4)
    g = random_density(rng, tri, 0.4)
    prob = _ReducedProblem(tri, f, g, 8, xi, 1e-9)
    hs = initial_path(tri, f, g, 8).hs + 0.05 * rng.standard_normal((8, 4))
    _, grad = prob.value_and_grad(hs)
    eps = 1e-6
    direction = rng.standard_normal((8, 4))
    plus, _ = prob.value(hs + eps * direction)
    minus, _ = prob.value(hs - eps * direction)
    numeric = (plus - minus) / (2 * eps)
    assert float(np.sum(grad * direction)) == pytest.approx(numeric, rel=1e-5)


# ---------------------------------------------------------------------------
# independent brute-force oracle for the power cost


def test_power_cost_against_brute_force():
    # two-point reduced problem has one degree of freedom per slice;
    # dense multistart Powell at K=8 is an independent check
    from markov_transport.transport import _ReducedProblem
    tri = two_point(1.0)
    f, g = _two_point_pair(0.25, 0.75)
    xi = xi_power(1.5)
    K = 8
    prob = _ReducedProblem(tri, f, g, K, xi, 1e-9)
    base = initial_path(tri, f, g, K).hs

    def objective(z):
        # z parametrizes feasible perturbations: zero-slice-mean directions
        hs = base + np.concatenate([z, [-z.sum()]])[:, None] * np.array([1.0, -1.0])
        val, _ = prob.value(hs)
        return val if np.isfinite(val) else 1e6

    rng = np.random.default_rng(5)
    best = min(
        scipy_minimize(objective, 0.3 * rng.standard_normal(K - 1),
                       method="Powell", options={"maxiter": 20000,
                                                 "xtol": 1e-12}).fun
        for _ in range(8))
    ours = minimize_action_xi(tri, f, g, xi, K=64).value
    assert ours == pytest.approx(best, rel=2e-2)


# ---------------------------------------------------------------------------
# epsilon-geodesic reparametrization


def test_reparametrization_contract_on_ring():
    tri = ring_chain(8, 1.0)
    rng = np.random.default_rng(6)
    f = random_density(rng, tri)
    g = random_density(rng, tri)
    path = initial_path(tri, f, g, 32)
    a0 = action(tri, path)
    eps = 0.01 * a0
    better = reparametrize_eps_geodesic(path, eps)
    better.validate(f, g)

    def deviation(p):
        prof = phi_profile(p)
        return np.abs(prof - prof.mean()).max() / prof.mean()

    assert deviation(better) <= deviation(path) / 2.0
    assert action(tri, better) <= a0 + 2 * eps + 1e-6


# ---------------------------------------------------------------------------
# one-dimensional Wasserstein utilities


@pytest.fixture(scope="module")
def grid():
    return LineGrid(-12.0, 12.0, 1024)


def _gaussian(x, mean, sigma):
    return np.exp(-((x - mean) ** 2) / (2 * sigma**2)) / (sigma * math.sqrt(2 * math.pi))


def test_w2_gaussian_oracle(grid):
    # W2^2(N(m1,s1), N(m2,s2)) = (m1-m2)^2 + (s1-s2)^2
    f = _gaussian(grid.x, -1.0, 0.5)
    g = _gaussian(grid.x, 1.0, 1.0)
    assert w2_quantile_1d(grid, f, g) ** 2 == pytest.approx(4.0 + 0.25, rel=1e-3)
    assert w2_quantile_1d(grid, f, f) == pytest.approx(0.0, abs=1e-9)


def test_w2_requires_normalized_input(grid):
    f = _gaussian(grid.x, 0.0, 1.0)
    with pytest.raises(NotNormalized):
        w2_quantile_1d(grid, 2.0 * f, f)


def test_displacement_interpolation_gaussian(grid):
    # geodesic between Gaussians stays Gaussian with interpolated parameters
    f = _gaussian(grid.x, -1.0, 0.5)
    g = _gaussian(grid.x, 1.0, 1.0)
    s = 0.4
    density, ent = displacement_interpolation_1d(grid, f, g, s)
    mean_s = -1.0 + s * 2.0
    sigma_s = 0.5 + s * 0.5
    np.testing.assert_allclose(density, _gaussian(grid.x, mean_s, sigma_s),
                               atol=2e-3)
    expected_ent = -0.5 * math.log(2 * math.pi * math.e * sigma_s**2)
    assert ent == pytest.approx(expected_ent, abs=1e-3)
    with pytest.raises(ValueError):
        displacement_interpolation_1d(grid, f, g, 1.5)


def test_displacement_endpoints(grid):
    f = _gaussian(grid.x, -1.0, 0.5)
    g = _gaussian(grid.x, 1.0, 1.0)
    d0, e0 = displacement_interpolation_1d(grid, f, g, 0.0)
    np.testing.assert_allclose(d0, f, atol=1e-8)
    assert e0 == pytest.approx(grid.entropy(f), abs=1e-6)
