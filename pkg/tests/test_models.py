import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from markov_transport.errors import BadSize, NonPositiveRate, SizeOverflow
from markov_transport.models import (
    circle_diffusion,
    lift_first,
    lift_second,
    model_from_config,
    product,
    ring_chain,
    two_point,
)
from markov_transport.triples import gamma


def test_two_point_structure():
    t = two_point(2.0)
    np.testing.assert_array_equal(t.generator, [[-2.0, 2.0], [2.0, -2.0]])
    np.testing.assert_array_equal(t.measure, [0.5, 0.5])
    with pytest.raises(NonPositiveRate):
        two_point(0.0)


def test_ring_chain_validation():
    with pytest.raises(BadSize):
        ring_chain(2, 1.0)
    with pytest.raises(NonPositiveRate):
        ring_chain(5, -1.0)
    t = ring_chain(6, 0.5)
    assert np.allclose(t.generator.sum(axis=1), 0.0)
    assert t.generator[0, 1] == 0.5 and t.generator[0, 5] == 0.5


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(16, 64))
def test_circle_diffusion_detailed_balance_exact(seed, m):
    # rates e^{(V_i - V_j)/2}/h^2 make mu ~ e^{-V} reversible at every m
    rng = np.random.default_rng(seed)
    V = rng.uniform(-1.0, 1.0, m)
    t = circle_diffusion(m, V)
    S = t.measure[:, None] * t.generator
    np.testing.assert_allclose(S, S.T, atol=1e-14)


def test_circle_diffusion_size_guard():
    with pytest.raises(BadSize):
        circle_diffusion(8)
    with pytest.raises(BadSize):
        circle_diffusion(32, np.zeros(16))


def test_circle_generator_second_order_consistent():
    # V = 0: L f -> f'' at order h^2 on smooth periodic test functions
    errs = []
    for m in (64, 128, 256):
        t = circle_diffusion(m)
        x = np.arange(m) / m
        f = np.cos(2 * np.pi * x)
        exact = -(2 * np.pi) ** 2 * f
        errs.append(np.abs(t.generator @ f - exact).max())
    order = math.log(errs[0] / errs[2]) / math.log(4.0)
    assert order > 1.9


def test_circle_drift_consistent():
    # general V: L f -> f'' - V' f' at order h^2
    m = 256
    x = np.arange(m) / m
    V = 0.5 * np.cos(2 * np.pi * x)
    t = circle_diffusion(m, V)
    f = np.sin(2 * np.pi * x)
    fp = 2 * np.pi * np.cos(2 * np.pi * x)
    fpp = -(2 * np.pi) ** 2 * np.sin(2 * np.pi * x)
    Vp = -np.pi * np.sin(2 * np.pi * x)
    np.testing.assert_allclose(t.generator @ f, fpp - Vp * fp, atol=0.02)


def test_product_structure():
    t1, t2 = two_point(1.0), ring_chain(3, 2.0)
    prod = product(t1, t2)
    np.testing.assert_allclose(prod.measure, np.kron(t1.measure, t2.measure))
    f1 = np.array([2.0, -1.0])
    lifted = lift_first(t1, t2, f1)
    np.testing.assert_allclose(prod.generator @ lifted,
                               np.kron(t1.generator @ f1, np.ones(3)),
                               atol=1e-12)
    # the carre du champ tensorizes on lifted functions
    np.testing.assert_allclose(gamma(prod, lifted),
                               np.kron(gamma(t1, f1), np.ones(3)), atol=1e-12)
    f2 = np.array([0.0, 1.0, -1.0])
    np.testing.assert_allclose(prod.generator @ lift_second(t1, t2, f2),
                               np.kron(np.ones(2), t2.generator @ f2), atol=1e-12)


def test_product_size_cap():
    big = ring_chain(200, 1.0)
    with pytest.raises(SizeOverflow):
        product(big, big)


def test_model_from_config():
    t = model_from_config({"model": "two_point", "kappa": 2.0})
    assert t.generator[0, 1] == 2.0
    t = model_from_config({"model": "circle_diffusion", "m": 32, "V": "cos"})
    assert t.m == 32
    t = model_from_config({"model": "product",
                           "first": {"model": "two_point", "kappa": 1.0},
                           "second": {"model": "ring_chain", "m": 3}})
    assert t.m == 6
    with pytest.raises(ValueError):
        model_from_config({"model": "klein_bottle"})
    with pytest.raises(ValueError):
        model_from_config({"model": "circle_diffusion", "m": 32, "V": "tan"})
