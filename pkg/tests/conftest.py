import numpy as np
import pytest

from markov_transport.triples import MarkovTriple, build_triple


def random_reversible_triple(rng: np.random.Generator, m: int) -> MarkovTriple:
    """Dense reversible triple from a random symmetric edge-weight matrix."""
    S = rng.uniform(0.2, 1.0, (m, m))
    S = 0.5 * (S + S.T)
    np.fill_diagonal(S, 0.0)
    mu = rng.uniform(0.5, 1.5, m)
    mu /= mu.sum()
    L = S / mu[:, None]
    np.fill_diagonal(L, -L.sum(axis=1))
    return build_triple(tuple(range(m)), L, mu)


def random_density(rng: np.random.Generator, triple: MarkovTriple,
                   amplitude: float = 0.6) -> np.ndarray:
    f = 1.0 + amplitude * rng.uniform(-1.0, 1.0, triple.m)
    return f / float(triple.measure @ f)


@pytest.fixture
def announce(capsys):
    """Print a live acceptance line even under pytest output capture."""
    def _announce(label, ok):
        with capsys.disabled():
            print(f"{label}: {'PASS' if ok else 'FAIL'}")
    return _announce
