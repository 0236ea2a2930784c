import numpy as np
import pytest

from ncprob.measures import FiniteAtomicMeasure


@pytest.fixture
def bernoulli():
    return FiniteAtomicMeasure.from_pairs([(-1.0, 0.5), (1.0, 0.5)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_state_measure(rng, max_atoms=6, spread=3.0):
    n = int(rng.integers(1, max_atoms + 1))
    positions = np.sort(rng.uniform(-spread, spread, n))
    while np.any(np.diff(positions) < 0.15):
        positions = np.sort(rng.uniform(-spread, spread, n))
    weights = rng.uniform(0.05, 1.0, n)
    weights = weights / weights.sum() * rng.uniform(0.3, 1.0)
    return FiniteAtomicMeasure.from_pairs(zip(positions, weights))


def random_probability_measure(rng, max_atoms=6, spread=3.0):
    mu = random_state_measure(rng, max_atoms, spread)
    return mu.scale_mass(1.0 / mu.mass)
