import numpy as np
import pytest

from typecpd import CategoricalDistribution, SymbolSequence


def bern(p: float) -> CategoricalDistribution:
    return CategoricalDistribution.bernoulli(p)


def random_full_support(rng: np.random.Generator, k: int, floor: float = 0.02
                        ) -> CategoricalDistribution:
    """Dirichlet draw pushed away from the simplex boundary."""
    raw = rng.dirichlet(np.ones(k))
    return CategoricalDistribution(raw * (1.0 - k * floor) + floor)


def random_sequences(rng: np.random.Generator, n: int, train_length: int, k: int
                     ) -> tuple[SymbolSequence, SymbolSequence, SymbolSequence]:
    x = SymbolSequence(rng.integers(0, k, size=n), k)
    y1 = SymbolSequence(rng.integers(0, k, size=train_length), k)
    y2 = SymbolSequence(rng.integers(0, k, size=train_length), k)
    return x, y1, y2


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
