import numpy as np
import pytest
from hypothesis import settings

from sbrgames.game import JointStrategy, random_game

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_tuple(rng, max1=6, max2=5, interior=True):
    """Random game, joint strategy and temperature."""
    n1 = int(rng.integers(1, max1 + 1))
    n2 = int(rng.integers(1, max2 + 1))
    game = random_game(n1, n2, int(rng.integers(2 ** 31)))
    alpha = 1.0 if interior else 0.3
    joint = JointStrategy(rng.dirichlet([alpha] * n1), rng.dirichlet([alpha] * n2))
    tau = float(10 ** rng.uniform(-2, 1))
    return game, joint, tau
