import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hedonic_dynamics.game import Game

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_game(seed: int, n: int, caf: str = "AS", low: int = -5, high: int = 5) -> Game:
    rng = np.random.Generator(np.random.PCG64(seed))
    U = rng.integers(low, high + 1, size=(n, n))
    np.fill_diagonal(U, 0)
    return Game.from_matrix(U.tolist(), caf)


@pytest.fixture
def run_and_chase():
    # agent 0 = Alice, agent 1 = Bob; Bob likes Alice, Alice dislikes Bob
    return Game.from_matrix([[0, -1], [1, 0]], "AS")
