import numpy as np
import pytest

from falconcb.core import FiniteFunctionClass
from falconcb.env import FiniteRealizableEnv


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def tiny_env():
    """Two contexts, two actions, four members; f* is member 2."""
    tables = np.array(
        [
            [[0.5, 0.5], [0.5, 0.5]],
            [[0.9, 0.1], [0.2, 0.7]],
            [[0.1, 0.9], [0.6, 0.2]],
            [[0.3, 0.4], [0.8, 0.8]],
        ]
    )
    return FiniteRealizableEnv([0.5, 0.5], FiniteFunctionClass(tables), 2)


def small_config(**overrides):
    cfg = {
        "horizon": 500,
        "seed": 1,
        "environment": {"kind": "planted", "n_contexts": 3, "n_actions": 2, "class_size": 6, "gap": 0.3},
    }
    cfg.update(overrides)
    return cfg
