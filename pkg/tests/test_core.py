import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from falconcb.core import (
    ConfigError,
    FiniteFunctionClass,
    InteractionLog,
    TablePredictor,
    enumerate_policies,
    induced_policy,
    policy_reward,
)


def test_constant_predictor_picks_lowest_action():
    f = TablePredictor(np.full((4, 3), 0.5))
    assert induced_policy(f).tolist() == [0, 0, 0, 0]


def test_unique_argmax_read_off_table():
    assert induced_policy(TablePredictor([[0.1, 0.9], [0.6, 0.2]])).tolist() == [1, 0]


def test_induced_policy_matches_exhaustive_scan(rng):
    table = rng.random((4, 5))
    expected = []
    for x in range(4):
        best = 0
        for a in range(5):
            if table[x, a] > table[x, best]:
                best = a
        expected.append(best)
    assert induced_policy(table).tolist() == expected


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_induced_policy_invariant_to_per_context_shift(seed):
    rng = np.random.default_rng(seed)
    table = rng.random((5, 4)) * 0.5
    shifted = table + rng.random((5, 1)) * 0.5
    assert np.array_equal(induced_policy(table), induced_policy(shifted))


def test_predictor_is_deterministic_and_bounded(rng):
    f = TablePredictor(rng.random((3, 2)))
    assert f.eval(1, 1) == f.eval(1, 1)
    with pytest.raises(ValueError):
        TablePredictor([[1.5, 0.0]])


def test_policy_reward_mean_of_two():
    f = TablePredictor([[0.2, 0.0], [0.0, 0.8]])
    assert policy_reward([0, 1], f, [0.5, 0.5]) == pytest.approx(0.5, abs=1e-12)


def test_policy_reward_rejects_bad_distribution():
    f = TablePredictor([[0.2, 0.0], [0.0, 0.8]])
    with pytest.raises(ConfigError):
        policy_reward([0, 1], f, [0.5, 0.6])


def test_policy_reward_matches_monte_carlo(rng):
    table = rng.random((5, 3))
    d = rng.dirichlet(np.ones(5))
    d /= d.sum()
    pi = rng.integers(0, 3, 5)
    exact = policy_reward(pi, table, d)
    xs = rng.choice(5, size=1_000_000, p=d)
    samples = table[xs, pi[xs]]
    se = samples.std(ddof=1) / np.sqrt(samples.size)
    assert abs(samples.mean() - exact) <= 3 * se


def test_greedy_policy_is_optimal_over_all_policies(rng):
    table = rng.random((4, 3))
    d = rng.dirichlet(np.ones(4))
    d /= d.sum()
    best = policy_reward(induced_policy(table), table, d)
    for pi in itertools.product(range(3), repeat=4):
        assert policy_reward(pi, table, d) <= best
    # regret of the greedy policy is exactly zero
    assert best - policy_reward(induced_policy(table), table, d) == 0.0


def test_enumeration_order_and_cutoff():
    pol = enumerate_policies(2, 3)
    assert pol.tolist() == [list(p) for p in itertools.product(range(3), repeat=2)]
    assert enumerate_policies(20, 2).shape == (2**20, 20)
    with pytest.raises(ConfigError):
        enumerate_policies(11, 4)


def test_function_class_requires_four_members():
    with pytest.raises(ConfigError, match="class_size"):
        FiniteFunctionClass(np.zeros((3, 2, 2)))


def test_interaction_log_windows():
    log = InteractionLog()
    log.extend([0, 1], [1, 0], [1.0, 0.0])
    log.close_epoch()
    log.extend([1, 1], [1, 1], [0.5, 0.25])
    assert log.rounds.tolist() == [1, 2, 3, 4]
    assert log.window(2, 4)["rewards"].tolist() == [0.5, 0.25]
    assert log.epoch_ends == [2]
    with pytest.raises(ValueError):
        log.extend([0], [0], [1.2])
