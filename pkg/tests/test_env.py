import numpy as np
import pytest
from scipy import stats

from falconcb.core import ConfigError, FiniteFunctionClass, induced_policy
from falconcb.env import (
    LEARNER,
    NATURE,
    FiniteRealizableEnv,
    LinearRealizableEnv,
    disagreement,
    make_linear_instance,
    make_planted_instance,
    sample_round,
    splitmix64,
    stream_rng,
)
from falconcb.oracle import erm_least_squares


def test_splitmix_reference_value():
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def _const_env(value):
    t = np.full((4, 2, 3), 0.3)
    t[1] = value
    return FiniteRealizableEnv([0.5, 0.5], FiniteFunctionClass(t), 1)


@pytest.mark.parametrize("value", [0.0, 1.0])
def test_degenerate_means_give_degenerate_rewards(value, rng):
    env = _const_env(value)
    block = env.sample_block(rng, 1000)
    assert np.all(block.rewards == value)


def test_reward_mean_at_fixed_context(rng):
    t = np.full((4, 1, 3), 0.5)
    t[2] = [[0.2, 0.55, 0.9]]
    env = FiniteRealizableEnv([1.0], FiniteFunctionClass(t), 2)
    n = 10**5
    r = env.sample_block(rng, n).rewards
    mu = t[2, 0]
    assert np.all(np.abs(r.mean(axis=0) - mu) <= 4 * np.sqrt(mu * (1 - mu) / n))


def test_contexts_follow_distribution(rng):
    d = np.array([0.1, 0.6, 0.3])
    env = FiniteRealizableEnv(d, FiniteFunctionClass(np.full((4, 3, 2), 0.5)), 0)
    n = 10**5
    counts = np.bincount(env.sample_block(rng, n).contexts, minlength=3)
    assert stats.chisquare(counts, d * n).pvalue > 1e-4


def test_sample_round_shapes(rng, tiny_env):
    x, r, mu = sample_round(tiny_env, rng)
    assert x in (0, 1) and r.shape == (2,) and np.array_equal(mu, tiny_env.f_star.table[x])


def test_streams_are_independent():
    a = stream_rng(7, NATURE).random(20000)
    b = stream_rng(7, LEARNER).random(20000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.03
    assert stats.kstest(a, "uniform").pvalue > 1e-4
    assert not np.array_equal(stream_rng(7, NATURE).random(5), stream_rng(8, NATURE).random(5))


@pytest.mark.parametrize("seed", range(8))
def test_planted_postconditions(seed):
    rng = np.random.default_rng(seed)
    env = make_planted_instance(6, 2, 8, 0.3, rng)
    star = env.f_star.table
    top = np.sort(star, axis=1)
    assert np.all(top[:, -1] - top[:, -2] >= 0.3 - 1e-12)
    for j in range(env.class_size):
        if j != env.star:
            assert disagreement(env.fclass.tables[j], star) >= 0.25
    assert env.star != 0
    assert not np.array_equal(induced_policy(env.fclass.tables[0]), env.optimal_policy)
    assert env.fclass.tables.min() >= 0.0 and env.fclass.tables.max() <= 1.0


def test_planted_star_recovered_by_erm():
    rng = np.random.default_rng(11)
    env = make_planted_instance(20, 5, 50, 0.2, rng)
    n = 10**4
    block = env.sample_block(rng, n)
    acts = rng.integers(0, 5, n)
    ys = block.rewards[np.arange(n), acts]
    assert erm_least_squares(env.fclass, block.contexts, acts, ys).id == env.star


@pytest.mark.parametrize("gap", [0.0, 0.6])
def test_planted_rejects_infeasible_gap(gap, rng):
    with pytest.raises(ConfigError, match="gap"):
        make_planted_instance(3, 2, 5, gap, rng)


def test_linear_environment_features_and_means(rng):
    env = make_linear_instance(5, 4, rng)
    b = env.sample_block(rng, 2000)
    assert b.features.shape == (2000, 4, 5)
    assert np.all(np.linalg.norm(b.features, axis=2) <= 1 + 1e-12)
    assert np.all((b.means >= 0) & (b.means <= 1))
    assert np.all(b.contexts == -1)
    assert np.allclose(b.means, b.features @ env.theta)


def test_linear_draws_are_prefix_consistent():
    env = make_linear_instance(4, 3, np.random.default_rng(0))
    one = env.sample_block(np.random.default_rng(5), 50)
    rng = np.random.default_rng(5)
    two = [env.sample_block(rng, 20), env.sample_block(rng, 30)]
    assert np.array_equal(np.concatenate([b.features for b in two]), one.features)
    assert np.array_equal(np.concatenate([b.rewards for b in two]), one.rewards)


def test_linear_theta_validation():
    with pytest.raises(ConfigError, match="theta"):
        LinearRealizableEnv([0.1, 0.5, 0.0], 3)
    with pytest.raises(ConfigError):
        LinearRealizableEnv([1.0], 3)
