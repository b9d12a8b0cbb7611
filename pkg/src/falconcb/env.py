"""Synthetic realizable environments with Bernoulli rewards.

Random streams
--------------
A run seed is split into independent streams with SplitMix64::

    stream_seed = splitmix64(seed XOR splitmix64(stream_id))

and each stream drives its own ``numpy.random.Generator(PCG64(stream_seed))``.
Stream ids: ``INSTANCE`` builds planted instances, ``NATURE`` draws contexts
and reward vectors, ``LEARNER`` draws the one uniform per round used for
action sampling.  Nature's draws never depend on the learner's actions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .core import ConfigError, FiniteFunctionClass, TablePredictor, check_distribution, induced_policy

_MASK = (1 << 64) - 1
INSTANCE, NATURE, LEARNER = 1, 2, 3


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def derive_seed(seed: int, stream: int) -> int:
    return splitmix64((int(seed) & _MASK) ^ splitmix64(stream))


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(seed, stream)))


@dataclass(frozen=True)
class RoundBlock:
    """Nature's draws for ``n`` consecutive rounds.

    ``contexts`` are indices for finite spaces (``features`` is ``None``) and
    ``-1`` for feature environments, whose contexts live in ``features``
    with shape ``(n, K, d)``.
    """

    contexts: np.ndarray
    rewards: np.ndarray
    means: np.ndarray
    best: np.ndarray
    features: np.ndarray | None = None


class FiniteRealizableEnv:
    """Finite context space, finite class, ``f*`` a class member."""

    kind = "finite"

    def __init__(self, context_distribution, fclass: FiniteFunctionClass, star: int):
        self.d_x = check_distribution(context_distribution)
        self.d_x.setflags(write=False)
        if self.d_x.shape[0] != fclass.n_contexts:
            raise ConfigError("context_distribution", "length must equal the number of contexts")
        if not 0 <= star < fclass.size:
            raise ConfigError("star", f"index {star} is outside the class of size {fclass.size}")
        self.fclass = fclass
        self.star = int(star)
        self._cdf = np.cumsum(self.d_x)

    @property
    def n_actions(self) -> int:
        return self.fclass.n_actions

    @property
    def n_contexts(self) -> int:
        return self.fclass.n_contexts

    @property
    def class_size(self) -> int:
        return self.fclass.size

    # accountant-only view: the learner never receives f* or its policy
    @property
    def f_star(self) -> TablePredictor:
        return self.fclass.member(self.star)

    @property
    def optimal_policy(self) -> np.ndarray:
        return induced_policy(self.f_star)

    def sample_block(self, rng: np.random.Generator, n: int) -> RoundBlock:
        K = self.n_actions
        u = rng.random((n, 1 + K))
        ctx = np.minimum(np.searchsorted(self._cdf, u[:, 0], side="right"), self.n_contexts - 1)
        means = self.f_star.table[ctx]
        rewards = (u[:, 1:] < means).astype(np.float64)
        return RoundBlock(ctx.astype(np.int64), rewards, means, self.optimal_policy[ctx])

    def descriptor(self) -> dict:
        return {
            "kind": "finite",
            "context_distribution": self.d_x.tolist(),
            "tables": self.fclass.tables.tolist(),
            "star": self.star,
        }


class LinearRealizableEnv:
    """Linear means ``theta* . x_a`` with per-action features.

    Each feature vector is ``(1/sqrt2, z)`` with ``z`` uniform in the
    ``(d-1)``-ball of radius ``1/sqrt2``, so ``||x_a|| <= 1``.  Requiring
    ``theta*_0 >= ||theta*_{1:}||`` keeps every mean in ``[0, 1]``.
    """

    kind = "linear"

    def __init__(self, theta, n_actions: int):
        theta = np.asarray(theta, dtype=np.float64).reshape(-1)
        if theta.shape[0] < 2:
            raise ConfigError("dimension", "linear environments need d >= 2")
        if n_actions < 2:
            raise ConfigError("n_actions", f"need K >= 2, got {n_actions}")
        if np.linalg.norm(theta) > 1.0 + 1e-12:
            raise ConfigError("theta", "need ||theta|| <= 1")
        if theta[0] < np.linalg.norm(theta[1:]) - 1e-12:
            raise ConfigError("theta", "need theta[0] >= ||theta[1:]|| so that means stay in [0, 1]")
        theta.setflags(write=False)
        self.theta = theta
        self.dim = theta.shape[0]
        self._K = int(n_actions)

    @property
    def n_actions(self) -> int:
        return self._K

    def _features(self, u: np.ndarray) -> np.ndarray:
        K, d = self._K, self.dim
        n = u.shape[0]
        # shift off 0 so the inverse normal CDF stays finite
        g = ndtri(u[:, : K * (d - 1)] + 2.0**-54).reshape(n, K, d - 1)
        g /= np.linalg.norm(g, axis=2, keepdims=True)
        radius = u[:, K * (d - 1) : K * d] ** (1.0 / (d - 1)) / math.sqrt(2.0)
        feats = np.empty((n, K, d))
        feats[:, :, 0] = 1.0 / math.sqrt(2.0)
        feats[:, :, 1:] = g * radius[:, :, None]
        return feats

    def sample_block(self, rng: np.random.Generator, n: int) -> RoundBlock:
        # one row of K*(d+1) uniforms per round keeps draws prefix-consistent across block sizes
        K, d = self._K, self.dim
        u = rng.random((n, K * (d + 1)))
        feats = self._features(u)
        means = np.clip(feats @ self.theta, 0.0, 1.0)
        rewards = (u[:, K * d :] < means).astype(np.float64)
        return RoundBlock(np.full(n, -1, dtype=np.int64), rewards, means, np.argmax(means, axis=1), feats)

    def descriptor(self) -> dict:
        return {"kind": "linear", "theta": self.theta.tolist(), "n_actions": self._K}


def sample_round(env, rng: np.random.Generator):
    """One round: ``(context, full reward vector, hidden mean vector)``."""
    b = env.sample_block(rng, 1)
    ctx = b.features[0] if b.features is not None else int(b.contexts[0])
    return ctx, b.rewards[0], b.means[0]


def make_linear_instance(d: int, n_actions: int, rng: np.random.Generator) -> LinearRealizableEnv:
    """Random ``theta* = (1/2, v)`` with ``||v|| = 1/2``."""
    if d < 2:
        raise ConfigError("dimension", "linear environments need d >= 2")
    v = rng.standard_normal(d - 1)
    v *= 0.5 / np.linalg.norm(v)
    return LinearRealizableEnv(np.concatenate([[0.5], v]), n_actions)


_LO, _HI = 0.05, 0.95
MIN_DISAGREEMENT = 0.25


def _planted_star(n_contexts, K, gap, rng):
    table = np.empty((n_contexts, K))
    for x in range(n_contexts):
        others = rng.uniform(_LO, _HI - gap, size=K)
        best = int(rng.integers(K))
        top = np.delete(others, best).max()
        others[best] = top + gap + (_HI - gap - top) * rng.random()
        table[x] = others
    return table


def _distractor(star_table, rng):
    n_x, K = star_table.shape
    n_cells = n_x * K
    need = math.ceil(MIN_DISAGREEMENT * n_cells)
    n_change = int(rng.integers(need, max(need, int(0.75 * n_cells)) + 1))
    cells = rng.choice(n_cells, size=n_change, replace=False)
    flat = star_table.reshape(-1).copy()
    for c in cells:
        shift = rng.uniform(0.2, 0.5)
        up_ok, down_ok = flat[c] + shift <= 1.0, flat[c] - shift >= 0.0
        sign = 1.0 if (up_ok and (not down_ok or rng.random() < 0.5)) else -1.0
        flat[c] = flat[c] + sign * shift
    return flat.reshape(n_x, K)


def disagreement(a: np.ndarray, b: np.ndarray) -> float:
    """Fraction of ``(x, a)`` cells on which two tables differ."""
    return float(np.mean(a != b))


def make_planted_instance(
    n_contexts: int,
    n_actions: int,
    class_size: int,
    gap: float,
    rng: np.random.Generator,
    context_distribution=None,
) -> FiniteRealizableEnv:
    """A finite realizable instance with a planted ``f*``.

    ``f*`` has a unique best action per context, ahead of its runner-up by at
    least ``gap``.  Every distractor differs from ``f*`` on at least a quarter
    of the cells.  ``f*`` is never member 0 and member 0's greedy policy is
    never optimal, so acting greedily on the epoch-1 predictor is suboptimal.
    """
    if not 0.0 < gap <= 0.5:
        raise ConfigError("gap", f"must lie in (0, 0.5], got {gap}")
    if class_size < 4:
        raise ConfigError("class_size", f"need |F| >= 4, got {class_size}")
    if n_actions < 2:
        raise ConfigError("n_actions", f"need K >= 2, got {n_actions}")
    if n_contexts < 1:
        raise ConfigError("n_contexts", f"need at least one context, got {n_contexts}")
    if context_distribution is None:
        context_distribution = np.full(n_contexts, 1.0 / n_contexts)

    star_table = _planted_star(n_contexts, n_actions, gap, rng)
    star = int(rng.integers(1, class_size))
    best = induced_policy(star_table)
    tables = np.empty((class_size, n_contexts, n_actions))
    for j in range(class_size):
        if j == star:
            tables[j] = star_table
            continue
        t = _distractor(star_table, rng)
        if j == 0 and np.array_equal(induced_policy(t), best):
            # force a wrong greedy action in one context
            x = int(rng.integers(n_contexts))
            a = (best[x] + 1 + int(rng.integers(n_actions - 1))) % n_actions
            t[x, [best[x], a]] = star_table[x, [a, best[x]]]
        tables[j] = t
    return FiniteRealizableEnv(context_distribution, FiniteFunctionClass(tables), star)
