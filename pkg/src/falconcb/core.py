"""Domain types shared across the package: predictors, function classes,
interaction logs and deterministic policies."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration or parameters; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TablePredictor:
    """A predictor over a finite context space, stored as an ``(|X|, K)`` table."""

    table: np.ndarray
    id: int = -1

    def __post_init__(self):
        t = _readonly(self.table)
        if t.ndim != 2:
            raise ValueError("predictor table must be 2-D (contexts x actions)")
        if t.size and (t.min() < 0.0 or t.max() > 1.0):
            raise ValueError("predictor table entries must lie in [0, 1]")
        object.__setattr__(self, "table", t)

    @property
    def n_actions(self) -> int:
        return self.table.shape[1]

    def eval(self, x: int, a: int) -> float:
        return float(self.table[x, a])

    def predict(self, contexts: np.ndarray) -> np.ndarray:
        """Predictions for a batch of context indices, shape ``(n, K)``."""
        return self.table[np.asarray(contexts, dtype=np.int64)]


@dataclass(frozen=True, eq=False)
class LinearPredictor:
    """``theta . phi(x, a)`` clamped to [0, 1].

    Contexts are per-action feature blocks of shape ``(K, d)``.  Evaluations
    that fall outside [0, 1] are clamped; ``count_clamps`` reports how many.
    """

    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", _readonly(self.theta).reshape(-1))

    @property
    def dim(self) -> int:
        return self.theta.shape[0]

    def raw(self, contexts: np.ndarray) -> np.ndarray:
        return np.asarray(contexts, dtype=np.float64) @ self.theta

    def predict(self, contexts: np.ndarray) -> np.ndarray:
        return np.clip(self.raw(contexts), 0.0, 1.0)

    def count_clamps(self, contexts: np.ndarray) -> int:
        r = self.raw(contexts)
        return int(np.count_nonzero((r < 0.0) | (r > 1.0)))

    def eval(self, x: np.ndarray, a: int) -> float:
        return float(self.predict(np.asarray(x)[None])[0, a])


@dataclass(frozen=True, eq=False)
class FiniteFunctionClass:
    """An ordered finite class of table predictors, stacked as ``(|F|, |X|, K)``."""

    tables: np.ndarray

    def __post_init__(self):
        t = _readonly(self.tables)
        if t.ndim != 3:
            raise ConfigError("class", "tables must have shape (|F|, |X|, K)")
        if t.shape[0] < 4:
            raise ConfigError("class_size", f"need |F| >= 4, got {t.shape[0]}")
        if t.shape[2] < 2:
            raise ConfigError("n_actions", f"need K >= 2, got {t.shape[2]}")
        if t.min() < 0.0 or t.max() > 1.0:
            raise ConfigError("class", "table entries must lie in [0, 1]")
        object.__setattr__(self, "tables", t)

    @property
    def size(self) -> int:
        return self.tables.shape[0]

    @property
    def n_contexts(self) -> int:
        return self.tables.shape[1]

    @property
    def n_actions(self) -> int:
        return self.tables.shape[2]

    def member(self, j: int) -> TablePredictor:
        return TablePredictor(self.tables[j], id=int(j))

    def __len__(self) -> int:
        return self.size


class InteractionLog:
    """Append-only history of ``(round, context, action, reward)`` records.

    Rounds are numbered from 1.  ``features`` holds ``phi(x_t, a_t)`` for
    feature environments and is ``None`` for finite context spaces.
    """

    def __init__(self, feature_dim: int | None = None):
        self._ctx: list[np.ndarray] = []
        self._act: list[np.ndarray] = []
        self._rew: list[np.ndarray] = []
        self._feat: list[np.ndarray] | None = [] if feature_dim else None
        self._n = 0
        self.epoch_ends: list[int] = []

    def __len__(self) -> int:
        return self._n

    def extend(self, contexts, actions, rewards, features=None) -> None:
        rewards = np.asarray(rewards, dtype=np.float64)
        if rewards.size and (rewards.min() < 0.0 or rewards.max() > 1.0):
            raise ValueError("rewards must lie in [0, 1]")
        self._ctx.append(np.asarray(contexts, dtype=np.int64))
        self._act.append(np.asarray(actions, dtype=np.int64))
        self._rew.append(rewards)
        if self._feat is not None:
            self._feat.append(np.asarray(features, dtype=np.float64))
        self._n += len(rewards)

    def close_epoch(self) -> None:
        self.epoch_ends.append(self._n)

    def _cat(self, parts, dtype, tail=()):
        if not parts:
            return np.empty((0, *tail), dtype=dtype)
        return np.concatenate(parts)

    @property
    def rounds(self) -> np.ndarray:
        return np.arange(1, self._n + 1)

    @property
    def contexts(self) -> np.ndarray:
        return self._cat(self._ctx, np.int64)

    @property
    def actions(self) -> np.ndarray:
        return self._cat(self._act, np.int64)

    @property
    def rewards(self) -> np.ndarray:
        return self._cat(self._rew, np.float64)

    @property
    def features(self) -> np.ndarray | None:
        if self._feat is None:
            return None
        return self._cat(self._feat, np.float64)

    def window(self, start: int, stop: int) -> dict:
        """Records for rounds ``start+1 .. stop`` as arrays."""
        out = {
            "contexts": self.contexts[start:stop],
            "actions": self.actions[start:stop],
            "rewards": self.rewards[start:stop],
        }
        if self._feat is not None:
            out["features"] = self.features[start:stop]
        return out


def argmax_lowest(values: np.ndarray, axis: int = -1) -> np.ndarray:
    # np.argmax returns the first maximiser, i.e. the lowest index on ties
    return np.argmax(values, axis=axis)


def induced_policy(f) -> np.ndarray:
    """Greedy policy of a table predictor (or a raw ``(|X|, K)`` table)."""
    table = f.table if hasattr(f, "table") else np.asarray(f, dtype=np.float64)
    return argmax_lowest(table, axis=1).astype(np.int64)


def check_distribution(d_x, name: str = "context_distribution") -> np.ndarray:
    d = np.asarray(d_x, dtype=np.float64)
    if d.ndim != 1 or d.size == 0:
        raise ConfigError(name, "must be a non-empty probability vector")
    if np.any(d < 0.0):
        raise ConfigError(name, "entries must be non-negative")
    if abs(math.fsum(d) - 1.0) > 1e-12:
        raise ConfigError(name, f"must sum to 1 within 1e-12 (sums to {math.fsum(d)!r})")
    return d


def policy_reward(policy, f_star, d_x) -> float:
    """Exact expected reward ``sum_x D(x) f*(x, pi(x))`` of a deterministic policy."""
    d = check_distribution(d_x)
    table = f_star.table if hasattr(f_star, "table") else np.asarray(f_star, dtype=np.float64)
    pi = np.asarray(policy, dtype=np.int64)
    if pi.shape != (table.shape[0],):
        raise ValueError("policy must assign one action per context")
    s = 0.0
    for x in range(table.shape[0]):
        s += d[x] * table[x, pi[x]]
    return s


def n_policies(n_contexts: int, n_actions: int) -> int:
    return n_actions**n_contexts


def enumerable(n_contexts: int, n_actions: int) -> bool:
    return n_contexts * math.log2(n_actions) <= 20.0


def enumerate_policies(n_contexts: int, n_actions: int) -> np.ndarray:
    """All ``K^|X|`` deterministic policies, rows in lexicographic order
    (context 0 most significant)."""
    if not enumerable(n_contexts, n_actions):
        raise ConfigError(
            "policy_space",
            f"|X| log2 K = {n_contexts * math.log2(n_actions):.2f} exceeds the enumeration cutoff of 20",
        )
    grids = np.indices((n_actions,) * n_contexts).reshape(n_contexts, -1).T
    return np.ascontiguousarray(grids, dtype=np.int64)
