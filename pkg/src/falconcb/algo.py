"""FALCON / FALCON+ decision rules and the baselines sharing their machinery."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import ConfigError, InteractionLog
from .oracle import EstimationErrorCurve
from .schedule import EpochSchedule

ALGORITHMS = ("falcon", "falcon_plus", "epsilon_greedy", "uniform")


def falcon_learning_rate(K: int, tau_prev: int, class_size: int, delta: float) -> float:
    """``(1/30) sqrt(K tau_prev / ln(|F| tau_prev / delta))`` for epochs m >= 2."""
    if tau_prev < 1:
        raise ValueError("tau_prev must be >= 1")
    return math.sqrt(K * tau_prev / math.log(class_size * tau_prev / delta)) / 30.0


def falcon_plus_learning_rate(
    K: int,
    xi: EstimationErrorCurve,
    tau_prev: int,
    tau_prev2: int,
    delta: float,
    prev_gamma: float = 1.0,
) -> float:
    """``(1/2) sqrt(K / xi(tau_{m-1} - tau_{m-2}, delta / (2 tau_{m-1})))``,
    floored at the previous epoch's rate so the sequence never decreases."""
    if tau_prev <= tau_prev2:
        raise ValueError("need tau_{m-1} > tau_{m-2}")
    err = xi(tau_prev - tau_prev2, delta / (2.0 * tau_prev))
    if not err > 0:
        raise ConfigError("xi", f"estimation error curve returned {err!r}; it must be positive")
    return max(0.5 * math.sqrt(K / err), prev_gamma)


@dataclass(frozen=True)
class ActionDistribution:
    probs: np.ndarray
    greedy: int

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)


def action_distribution(predictions, gamma: float) -> ActionDistribution:
    """Inverse-gap-weighted distribution for one context's predicted rewards.

    Each non-greedy action gets ``1 / (K + gamma * gap)``; the greedy action
    (lowest index among maximisers) takes the remainder.
    """
    preds = np.asarray(predictions, dtype=np.float64).reshape(1, -1)
    probs, greedy = _kernels.igw_probs(preds, gamma)
    return ActionDistribution(probs[0], int(greedy[0]))


def sample_action(probs, u: float) -> int:
    """Inverse-CDF draw over action-index order from a single uniform ``u``."""
    p = np.asarray(probs, dtype=np.float64).reshape(1, -1)
    return int(_kernels.sample_cdf(p, np.array([u]))[0])


@dataclass
class EpochState:
    epoch: int
    gamma: float
    predictor: object
    n_fit: int = 0
    oracle_called: bool = False


@dataclass
class Learner:
    """Per-run learner state: algorithm choice, current epoch predictor and rate.

    ``gamma_history`` holds one entry per epoch entered.
    """

    algorithm: str
    n_actions: int
    delta: float = 0.05
    class_size: int | None = None
    xi: EstimationErrorCurve | None = None
    epsilon: float = 0.1
    state: EpochState | None = None
    gamma_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError("algorithm", f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta", f"must lie in (0, 1), got {self.delta}")
        if self.algorithm == "falcon" and (self.class_size is None or self.class_size < 4):
            raise ConfigError("algorithm", "falcon needs a finite function class with |F| >= 4")
        if self.algorithm == "falcon_plus" and self.xi is None:
            raise ConfigError("xi", "falcon_plus needs an estimation error curve")
        if self.algorithm == "epsilon_greedy" and not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon", f"must lie in [0, 1], got {self.epsilon}")

    @property
    def uses_full_history(self) -> bool:
        return self.algorithm != "falcon_plus"

    def _rate(self, m: int, schedule: EpochSchedule) -> float:
        if m == 1:
            return 1.0
        prev = self.gamma_history[-1]
        tau1, tau2 = schedule.tau(m - 1), schedule.tau(m - 2)
        if self.algorithm == "falcon":
            return max(falcon_learning_rate(self.n_actions, tau1, self.class_size, self.delta), prev)
        if self.algorithm == "falcon_plus":
            return falcon_plus_learning_rate(self.n_actions, self.xi, tau1, tau2, self.delta, prev)
        return 1.0

    def probabilities(self, preds: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Action distributions for a block of predictions, shape ``(n, K)``."""
        if self.algorithm in ("falcon", "falcon_plus"):
            return _kernels.igw_probs(preds, self.state.gamma)
        eps = 1.0 if self.algorithm == "uniform" else self.epsilon
        return _kernels.eps_greedy_probs(preds, eps)


def epoch_transition(learner: Learner, log: InteractionLog, oracle, schedule: EpochSchedule, m: int) -> EpochState:
    """Start epoch ``m``: refit the predictor and set the learning rate.

    FALCON and the baselines refit on rounds ``1 .. tau_{m-1}``; FALCON+ refits
    on epoch ``m-1`` alone.  Epoch 1 uses the oracle's empty-data predictor and
    does not count as an oracle call.
    """
    if m == 1:
        state = EpochState(1, 1.0, oracle.empty())
    else:
        stop = schedule.tau(m - 1)
        start = 0 if learner.uses_full_history else schedule.tau(m - 2)
        window = log.window(start, stop)
        predictor = oracle.fit(window)
        state = EpochState(m, learner._rate(m, schedule), predictor, n_fit=stop - start, oracle_called=True)
    learner.state = state
    learner.gamma_history.append(state.gamma)
    return state


def falcon_step(learner: Learner, x_preds, rng: np.random.Generator) -> tuple[int, ActionDistribution]:
    """One round: distribution over actions for the context's predictions, then a
    single-uniform inverse-CDF draw."""
    preds = np.asarray(x_preds, dtype=np.float64).reshape(1, -1)
    probs, greedy = learner.probabilities(preds)
    dist = ActionDistribution(probs[0], int(greedy[0]))
    return sample_action(dist.probs, rng.random()), dist


def epsilon_greedy_step(eps: float, x_preds, rng: np.random.Generator) -> int:
    preds = np.asarray(x_preds, dtype=np.float64).reshape(1, -1)
    probs, _ = _kernels.eps_greedy_probs(preds, eps)
    return sample_action(probs[0], rng.random())
